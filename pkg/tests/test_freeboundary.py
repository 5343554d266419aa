'''
Tests for the twoline.freeboundary module.
'''

# core libraries
import math

# third party libraries
import numpy as np

# testing imports
import pytest

# code under test
from twoline import freeboundary
from twoline.claims import ClaimDistribution
from twoline.exceptions import CaseClassificationError, DomainError, ModelInconsistencyError, ShootingError, \
    SolverError
from twoline.freeboundary import reserve_reaches, retention_reaches
from twoline.model import DividendMode

@pytest.fixture
def case_a_map(model_factory):
    '''
    The reference model and its G map up to M1.
    '''
    model = model_factory()
    return model, freeboundary.build_g_map(model)

def test_density_limit(model_factory):
    '''
    The integrand tends to its closed-form limit at zero.
    '''
    model = model_factory()
    limit = freeboundary.limit_density(model)
    assert limit == pytest.approx(1.25 / (4.0 * 1.25 + 0.25))
    assert freeboundary.g_density(model, 1e-6) == pytest.approx(limit, rel=1e-5)
    assert freeboundary.g_density(model, 0.0) == limit
    densities = freeboundary.g_density(model, np.array([0.0, 0.1, 0.5, 1.0]))
    assert densities.shape == (4,)
    assert np.all(densities > 0.0)

def test_density_inconsistent(model_factory, monkeypatch, caplog):
    '''
    A denominator that is not positive breaks the model's assumptions.
    '''
    model = model_factory()
    monkeypatch.setattr(freeboundary, "nbar", lambda _, z: (0.0 * np.asarray(z), 1.0 + 0.0 * np.asarray(z)))
    with pytest.raises(ModelInconsistencyError) as excinfo:
        freeboundary.g_density(model, np.linspace(0.01, 1.0, 50))
    assert excinfo.value.retention is not None
    assert "denominator is not positive" in caplog.text

def test_reinsurance_threshold(case_a_map): # pylint: disable=redefined-outer-name
    '''
    G(M1) is the reinsurance threshold w0 = 0.19 of the reference model.
    '''
    model, gmap = case_a_map
    w0 = freeboundary.g_integral(model, 1.0)
    assert w0 == pytest.approx(0.19, abs=0.01)
    assert gmap.x_upper == pytest.approx(w0, rel=1e-9)
    assert gmap.y_upper == 1.0

@pytest.mark.parametrize("y", [1e-12, 1e-6, 0.01, 0.3, 0.8, 1.0])
def test_map_matches_quadrature(case_a_map, y): # pylint: disable=redefined-outer-name
    '''
    The ODE map and adaptive quadrature agree on G, and the map inverts G.
    '''
    model, gmap = case_a_map
    x = freeboundary.g_integral(model, y)
    assert gmap.reserve(y) == pytest.approx(x, rel=1e-9, abs=1e-13)
    assert gmap.retention(gmap.reserve(y)) == pytest.approx(y, rel=1e-8)
    if y >= 0.01:
        assert freeboundary.g_inverse(model, x) == pytest.approx(y, rel=1e-10)

def test_map_retention_clipped(case_a_map): # pylint: disable=redefined-outer-name
    '''
    Reserves beyond the map give M1; the retention increases.
    '''
    _, gmap = case_a_map
    xs, ys = gmap.grid(65)
    assert np.all(np.diff(ys) > 0.0)
    assert gmap.retention(xs[-1] + 1.0) == 1.0
    assert gmap.power == pytest.approx(4.0 * freeboundary.limit_density(case_a_map[0]))
    assert len(gmap.to_rows(9)) == 9

def test_g_inverse_domain(case_a_map): # pylint: disable=redefined-outer-name
    '''
    G^-1 is defined on [0, G(M1)].
    '''
    model, gmap = case_a_map
    assert freeboundary.g_inverse(model, 0.0) == 0.0
    with pytest.raises(DomainError):
        freeboundary.g_inverse(model, gmap.x_upper + 0.1)
    with pytest.raises(DomainError):
        freeboundary.g_integral(model, 1.5)

def test_unbounded_map(model_factory):
    '''
    With exponential claims G has a finite limit: the lump dividend level
    1.25 of the exponential reference problem.
    '''
    model = model_factory(mode=DividendMode.UNBOUNDED, dist1=ClaimDistribution.exponential(1.0),
                          dist2=ClaimDistribution.exponential(1.5))
    gmap = freeboundary.build_g_map(model, math.inf)
    total = freeboundary.g_integral(model, math.inf)
    assert gmap.x_upper + gmap.tail == pytest.approx(total, rel=1e-7)
    assert total == pytest.approx(1.25, abs=0.01)

def test_h_matches_g_without_line2_dividends(model_factory):
    '''
    With cbar2 = 0 the H equation is the G equation read the other way, so
    its trajectory is G^-1.
    '''
    model = model_factory(cbar2=0.0)
    gmap = freeboundary.build_g_map(model)
    x0 = 0.3 * gmap.x_upper
    hmap = freeboundary.h_integrate(model, x0, gmap.retention(x0), reserve_reaches(0.9 * gmap.x_upper))
    xs = np.linspace(x0, 0.9 * gmap.x_upper, 41)
    assert np.max(np.abs(hmap.retention(xs) - gmap.retention(xs))) <= 1e-8

def test_h_retention_stop(model_factory):
    '''
    A retention stop ends the map exactly at its target; a start already
    past the target gives an empty map.
    '''
    model = model_factory(cbar1=1.0, cbar2=0.5)
    hmap = freeboundary.h_integrate(model, 0.05, 0.3, retention_reaches(0.5))
    assert hmap.x_upper > 0.05
    assert hmap.retention(hmap.x_upper) == pytest.approx(0.5, rel=1e-9)
    assert hmap.decay(0.05) == 0.0
    assert hmap.area(hmap.x_upper) > 0.0

    empty = freeboundary.h_integrate(model, 0.05, 0.6, retention_reaches(0.5))
    assert empty.x_upper == empty.x_lower == 0.05
    assert empty.retention(0.05) == 0.6

@pytest.mark.parametrize("mode,y0",
                         [
                             (DividendMode.UNBOUNDED, 0.5),
                             (DividendMode.BOUNDED, 0.0),
                             (DividendMode.BOUNDED, 1.5),
                         ]
                        )
def test_h_integrate_domain(model_factory, mode, y0):
    '''
    H needs caps and a starting retention in (0, M1].
    '''
    model = model_factory(mode=mode)
    with pytest.raises(DomainError):
        freeboundary.h_integrate(model, 0.1, y0, retention_reaches(0.9))

def test_m0(model_factory):
    '''
    M0 = 0.71 for caps (1, 0.5); it does not exist for caps (3, 2).
    '''
    model = model_factory(cbar1=1.0, cbar2=0.5)
    m0 = freeboundary.solve_m0(model)
    assert m0 == pytest.approx(0.71, abs=0.01)
    assert freeboundary.m0_residual(model, m0) == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(CaseClassificationError):
        freeboundary.solve_m0(model_factory())

def test_shoot_case_c(model_factory):
    '''
    The band of the reference problem with caps (1, 0.5) runs from about
    0.09 to 0.19.
    '''
    model = model_factory(cbar1=1.0, cbar2=0.5)
    u1, u2, hmap = freeboundary.shoot_case_c(model, freeboundary.solve_m0(model))
    assert u1 == pytest.approx(0.09, abs=0.01)
    assert u2 == pytest.approx(0.19, abs=0.01)
    assert hmap.decay(u2) == pytest.approx(math.log(0.7 / 0.3), rel=1e-6)

def test_shoot_case_c_equal_weights(model_factory):
    '''
    With a = 1/2 both lines start paying at the same level.
    '''
    model = model_factory(cbar1=1.0, cbar2=0.5, a=0.5)
    u1, u2, _ = freeboundary.shoot_case_c(model, freeboundary.solve_m0(model))
    assert abs(u1 - u2) <= 1e-8

def test_shoot_case_c_zero_weight(model_factory):
    '''
    With a = 0 Line 1 never pays dividends.
    '''
    model = model_factory(cbar1=1.0, cbar2=0.5, a=0.0)
    with pytest.raises(CaseClassificationError):
        freeboundary.shoot_case_c(model, 0.7)

@pytest.mark.parametrize("y", [0.01, 0.3, 0.8])
def test_g_inverse_interior(case_a_map, y): # pylint: disable=redefined-outer-name
    '''
    G^-1 undoes G between the ends of the map.
    '''
    model, _ = case_a_map
    x = freeboundary.g_integral(model, y)
    assert freeboundary.g_inverse(model, x) == pytest.approx(y, abs=1e-10)

def test_monotone_check_ignores_noise():
    '''
    Rises between samples closer than the root tolerance, or within the
    integration noise, do not fail the shooting map; real rises do.
    '''
    values = {0.1742194082881176: 1.9e-10, 0.1742194082881176 + 1.5e-11: 2.1e-9, 0.1: 0.5,
              0.12: 0.5 + 1e-7}
    residual = freeboundary._ShootingResidual("decay", values.get, 1e3) # pylint: disable=protected-access
    for u in values:
        residual(u)
    residual.check_monotone(None)

    values[0.15] = 0.9
    residual(0.15)
    with pytest.raises(ShootingError):
        residual.check_monotone(None)

def test_numerical_failure(model_factory, monkeypatch, caplog):
    '''
    A scipy failure inside the solver surfaces as a SolverError.
    '''
    def broken(*args, **kwargs):
        raise ValueError("rtol too small")
    monkeypatch.setattr(freeboundary.optimize, "brentq", broken)
    model = model_factory()
    with pytest.raises(SolverError) as err:
        freeboundary.g_inverse(model, 0.1)
    assert isinstance(err.value.__cause__, ValueError)
    assert "g_inverse failed numerically: rtol too small" in caplog.text
