'''
Tests for the twoline.coeffs module.
'''

# testing imports
import pytest

# code under test
from twoline import coeffs
from twoline.claims import ClaimDistribution
from twoline.exceptions import CaseClassificationError, DomainError, SingularInputError
from twoline.model import DividendMode

@pytest.fixture
def case_a_model(model_factory):
    '''
    The reference model with caps (3, 2).
    '''
    return model_factory()

def test_nbar_reference(case_a_model): # pylint: disable=redefined-outer-name
    '''
    N1(M1) = 2.83333 and N2(M1) = 0.527778 for the reference model.
    '''
    drift, variance = coeffs.nbar(case_a_model, 1.0)
    assert drift == pytest.approx(2.0 + 2.0 * (0.5 - 0.25 / 3.0), rel=1e-14)
    assert drift == pytest.approx(2.83333, abs=1e-5)
    assert variance == pytest.approx(0.527778, abs=1e-6)

def test_nbar_outside(case_a_model, caplog): # pylint: disable=redefined-outer-name
    '''
    Line 1's retention lives in [0, M1].
    '''
    with pytest.raises(DomainError):
        coeffs.nbar(case_a_model, 1.2)
    assert "outside [0, 1.0]" in caplog.text

def test_dividend_bound(case_a_model, model_factory): # pylint: disable=redefined-outer-name
    '''
    1.90278 for the reference model; infinite with exponential claims.
    '''
    assert coeffs.dividend_bound(case_a_model) == pytest.approx(1.90278, abs=1e-5)
    exponential = model_factory(dist1=ClaimDistribution.exponential(1.0),
                                dist2=ClaimDistribution.exponential(1.5))
    assert coeffs.dividend_bound(exponential) == float("inf")

@pytest.mark.parametrize("variance,drift,delta",
                         [
                             (0.5, 2.8, 0.5),
                             (0.5, -2.2, 0.5),
                             (1e-6, 1e3, 0.5),
                             (1e-6, -1e3, 0.5),
                             (2.0, 0.0, 0.1),
                         ]
                        )
def test_quadratic_roots_vieta(variance, drift, delta):
    '''
    Sum and product of the roots, to 1e-12 relative.
    '''
    plus, minus = coeffs.quadratic_roots(variance, drift, delta)
    assert plus > 0.0 > minus
    assert plus + minus == pytest.approx(-2.0 * drift / variance, rel=1e-12, abs=1e-12)
    assert plus * minus == pytest.approx(-2.0 * delta / variance, rel=1e-12)

@pytest.mark.parametrize("family", [2, 3, 4])
def test_gamma_roots_vieta(case_a_model, family): # pylint: disable=redefined-outer-name
    '''
    Every family's roots solve its quadratic.
    '''
    drift, variance = coeffs.nbar(case_a_model, 1.0)
    first_order = coeffs.family_drift(case_a_model, family, drift)
    plus, minus = coeffs.gamma_roots(case_a_model, family, 1.0)
    residual = 0.5 * variance * minus * minus + first_order * minus - case_a_model.delta
    assert residual == pytest.approx(0.0, abs=1e-12)
    if family == 4:
        assert plus is None
    else:
        assert plus * minus == pytest.approx(-2.0 * case_a_model.delta / variance, rel=1e-12)
        assert plus + minus == pytest.approx(-2.0 * first_order / variance, rel=1e-12)

def test_gamma_ordering(case_a_model): # pylint: disable=redefined-outer-name
    '''
    gamma3- < gamma4- < 0 < gamma2+ < gamma3+.
    '''
    gammas = coeffs.gamma_set(case_a_model)
    assert gammas.gamma3minus < gammas.gamma4minus < 0.0
    assert 0.0 < gammas.gamma2plus < gammas.gamma3plus
    assert gammas.gamma2minus < 0.0
    assert gammas.retention == 1.0

def test_gamma_set_unbounded(model_factory):
    '''
    Without caps only family 2 exists.
    '''
    gammas = coeffs.gamma_set(model_factory(mode=DividendMode.UNBOUNDED))
    assert gammas.gamma3plus is None
    assert gammas.gamma4minus is None

def test_gamma_singular(case_a_model, caplog): # pylint: disable=redefined-outer-name
    '''
    N2(0) = 0 makes the quadratic degenerate.
    '''
    with pytest.raises(SingularInputError):
        coeffs.gamma_roots(case_a_model, 2, 0.0)
    assert "N2 vanishes" in caplog.text

@pytest.mark.parametrize("family", [3, 4, 5])
def test_family_drift_needs_caps(model_factory, family):
    '''
    Families 3 and 4 subtract the caps; there is no family 5.
    '''
    model = model_factory(mode=DividendMode.UNBOUNDED)
    with pytest.raises(DomainError):
        coeffs.family_drift(model, family, 1.0)

@pytest.mark.parametrize("cbar2,hint", [(2.0, "A"), (1.0, "B")])
def test_psi_at_upper_bound(model_factory, cbar2, hint):
    '''
    psi(alpha_UB) = 1 - 2a exactly, since zeta vanishes there.
    '''
    model = model_factory(cbar2=cbar2)
    gammas = coeffs.gamma_set(model)
    ladder = coeffs.alpha_ladder(model, gammas, hint)
    psi, zeta = coeffs.psi_zeta(gammas, model.a, ladder.alpha_ub)
    assert psi == pytest.approx(1.0 - 2.0 * model.a, abs=1e-12)
    assert zeta == pytest.approx(0.0, abs=1e-12)

def test_ladder_classifies(model_factory):
    '''
    psi(alpha_LB) is negative for caps (3, 2) and positive for (3, 1).
    '''
    for cbar2, negative in ((2.0, True), (1.0, False)):
        model = model_factory(cbar2=cbar2)
        gammas = coeffs.gamma_set(model)
        ladder = coeffs.alpha_ladder(model, gammas, "A")
        assert ladder.alpha_lb < ladder.alpha_ub < 0.0
        assert (coeffs.psi_at(gammas, model.a, ladder.alpha_lb) <= 0.0) is negative

def test_psi_floor(case_a_model): # pylint: disable=redefined-outer-name
    '''
    At and below (1 - a) / gamma3- psi is continued by -a.
    '''
    gammas = coeffs.gamma_set(case_a_model)
    floor = (1.0 - case_a_model.a) / gammas.gamma3minus
    assert coeffs.psi_at(gammas, case_a_model.a, floor) == -case_a_model.a
    with pytest.raises(DomainError):
        coeffs.psi_zeta(gammas, case_a_model.a, floor)
    with pytest.raises(DomainError):
        coeffs.psi_zeta(gammas, case_a_model.a, 0.1)

def test_solve_k3minus(case_a_model): # pylint: disable=redefined-outer-name
    '''
    K3- is a negative root of psi inside the alpha bounds, and K3+ follows
    from g'(u1) = 1 - a.
    '''
    gammas = coeffs.gamma_set(case_a_model)
    ladder = coeffs.alpha_ladder(case_a_model, gammas, "A")
    k3minus, k3plus = coeffs.solve_k3minus(gammas, case_a_model.a, (ladder.alpha_lb, ladder.alpha_ub))
    assert ladder.alpha_lb <= k3minus <= ladder.alpha_ub
    assert coeffs.psi_at(gammas, case_a_model.a, k3minus) == pytest.approx(0.0, abs=1e-10)
    assert k3plus * gammas.gamma3plus + k3minus * gammas.gamma3minus == pytest.approx(1.0 - case_a_model.a)

def test_solve_k3minus_no_sign_change(case_a_model, caplog): # pylint: disable=redefined-outer-name
    '''
    A bracket on which psi keeps its sign is a classification error.
    '''
    gammas = coeffs.gamma_set(case_a_model)
    ladder = coeffs.alpha_ladder(case_a_model, gammas, "A")
    lower = ladder.alpha_lb
    assert coeffs.psi_at(gammas, case_a_model.a, lower) < 0.0
    with pytest.raises(CaseClassificationError):
        coeffs.solve_k3minus(gammas, case_a_model.a, (lower, lower))
    assert "psi does not change sign" in caplog.text

def test_alpha_ladder_bad_hint(case_a_model): # pylint: disable=redefined-outer-name
    '''
    Only the A and B ladders exist.
    '''
    with pytest.raises(DomainError):
        coeffs.alpha_ladder(case_a_model, coeffs.gamma_set(case_a_model), "C")
