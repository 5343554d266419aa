'''
Tests for the twoline.verify module.
'''

# third party libraries
import numpy as np

# testing imports
import pytest

# code under test
from twoline import verify
from twoline.exceptions import DomainError
from twoline.model import CheckResult, SimConfig, VerificationReport
from twoline.solver import assemble

@pytest.mark.parametrize("name", ["case_a", "case_b", "case_c", "uncapped_uniform", "uncapped_exp"])
def test_reference_policies_verify(policies, name):
    '''
    Every packaged problem passes the HJB, smooth fit, derivative and shape
    checks.
    '''
    policy = policies[name]
    report = verify.run_all(policy, verify.default_grid(policy, 201))
    assert report.passed, report.summary()
    for check in ("hjb-supremum", "hjb-closed-form", "smooth-fit-g1", "fd-first-derivative", "concavity"):
        assert check in report

def test_default_grid(case_a_policy):
    '''
    Positive, increasing and reaching three past the top threshold.
    '''
    grid = verify.default_grid(case_a_policy, 101)
    assert grid[0] > 0.0
    assert np.all(np.diff(grid) > 0.0)
    assert grid[-1] == pytest.approx(case_a_policy.top + 3.0)

def test_wrong_u1_fails(case_c_policy):
    '''
    Moving u1 off its shooting root breaks smooth fit at u2.
    '''
    primary = dict(case_c_policy.primary)
    primary["u1"] *= 1.05
    broken = assemble(case_c_policy.model, case_c_policy.case_tag, primary)
    report = verify.smooth_fit(broken)
    assert not report.passed
    assert not report["smooth-fit-g1"].passed
    assert verify.smooth_fit(case_c_policy).passed

def test_unbounded_gradient_check(uncapped_uniform_policy):
    '''
    Uncapped policies also check g' >= 1 - a.
    '''
    report = verify.hjb_residual(uncapped_uniform_policy, verify.default_grid(uncapped_uniform_policy, 65))
    assert "hjb-gradient" in report
    assert report["hjb-gradient"].passed

def test_dominance(case_a_policy):
    '''
    Pure excess-of-loss matches the mixed treaty's variance and keeps more
    drift.
    '''
    config = SimConfig(dt=0.05, horizon=16.0, paths=16, batch_size=16)
    report = verify.dominance_check(case_a_policy, [(0.5, 0.6), (0.8, 0.3)], config)
    assert report["dominance-variance-match"].passed
    assert report["dominance-drift-gain"].passed
    assert report["dominance-simulation"].grid_size == 2

def test_relax():
    '''
    Scaling the tolerance can turn a failure into a pass and back.
    '''
    report = VerificationReport([CheckResult("check", 10, 5e-6, 0.3, 1e-6, False, "residual too large"),
                                 CheckResult("other", 10, 1e-9, 0.1, 1e-6, True)])
    relaxed = verify.relax(report, 10.0)
    assert relaxed.passed
    assert relaxed["check"].tolerance == pytest.approx(1e-5)
    assert relaxed["check"].detail == ""

    tightened = verify.relax(report, 1e-4)
    assert not tightened.passed
    assert len(tightened.failures()) == 2
    assert "exceeds" in tightened["other"].detail

@pytest.mark.parametrize("factor", [0.0, -1.0])
def test_relax_bad_factor(factor):
    '''
    The tolerance factor is positive.
    '''
    with pytest.raises(DomainError):
        verify.relax(VerificationReport(), factor)
