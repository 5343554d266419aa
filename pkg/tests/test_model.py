'''
Tests for the twoline.model module.
'''

# core libraries
import json

# testing imports
import pytest

# code under test
from twoline.claims import ClaimDistribution
from twoline.exceptions import DomainError, ValidationError
from twoline.model import AggregateModel, CaseTag, CheckResult, DividendMode, LineSpec, PolicyComparison, \
    ProblemSpec, RuinRule, SimConfig, VerificationReport

@pytest.mark.parametrize("kappa,cbar",
                         [
                             (0.0, 1.0),
                             (-1.0, 1.0),
                             (float("inf"), 1.0),
                             (1.0, -0.5),
                         ]
                        )
def test_line_spec_rejects(kappa, cbar):
    '''
    Safety loadings are positive and dividend caps non-negative.
    '''
    with pytest.raises(DomainError):
        LineSpec(kappa, ClaimDistribution.uniform(1.0), cbar)

@pytest.mark.parametrize("a", [-0.1, 1.1])
def test_problem_spec_weight(problem_factory, caplog, a):
    '''
    The dividend weight lies in [0, 1].
    '''
    with pytest.raises(DomainError):
        problem_factory(a=a)
    assert "Rejected weight" in caplog.text

def test_problem_spec_needs_cbar():
    '''
    Capped dividends need a cap on both lines.
    '''
    line = LineSpec(1.0, ClaimDistribution.uniform(1.0))
    with pytest.raises(ValidationError):
        ProblemSpec(line, line, 0.5, 0.3, DividendMode.BOUNDED)

def test_problem_spec_json(problem_factory):
    '''
    Problems survive a trip through JSON.
    '''
    problem = problem_factory()
    copy = ProblemSpec.from_json(json.dumps(problem.to_dict()))
    assert copy.to_dict() == problem.to_dict()

def test_aggregate_model_properties(model_factory):
    '''
    The coupling ratio, claim bounds and weights.
    '''
    model = model_factory()
    assert model.ratio == 0.5
    assert (model.m1, model.m2) == (1.0, 1.5)
    assert model.weights == (0.3, 0.7)
    changed = model.with_changes(a=0.5)
    assert changed.a == 0.5
    assert model.a == 0.3
    assert AggregateModel.from_dict(model.to_dict()).to_dict() == model.to_dict()

def test_aggregate_model_unbounded_drops_cbar(model_factory):
    '''
    Dividend caps are meaningless when dividends are unrestricted.
    '''
    model = model_factory(mode=DividendMode.UNBOUNDED)
    assert model.cbar1 is None
    assert model.cbar2 is None

def test_case_tags():
    '''
    Three capped regimes and two uncapped ones.
    '''
    assert [tag.bounded for tag in CaseTag] == [True, True, True, False, False]
    assert CaseTag("BoundedA") is CaseTag.BOUNDED_A

@pytest.mark.parametrize("settings",
                         [
                             {"dt": 0.0},
                             {"horizon": -1.0},
                             {"paths": 0},
                             {"batch_size": 0},
                             {"workers": 0},
                             {"volatility_scale": -1.0},
                             {"antithetic": True, "batch_size": 3},
                         ]
                        )
def test_sim_config_rejects(settings):
    '''
    Invalid run parameters are a validation error.
    '''
    with pytest.raises(ValidationError):
        SimConfig(**settings)

def test_sim_config_steps_and_replace():
    '''
    The step count rounds up and replace keeps everything else.
    '''
    config = SimConfig(dt=0.3, horizon=1.0, paths=10)
    assert config.steps == 4
    assert config.ruin_rule is RuinRule.REGIONS
    other = config.replace(paths=20, ruin_rule="aggregate")
    assert other.paths == 20
    assert other.ruin_rule is RuinRule.AGGREGATE
    assert other.dt == 0.3
    assert SimConfig(dt=0.1, horizon=1.0).steps == 10

def test_policy_comparison_dominated():
    '''
    The optimum may lose by up to 2.5 paired standard errors.
    '''
    assert PolicyComparison("p", 1.0, 1.1, -0.1, 0.05).dominated()
    assert not PolicyComparison("p", 1.0, 1.2, -0.2, 0.05).dominated()
    assert PolicyComparison("p", 1.2, 1.0, 0.2, 0.0).dominated()

def test_verification_report():
    '''
    Results are kept by name, sorted, and merge replaces by name.
    '''
    good = CheckResult("b-check", 10, 1e-9, 0.5, 1e-6, True)
    bad = CheckResult("a-check", 10, 1e-3, 0.2, 1e-6, False, "too big")
    report = VerificationReport([good, bad])
    assert [result.name for result in report.results] == ["a-check", "b-check"]
    assert not report.passed
    assert report.failures() == [bad]
    assert "a-check" in report
    assert report.to_rows()[0][-1] == "FAIL"
    assert "1 of 2 checks passed" in report.summary()

    fixed = report.merge(VerificationReport([CheckResult("a-check", 10, 1e-9, 0.2, 1e-6, True)]))
    assert fixed.passed
    assert len(fixed) == 2
