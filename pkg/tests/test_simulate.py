'''
Tests for the twoline.simulate module.
'''

# third party libraries
import numpy as np

# testing imports
import pytest

# code under test
from twoline import simulate
from twoline.claims import full_moments
from twoline.exceptions import DomainError
from twoline.model import RuinRule, SimConfig, Trigger
from twoline.strategy import Strategy

@pytest.fixture
def quick_config():
    '''
    A coarse configuration that runs in a second or two.
    '''
    return SimConfig(dt=0.01, horizon=16.0, paths=64, batch_size=16, seed=5)

def test_seed_reproducible(case_a_policy, quick_config): # pylint: disable=redefined-outer-name
    '''
    The same seed gives the same paths.
    '''
    first = simulate.simulate_value(case_a_policy, 0.5, 0.5, quick_config)
    second = simulate.simulate_value(case_a_policy, 0.5, 0.5, quick_config)
    assert np.array_equal(first.values, second.values)
    assert first.mean == second.mean
    assert first.paths == 64

def test_workers_do_not_matter(case_a_policy, quick_config): # pylint: disable=redefined-outer-name
    '''
    Batches own their streams, so threads change nothing.
    '''
    single = simulate.simulate_value(case_a_policy, 0.5, 0.5, quick_config)
    threaded = simulate.simulate_value(case_a_policy, 0.5, 0.5, quick_config.replace(workers=3))
    assert np.array_equal(single.values, threaded.values)

def test_seed_changes_paths(case_a_policy, quick_config): # pylint: disable=redefined-outer-name
    '''
    Another seed gives other paths.
    '''
    first = simulate.simulate_value(case_a_policy, 0.5, 0.5, quick_config)
    other = simulate.simulate_value(case_a_policy, 0.5, 0.5, quick_config.replace(seed=6))
    assert not np.array_equal(first.values, other.values)

def test_estimate_near_value(case_a_policy):
    '''
    Ending paths at the sum ruin time, the simulated optimal strategy earns
    g(x1 + x2) up to 2.5 standard errors, the truncation bound and a sqrt(dt)
    allowance for the Euler bias.
    '''
    config = SimConfig(dt=2e-3, horizon=16.0, paths=2048, batch_size=1024, seed=11,
                       ruin_rule=RuinRule.AGGREGATE)
    estimate = simulate.simulate_value(case_a_policy, 0.5, 0.5, config)
    g, _, _ = case_a_policy.value(1.0)
    allowance = 2.5 * estimate.stderr + estimate.truncation_bound + np.sqrt(config.dt)
    assert abs(estimate.mean - g) <= allowance
    assert estimate.truncation_bound == pytest.approx(4.6 * np.exp(-0.5 * 16.0))
    assert 0.0 <= estimate.paths_ruined <= 1.0

def test_regions_rule_ends_early(case_a_policy, quick_config): # pylint: disable=redefined-outer-name
    '''
    The region table ends paths that the sum ruin rule keeps alive, so every
    path earns at most what it earns under the sum ruin rule and the
    estimate falls below g.
    '''
    regions = simulate.simulate_value(case_a_policy, 0.5, 0.5, quick_config)
    aggregate = simulate.simulate_value(case_a_policy, 0.5, 0.5, quick_config.replace(ruin_rule="aggregate"))
    assert quick_config.ruin_rule is RuinRule.REGIONS
    assert np.all(regions.values <= aggregate.values + 1e-12)
    assert regions.paths_ruined > aggregate.paths_ruined
    g, _, _ = case_a_policy.value(1.0)
    assert regions.mean + 2.5 * regions.stderr + regions.truncation_bound < g

class _RunOff(simulate.StrategyWrapper):
    '''
    Full reinsurance, both caps paid at all times and no injections.
    '''

    def collaborates(self):
        return False

    def moments(self, xs):
        return tuple(np.zeros(np.shape(xs)) for _ in range(4))

    def rates(self, xs):
        model = self.model
        return np.full(np.shape(xs), model.cbar1), np.full(np.shape(xs), model.cbar2)

def test_deterministic_annuity(case_a_policy):
    '''
    Without noise or premium the lines run off at their caps: the value is
    the capped annuity up to the first line's ruin time.
    '''
    config = SimConfig(dt=0.01, horizon=16.0, paths=4, batch_size=4, volatility_scale=0.0)
    estimate = simulate.simulate_value(_RunOff(Strategy(case_a_policy), "run-off"), 1.5, 1.5, config)
    ruin_time = min(1.5 / 3.0, 1.5 / 2.0)
    annuity = (0.3 * 3.0 + 0.7 * 2.0) * (1.0 - np.exp(-0.5 * ruin_time)) / 0.5
    assert estimate.mean == pytest.approx(annuity, rel=1e-5)
    assert estimate.paths_ruined == 1.0
    assert estimate.stderr == 0.0

@pytest.mark.parametrize("name", ["case_b", "case_c"])
def test_banded_cases_simulate(policies, quick_config, name): # pylint: disable=redefined-outer-name
    '''
    Policies with an H band simulate and compare like the others.
    '''
    policy = policies[name]
    start = 0.5 * policy.u2
    estimate = simulate.simulate_value(policy, start, start, quick_config.replace(ruin_rule="aggregate"))
    assert estimate.paths == 64
    assert np.all(estimate.values >= 0.0)
    model = policy.model
    assert 0.0 < estimate.mean < (model.a * model.cbar1 + (1.0 - model.a) * model.cbar2) / model.delta
    results = simulate.compare_policies(policy, simulate.standard_perturbations(policy), start, start,
                                        quick_config)
    assert len(results) == 5
    assert all(np.isfinite(result.difference) for result in results)

def test_deterministic_bound(case_a_policy):
    '''
    Without noise the dividends cannot beat the capped perpetuity.
    '''
    config = SimConfig(dt=0.01, horizon=16.0, paths=4, batch_size=4, volatility_scale=0.0)
    estimate = simulate.simulate_value(case_a_policy, 2.0, 2.0, config)
    assert np.allclose(estimate.values, estimate.values[0])
    assert 0.0 < estimate.mean <= 4.6
    assert estimate.stderr == 0.0

def test_unbounded_lump_at_start(uncapped_exp_policy):
    '''
    Starting above u1 pays the excess at once: at least (1 - a) 0.85.
    '''
    config = SimConfig(dt=0.01, horizon=2.0, paths=8, batch_size=8)
    estimate = simulate.simulate_value(uncapped_exp_policy, 2.0, 0.1, config.replace(log_paths=2))
    assert np.all(estimate.values >= 0.7 * (2.1 - uncapped_exp_policy.u1) - 1e-12)
    rows = simulate.event_rows(estimate)
    assert rows[0][0] == 0
    assert rows[0][-1].startswith("lump=")
    assert {row[0] for row in rows} == {0, 1}
    assert rows[-1][-1] in ("horizon", "ruin")

def test_short_horizon_warns(case_a_policy, caplog):
    '''
    Horizons under 8 / delta leave a visible truncation error.
    '''
    simulate.simulate_value(case_a_policy, 0.5, 0.5, SimConfig(dt=0.05, horizon=1.0, paths=2, batch_size=2))
    assert "shorter than" in caplog.text

@pytest.mark.parametrize("x1,x2", [(-0.1, 0.5), (0.5, float("nan"))])
def test_negative_start(case_a_policy, quick_config, x1, x2): # pylint: disable=redefined-outer-name
    '''
    Starting reserves are non-negative.
    '''
    with pytest.raises(DomainError):
        simulate.simulate_value(case_a_policy, x1, x2, quick_config)

def test_antithetic_odd_paths(case_a_policy):
    '''
    An odd path count is rounded up to keep the mirrored pairs.
    '''
    config = SimConfig(dt=0.05, horizon=16.0, paths=5, batch_size=4, antithetic=True)
    assert simulate.simulate_value(case_a_policy, 0.5, 0.5, config).paths == 6

def test_start_at_zero(case_a_policy):
    '''
    A line starting at zero is refilled at once.
    '''
    config = SimConfig(dt=0.01, horizon=16.0, paths=2, batch_size=2, log_paths=1)
    estimate = simulate.simulate_value(case_a_policy, 0.0, 1.0, config)
    first = simulate.event_rows(estimate)[0]
    assert first[:2] == [0, 0.0]
    assert first[-1].startswith(Trigger.LINE1_AT_ZERO.value)

def test_perturbation_moments(case_a_policy):
    '''
    The perturbation factories replace the retained moments.
    '''
    base = Strategy(case_a_policy)
    model = case_a_policy.model
    xs = np.array([0.1, 1.0])

    keep_all = simulate.no_reinsurance()(base)
    assert keep_all.name == "no-reinsurance"
    mean1, second1, _, _ = keep_all.moments(xs)
    assert mean1 == pytest.approx([full_moments(model.dist1)[0]] * 2)
    assert second1 == pytest.approx([full_moments(model.dist1)[1]] * 2)

    share = simulate.proportional_only(0.8)(base)
    mean1, second1, _, _ = share.moments(xs)
    assert mean1[0] == pytest.approx(0.8 * full_moments(model.dist1)[0])
    assert second1[0] == pytest.approx(0.64 * full_moments(model.dist1)[1])

    constant = simulate.constant_retention(0.5)(base)
    assert constant.name == "constant-retention(0.5)"
    mixed = simulate.mixed_xl(0.5, 0.6)(base)
    pure = simulate.pure_xl(0.5, 0.6)(base)
    assert pure.moments(xs)[1] == pytest.approx(mixed.moments(xs)[1], abs=1e-9)
    assert np.all(pure.moments(xs)[0] >= mixed.moments(xs)[0] - 1e-12)

def test_perturbation_errors(uncapped_uniform_policy):
    '''
    Negative retentions, unknown levels and u2 without caps are rejected.
    '''
    with pytest.raises(DomainError):
        simulate.constant_retention(-1.0)
    with pytest.raises(DomainError):
        simulate.shifted_thresholds(0.1, "w0")
    with pytest.raises(DomainError):
        simulate.shifted_thresholds(0.1, "u2")(Strategy(uncapped_uniform_policy))

def test_shifted_thresholds(case_a_policy):
    '''
    A shifted u2 moves where Line 1 starts paying.
    '''
    shifted = simulate.shifted_thresholds(0.2, "u2")(Strategy(case_a_policy))
    assert shifted.name == "shifted-u2(+0.2)"
    c1, c2 = shifted.rates([case_a_policy.u2 + 0.1, case_a_policy.u2 + 0.3])
    assert list(c1) == [0.0, 3.0]
    assert list(c2) == [2.0, 2.0]

def test_no_injection(case_a_policy):
    '''
    Without injections a line at zero ends the path.
    '''
    alone = simulate.no_injection()(Strategy(case_a_policy))
    assert not alone.collaborates
    outcome = alone.inject(0.0, 1.0, Trigger.LINE1_AT_ZERO)
    assert outcome.ruined
    assert outcome.state == (0.0, 1.0)

def test_compare_policies(case_a_policy, quick_config): # pylint: disable=redefined-outer-name
    '''
    Comparisons are paired: the same strategy compared with itself differs by
    exactly zero.
    '''
    identity = lambda base: simulate.StrategyWrapper(base, "same")
    results = simulate.compare_policies(case_a_policy, [identity, simulate.no_reinsurance()], 0.5, 0.5,
                                        quick_config)
    assert [result.name for result in results] == ["same", "no-reinsurance"]
    assert results[0].difference == 0.0
    assert results[0].paired_stderr == 0.0
    assert results[0].dominated()
    assert results[1].optimal_mean == results[0].optimal_mean

def test_standard_perturbations(case_a_policy, uncapped_uniform_policy):
    '''
    Five families; uncapped policies shift u1.
    '''
    names = [build(Strategy(case_a_policy)).name for build in simulate.standard_perturbations(case_a_policy)]
    assert names == ["no-reinsurance", "constant-retention(0.5)", "shifted-u2(+0.2)", "proportional-only(0.8)",
                     "no-injection"]
    names = [build(Strategy(uncapped_uniform_policy)).name for build in simulate.standard_perturbations(uncapped_uniform_policy)]
    assert "shifted-u1(+0.2)" in names
