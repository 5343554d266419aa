'''
Monte Carlo evaluation of the expected discounted weighted dividends.

Both reserves follow Euler-Maruyama steps of their diffusions. Paths run in
batches, and every batch draws from its own Philox stream spawned from the
root seed, so an estimate does not depend on the number of workers. Every
strategy consumes the same normals step by step, which makes comparisons
between strategies paired (common random numbers).
'''

# core libraries
from concurrent.futures import ThreadPoolExecutor
import logging
import math

# third party libraries
import numpy as np

# twoline libraries
from . claims import dominating_pure_xl, full_moments, limited_mean, limited_second_moment, mixed_moments
from . claims import proportional_moments
from . exceptions import DomainError, SimulationError
from . model import InjectionOutcome, PolicyComparison, RuinRule, SimEstimate, Trigger
from . solver import SolvedPolicy
from . strategy import Strategy, reflect_at

def _as_strategy(target):
    if isinstance(target, SolvedPolicy):
        return Strategy(target)
    return target

class StrategyWrapper:
    '''
    Delegates everything to a base Strategy; perturbations override the parts
    they change.
    '''
    def __init__(self, base, name):
        self._base = base
        self._name = name

    @property
    def name(self):
        ''' the label used in comparison reports '''
        return self._name

    @property
    def policy(self):
        ''' the solved policy behind the base strategy '''
        return self._base.policy

    @property
    def model(self):
        ''' the normalized model '''
        return self._base.model

    @property
    def collaborates(self):
        ''' whether lines refill each other '''
        return self._base.collaborates

    @property
    def lump_level(self):
        ''' the uncapped dividend level, or None '''
        return self._base.lump_level

    def moments(self, xs):
        return self._base.moments(xs)

    def rates(self, xs):
        return self._base.rates(xs)

    def reflect(self, x1, x2):
        return self._base.reflect(x1, x2)

    def inject(self, x1, x2, trigger):
        return self._base.inject(x1, x2, trigger)

class _FixedMoments(StrategyWrapper):
    '''
    Retained moments that do not depend on the reserve.
    '''
    def __init__(self, base, name, values):
        super().__init__(base, name)
        self._values = values

    def moments(self, xs):
        return tuple(np.full(np.shape(xs), value) for value in self._values)

def _xl_values(model, pi1, pi2):
    return (limited_mean(model.dist1, pi1), limited_second_moment(model.dist1, pi1),
            limited_mean(model.dist2, pi2), limited_second_moment(model.dist2, pi2))

def no_reinsurance():
    '''
    Keep every claim (pi = M); dividends and injections unchanged.
    '''
    def build(base):
        model = base.model
        return _FixedMoments(base, "no-reinsurance", full_moments(model.dist1) + full_moments(model.dist2))
    return build

def constant_retention(pi):
    '''
    Line 1 retains pi at every reserve level, Line 2 the coupled retention.
    '''
    if pi < 0.0:
        raise DomainError("The retention must be non-negative, not {}".format(pi))

    def build(base):
        model = base.model
        retention = min(pi, model.m1)
        return _FixedMoments(base, "constant-retention({:g})".format(pi),
                             _xl_values(model, retention, min(model.ratio * retention, model.m2)))
    return build

def proportional_only(theta):
    '''
    Both lines cede the proportion 1 - theta of every claim and buy no
    excess-of-loss cover.
    '''
    def build(base):
        model = base.model
        return _FixedMoments(base, "proportional-only({:g})".format(theta),
                             proportional_moments(model.dist1, theta) + proportional_moments(model.dist2, theta))
    return build

def mixed_xl(theta, pi):
    '''
    A proportional layer theta on top of the constant retention pi (coupled
    for Line 2).
    '''
    def build(base):
        model = base.model
        pi2 = min(model.ratio * pi, model.m2)
        return _FixedMoments(base, "mixed-xl({:g}, {:g})".format(theta, pi),
                             mixed_moments(model.dist1, theta, pi) + mixed_moments(model.dist2, theta, pi2))
    return build

def pure_xl(theta, pi):
    '''
    The pure excess-of-loss replacement of mixed_xl(theta, pi): each line
    keeps the retention with the same retained variance.
    '''
    def build(base):
        model = base.model
        pi2 = min(model.ratio * pi, model.m2)
        first = dominating_pure_xl(model.dist1, theta, pi)
        second = dominating_pure_xl(model.dist2, theta, pi2)
        return _FixedMoments(base, "pure-xl({:g}, {:g})".format(theta, pi), _xl_values(model, first, second))
    return build

class _ShiftedThresholds(StrategyWrapper):
    def __init__(self, base, shift, level):
        super().__init__(base, "shifted-{}({:+g})".format(level, shift))
        policy = base.policy
        self._u1 = policy.u1 + (shift if level == "u1" else 0.0)
        self._u2 = None if policy.u2 is None else policy.u2 + (shift if level == "u2" else 0.0)

    @property
    def lump_level(self):
        return None if self._base.lump_level is None else self._u1

    def rates(self, xs):
        xs = np.asarray(xs, dtype=float)
        if self._u2 is None:
            return np.zeros_like(xs), np.zeros_like(xs)
        model = self.model
        return np.where(xs >= self._u2, model.cbar1, 0.0), np.where(xs >= self._u1, model.cbar2, 0.0)

    def reflect(self, x1, x2):
        if self.lump_level is None:
            return x1, x2, np.zeros_like(x1)
        return reflect_at(self._u1, x1, x2)

def shifted_thresholds(shift, level="u2"):
    '''
    Move one dividend threshold ("u1" or "u2") by shift; uncapped dividends
    only have u1.
    '''
    if level not in ("u1", "u2"):
        raise DomainError("Only u1 and u2 can be shifted, not {}".format(level))

    def build(base):
        if base.policy.u2 is None and level == "u2":
            raise DomainError("Uncapped dividend policies have no u2")
        return _ShiftedThresholds(base, shift, level)
    return build

class _NoInjection(StrategyWrapper):
    @property
    def collaborates(self):
        return False

    def reflect(self, x1, x2):
        if self.lump_level is None:
            return x1, x2, np.zeros_like(x1)
        return reflect_at(self.lump_level, x1, x2, transfer=False)

    def inject(self, x1, x2, trigger):
        trigger = Trigger(trigger)
        return InjectionOutcome(self._base.inject(x1, x2, Trigger.NONE).region, 0.0, x1, x2,
                                ruined=trigger is not Trigger.NONE)

def no_injection():
    '''
    Lines never refill each other; the first line to reach zero ends the path.
    '''
    return lambda base: _NoInjection(base, "no-injection")

def standard_perturbations(policy):
    '''
    The five perturbation families used by the compare command.
    '''
    model = policy.model
    retention = 0.5 * (model.m1 if not math.isinf(model.m1) else limited_mean(model.dist1, math.inf))
    level = "u2" if policy.u2 is not None and not math.isinf(policy.u2) else "u1"
    return [no_reinsurance(), constant_retention(retention), shifted_thresholds(0.2, level),
            proportional_only(0.8), no_injection()]

def truncation_bound(strategy, horizon):
    '''
    The most the discounted dividends after the horizon can be worth.
    '''
    policy, model = strategy.policy, strategy.model
    if policy.case_tag.bounded:
        ceiling = (model.a * model.cbar1 + (1.0 - model.a) * model.cbar2) / model.delta
    else:
        ceiling = policy.value(policy.u1)[0]
    return ceiling * math.exp(-model.delta * horizon)

class _Batch:
    '''
    One batch of paths run to the horizon.
    '''
    def __init__(self, strategy, config, x1, x2, first_path, size, seed_sequence):
        self._strategy = strategy
        self._config = config
        self._x1 = np.full(size, float(x1))
        self._x2 = np.full(size, float(x2))
        self._first_path = first_path
        self._size = size
        self._generator = np.random.Generator(np.random.Philox(seed_sequence))
        self._values = np.zeros(size)
        self._alive = np.ones(size, dtype=bool)
        self._ruined = np.zeros(size, dtype=bool)
        self._events = []

    def _log(self, path, t, event):
        index = self._first_path + path
        if index < self._config.log_paths:
            self._events.append([index, t, float(self._x1[path]), float(self._x2[path]), event])

    def _normals(self):
        if not self._config.antithetic:
            return self._generator.standard_normal((2, self._size))
        half = self._generator.standard_normal((2, self._size // 2))
        return np.concatenate([half, -half], axis=1)

    def _reflect(self, t):
        x1, x2, lump = self._strategy.reflect(self._x1, self._x2)
        paying = self._alive & (lump > 0.0)
        if np.any(paying):
            model = self._strategy.model
            self._values[paying] += (1.0 - model.a) * math.exp(-model.delta * t) * lump[paying]
            for path in np.nonzero(paying)[0][:self._config.log_paths]:
                self._log(path, t, "lump={!r}".format(float(lump[path])))
        self._x1 = np.where(self._alive, x1, self._x1)
        self._x2 = np.where(self._alive, x2, self._x2)

    def _end(self, path, t):
        self._alive[path] = False
        self._ruined[path] = True
        self._log(path, t, "ruin")

    def _handle_zero(self, path, trigger, t):
        x1, x2 = float(self._x1[path]), float(self._x2[path])
        if not self._strategy.collaborates:
            self._end(path, t)
            return
        outcome = self._strategy.inject(x1, x2, trigger)
        if not outcome.ruined:
            self._x1[path], self._x2[path] = outcome.x1, outcome.x2
            self._log(path, t, "{} transfer={!r}".format(trigger.value, outcome.transfer))
            return
        total = x1 + x2
        if self._config.ruin_rule is RuinRule.AGGREGATE and total > 1e-12:
            # the line at zero takes half of the other line's reserve
            self._x1[path], self._x2[path] = 0.5 * total, 0.5 * total
            self._log(path, t, "{} refill={!r}".format(trigger.value, 0.5 * total))
            return
        self._end(path, t)

    def run(self):
        '''
        Simulate the batch; returns (values, ruined, events).
        '''
        config, strategy = self._config, self._strategy
        model = strategy.model
        a, delta, dt = model.a, model.delta, config.dt
        root_dt = math.sqrt(dt)
        kappa1, kappa2 = model.kappa1, model.kappa2

        for path in np.nonzero((self._x1 <= 0.0) | (self._x2 <= 0.0))[0]:
            self._handle_zero(path, Trigger.LINE1_AT_ZERO if self._x1[path] <= 0.0 else Trigger.LINE2_AT_ZERO,
                              0.0)
        self._reflect(0.0)

        for step in range(config.steps):
            t = step * dt
            if not np.any(self._alive):
                break
            normals = self._normals()
            total = self._x1 + self._x2
            mean1, second1, mean2, second2 = strategy.moments(total)
            c1, c2 = strategy.rates(total)
            scale = config.volatility_scale * root_dt
            new1 = self._x1 + (kappa1 * mean1 - c1) * dt + scale * np.sqrt(np.maximum(second1, 0.0)) * normals[0]
            new2 = self._x2 + (kappa2 * mean2 - c2) * dt + scale * np.sqrt(np.maximum(second2, 0.0)) * normals[1]

            with np.errstate(divide="ignore", invalid="ignore"):
                hit1 = np.where(new1 <= 0.0, self._x1 / (self._x1 - new1), np.inf)
                hit2 = np.where(new2 <= 0.0, self._x2 / (self._x2 - new2), np.inf)
            fraction = np.minimum(np.minimum(hit1, hit2), 1.0)
            fraction = np.where(self._alive, fraction, 0.0)

            rate = a * c1 + (1.0 - a) * c2
            weight = 0.5 * fraction * dt * (math.exp(-delta * t) + np.exp(-delta * (t + fraction * dt)))
            self._values += np.where(self._alive, rate * weight, 0.0)

            moved1 = self._x1 + fraction * (new1 - self._x1)
            moved2 = self._x2 + fraction * (new2 - self._x2)
            self._x1 = np.where(self._alive, np.maximum(moved1, 0.0), self._x1)
            self._x2 = np.where(self._alive, np.maximum(moved2, 0.0), self._x2)

            for path in np.nonzero(self._alive & (np.minimum(hit1, hit2) <= 1.0))[0]:
                # the lower-indexed line is served first when both reach zero
                event_time = t + fraction[path] * dt
                if hit1[path] <= hit2[path]:
                    self._x1[path] = 0.0
                    self._handle_zero(path, Trigger.LINE1_AT_ZERO, event_time)
                else:
                    self._x2[path] = 0.0
                    self._handle_zero(path, Trigger.LINE2_AT_ZERO, event_time)
                if self._alive[path] and min(self._x1[path], self._x2[path]) <= 0.0:
                    other = Trigger.LINE1_AT_ZERO if self._x1[path] <= 0.0 else Trigger.LINE2_AT_ZERO
                    self._handle_zero(path, other, event_time)

            self._reflect(t + dt)
            if not (np.all(np.isfinite(self._values)) and np.all(np.isfinite(self._x1[self._alive]))
                    and np.all(np.isfinite(self._x2[self._alive]))):
                bad = int(np.argmax(~np.isfinite(self._values) | ~np.isfinite(self._x1) | ~np.isfinite(self._x2)))
                logging.error("Non-finite state on path %d at t=%s: x=(%s, %s)", self._first_path + bad, t,
                              self._x1[bad], self._x2[bad])
                raise SimulationError("Path {} produced a non-finite value at t = {}".format(
                    self._first_path + bad, t))

        for path in np.nonzero(self._alive)[0][:self._config.log_paths]:
            self._log(path, config.steps * dt, "horizon")
        return self._values, self._ruined, self._events

def _fsum_stats(values):
    count = len(values)
    mean = math.fsum(values) / count
    if count < 2:
        return mean, 0.0
    variance = math.fsum((value - mean) ** 2 for value in values) / (count - 1)
    return mean, math.sqrt(variance / count)

def simulate_value(target, x1, x2, config):
    '''
    Estimate J(x1, x2) for a SolvedPolicy or a strategy. Returns a
    SimEstimate carrying the per-path values for paired comparisons.
    '''
    if np.isnan(x1) or np.isnan(x2) or x1 < 0.0 or x2 < 0.0:
        logging.warning("Simulation requested from (%s, %s)", x1, x2)
        raise DomainError("Starting reserves must be non-negative")
    strategy = _as_strategy(target)
    model = strategy.model
    if config.horizon < 8.0 / model.delta:
        logging.warning("Horizon %s is shorter than 8 / delta = %s", config.horizon, 8.0 / model.delta)

    sizes = []
    remaining = config.paths
    while remaining > 0:
        sizes.append(min(config.batch_size, remaining))
        remaining -= sizes[-1]
    if config.antithetic and sizes[-1] % 2:
        sizes[-1] += 1
    seeds = np.random.SeedSequence(config.seed).spawn(len(sizes))
    starts = np.cumsum([0] + sizes[:-1])
    batches = [_Batch(strategy, config, x1, x2, int(start), size, seed)
               for start, size, seed in zip(starts, sizes, seeds)]

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as executor:
            results = list(executor.map(lambda batch: batch.run(), batches))
    else:
        results = [batch.run() for batch in batches]

    values = np.concatenate([result[0] for result in results])
    ruined = np.concatenate([result[1] for result in results])
    events = [event for result in results for event in result[2]]
    mean, stderr = _fsum_stats(values.tolist())
    estimate = SimEstimate(mean, stderr, float(np.mean(ruined)), truncation_bound(strategy, config.horizon),
                           len(values), values=values, events=events)
    logging.info("%s from (%s, %s): %s +/- %s over %d paths (%.1f%% ruined)", getattr(strategy, "name", "policy"),
                 x1, x2, mean, stderr, len(values), 100.0 * estimate.paths_ruined)
    return estimate

def paired_difference(first, second, name):
    '''
    PolicyComparison of two estimates simulated from the same seed.
    '''
    differences = (first.values - second.values).tolist()
    difference, paired_stderr = _fsum_stats(differences)
    return PolicyComparison(name, first.mean, second.mean, difference, paired_stderr)

def compare_policies(policy, perturbations, x1, x2, config):
    '''
    Simulate the solved policy and every perturbation on common random
    numbers. Each perturbation builds a strategy from the optimal one.
    Returns PolicyComparisons in the order given.
    '''
    base = _as_strategy(policy)
    optimal = simulate_value(base, x1, x2, config)
    comparisons = []
    for perturbation in perturbations:
        strategy = perturbation(base)
        estimate = simulate_value(strategy, x1, x2, config)
        comparison = paired_difference(optimal, estimate, getattr(strategy, "name", "perturbed"))
        logging.info("%s: difference %s +/- %s", comparison.name, comparison.difference, comparison.paired_stderr)
        comparisons.append(comparison)
    return comparisons

def event_rows(estimate):
    '''
    Rows (path, t, x1, x2, event) of an estimate's event log.
    '''
    return [list(row) for row in estimate.events]
