'''
The model module holds the value objects passed between the solver, the
strategy evaluator, the simulator and the verification checks. Each object is
immutable once built: attributes are private and exposed through read-only
properties, and every object can be turned into a dictionary for saving.
'''

# core libraries
from enum import Enum
import json
import logging
import math

# twoline libraries
from . claims import ClaimDistribution
from . exceptions import DomainError, ValidationError

class DividendMode(Enum):
    '''
    Whether dividend rates are capped (c_i <= cbar_i) or unrestricted.
    '''
    BOUNDED = "bounded"
    UNBOUNDED = "unbounded"

class CaseTag(Enum):
    '''
    The five solution regimes. The value is the label printed by the CLI.
    '''
    BOUNDED_A = "BoundedA"
    BOUNDED_B = "BoundedB"
    BOUNDED_C = "BoundedC"
    UNBOUNDED_FINITE = "UnboundedFinite"
    UNBOUNDED_INFINITE = "UnboundedInfinite"

    @property
    def bounded(self):
        '''
        Return True for the capped dividend regimes.
        '''
        return self in (CaseTag.BOUNDED_A, CaseTag.BOUNDED_B, CaseTag.BOUNDED_C)

class Region(Enum):
    '''
    Capital injection regions of the reserve quadrant. Bounded dividends use
    A1 through A7, unbounded dividends A1 through A3.
    '''
    A1 = "A1"
    A2 = "A2"
    A3 = "A3"
    A4 = "A4"
    A5 = "A5"
    A6 = "A6"
    A7 = "A7"

class Trigger(Enum):
    '''
    The event that asks the injection rule for a decision.
    '''
    LINE1_AT_ZERO = "line1-at-zero"
    LINE2_AT_ZERO = "line2-at-zero"
    NONE = "none"

def _positive(name, value):
    if not value > 0.0 or math.isinf(value):
        logging.warning("Rejected %s = %s", name, value)
        raise DomainError("{} must be a finite positive number, not {}".format(name, value))
    return float(value)

class LineSpec:
    '''
    One business line: safety loading, maximal dividend rate (bounded mode
    only) and claim-size distribution.
    '''
    def __init__(self, kappa, dist, cbar=None):
        '''
        Constructor.

        :param kappa:   the safety loading kappa_i > 0
        :param dist:    the ClaimDistribution of the line's claims
        :param cbar:    the maximal dividend rate, None when dividends are
                        unbounded
        '''
        self._kappa = _positive("kappa", kappa)
        self._dist = dist
        if cbar is not None and (cbar < 0.0 or math.isinf(cbar)):
            logging.warning("Rejected cbar = %s", cbar)
            raise DomainError("cbar must be finite and non-negative, not {}".format(cbar))
        self._cbar = None if cbar is None else float(cbar)

    @property
    def kappa(self):
        '''
        Return the safety loading.
        '''
        return self._kappa

    @property
    def dist(self):
        '''
        Return the claim-size distribution.
        '''
        return self._dist

    @property
    def cbar(self):
        '''
        Return the maximal dividend rate (None in unbounded mode).
        '''
        return self._cbar

    def to_dict(self):
        '''
        Produce the dictionary data for saving.
        '''
        return {"kappa": self._kappa, "dist": self._dist.to_dict(), "cbar": self._cbar}

    @classmethod
    def from_dict(cls, data):
        '''
        Construct a LineSpec from its dictionary representation.
        '''
        return cls(data["kappa"], ClaimDistribution.from_dict(data["dist"]), data.get("cbar"))

class ProblemSpec:
    '''
    A complete problem as the user states it: two lines, the discount rate, the
    weight given to Line 1's dividends and the dividend mode. No labelling
    assumptions are made here; the solver normalizes.
    '''
    def __init__(self, line1, line2, delta, a, mode=DividendMode.BOUNDED, name=None):
        self._line1 = line1
        self._line2 = line2
        self._delta = _positive("delta", delta)
        if not 0.0 <= a <= 1.0:
            logging.warning("Rejected weight a = %s", a)
            raise DomainError("The dividend weight a must lie in [0, 1], not {}".format(a))
        self._a = float(a)
        self._mode = DividendMode(mode)
        self._name = name

        if self._mode is DividendMode.BOUNDED and (line1.cbar is None or line2.cbar is None):
            logging.warning("Bounded problem %s is missing a maximal dividend rate", name)
            raise ValidationError("Bounded dividend problems need cbar on both lines")

    @property
    def line1(self):
        '''
        Return Line 1's specification.
        '''
        return self._line1

    @property
    def line2(self):
        '''
        Return Line 2's specification.
        '''
        return self._line2

    @property
    def delta(self):
        '''
        Return the discount rate.
        '''
        return self._delta

    @property
    def a(self):
        '''
        Return the weight of Line 1's dividends (Line 2 gets 1 - a).
        '''
        return self._a

    @property
    def mode(self):
        '''
        Return the DividendMode.
        '''
        return self._mode

    @property
    def name(self):
        '''
        Return the problem's name, usually the file it came from.
        '''
        return self._name

    def to_dict(self):
        '''
        Produce the dictionary data for saving.
        '''
        return {"line1": self._line1.to_dict(),
                "line2": self._line2.to_dict(),
                "delta": self._delta,
                "a": self._a,
                "mode": self._mode.value,
                "name": self._name}

    @classmethod
    def from_dict(cls, data):
        '''
        Construct a ProblemSpec from its dictionary representation.
        '''
        return cls(LineSpec.from_dict(data["line1"]), LineSpec.from_dict(data["line2"]), data["delta"],
                   data["a"], DividendMode(data["mode"]), data.get("name"))

    @classmethod
    def from_json(cls, data):
        '''
        Construct a ProblemSpec from a JSON representation.
        '''
        return cls.from_dict(json.loads(data))

class AggregateModel:
    '''
    The normalized model the solver works with: a <= 1/2 and
    M2 / M1 >= kappa2 / kappa1. The retentions are coupled through
    pi2 = (kappa2 / kappa1) pi1, so every aggregate quantity is a function of
    Line 1's retention alone.
    '''
    def __init__(self, kappa1, kappa2, delta, a, dist1, dist2, cbar1=None, cbar2=None,
                 mode=DividendMode.BOUNDED, swapped=False):
        self._kappa1 = _positive("kappa1", kappa1)
        self._kappa2 = _positive("kappa2", kappa2)
        self._delta = _positive("delta", delta)
        self._a = float(a)
        self._dist1 = dist1
        self._dist2 = dist2
        self._mode = DividendMode(mode)
        self._swapped = swapped
        if self._mode is DividendMode.BOUNDED:
            if cbar1 is None or cbar2 is None or cbar1 < 0.0 or cbar2 < 0.0:
                logging.warning("Bounded model needs non-negative cbar, got %s and %s", cbar1, cbar2)
                raise DomainError("Bounded dividend models need cbar1, cbar2 >= 0")
            self._cbar1 = float(cbar1)
            self._cbar2 = float(cbar2)
        else:
            self._cbar1 = None
            self._cbar2 = None

    @property
    def kappa1(self):
        '''
        Return Line 1's safety loading.
        '''
        return self._kappa1

    @property
    def kappa2(self):
        '''
        Return Line 2's safety loading.
        '''
        return self._kappa2

    @property
    def delta(self):
        '''
        Return the discount rate.
        '''
        return self._delta

    @property
    def a(self):
        '''
        Return the weight of Line 1's dividends.
        '''
        return self._a

    @property
    def cbar1(self):
        '''
        Return Line 1's maximal dividend rate (None in unbounded mode).
        '''
        return self._cbar1

    @property
    def cbar2(self):
        '''
        Return Line 2's maximal dividend rate (None in unbounded mode).
        '''
        return self._cbar2

    @property
    def dist1(self):
        '''
        Return Line 1's claim-size distribution.
        '''
        return self._dist1

    @property
    def dist2(self):
        '''
        Return Line 2's claim-size distribution.
        '''
        return self._dist2

    @property
    def mode(self):
        '''
        Return the DividendMode.
        '''
        return self._mode

    @property
    def swapped(self):
        '''
        Return True when the user's Line 1 and Line 2 were relabelled.
        '''
        return self._swapped

    @property
    def ratio(self):
        '''
        Return kappa2 / kappa1, the factor between the two retentions.
        '''
        return self._kappa2 / self._kappa1

    @property
    def m1(self):
        '''
        Return M1, Line 1's support bound.
        '''
        return self._dist1.support_bound

    @property
    def m2(self):
        '''
        Return M2, Line 2's support bound.
        '''
        return self._dist2.support_bound

    @property
    def weights(self):
        '''
        Return the dividend weights (a, 1 - a).
        '''
        return self._a, 1.0 - self._a

    def with_changes(self, **changes):
        '''
        Return a copy with some constructor arguments replaced.
        '''
        arguments = {"kappa1": self._kappa1, "kappa2": self._kappa2, "delta": self._delta, "a": self._a,
                     "dist1": self._dist1, "dist2": self._dist2, "cbar1": self._cbar1, "cbar2": self._cbar2,
                     "mode": self._mode, "swapped": self._swapped}
        arguments.update(changes)
        return AggregateModel(**arguments)

    def to_dict(self):
        '''
        Produce the dictionary data for saving.
        '''
        return {"kappa1": self._kappa1,
                "kappa2": self._kappa2,
                "delta": self._delta,
                "a": self._a,
                "dist1": self._dist1.to_dict(),
                "dist2": self._dist2.to_dict(),
                "cbar1": self._cbar1,
                "cbar2": self._cbar2,
                "mode": self._mode.value,
                "swapped": self._swapped}

    @classmethod
    def from_dict(cls, data):
        '''
        Construct an AggregateModel from its dictionary representation.
        '''
        return cls(data["kappa1"], data["kappa2"], data["delta"], data["a"],
                   ClaimDistribution.from_dict(data["dist1"]), ClaimDistribution.from_dict(data["dist2"]),
                   data.get("cbar1"), data.get("cbar2"), DividendMode(data["mode"]), data.get("swapped", False))

class GammaSet:
    '''
    Roots of the characteristic quadratics at the retention M1 (or at the
    retention where they were requested). Families 3 and 4 are None in
    unbounded mode.
    '''
    def __init__(self, gamma2plus, gamma2minus, gamma3plus=None, gamma3minus=None, gamma4minus=None,
                 retention=None):
        self._gamma2plus = gamma2plus
        self._gamma2minus = gamma2minus
        self._gamma3plus = gamma3plus
        self._gamma3minus = gamma3minus
        self._gamma4minus = gamma4minus
        self._retention = retention

    @property
    def gamma2plus(self):
        ''' gamma_2+ '''
        return self._gamma2plus

    @property
    def gamma2minus(self):
        ''' gamma_2- '''
        return self._gamma2minus

    @property
    def gamma3plus(self):
        ''' gamma_3+ '''
        return self._gamma3plus

    @property
    def gamma3minus(self):
        ''' gamma_3- '''
        return self._gamma3minus

    @property
    def gamma4minus(self):
        ''' gamma_4- '''
        return self._gamma4minus

    @property
    def retention(self):
        '''
        Return the retention the roots were evaluated at.
        '''
        return self._retention

    def to_dict(self):
        '''
        Produce the dictionary data for saving.
        '''
        return {"gamma2plus": self._gamma2plus,
                "gamma2minus": self._gamma2minus,
                "gamma3plus": self._gamma3plus,
                "gamma3minus": self._gamma3minus,
                "gamma4minus": self._gamma4minus,
                "retention": self._retention}

class AlphaLadder:
    '''
    The bounds that bracket K3- in the capped dividend cases.
    '''
    def __init__(self, alpha0, alpha_underline, alpha_overline, alpha_lb, alpha_ub, case_hint):
        self._alpha0 = alpha0
        self._alpha_underline = alpha_underline
        self._alpha_overline = alpha_overline
        self._alpha_lb = alpha_lb
        self._alpha_ub = alpha_ub
        self._case_hint = case_hint

    @property
    def alpha0(self):
        ''' alpha_0 '''
        return self._alpha0

    @property
    def alpha_underline(self):
        ''' the lower alpha candidate '''
        return self._alpha_underline

    @property
    def alpha_overline(self):
        '''
        Return the upper alpha candidate, the largest K3- keeping u1 well defined.
        '''
        return self._alpha_overline

    @property
    def alpha_lb(self):
        ''' the lower end of the K3- bracket for the case hint '''
        return self._alpha_lb

    @property
    def alpha_ub(self):
        ''' the upper end of the Case A bracket '''
        return self._alpha_ub

    @property
    def case_hint(self):
        '''
        Return "A" or "B", the case the lower bound was built for.
        '''
        return self._case_hint

    def to_dict(self):
        '''
        Produce the dictionary data for saving.
        '''
        return {"alpha0": self._alpha0,
                "alpha_underline": self._alpha_underline,
                "alpha_overline": self._alpha_overline,
                "alpha_lb": self._alpha_lb,
                "alpha_ub": self._alpha_ub,
                "case_hint": self._case_hint}

class ControlDecision:
    '''
    The optimal controls at one aggregate reserve level.
    '''
    def __init__(self, x, pi1, pi2, c1, c2):
        self._x = x
        self._pi1 = pi1
        self._pi2 = pi2
        self._c1 = c1
        self._c2 = c2

    @property
    def x(self):
        '''
        Return the aggregate reserve the decision was taken at.
        '''
        return self._x

    @property
    def pi1(self):
        '''
        Return Line 1's retention.
        '''
        return self._pi1

    @property
    def pi2(self):
        '''
        Return Line 2's retention.
        '''
        return self._pi2

    @property
    def c1(self):
        '''
        Return Line 1's dividend rate (0 in unbounded mode).
        '''
        return self._c1

    @property
    def c2(self):
        '''
        Return Line 2's dividend rate (0 in unbounded mode).
        '''
        return self._c2

    def as_tuple(self):
        '''
        Return (pi1, pi2, c1, c2).
        '''
        return self._pi1, self._pi2, self._c1, self._c2

    def to_dict(self):
        '''
        Produce the dictionary data for saving.
        '''
        return {"x": self._x, "pi1": self._pi1, "pi2": self._pi2, "c1": self._c1, "c2": self._c2}

class InjectionOutcome:
    '''
    What the capital injection rule does to a reserve pair: the signed transfer
    (positive means Line 2 pays Line 1), the new reserves, any lump dividend
    paid by Line 2 and whether the insurer is ruined.
    '''
    def __init__(self, region, transfer, x1, x2, lump=0.0, ruined=False):
        self._region = region
        self._transfer = transfer
        self._x1 = x1
        self._x2 = x2
        self._lump = lump
        self._ruined = ruined

    @property
    def region(self):
        '''
        Return the Region the pair was in before the rule was applied.
        '''
        return self._region

    @property
    def transfer(self):
        '''
        Return the signed transfer, positive from Line 2 to Line 1.
        '''
        return self._transfer

    @property
    def x1(self):
        '''
        Return Line 1's reserve afterwards.
        '''
        return self._x1

    @property
    def x2(self):
        '''
        Return Line 2's reserve afterwards.
        '''
        return self._x2

    @property
    def state(self):
        '''
        Return the reserve pair afterwards.
        '''
        return self._x1, self._x2

    @property
    def lump(self):
        '''
        Return the lump dividend paid by Line 2.
        '''
        return self._lump

    @property
    def ruined(self):
        '''
        Return True when no transfer could save the triggering line.
        '''
        return self._ruined

    def to_dict(self):
        '''
        Produce the dictionary data for saving.
        '''
        return {"region": self._region.value, "transfer": self._transfer, "x1": self._x1, "x2": self._x2,
                "lump": self._lump, "ruined": self._ruined}

class RuinRule(Enum):
    '''
    How the simulator treats a line reaching zero when the injection regions
    offer no transfer. REGIONS ends the path, as the region table reads, even
    though the aggregate reserve is still positive, so its estimates fall
    below g. AGGREGATE refills the line from the other one while the
    aggregate reserve is positive: the path ends at the sum ruin time, the
    first time x1 + x2 reaches zero, which is the ruin time g is the value
    of.
    '''
    REGIONS = "regions"
    AGGREGATE = "aggregate"

class SimConfig:
    '''
    Run parameters for the Monte Carlo engine. Paths are simulated in batches
    of ``batch_size``; every batch draws from its own counter-based stream, so
    results do not depend on how many workers run the batches.
    '''
    def __init__(self, dt=1e-3, horizon=40.0, paths=10000, seed=20240601, antithetic=False,
                 batch_size=2048, workers=1, ruin_rule=RuinRule.REGIONS, volatility_scale=1.0,
                 log_paths=0):
        if not dt > 0.0:
            raise ValidationError("dt must be positive, not {}".format(dt))
        if not horizon > 0.0:
            raise ValidationError("The horizon must be positive, not {}".format(horizon))
        if int(paths) < 1:
            raise ValidationError("At least one path is needed, not {}".format(paths))
        if int(batch_size) < 1:
            raise ValidationError("The batch size must be at least 1, not {}".format(batch_size))
        if int(workers) < 1:
            raise ValidationError("At least one worker is needed, not {}".format(workers))
        if volatility_scale < 0.0:
            raise ValidationError("The volatility scale cannot be negative")
        if antithetic and int(batch_size) % 2:
            raise ValidationError("Antithetic sampling needs an even batch size")
        self._dt = float(dt)
        self._horizon = float(horizon)
        self._paths = int(paths)
        self._seed = int(seed)
        self._antithetic = bool(antithetic)
        self._batch_size = int(batch_size)
        self._workers = int(workers)
        self._ruin_rule = RuinRule(ruin_rule)
        self._volatility_scale = float(volatility_scale)
        self._log_paths = int(log_paths)

    @property
    def dt(self):
        '''
        Return the Euler step.
        '''
        return self._dt

    @property
    def horizon(self):
        '''
        Return the simulated time after which paths are truncated.
        '''
        return self._horizon

    @property
    def paths(self):
        '''
        Return the number of simulated paths.
        '''
        return self._paths

    @property
    def seed(self):
        '''
        Return the root seed.
        '''
        return self._seed

    @property
    def antithetic(self):
        '''
        Return True when each batch pairs paths with mirrored increments.
        '''
        return self._antithetic

    @property
    def batch_size(self):
        '''
        Return the number of paths simulated together.
        '''
        return self._batch_size

    @property
    def workers(self):
        '''
        Return the number of threads running batches.
        '''
        return self._workers

    @property
    def ruin_rule(self):
        '''
        Return the RuinRule.
        '''
        return self._ruin_rule

    @property
    def volatility_scale(self):
        '''
        Return the factor applied to every line's volatility (1 normally, 0 for
        deterministic sanity runs).
        '''
        return self._volatility_scale

    @property
    def log_paths(self):
        '''
        Return how many leading paths record an event log.
        '''
        return self._log_paths

    @property
    def steps(self):
        '''
        Return the number of Euler steps needed to cover the horizon.
        '''
        return int(math.ceil(self._horizon / self._dt - 1e-9))

    def replace(self, **changes):
        '''
        Return a copy with some settings replaced.
        '''
        settings = self.to_dict()
        settings.update(changes)
        return SimConfig(**settings)

    def to_dict(self):
        '''
        Produce the dictionary data for saving.
        '''
        return {"dt": self._dt,
                "horizon": self._horizon,
                "paths": self._paths,
                "seed": self._seed,
                "antithetic": self._antithetic,
                "batch_size": self._batch_size,
                "workers": self._workers,
                "ruin_rule": self._ruin_rule.value,
                "volatility_scale": self._volatility_scale,
                "log_paths": self._log_paths}

class SimEstimate:
    '''
    A Monte Carlo estimate of the expected discounted weighted dividends.
    '''
    def __init__(self, mean, stderr, paths_ruined, truncation_bound, paths, values=None, events=None):
        self._mean = mean
        self._stderr = stderr
        self._paths_ruined = paths_ruined
        self._truncation_bound = truncation_bound
        self._paths = paths
        self._values = values
        self._events = events or []

    @property
    def mean(self):
        '''
        Return the sample mean of J.
        '''
        return self._mean

    @property
    def stderr(self):
        '''
        Return the standard error of the mean.
        '''
        return self._stderr

    @property
    def paths_ruined(self):
        '''
        Return the fraction of paths ruined before the horizon.
        '''
        return self._paths_ruined

    @property
    def truncation_bound(self):
        '''
        Return the largest discounted dividend stream the horizon can cut off.
        '''
        return self._truncation_bound

    @property
    def paths(self):
        '''
        Return the number of paths behind the estimate.
        '''
        return self._paths

    @property
    def values(self):
        '''
        Return the per-path discounted dividends (a numpy array).
        '''
        return self._values

    @property
    def events(self):
        '''
        Return the event log rows (path, t, x1, x2, event).
        '''
        return self._events

    def to_dict(self):
        '''
        Produce the dictionary data for saving.
        '''
        return {"mean": self._mean,
                "stderr": self._stderr,
                "paths_ruined": self._paths_ruined,
                "truncation_bound": self._truncation_bound,
                "paths": self._paths}

class PolicyComparison:
    '''
    The paired difference between the solved policy and one perturbation.
    '''
    def __init__(self, name, optimal_mean, perturbed_mean, difference, paired_stderr):
        self._name = name
        self._optimal_mean = optimal_mean
        self._perturbed_mean = perturbed_mean
        self._difference = difference
        self._paired_stderr = paired_stderr

    @property
    def name(self):
        '''
        Return the perturbation's name.
        '''
        return self._name

    @property
    def optimal_mean(self):
        '''
        Return the solved policy's mean.
        '''
        return self._optimal_mean

    @property
    def perturbed_mean(self):
        '''
        Return the perturbation's mean.
        '''
        return self._perturbed_mean

    @property
    def difference(self):
        '''
        Return the mean of (optimal - perturbed) over paired paths.
        '''
        return self._difference

    @property
    def paired_stderr(self):
        '''
        Return the standard error of the paired difference.
        '''
        return self._paired_stderr

    def dominated(self, width=2.5):
        '''
        True unless the perturbation beats the solved policy by more than width
        paired standard errors.
        '''
        return self._difference >= -width * self._paired_stderr

    def to_dict(self):
        '''
        Produce the dictionary data for saving.
        '''
        return {"name": self._name,
                "optimal_mean": self._optimal_mean,
                "perturbed_mean": self._perturbed_mean,
                "difference": self._difference,
                "paired_stderr": self._paired_stderr}

class CheckResult:
    '''
    The outcome of one verification check.
    '''
    def __init__(self, name, grid_size, max_residual, location, tolerance, passed, detail=""):
        self._name = name
        self._grid_size = grid_size
        self._max_residual = max_residual
        self._location = location
        self._tolerance = tolerance
        self._passed = passed
        self._detail = detail

    @property
    def name(self):
        '''
        Return the check's name.
        '''
        return self._name

    @property
    def grid_size(self):
        '''
        Return the number of points examined.
        '''
        return self._grid_size

    @property
    def max_residual(self):
        '''
        Return the worst residual relative to its tolerance scale.
        '''
        return self._max_residual

    @property
    def location(self):
        '''
        Return where the worst residual occurred.
        '''
        return self._location

    @property
    def tolerance(self):
        '''
        Return the tolerance the residual was held to.
        '''
        return self._tolerance

    @property
    def passed(self):
        '''
        Return True when the check held everywhere.
        '''
        return self._passed

    @property
    def detail(self):
        '''
        Return free text describing a failure.
        '''
        return self._detail

    def to_dict(self):
        '''
        Produce the dictionary data for saving.
        '''
        return {"name": self._name,
                "grid_size": self._grid_size,
                "max_residual": self._max_residual,
                "location": self._location,
                "tolerance": self._tolerance,
                "passed": self._passed,
                "detail": self._detail}

class VerificationReport:
    '''
    A collection of CheckResults kept in check-name order.
    '''
    def __init__(self, results=None):
        self._results = {}
        for result in results or []:
            self._results[result.name] = result

    @property
    def results(self):
        '''
        Return the CheckResults sorted by name.
        '''
        return [self._results[name] for name in sorted(self._results)]

    @property
    def passed(self):
        '''
        Return True when every check passed.
        '''
        return all(result.passed for result in self._results.values())

    def __getitem__(self, name):
        return self._results[name]

    def __contains__(self, name):
        return name in self._results

    def __len__(self):
        return len(self._results)

    def merge(self, other):
        '''
        Return a new report holding this report's checks and the other's; a
        check present in both keeps the other's result.
        '''
        return VerificationReport(self.results + other.results)

    def failures(self):
        '''
        Return the checks that failed.
        '''
        return [result for result in self.results if not result.passed]

    def to_rows(self):
        '''
        Rows for CSV export: name, grid size, max residual, location,
        tolerance, passed.
        '''
        return [[result.name, result.grid_size, result.max_residual, result.location, result.tolerance,
                 "pass" if result.passed else "FAIL"] for result in self.results]

    def summary(self):
        '''
        A human-readable multi-line summary.
        '''
        lines = []
        for result in self.results:
            status = "pass" if result.passed else "FAIL"
            line = "{:<28} {:>4}  points={:<6} worst={:.3e} at x={:.6g} (tol {:.1e})".format(
                result.name, status, result.grid_size, result.max_residual, result.location, result.tolerance)
            if result.detail and not result.passed:
                line += "  " + result.detail
            lines.append(line)
        lines.append("{} of {} checks passed".format(len(self) - len(self.failures()), len(self)))
        return "\n".join(lines)
