'''
The free-boundary machinery behind the value function.

Below the first switching level the optimal retention of Line 1 is G^-1(x),
where

    G(y) = int_0^y N2(z) / (2 z N1(z) + (2 delta / kappa1) z^2 - kappa1 N2(z)) dz.

While Line 2 alone pays dividends the retention instead follows H, the
solution of

    H'(x) = (2 H N1(H) + (2 delta / kappa1) H^2 - 2 cbar2 H) / N2(H) - kappa1.

Both maps are integrated with scipy's Dormand-Prince RK45 and kept as dense
solutions; the value function reads its exponential-of-integral pieces from
the extra states carried along with the retention. The shooting problems that
pin u1 (and w0 or u2) and the M0 fixed point also live here.
'''

# core libraries
from abc import ABC, abstractmethod
from collections import namedtuple
from functools import wraps
import logging
import math

# third party libraries
import numpy as np
from scipy import integrate, optimize

# twoline libraries
from . claims import DistributionKind, limited_mean
from . coeffs import gamma4_minus, nbar
from . exceptions import (CaseClassificationError, DomainError, ModelInconsistencyError, ShootingError,
                          SolverError)
from . model import DividendMode

# the G integrand is replaced by its limit below this fraction of the retention scale
LIMIT_FRACTION = 1e-9
# G maps start here (as a fraction of the retention scale) ...
START_FRACTION = 1e-10
# ... and, for unbounded support, stop at this multiple of the scale
END_MULTIPLE = 1e9

QUAD_EPSABS = 1e-13
QUAD_EPSREL = 1e-11
MAP_RTOL = 1e-12
SHOOTING_RTOL = 1e-10
SHOOTING_XTOL = 1e-12
# shooting residuals carry integration noise well above SHOOTING_RTOL; rises
# smaller than this, or between samples closer than MONOTONE_SPACING, are noise
MONOTONE_TOL = 1e4 * SHOOTING_RTOL
MONOTONE_SPACING = 1e3 * SHOOTING_XTOL
MAX_EXPANSIONS = 40
M0_SCAN_POINTS = 1024

Stop = namedtuple("Stop", ["kind", "target"])

def numerical(function):
    '''
    Re-raise the ValueError, ArithmeticError or RuntimeError of a scipy or
    numpy routine called by function as a SolverError.
    '''
    @wraps(function)
    def wrapper(*args, **kwargs):
        try:
            return function(*args, **kwargs)
        except (ValueError, ArithmeticError, RuntimeError) as err:
            logging.warning("%s failed numerically: %s", function.__name__, err)
            raise SolverError("{} failed numerically: {}".format(function.__name__, err)) from err
    return wrapper

def retention_reaches(target):
    '''
    Stop an H trajectory when the retention reaches target.
    '''
    return Stop("retention", float(target))

def reserve_reaches(target):
    '''
    Stop an H trajectory at the aggregate reserve target.
    '''
    return Stop("reserve", float(target))

def retention_scale(model):
    '''
    A characteristic retention: M1 when finite, otherwise Line 1's mean claim.
    '''
    if math.isinf(model.m1):
        return limited_mean(model.dist1, math.inf)
    return model.m1

def limit_density(model):
    '''
    G'(0+) = (1 + r^2) / (kappa1 (1 + r^2) + 2 delta / kappa1). Numerator and
    denominator of the integrand are both O(z^2) and every survival function
    starts at 1.
    '''
    ratio_sq = model.ratio ** 2
    return (1.0 + ratio_sq) / (model.kappa1 * (1.0 + ratio_sq) + 2.0 * model.delta / model.kappa1)

def g_density(model, z):
    '''
    The integrand G'(z); accepts scalars or arrays in [0, M1].
    '''
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=float)
    limit = limit_density(model)
    small = z <= LIMIT_FRACTION * retention_scale(model)
    drift, variance = nbar(model, z)
    denominator = 2.0 * z * drift + (2.0 * model.delta / model.kappa1) * z * z - model.kappa1 * variance
    bad = np.atleast_1d((denominator <= 0.0) & ~small)
    if np.any(bad):
        offender = float(np.atleast_1d(z)[np.argmax(bad)])
        logging.warning("G integrand denominator is not positive at z = %s", offender)
        raise ModelInconsistencyError("The G integrand's denominator is not positive at z = {}".format(offender),
                                      retention=offender)
    with np.errstate(divide="ignore", invalid="ignore"):
        density = np.where(small, limit, variance / np.where(small, 1.0, denominator))
    return float(density) if scalar else density

def _kinks(model, upper):
    '''
    Points in (0, upper) where the integrand's derivative jumps.
    '''
    points = set()
    if not math.isinf(model.m2) and 0.0 < model.m2 / model.ratio < upper:
        points.add(model.m2 / model.ratio)
    for dist, factor in ((model.dist1, 1.0), (model.dist2, 1.0 / model.ratio)):
        if dist.kind is DistributionKind.TABULATED:
            points.update(p * factor for p in dist.points if 0.0 < p * factor < upper)
    return sorted(points)

@numerical
def g_integral(model, y):
    '''
    G(y) by adaptive quadrature; y may be math.inf when M1 is.
    '''
    if np.isnan(y) or y < 0.0 or y > model.m1:
        logging.warning("G requested at y = %s outside [0, %s]", y, model.m1)
        raise DomainError("G is defined on [0, M1] = [0, {}]".format(model.m1))
    if y == 0.0:
        return 0.0

    density = lambda z: g_density(model, z)
    if math.isinf(y):
        split = 10.0 * retention_scale(model)
        kinks = _kinks(model, split)
        head, _ = integrate.quad(density, 0.0, split, points=kinks or None, epsabs=QUAD_EPSABS,
                                 epsrel=QUAD_EPSREL, limit=400)
        tail, _ = integrate.quad(density, split, math.inf, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=400)
        return head + tail

    kinks = _kinks(model, y)
    value, _ = integrate.quad(density, 0.0, y, points=kinks or None, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL,
                              limit=400)
    return value

@numerical
def g_inverse(model, x):
    '''
    G^-1(x) by bracketed root finding on g_integral, to |G(y) - x| <= 1e-10.
    '''
    top = g_integral(model, model.m1)
    if np.isnan(x) or x < 0.0 or x > top or (math.isinf(model.m1) and x >= top):
        logging.warning("G inverse requested at x = %s outside [0, %s]", x, top)
        raise DomainError("G^-1 is defined on [0, G(M1)] = [0, {}]".format(top))
    if x == 0.0:
        return 0.0
    if x == top:
        return model.m1

    upper = model.m1
    if math.isinf(upper):
        upper = retention_scale(model)
        while g_integral(model, upper) < x:
            upper *= 2.0
    return optimize.brentq(lambda y: g_integral(model, y) - x, 0.0, upper, xtol=1e-14, maxiter=200)

class RetentionMap(ABC):
    '''
    A monotone map between the aggregate reserve x and Line 1's retention y,
    backed by a dense ODE solution.
    '''
    def __init__(self, model, direction, x_lower, x_upper, y_lower, y_upper):
        self._model = model
        self._direction = direction
        self._x_lower = x_lower
        self._x_upper = x_upper
        self._y_lower = y_lower
        self._y_upper = y_upper

    @property
    def direction(self):
        '''
        Return "G" (x as a function of y) or "H" (y as a function of x).
        '''
        return self._direction

    @property
    def x_lower(self):
        '''
        Return the smallest reserve covered.
        '''
        return self._x_lower

    @property
    def x_upper(self):
        '''
        Return the largest reserve covered.
        '''
        return self._x_upper

    @property
    def y_lower(self):
        '''
        Return the retention at x_lower.
        '''
        return self._y_lower

    @property
    def y_upper(self):
        '''
        Return the retention at x_upper.
        '''
        return self._y_upper

    @abstractmethod
    def retention(self, x):
        '''
        Line 1's retention at reserve x (scalar or array); reserves outside the
        map are clipped to its ends.
        '''
        pass

    def grid(self, points=257):
        '''
        The map sampled at evenly spaced reserves, as arrays (x, y).
        '''
        xs = np.linspace(self._x_lower, self._x_upper, points)
        return xs, np.asarray(self.retention(xs), dtype=float)

    def to_rows(self, points=257):
        '''
        Rows (x, y) for CSV export.
        '''
        xs, ys = self.grid(points)
        return [[x, y] for x, y in zip(xs, ys)]

class GMap(RetentionMap):
    '''
    G integrated in s = ln y with the state (X, L, D):

        X(y) = G(y)
        L(y) = int kappa1 (G'(t) - G'(0)) / t dt
        D(y) = int_0^y t^-p exp(-L(t)) G'(t) dt,   p = kappa1 G'(0).

    With these, g'(x) / g'(x_ref) = exp(L(y_ref) + p ln y_ref - L(y) - p ln y)
    and int_0^x g' = g'(x_ref) exp(L(y_ref) + p ln y_ref) D(y), where y = G^-1.
    Below the start of the integration the analytic small-y limits are used.
    '''
    def __init__(self, model, solution, s_start, s_end, nodes_x, nodes_s, tail, y_end):
        self._solution = solution
        self._s_start = s_start
        self._s_end = s_end
        self._nodes_x = nodes_x
        self._nodes_s = nodes_s
        self._limit = limit_density(model)
        self._power = model.kappa1 * self._limit
        self._tail = tail
        y_start = math.exp(s_start)
        self._x_start = self._limit * y_start
        x_end = float(solution(s_end)[0])
        super().__init__(model, "G", 0.0, x_end, 0.0, y_end)

    @property
    def power(self):
        '''
        Return p = kappa1 G'(0); g' behaves like x^-p near zero.
        '''
        return self._power

    @property
    def tail(self):
        '''
        Return G(infinity) - G(y_upper) for unbounded support (0 otherwise).
        '''
        return self._tail

    def reserve(self, y):
        '''
        G(y) read from the map.
        '''
        return self.state(y)[0]

    def state(self, y):
        '''
        The triple (X, L, D) at retention y (arrays when y is).
        '''
        scalar = np.ndim(y) == 0
        y = np.atleast_1d(np.asarray(y, dtype=float))
        x_values = np.empty_like(y)
        logs = np.empty_like(y)
        masses = np.empty_like(y)

        start = math.exp(self._s_start)
        below = y <= start
        x_values[below] = self._limit * y[below]
        logs[below] = 0.0
        with np.errstate(divide="ignore"):
            masses[below] = self._limit * np.power(y[below], 1.0 - self._power) / (1.0 - self._power)

        inside = ~below
        if np.any(inside):
            s_values = np.minimum(np.log(y[inside]), self._s_end)
            values = self._solution(s_values)
            x_values[inside] = values[0]
            logs[inside] = values[1]
            masses[inside] = values[2]
        if scalar:
            return float(x_values[0]), float(logs[0]), float(masses[0])
        return x_values, logs, masses

    def log_weight(self, y):
        '''
        L(y) + p ln y, the log of the factor that turns D into g.
        '''
        _, logs, _ = self.state(y)
        with np.errstate(divide="ignore"):
            return logs + self._power * np.log(y)

    def retention(self, x):
        scalar = np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        result = np.empty_like(x)

        below = x <= self._x_start
        result[below] = np.maximum(x[below], 0.0) / self._limit
        above = x >= self._x_upper
        result[above] = self._y_upper
        inside = ~(below | above)

        if np.any(inside):
            targets = x[inside]
            s_values = np.interp(targets, self._nodes_x, self._nodes_s)
            for _ in range(50):
                values = self._solution(s_values)
                error = values[0] - targets
                if np.max(np.abs(error)) <= 1e-15 * (1.0 + np.max(np.abs(targets))):
                    break
                ys = np.exp(s_values)
                slope = ys * g_density(self._model, np.minimum(ys, self._model.m1))
                s_values = np.clip(s_values - error / slope, self._s_start, self._s_end)
            result[inside] = np.exp(s_values)
        return float(result[0]) if scalar else result

@numerical
def build_g_map(model, y_top=None, rtol=MAP_RTOL):
    '''
    Integrate G and its companion states up to y_top (M1 by default; math.inf
    integrates far into the tail, where G'(y) decays like 1 / y^2).
    '''
    y_top = model.m1 if y_top is None else y_top
    scale = retention_scale(model)
    y_start = START_FRACTION * scale
    unbounded = math.isinf(y_top)
    y_end = END_MULTIPLE * scale if unbounded else float(y_top)
    if y_end <= y_start:
        raise DomainError("The G map needs a retention above {}".format(y_start))

    limit = limit_density(model)
    power = model.kappa1 * limit
    kappa1 = model.kappa1
    m1 = model.m1

    def rhs(s, state):
        y = math.exp(s)
        density = g_density(model, min(y, m1))
        return [y * density, kappa1 * (density - limit), y ** (1.0 - power) * math.exp(-state[1]) * density]

    initial = [limit * y_start, 0.0, limit * y_start ** (1.0 - power) / (1.0 - power)]
    atol = [1e-16 * scale, 1e-14, 1e-14 * initial[2]]
    s_start, s_end = math.log(y_start), math.log(y_end)
    result = integrate.solve_ivp(rhs, (s_start, s_end), initial, method="RK45", rtol=rtol, atol=atol,
                                 dense_output=True)
    if not result.success:
        logging.warning("G map integration failed: %s", result.message)
        raise ModelInconsistencyError("The G map could not be integrated: {}".format(result.message))

    tail = 0.0
    if unbounded:
        _, variance = nbar(model, math.inf)
        tail = variance * model.kappa1 / (2.0 * model.delta * y_end)
    logging.debug("G map to y=%s: %d steps, G(y_top)=%s", y_end, result.t.size, result.y[0, -1])
    return GMap(model, result.sol, s_start, s_end, result.y[0].copy(), result.t.copy(), tail, y_end)

def h_slope(model, y):
    '''
    dH/dx at retention y.
    '''
    drift, variance = nbar(model, y)
    numerator = 2.0 * y * drift + (2.0 * model.delta / model.kappa1) * y * y - 2.0 * model.cbar2 * y
    return numerator / variance - model.kappa1

class HMap(RetentionMap):
    '''
    H integrated in x with the state (H, Lambda, E):

        Lambda(x) = int_x0^x kappa1 / H
        E(x) = int_x0^x exp(-Lambda)

    so that on the band g' = g'(x0) exp(-Lambda) and g = g(x0) + g'(x0) E.
    '''
    def __init__(self, model, solution, x_lower, x_upper, y_lower, y_upper):
        self._solution = solution
        super().__init__(model, "H", x_lower, x_upper, y_lower, y_upper)

    def state(self, x):
        '''
        The triple (H, Lambda, E) at reserve x, clipped to the map.
        '''
        scalar = np.ndim(x) == 0
        x = np.clip(np.atleast_1d(np.asarray(x, dtype=float)), self._x_lower, self._x_upper)
        if x.size == 0 or self._solution is None:
            values = np.vstack([np.full_like(x, self._y_lower), np.zeros_like(x), np.zeros_like(x)])
        else:
            values = self._solution(x)
        if scalar:
            return float(values[0][0]), float(values[1][0]), float(values[2][0])
        return values[0], values[1], values[2]

    def retention(self, x):
        retention = self.state(x)[0]
        return np.minimum(retention, self._y_upper) if np.ndim(retention) else min(retention, self._y_upper)

    def decay(self, x):
        '''
        Lambda(x) = int_x0^x kappa1 / H.
        '''
        return self.state(x)[1]

    def area(self, x):
        '''
        E(x) = int_x0^x exp(-Lambda).
        '''
        return self.state(x)[2]

def _terminal(function, direction):
    function.terminal = True
    function.direction = direction
    return function

@numerical
def h_integrate(model, x0, y0, stop, rtol=MAP_RTOL, span=None):
    '''
    Integrate H from H(x0) = y0 until stop (retention_reaches or
    reserve_reaches). Raises ShootingError when the retention leaves (0, M1)
    first, or never reaches a retention target.
    '''
    if model.mode is not DividendMode.BOUNDED:
        raise DomainError("H only exists with capped dividend rates")
    if not 0.0 < y0 <= model.m1:
        raise DomainError("H needs a starting retention in (0, M1], not {}".format(y0))

    scale = retention_scale(model)
    floor = LIMIT_FRACTION * scale
    kappa1 = model.kappa1
    m1 = model.m1

    if stop.kind == "retention":
        if y0 >= stop.target:
            return HMap(model, None, x0, x0, y0, y0)
        end = x0 + (span if span is not None else 10.0 * (x0 + stop.target) + 1.0)
    elif stop.kind == "reserve":
        end = stop.target
        if end < x0:
            raise DomainError("The stop reserve {} lies below the start {}".format(end, x0))
        if end == x0:
            return HMap(model, None, x0, x0, y0, y0)
    else:
        raise DomainError("Unknown stop kind {}".format(stop.kind))

    def rhs(_, state):
        y = min(max(state[0], floor), m1)
        return [h_slope(model, y), kappa1 / y, math.exp(-state[1])]

    events = [_terminal(lambda _, state: state[0] - floor, -1)]
    if stop.kind == "retention":
        events.append(_terminal(lambda _, state: state[0] - stop.target, 1))
    elif not math.isinf(m1):
        events.append(_terminal(lambda _, state: state[0] - m1, 1))

    result = integrate.solve_ivp(rhs, (x0, end), [y0, 0.0, 0.0], method="RK45", rtol=rtol,
                                 atol=[1e-15 * scale, 1e-14, 1e-15], dense_output=True, events=events)
    if not result.success:
        raise ShootingError("H integration failed: {}".format(result.message))

    if result.t_events[0].size:
        raise ShootingError("H fell to zero at x = {} before reaching its target".format(result.t_events[0][0]))
    if stop.kind == "retention":
        if not result.t_events[1].size:
            raise ShootingError("H did not reach the retention {} by x = {}".format(stop.target, end))
        x_end = float(result.t_events[1][0])
        return HMap(model, result.sol, x0, x_end, y0, stop.target)
    if len(result.t_events) > 1 and result.t_events[1].size:
        raise ShootingError("H exceeded M1 at x = {}".format(result.t_events[1][0]))
    return HMap(model, result.sol, x0, end, y0, float(result.y[0, -1]))

class _ShootingResidual:
    '''
    Wraps a shooting residual, remembering every evaluation so the map can be
    checked for monotonicity afterwards. Failed trajectories count as a large
    positive residual.
    '''
    def __init__(self, name, residual, failure_value):
        self._name = name
        self._residual = residual
        self._failure_value = failure_value
        self._samples = []

    def __call__(self, u):
        try:
            value = self._residual(u)
        except ShootingError as err:
            logging.debug("%s: trajectory from u1=%s failed (%s)", self._name, u, err)
            value = self._failure_value
        self._samples.append((u, value))
        return value

    def check_monotone(self, case_tag):
        '''
        Raise ShootingError unless the residual decreased along u.
        '''
        ordered = sorted(self._samples)
        for (u_low, f_low), (u_high, f_high) in zip(ordered, ordered[1:]):
            if u_high - u_low <= MONOTONE_SPACING:
                continue
            if f_high > f_low + MONOTONE_TOL * (1.0 + abs(f_low)):
                logging.warning("%s is not monotone between u1=%s (%s) and u1=%s (%s)", self._name, u_low,
                                f_low, u_high, f_high)
                raise ShootingError("{} is not monotone near u1 = {}".format(self._name, u_low), case_tag)

@numerical
def _shoot(residual, top, case_tag):
    '''
    Find the root of a decreasing residual on (0, top]. The bracket grows
    geometrically from the midpoint of (0, top] towards zero.
    '''
    high = top
    value_high = residual(high)
    if value_high == 0.0:
        return high
    if value_high > 0.0:
        raise CaseClassificationError("The shooting residual is positive at u1 = {}; no bracket".format(top),
                                      case_tag)
    low = 0.5 * top
    for expansion in range(MAX_EXPANSIONS):
        value_low = residual(low)
        logging.debug("shooting bracket %d: [%s, %s], residual %s", expansion, low, high, value_low)
        if value_low == 0.0:
            return low
        if value_low > 0.0:
            root = optimize.brentq(residual, low, high, xtol=SHOOTING_XTOL, maxiter=200)
            residual.check_monotone(case_tag)
            return root
        high = low
        low *= 0.5
    raise CaseClassificationError("No bracketing u1 found in (0, {})".format(top), case_tag)

def _start(gmap, u1):
    return gmap.retention(u1)

def shoot_case_b(model, gammas, delta_gap, gmap=None, case_tag=None):
    '''
    Find u1 such that the H trajectory from (u1, G^-1(u1)) reaches M1 at
    w0 = u1 + delta_gap. Returns (u1, w0).
    '''
    gmap = gmap or build_g_map(model)
    failure = 1e3 * (1.0 + gmap.x_upper)
    top = gmap.x_upper

    def gap(u1):
        hmap = h_integrate(model, u1, _start(gmap, u1), retention_reaches(model.m1), rtol=SHOOTING_RTOL)
        return hmap.x_upper - u1 - delta_gap

    residual = _ShootingResidual("w0(u1) - u1", gap, failure)
    u1 = _shoot(residual, top, case_tag)
    hmap = h_integrate(model, u1, _start(gmap, u1), retention_reaches(model.m1), rtol=SHOOTING_RTOL)
    logging.debug("gap shooting: u1=%s w0=%s (gap %s, gammas at %s)", u1, hmap.x_upper, delta_gap,
                  gammas.retention)
    return u1, hmap.x_upper

def shoot_decay(model, target_retention, target_decay, gmap, case_tag=None):
    '''
    Find u1 such that the H trajectory from (u1, G^-1(u1)) reaches
    target_retention after accumulating int kappa1 / H = target_decay.
    Returns (u1, x_end).
    '''
    if target_decay < 0.0:
        raise CaseClassificationError("A negative decay target {} has no solution".format(target_decay), case_tag)
    failure = 1e3 * (1.0 + abs(target_decay))

    def excess(u1):
        hmap = h_integrate(model, u1, _start(gmap, u1), retention_reaches(target_retention), rtol=SHOOTING_RTOL)
        return hmap.decay(hmap.x_upper) - target_decay

    residual = _ShootingResidual("decay(u1)", excess, failure)
    u1 = _shoot(residual, gmap.x_upper, case_tag)
    hmap = h_integrate(model, u1, _start(gmap, u1), retention_reaches(target_retention), rtol=SHOOTING_RTOL)
    return u1, hmap.x_upper

def shoot_case_c(model, m0, gmap=None, case_tag=None):
    '''
    Find u1 such that the H trajectory from (u1, G^-1(u1)) reaches M0 at u2
    with int_u1^u2 kappa1 / H = ln((1 - a) / a). Returns (u1, u2, H map).
    '''
    gmap = gmap or build_g_map(model, m0)
    if model.a <= 0.0:
        raise CaseClassificationError("With a = 0 Line 1 never pays and u2 does not exist", case_tag)
    target = math.log((1.0 - model.a) / model.a)
    u1, _ = shoot_decay(model, m0, target, gmap, case_tag)
    hmap = h_integrate(model, u1, _start(gmap, u1), retention_reaches(m0))
    logging.debug("Case C shooting: u1=%s u2=%s", u1, hmap.x_upper)
    return u1, hmap.x_upper, hmap

def m0_residual(model, y):
    '''
    f(y) = gamma4-(y) + kappa1 / y, whose root is M0.
    '''
    return gamma4_minus(model, y) + model.kappa1 / y

@numerical
def solve_m0(model):
    '''
    The retention cap M0 of the regime without a reinsurance threshold: the
    smallest root of gamma4-(y) + kappa1 / y on (0, M1).
    '''
    if model.mode is not DividendMode.BOUNDED:
        raise DomainError("M0 only exists with capped dividend rates")
    upper = model.m1
    if math.isinf(upper):
        upper = retention_scale(model)
        for _ in range(MAX_EXPANSIONS):
            if m0_residual(model, upper) < 0.0:
                break
            upper *= 2.0
        else:
            raise CaseClassificationError("gamma4-(y) + kappa1 / y stays positive; M0 does not exist")
    elif m0_residual(model, upper) >= 0.0:
        logging.warning("f(M1) = %s is not negative; M0 does not exist", m0_residual(model, upper))
        raise CaseClassificationError("gamma4-(M1) + kappa1 / M1 >= 0, so there is no M0 in (0, M1)")

    grid = np.geomspace(1e-6 * upper, upper, M0_SCAN_POINTS)
    values = np.array([m0_residual(model, y) for y in grid])
    changes = np.nonzero(np.sign(values[:-1]) != np.sign(values[1:]))[0]
    if changes.size == 0:
        raise CaseClassificationError("No sign change of gamma4-(y) + kappa1 / y found on (0, {})".format(upper))
    if changes.size > 1:
        logging.warning("gamma4-(y) + kappa1 / y changes sign %d times on (0, %s); using the smallest root",
                        changes.size, upper)
    first = changes[0]
    root = optimize.bisect(lambda y: m0_residual(model, y), grid[first], grid[first + 1], xtol=1e-13,
                           maxiter=200)
    logging.debug("M0 = %s (residual %s)", root, m0_residual(model, root))
    return root
