'''
The optimal controls at a reserve level and the capital injection automaton.

Reinsurance and dividends depend only on the aggregate reserve
x = x1 + x2. Injections look at the reserve pair: the quadrant is cut into
regions by the levels (delta0, delta1, delta2) when dividends are capped, or
by u1 when they are not, and a line reaching zero is refilled from the other
one down to the level of its region.
'''

# core libraries
import logging
import math

# third party libraries
import numpy as np
from scipy import interpolate

# twoline libraries
from . claims import limited_mean, limited_second_moment
from . exceptions import ContractViolationError, DomainError
from . model import CaseTag, ControlDecision, InjectionOutcome, Region, Trigger

# knots of the precomputed moment tables used by simulation
TABLE_POINTS = 2049

def _check_reserves(*reserves):
    for reserve in reserves:
        if np.any(np.isnan(reserve)) or np.any(np.asarray(reserve) < 0.0):
            logging.warning("Negative reserve passed to the strategy: %s", reserve)
            raise DomainError("Reserves must be non-negative")

def _retention_cap(policy):
    if policy.case_tag is CaseTag.BOUNDED_C:
        return policy.m0
    if policy.case_tag is CaseTag.UNBOUNDED_INFINITE:
        return math.inf
    return policy.model.m1

def retention_array(policy, xs):
    '''
    Line 1's optimal retention at the aggregate reserves xs.
    '''
    xs = np.asarray(xs, dtype=float)
    _check_reserves(xs)
    tag = policy.case_tag
    retention = np.full_like(xs, _retention_cap(policy))
    if tag in (CaseTag.BOUNDED_A, CaseTag.UNBOUNDED_FINITE):
        low = xs < policy.w0
    else:
        low = xs < policy.u1
    if np.any(low):
        retention[low] = policy.gmap.retention(xs[low])

    if tag in (CaseTag.BOUNDED_B, CaseTag.BOUNDED_C) and policy.hmap is not None:
        upper = policy.w0 if tag is CaseTag.BOUNDED_B else policy.u2
        band = (xs >= policy.u1) & (xs < upper)
        if np.any(band):
            retention[band] = policy.hmap.retention(xs[band])
    return retention

def controls_array(policy, xs):
    '''
    Arrays (pi1, pi2, c1, c2) at the aggregate reserves xs. With unbounded
    dividends the rates are zero; dividends are paid as lumps instead.
    '''
    xs = np.asarray(xs, dtype=float)
    model = policy.model
    pi1 = retention_array(policy, xs)
    pi2 = np.minimum(model.ratio * pi1, model.m2)
    if policy.case_tag.bounded:
        c1 = np.where(xs >= policy.u2, model.cbar1, 0.0)
        c2 = np.where(xs >= policy.u1, model.cbar2, 0.0)
    else:
        c1 = np.zeros_like(xs)
        c2 = np.zeros_like(xs)
    return pi1, pi2, c1, c2

def controls(policy, x):
    '''
    The optimal ControlDecision at aggregate reserve x.
    '''
    if np.isnan(x) or x < 0.0:
        logging.warning("Controls requested at negative reserve %s", x)
        raise DomainError("Controls are defined for x >= 0, not {}".format(x))
    pi1, pi2, c1, c2 = (float(value[0]) for value in controls_array(policy, np.array([float(x)])))
    return ControlDecision(float(x), pi1, pi2, c1, c2)

def strategy_table(policy, xs):
    '''
    Rows (x, pi1, pi2, c1, c2) over the reserves xs, for CSV export.
    '''
    xs = np.asarray(xs, dtype=float)
    pi1, pi2, c1, c2 = controls_array(policy, xs)
    return [list(row) for row in zip(xs.tolist(), pi1.tolist(), pi2.tolist(), c1.tolist(), c2.tolist())]

def classify_region(policy, x1, x2):
    '''
    The injection Region of the reserve pair (x1, x2).
    '''
    _check_reserves(x1, x2)
    total = x1 + x2
    if not policy.case_tag.bounded:
        u1 = policy.u1
        if x1 > u1:
            return Region.A1
        if x2 > 0.0 and total > u1:
            return Region.A2
        return Region.A3

    delta0, delta1, delta2 = policy.deltas
    if x2 > delta2:
        return Region.A1
    if x1 > 0.0 and total > delta2:
        return Region.A2
    if x2 > delta1:
        return Region.A3
    if x1 > 0.0 and total > delta1:
        return Region.A4
    if x2 > delta0:
        return Region.A5
    if x1 > 0.0 and total > delta0:
        return Region.A6
    return Region.A7

# donor floor per region when Line 1 (resp. Line 2) reaches zero
_LINE1_FLOORS = {Region.A1: 2, Region.A3: 1, Region.A5: 0}
_LINE2_FLOORS = {Region.A2: 2, Region.A4: 1, Region.A6: 0}

def injection(policy, x1, x2, trigger=Trigger.NONE):
    '''
    Apply the injection rule to the pair (x1, x2) after trigger. Returns an
    InjectionOutcome; a line at zero that receives nothing is ruined.
    '''
    _check_reserves(x1, x2)
    trigger = Trigger(trigger)
    if trigger is Trigger.LINE1_AT_ZERO and x1 != 0.0:
        logging.warning("Line 1 trigger with x1 = %s", x1)
        raise ContractViolationError("Line 1 cannot trigger an injection with reserve {}".format(x1))
    if trigger is Trigger.LINE2_AT_ZERO and x2 != 0.0:
        logging.warning("Line 2 trigger with x2 = %s", x2)
        raise ContractViolationError("Line 2 cannot trigger an injection with reserve {}".format(x2))

    region = classify_region(policy, x1, x2)
    if not policy.case_tag.bounded:
        return _unbounded_injection(policy, region, x1, x2, trigger)

    deltas = policy.deltas
    transfer = 0.0
    if trigger is Trigger.LINE1_AT_ZERO and region in _LINE1_FLOORS:
        transfer = x2 - deltas[_LINE1_FLOORS[region]]
    elif trigger is Trigger.LINE2_AT_ZERO and region in _LINE2_FLOORS:
        transfer = -(x1 - deltas[_LINE2_FLOORS[region]])

    if transfer == 0.0:
        return InjectionOutcome(region, 0.0, x1, x2, ruined=trigger is not Trigger.NONE)
    logging.debug("%s in %s: transfer %s", trigger.value, region.value, transfer)
    if transfer > 0.0:
        return InjectionOutcome(region, transfer, transfer, x1 + x2 - transfer)
    return InjectionOutcome(region, transfer, x1 + x2 + transfer, -transfer)

def _unbounded_injection(policy, region, x1, x2, trigger):
    u1 = policy.u1
    if region is Region.A1:
        moved = x1 - u1
        return InjectionOutcome(region, -moved, u1, x2 + moved)
    if region is Region.A2:
        lump = x1 + x2 - u1
        return InjectionOutcome(region, 0.0, x1, x2 - lump, lump=lump)
    return InjectionOutcome(region, 0.0, x1, x2, ruined=trigger is not Trigger.NONE)

def _table_grid(top):
    '''
    Knots geometric near zero, where the retention moves fastest, and uniform
    above.
    '''
    head = np.geomspace(1e-9 * top, 0.05 * top, TABLE_POINTS // 4)
    body = np.linspace(0.05 * top, top, TABLE_POINTS - TABLE_POINTS // 4)
    return np.unique(np.concatenate([[0.0], head, body]))

class Strategy:
    '''
    A feedback policy in the form the simulator runs it: retained moments and
    dividend rates as functions of the aggregate reserve, plus the injection
    rule. The moments below the top threshold are tabulated once and read
    through monotone cubic interpolation.
    '''
    def __init__(self, policy, name="optimal"):
        self._policy = policy
        self._name = name
        model = policy.model
        self._top = policy.top
        grid = _table_grid(self._top)
        pi1, pi2, _, _ = controls_array(policy, grid)
        self._tables = [interpolate.PchipInterpolator(grid, values, extrapolate=False) for values in
                        (limited_mean(model.dist1, pi1), limited_second_moment(model.dist1, pi1),
                         limited_mean(model.dist2, pi2), limited_second_moment(model.dist2, pi2))]
        top1, top2, _, _ = controls_array(policy, np.array([self._top]))
        self._ceiling = (limited_mean(model.dist1, top1[0]), limited_second_moment(model.dist1, top1[0]),
                         limited_mean(model.dist2, top2[0]), limited_second_moment(model.dist2, top2[0]))

    @property
    def name(self):
        '''
        Return the strategy's label.
        '''
        return self._name

    @property
    def policy(self):
        '''
        Return the SolvedPolicy behind the strategy.
        '''
        return self._policy

    @property
    def model(self):
        '''
        Return the normalized model.
        '''
        return self._policy.model

    @property
    def collaborates(self):
        '''
        Return True when lines may refill each other.
        '''
        return True

    def moments(self, xs):
        '''
        Arrays (mu1, sigma1^2, mu2, sigma2^2) of the retained claims at the
        aggregate reserves xs.
        '''
        xs = np.asarray(xs, dtype=float)
        above = xs >= self._top
        clipped = np.clip(xs, 0.0, self._top)
        return tuple(np.where(above, ceiling, table(clipped)) for table, ceiling in zip(self._tables,
                                                                                       self._ceiling))

    def rates(self, xs):
        '''
        Arrays (c1, c2) of dividend rates at the aggregate reserves xs.
        '''
        xs = np.asarray(xs, dtype=float)
        policy = self._policy
        if not policy.case_tag.bounded:
            return np.zeros_like(xs), np.zeros_like(xs)
        model = policy.model
        return np.where(xs >= policy.u2, model.cbar1, 0.0), np.where(xs >= policy.u1, model.cbar2, 0.0)

    def inject(self, x1, x2, trigger):
        '''
        The injection rule; see injection().
        '''
        return injection(self._policy, x1, x2, trigger)

    @property
    def lump_level(self):
        '''
        Return the aggregate level above which lump dividends are paid (u1),
        or None when dividends are capped.
        '''
        return None if self._policy.case_tag.bounded else self._policy.u1

    def reflect(self, x1, x2):
        '''
        Arrays (x1, x2, lump) after the singular controls of the uncapped
        regime; the identity when dividends are capped.
        '''
        if self.lump_level is None:
            return x1, x2, np.zeros_like(x1)
        return reflect_at(self.lump_level, x1, x2)

def reflect_at(level, x1, x2, transfer=True):
    '''
    Vectorised uncapped-dividend rule at level u1: Line 1 hands anything above
    u1 to Line 2 (unless transfer is False), then Line 2 pays out whatever
    lifts the aggregate above u1. Returns (x1, x2, lump).
    '''
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if transfer:
        moved = np.maximum(x1 - level, 0.0)
        x1 = x1 - moved
        x2 = x2 + moved
    lump = np.where(x1 <= level, np.minimum(np.maximum(x1 + x2 - level, 0.0), x2), 0.0)
    return x1, x2 - lump, lump
