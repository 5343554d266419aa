'''
Independent checks of a solved policy: the HJB equation by grid search over
the controls, smooth fit at the thresholds, finite differences against the
analytic derivatives, the shape of g and of the retention, and the claim
that mixed treaties are beaten by pure excess-of-loss.

Every check returns a VerificationReport; run_all merges them by name.
'''

# core libraries
import logging
import math

# third party libraries
import numpy as np

# twoline libraries
from . claims import dominating_pure_xl, drift_gain, limited_mean, limited_second_moment
from . exceptions import DomainError
from . model import CheckResult, SimConfig, VerificationReport
from . simulate import mixed_xl, paired_difference, pure_xl, simulate_value
from . strategy import Strategy, retention_array

HJB_GRID = 129
HJB_RELATIVE = 1e-6
# share of the individual generator terms allowed as rounding noise
HJB_NOISE = 1e-8
SMOOTH_FIT_RELATIVE = 1e-7
FD_RELATIVE = 1e-6
# relative noise level of g read from the integrated retention maps
VALUE_NOISE = 1e-11

def default_grid(policy, points=2001):
    '''
    Geometric near zero and uniform above, up to the top threshold plus 3.
    '''
    top = policy.top + 3.0
    head = np.geomspace(1e-6 * top, 0.05 * top, points // 4)
    body = np.linspace(0.05 * top, top, points - points // 4)
    return np.unique(np.concatenate([head, body]))

def _result(name, grid_size, residuals, tolerances, locations, detail=""):
    residuals = np.asarray(residuals, dtype=float)
    tolerances = np.asarray(tolerances, dtype=float)
    if residuals.size == 0:
        return CheckResult(name, grid_size, 0.0, 0.0, 0.0, True, detail)
    ratios = np.where(tolerances > 0.0, residuals / np.where(tolerances > 0.0, tolerances, 1.0),
                      np.where(residuals > 0.0, np.inf, 0.0))
    worst = int(np.argmax(ratios))
    passed = bool(np.all(residuals <= tolerances))
    if not passed and not detail:
        detail = "residual {:.3e} exceeds {:.3e} at x = {:.6g}".format(residuals[worst], tolerances[worst],
                                                                      float(locations[worst]))
    return CheckResult(name, grid_size, float(residuals[worst]), float(locations[worst]),
                       float(tolerances[worst]), passed, detail)

def _aggregate(model, pi):
    '''
    N1(pi) and N2(pi) with Line 2 on the coupled retention; pi may be an
    array and larger than M1.
    '''
    pi = np.asarray(pi, dtype=float)
    second = np.minimum(model.ratio * pi, model.m2)
    drift = model.kappa1 * limited_mean(model.dist1, pi) + model.kappa2 * limited_mean(model.dist2, second)
    variance = limited_second_moment(model.dist1, pi) + limited_second_moment(model.dist2, second)
    return drift, variance

def _retention_grid(model, optimum):
    centre = 0.0 if math.isinf(optimum) else optimum
    upper = model.m1
    if math.isinf(upper):
        upper = 4.0 * max(centre, limited_mean(model.dist1, math.inf))
    grid = np.linspace(0.0, upper, HJB_GRID)
    cell = grid[1] - grid[0]
    refined = centre + cell * np.linspace(-1.0, 1.0, 17)
    candidates = np.concatenate([grid, refined[(refined >= 0.0) & (refined <= upper)], [optimum]])
    return np.unique(candidates), cell

def hjb_residual(policy, grid=None):
    '''
    The HJB equation at every grid point: the supremum of the generator over
    the retention grid and the dividend rates {0, cbar}, and the generator
    at the closed-form controls, both held to 1e-6 delta g(x) plus a rounding
    allowance. Uncapped dividends also check g' >= 1 - a and g' >= a.
    '''
    grid = default_grid(policy) if grid is None else np.asarray(grid, dtype=float)
    model = policy.model
    a, delta = model.a, model.delta
    values, slopes, curvatures = policy.value_array(grid)
    optimal = retention_array(policy, grid)
    bounded = policy.case_tag.bounded

    sup_residuals, closed_residuals, argmax_gaps, tolerances, cells = [], [], [], [], []
    for x, g, g1, g2, optimum in zip(grid, values, slopes, curvatures, optimal):
        retentions, cell = _retention_grid(model, optimum)
        drift, variance = _aggregate(model, retentions)
        objective = 0.5 * variance * g2 + drift * g1
        best = int(np.argmax(objective))
        closed_drift, closed_variance = _aggregate(model, optimum)
        closed = 0.5 * closed_variance * g2 + closed_drift * g1
        if bounded:
            dividends = max(0.0, model.cbar1 * (a - g1)) + max(0.0, model.cbar2 * (1.0 - a - g1))
            c1 = model.cbar1 if x >= policy.u2 else 0.0
            c2 = model.cbar2 if x >= policy.u1 else 0.0
            closed_dividends = c1 * (a - g1) + c2 * (1.0 - a - g1)
        else:
            dividends = closed_dividends = 0.0

        supremum = objective[best] + dividends - delta * g
        closed_value = closed + closed_dividends - delta * g
        scale = abs(0.5 * closed_variance * g2) + abs(closed_drift * g1) + delta * abs(g)
        tolerance = HJB_RELATIVE * delta * abs(g) + HJB_NOISE * scale
        if bounded or x < policy.u1:
            sup_residuals.append(abs(supremum))
            closed_residuals.append(abs(closed_value))
        else:
            sup_residuals.append(max(supremum, 0.0))
            closed_residuals.append(max(closed_value, 0.0))
        tie = objective[best] - closed <= tolerance
        argmax_gaps.append(0.0 if tie else abs(retentions[best] - optimum))
        tolerances.append(tolerance)
        cells.append(cell)

    results = [_result("hjb-supremum", grid.size, sup_residuals, tolerances, grid),
               _result("hjb-closed-form", grid.size, closed_residuals, tolerances, grid),
               _result("hjb-argmax", grid.size, argmax_gaps, cells, grid)]
    if not bounded:
        below = np.maximum((1.0 - a) - slopes, 0.0)
        floor = 1e-9 * np.maximum(1.0, np.abs(slopes))
        results.append(_result("hjb-gradient", grid.size, below, floor, grid))
    report = VerificationReport(results)
    logging.debug("HJB residual check: %s", "pass" if report.passed else "FAIL")
    return report

def smooth_fit(policy):
    '''
    One-sided g, g' and g'' at every boundary between value segments.
    '''
    segments = policy.segments
    jumps = {"g": [], "g1": [], "g2": []}
    tolerances = {"g": [], "g1": [], "g2": []}
    locations = []
    for left, right in zip(segments, segments[1:]):
        x = np.array([right.lower])
        left_values = [float(v[0]) for v in left.evaluate(x)]
        right_values = [float(v[0]) for v in right.evaluate(x)]
        locations.append(right.lower)
        slope = max(abs(left_values[1]), abs(right_values[1]))
        for key, lhs, rhs in zip(("g", "g1", "g2"), left_values, right_values):
            jumps[key].append(abs(lhs - rhs))
            # g'' is measured against g' per unit reserve where it nearly vanishes
            scale = max(abs(lhs), abs(rhs), slope) if key == "g2" else max(abs(lhs), abs(rhs))
            tolerances[key].append(SMOOTH_FIT_RELATIVE * scale + 1e-12)
    value, _, _ = policy.value(0.0)
    results = [_result("smooth-fit-{}".format(key), len(locations), jumps[key], tolerances[key], locations)
               for key in ("g", "g1", "g2")]
    results.append(_result("value-at-zero", 1, [abs(value)], [1e-12], [0.0]))
    return VerificationReport(results)

def derivative_fd_check(policy, grid=None):
    '''
    Central differences of g against the analytic g' and g''. Grid points
    within ten steps of a threshold are skipped. The tolerance is 1e-6
    relative plus the difference formulas' truncation estimate and the
    rounding noise of g.
    '''
    grid = default_grid(policy, 401) if grid is None else np.asarray(grid, dtype=float)
    top = policy.top
    first_step = 1e-5 * top
    second_step = 1e-3 * top
    thresholds = np.array([segment.lower for segment in policy.segments[1:]])
    guard = 10.0 * second_step
    keep = grid > guard
    if thresholds.size:
        keep &= np.min(np.abs(grid[:, None] - thresholds[None, :]), axis=1) > guard
    xs = grid[keep]

    g, g1, g2 = policy.value_array(xs)
    plus1, _, curv_plus1 = policy.value_array(xs + first_step)
    minus1, _, curv_minus1 = policy.value_array(xs - first_step)
    plus2, _, curv_plus2 = policy.value_array(xs + second_step)
    minus2, _, curv_minus2 = policy.value_array(xs - second_step)

    fd1 = (plus1 - minus1) / (2.0 * first_step)
    fd2 = (plus2 - 2.0 * g + minus2) / (second_step * second_step)
    noise = VALUE_NOISE * np.abs(g)
    tolerance1 = (FD_RELATIVE * np.abs(g1) + np.abs(curv_plus1 - curv_minus1) * first_step / 12.0
                  + 2.0 * noise / first_step)
    tolerance2 = (FD_RELATIVE * np.abs(g2) + np.abs(curv_plus2 - 2.0 * g2 + curv_minus2) / 12.0
                  + 4.0 * noise / second_step ** 2)
    return VerificationReport([
        _result("fd-first-derivative", xs.size, np.abs(fd1 - g1), tolerance1, xs),
        _result("fd-second-derivative", xs.size, np.abs(fd2 - g2), tolerance2, xs)])

def shape_check(policy, grid=None):
    '''
    g' > 0, g' non-increasing, g'' <= 1e-9, the g' band of the capped cases
    and a non-decreasing retention.
    '''
    grid = default_grid(policy) if grid is None else np.asarray(grid, dtype=float)
    a = policy.model.a
    _, slopes, curvatures = policy.value_array(grid)
    steps = np.diff(slopes)
    results = [
        _result("increasing", grid.size, np.maximum(-slopes, 0.0), np.zeros_like(slopes), grid),
        _result("concavity", grid.size, np.maximum(curvatures, 0.0), np.full_like(curvatures, 1e-9), grid),
        _result("slope-monotone", max(grid.size - 1, 0), np.maximum(steps, 0.0),
                1e-9 * np.maximum(1.0, np.abs(slopes[1:])), grid[1:])]

    retention = retention_array(policy, grid)
    finite = np.isfinite(retention)
    drops = np.maximum(-np.diff(retention[finite]), 0.0)
    results.append(_result("retention-monotone", drops.size, drops,
                           1e-12 * np.maximum(1.0, retention[finite][1:]), grid[finite][1:]))

    if policy.case_tag.bounded:
        lower = grid <= policy.u2 if not math.isinf(policy.u2) else np.ones_like(grid, dtype=bool)
        band = grid <= policy.u1
        shortfall = np.concatenate([np.maximum(a - slopes[lower], 0.0),
                                    np.maximum((1.0 - a) - slopes[band], 0.0)])
        places = np.concatenate([grid[lower], grid[band]])
        results.append(_result("slope-band", shortfall.size, shortfall, 1e-8 * np.ones_like(shortfall), places))
        at_thresholds = [abs(policy.value(policy.u1)[1] - (1.0 - a))]
        places = [policy.u1]
        if not math.isinf(policy.u2):
            at_thresholds.append(abs(policy.value(policy.u2)[1] - a))
            places.append(policy.u2)
        results.append(_result("slope-at-thresholds", len(places), at_thresholds, [1e-7] * len(places), places))
    return VerificationReport(results)

def dominance_check(policy, samples, config=None, start=None, seed=7):
    '''
    Mixed proportional and excess-of-loss treaties against their pure
    excess-of-loss replacements. samples is a list of (theta, pi) pairs or a
    number of random pairs to draw.
    '''
    model = policy.model
    config = config or SimConfig(dt=1e-2, horizon=16.0 / model.delta, paths=400, batch_size=400)
    if isinstance(samples, int):
        generator = np.random.default_rng(seed)
        upper = model.m1 if not math.isinf(model.m1) else 2.0 * limited_mean(model.dist1, math.inf)
        samples = [(float(theta), float(pi)) for theta, pi in zip(generator.uniform(0.05, 0.95, samples),
                                                                  generator.uniform(0.05, 1.0, samples) * upper)]
    x1, x2 = start if start is not None else (0.5 * policy.u1, 0.5 * policy.u1)
    base = Strategy(policy)

    matches, gains, shortfalls, tolerances, labels = [], [], [], [], []
    for index, (theta, pi) in enumerate(samples):
        replacement = dominating_pure_xl(model.dist1, theta, pi)
        target = theta * theta * limited_second_moment(model.dist1, pi / theta)
        matches.append(abs(limited_second_moment(model.dist1, replacement) - target))
        gains.append(max(-model.kappa1 * drift_gain(model.dist1, theta, pi), 0.0))

        mixed = simulate_value(mixed_xl(theta, pi)(base), x1, x2, config)
        pure = simulate_value(pure_xl(theta, pi)(base), x1, x2, config)
        comparison = paired_difference(pure, mixed, "theta={:g} pi={:g}".format(theta, pi))
        shortfalls.append(max(-comparison.difference, 0.0))
        tolerances.append(2.5 * comparison.paired_stderr)
        labels.append(float(index))
        logging.debug("dominance sample %d: %s", index, comparison.to_dict())

    count = len(labels)
    return VerificationReport([
        _result("dominance-variance-match", count, matches, [1e-12] * count, labels),
        _result("dominance-drift-gain", count, gains, [1e-14] * count, labels),
        _result("dominance-simulation", count, shortfalls, tolerances, labels)])

def run_all(policy, grid=None, dominance_samples=0, config=None):
    '''
    Every check merged into one report.
    '''
    report = hjb_residual(policy, grid)
    report = report.merge(smooth_fit(policy))
    report = report.merge(derivative_fd_check(policy))
    report = report.merge(shape_check(policy, grid))
    if dominance_samples:
        report = report.merge(dominance_check(policy, dominance_samples, config))
    logging.info("%d of %d checks passed", len(report) - len(report.failures()), len(report))
    return report

def relax(report, factor):
    '''
    Judge every check of a report again with its tolerance scaled by factor.
    The worst point of each check is the one with the largest residual to
    tolerance ratio, so scaling keeps it the deciding point.
    '''
    if not factor > 0.0:
        raise DomainError("The tolerance factor must be positive, not {}".format(factor))
    results = []
    for result in report.results:
        tolerance = result.tolerance * factor
        passed = result.max_residual <= tolerance
        detail = result.detail if not passed else ""
        if not passed and not detail:
            detail = "residual {:.3e} exceeds {:.3e} at x = {:.6g}".format(result.max_residual, tolerance,
                                                                          result.location)
        results.append(CheckResult(result.name, result.grid_size, result.max_residual, result.location, tolerance,
                                   passed, detail))
    return VerificationReport(results)
