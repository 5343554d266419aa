'''
Case classification, smooth-fit constants and the piecewise value function g.

A solved policy is built in two steps. The case-specific search finds a few
primary numbers (K3- for the reinsurance-first regime, u1 for the regimes
with an H band, u1 and M0 when Line 1 always cedes risk). ``assemble`` then
derives every other threshold and constant, integrates the retention maps
and lays out the value function as a list of segments. Loading a saved
policy repeats only the second step, so the reloaded value function is the
same float for float.
'''

# core libraries
from abc import ABC, abstractmethod
import configparser
import json
import logging
import math

# third party libraries
import numpy as np

# twoline libraries
from . coeffs import (alpha3, alpha_ladder, dividend_bound, gamma4_minus, gamma_roots, gamma_set, k3plus, nbar,
                      psi_at, psi_zeta, solve_k3minus)
from . exceptions import CaseClassificationError, DomainError, UnsupportedConfigurationError, ValidationError
from . freeboundary import (build_g_map, h_integrate, retention_reaches, shoot_case_b, shoot_case_c, shoot_decay,
                            solve_m0)
from . model import AggregateModel, CaseTag, DividendMode

CLOSURES = ("smooth", "gap")

class Segment(ABC):
    '''
    One piece of the value function on [lower, upper).
    '''
    def __init__(self, kind, lower, upper):
        self._kind = kind
        self._lower = lower
        self._upper = upper

    @property
    def kind(self):
        '''
        Return the segment's label.
        '''
        return self._kind

    @property
    def lower(self):
        '''
        Return the segment's left end.
        '''
        return self._lower

    @property
    def upper(self):
        '''
        Return the segment's right end (possibly infinite).
        '''
        return self._upper

    @abstractmethod
    def evaluate(self, xs):
        '''
        Return arrays (g, g', g'') at the reserves xs.
        '''
        pass

class RetentionSegment(Segment):
    '''
    The band below the first switching level, where Line 1 retains G^-1(x):
    g' = scale * exp(w(y_ref) - w(y)) with w = L + p ln y read from the G map.
    '''
    def __init__(self, lower, upper, gmap, kappa1, scale, reference):
        super().__init__("retention", lower, upper)
        self._gmap = gmap
        self._kappa1 = kappa1
        self._scale = scale
        self._reference = reference
        self._reference_weight = float(gmap.log_weight(reference))

    def evaluate(self, xs):
        ys = np.asarray(self._gmap.retention(xs), dtype=float)
        _, _, masses = self._gmap.state(ys)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            slopes = self._scale * np.exp(self._reference_weight - self._gmap.log_weight(ys))
            values = self._scale * math.exp(self._reference_weight) * masses
            curvatures = -self._kappa1 * slopes / ys
        # a sliver beyond the end of an unbounded map is continued linearly
        beyond = np.maximum(xs - self._gmap.x_upper, 0.0)
        values = values + np.where(beyond > 0.0, slopes * beyond, 0.0)
        return values, slopes, curvatures

class BandSegment(Segment):
    '''
    The band where only Line 2 pays dividends and Line 1 retains H(x):
    g = g(x0) + g'(x0) E(x) and g' = g'(x0) exp(-Lambda(x)).
    '''
    def __init__(self, lower, upper, hmap, kappa1, base, slope):
        super().__init__("band", lower, upper)
        self._hmap = hmap
        self._kappa1 = kappa1
        self._base = base
        self._slope = slope

    def evaluate(self, xs):
        retention, decay, area = self._hmap.state(xs)
        slopes = self._slope * np.exp(-decay)
        return self._base + self._slope * area, slopes, -self._kappa1 * slopes / retention

class ExponentialSegment(Segment):
    '''
    A sum of exponentials plus a constant: sum K e^(gamma (x - anchor)) + C.
    '''
    def __init__(self, lower, upper, terms, constant=0.0):
        super().__init__("exponential", lower, upper)
        self._terms = list(terms)
        self._constant = constant

    def evaluate(self, xs):
        values = np.full_like(xs, self._constant)
        slopes = np.zeros_like(xs)
        curvatures = np.zeros_like(xs)
        for coefficient, rate, anchor in self._terms:
            if coefficient == 0.0:
                continue
            term = coefficient * np.exp(rate * (xs - anchor))
            values = values + term
            slopes = slopes + rate * term
            curvatures = curvatures + rate * rate * term
        return values, slopes, curvatures

class LinearSegment(Segment):
    '''
    slope (x - anchor) + intercept.
    '''
    def __init__(self, lower, upper, slope, anchor, intercept):
        super().__init__("linear", lower, upper)
        self._slope = slope
        self._anchor = anchor
        self._intercept = intercept

    def evaluate(self, xs):
        return (self._slope * (xs - self._anchor) + self._intercept, np.full_like(xs, self._slope),
                np.zeros_like(xs))

class SolvedPolicy:
    '''
    An immutable solved problem: case tag, thresholds, constants, root
    families, retention maps and the value function segments.
    '''
    def __init__(self, model, case_tag, closure, primary, thresholds, constants, gammas, gmap, hmap, segments,
                 diagnostics=None):
        self._model = model
        self._case_tag = case_tag
        self._closure = closure
        self._primary = dict(primary)
        self._thresholds = dict(thresholds)
        self._constants = dict(constants)
        self._gammas = gammas
        self._gmap = gmap
        self._hmap = hmap
        self._segments = [segment for segment in segments if segment.upper > segment.lower]
        self._lowers = np.array([segment.lower for segment in self._segments])
        self._diagnostics = dict(diagnostics or {})

    @property
    def model(self):
        '''
        Return the normalized AggregateModel.
        '''
        return self._model

    @property
    def case_tag(self):
        '''
        Return the CaseTag.
        '''
        return self._case_tag

    @property
    def closure(self):
        '''
        Return the Case B closure used ("smooth" or "gap").
        '''
        return self._closure

    @property
    def primary(self):
        '''
        Return the numbers the case search produced; everything else derives
        from them.
        '''
        return dict(self._primary)

    @property
    def thresholds(self):
        '''
        Return {"w0", "u1", "u2", "m0"}; absent thresholds are None.
        '''
        return dict(self._thresholds)

    @property
    def w0(self):
        '''
        Return the reinsurance threshold (infinite when Line 1 always cedes).
        '''
        return self._thresholds["w0"]

    @property
    def u1(self):
        '''
        Return the level where g' falls to 1 - a.
        '''
        return self._thresholds["u1"]

    @property
    def u2(self):
        '''
        Return the level where g' falls to a (None with unbounded dividends).
        '''
        return self._thresholds["u2"]

    @property
    def m0(self):
        '''
        Return the retention cap when Line 1 always cedes risk, else None.
        '''
        return self._thresholds["m0"]

    @property
    def constants(self):
        '''
        Return the named constants of the value function.
        '''
        return dict(self._constants)

    @property
    def gammas(self):
        '''
        Return the GammaSet at M1 (None when M1 is infinite).
        '''
        return self._gammas

    @property
    def gmap(self):
        '''
        Return the G retention map.
        '''
        return self._gmap

    @property
    def hmap(self):
        '''
        Return the H retention map, or None.
        '''
        return self._hmap

    @property
    def segments(self):
        '''
        Return the value function's segments, left to right.
        '''
        return list(self._segments)

    @property
    def diagnostics(self):
        '''
        Return extra numbers recorded while solving.
        '''
        return dict(self._diagnostics)

    @property
    def deltas(self):
        '''
        Return the injection levels (delta0, delta1, delta2); None with
        unbounded dividends.
        '''
        if not self._case_tag.bounded:
            return None
        w0, u1, u2 = self.w0, self.u1, self.u2
        if self._case_tag is CaseTag.BOUNDED_A:
            return w0, u1, u2
        if self._case_tag is CaseTag.BOUNDED_B:
            return u1, w0, u2
        return u1, u1, u2

    @property
    def top(self):
        '''
        Return the largest finite reserve threshold.
        '''
        finite = [value for key, value in self._thresholds.items()
                  if key != "m0" and value is not None and not math.isinf(value)]
        return max(finite)

    def value_array(self, xs):
        '''
        Return arrays (g, g', g'') at the reserves xs.
        '''
        xs = np.asarray(xs, dtype=float)
        flat = np.atleast_1d(xs).ravel()
        if np.any(np.isnan(flat)) or np.any(flat < 0.0):
            logging.warning("Value requested at negative reserve: %s", flat[np.argmin(flat)])
            raise DomainError("The value function is defined for x >= 0")
        values, slopes, curvatures = (np.empty_like(flat) for _ in range(3))
        owners = np.clip(np.searchsorted(self._lowers, flat, side="right") - 1, 0, len(self._segments) - 1)
        for index in np.unique(owners):
            mask = owners == index
            values[mask], slopes[mask], curvatures[mask] = self._segments[index].evaluate(flat[mask])
        shape = np.shape(xs)
        return values.reshape(shape), slopes.reshape(shape), curvatures.reshape(shape)

    def value(self, x):
        '''
        Return (g, g', g'') at one reserve x.
        '''
        values, slopes, curvatures = self.value_array(np.array([float(x)]))
        return float(values[0]), float(slopes[0]), float(curvatures[0])

    def to_text(self):
        '''
        The policy as a key = value document.
        '''
        parser = _parser()
        parser["policy"] = {"case": self._case_tag.value, "closure": self._closure}
        model = self._model.to_dict()
        model["dist1"] = json.dumps(model["dist1"], sort_keys=True)
        model["dist2"] = json.dumps(model["dist2"], sort_keys=True)
        parser["model"] = {key: _text(value) for key, value in model.items() if value is not None}
        parser["primary"] = {key: _text(value) for key, value in self._primary.items()}
        parser["thresholds"] = {key: _text(value) for key, value in self._thresholds.items() if value is not None}
        parser["constants"] = {key: _text(value) for key, value in self._constants.items() if value is not None}
        if self._gammas is not None:
            parser["gammas"] = {key: _text(value) for key, value in self._gammas.to_dict().items()
                                if value is not None}
        if self.deltas is not None:
            parser["deltas"] = {"delta{}".format(i): _text(value) for i, value in enumerate(self.deltas)}
        if self._diagnostics:
            parser["diagnostics"] = {key: _text(value) for key, value in self._diagnostics.items()}
        lines = []
        for section in parser.sections():
            lines.append("[{}]".format(section))
            lines.extend("{} = {}".format(key, value) for key, value in parser[section].items())
            lines.append("")
        return "\n".join(lines)

    @classmethod
    def from_text(cls, text):
        '''
        Rebuild a policy from to_text output. The retention maps are
        integrated again from the model and the primary numbers.
        '''
        parser = _parser()
        try:
            parser.read_string(text)
            section = parser["model"]
            data = {key: section[key] for key in section}
            model = AggregateModel.from_dict({
                "kappa1": float(data["kappa1"]),
                "kappa2": float(data["kappa2"]),
                "delta": float(data["delta"]),
                "a": float(data["a"]),
                "dist1": json.loads(data["dist1"]),
                "dist2": json.loads(data["dist2"]),
                "cbar1": float(data["cbar1"]) if "cbar1" in data else None,
                "cbar2": float(data["cbar2"]) if "cbar2" in data else None,
                "mode": data["mode"],
                "swapped": data.get("swapped", "False") == "True"})
            case_tag = CaseTag(parser["policy"]["case"])
            closure = parser["policy"].get("closure", "smooth")
            primary = {key: float(value) for key, value in parser["primary"].items()}
            diagnostics = {}
            if parser.has_section("diagnostics"):
                diagnostics = {key: float(value) for key, value in parser["diagnostics"].items()}
        except (configparser.Error, KeyError, ValueError) as err:
            logging.warning("Saved policy could not be read: %s", err)
            raise ValidationError("The saved policy could not be read: {}".format(err))
        return assemble(model, case_tag, primary, closure, diagnostics)

def _parser():
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    return parser

def _text(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)

def value(policy, x):
    '''
    (g, g', g'') at aggregate reserve x.
    '''
    return policy.value(x)

def value_array(policy, xs):
    '''
    (g, g', g'') as arrays over the reserves xs.
    '''
    return policy.value_array(xs)

def _ordered(first, second):
    '''
    M2 / M1 >= kappa2 / kappa1 for Line 1 = first, Line 2 = second.
    '''
    return second.dist.support_bound * first.kappa >= second.kappa * first.dist.support_bound

def normalize(problem):
    '''
    Relabel the lines so that a <= 1/2 and M2 / M1 >= kappa2 / kappa1.
    Returns (AggregateModel, swapped).
    '''
    line1, line2, a = problem.line1, problem.line2, problem.a
    swapped = False
    if a > 0.5 or (a == 0.5 and not _ordered(line1, line2)):
        line1, line2, a, swapped = line2, line1, 1.0 - a, True
    if not _ordered(line1, line2):
        logging.warning("M2 / M1 >= kappa2 / kappa1 fails with a = %s after relabelling", a)
        raise UnsupportedConfigurationError(
            "The lines cannot be labelled so that a <= 1/2 and M2 / M1 >= kappa2 / kappa1 both hold "
            "(a = {}, kappa = ({}, {}), M = ({}, {}))".format(a, line1.kappa, line2.kappa,
                                                             line1.dist.support_bound, line2.dist.support_bound))
    if swapped:
        logging.info("Lines relabelled so that Line 1 carries the weight a = %s", a)
    model = AggregateModel(line1.kappa, line2.kappa, problem.delta, a, line1.dist, line2.dist, line1.cbar,
                           line2.cbar, problem.mode, swapped)
    return model, swapped

def classify(model):
    '''
    Pick the solution regime for a normalized model.
    '''
    if model.mode is DividendMode.UNBOUNDED:
        tag = CaseTag.UNBOUNDED_INFINITE if math.isinf(model.m1) else CaseTag.UNBOUNDED_FINITE
        logging.debug("classified as %s", tag.value)
        return tag
    if model.a == 0.0:
        return _classify_line2_only(model)
    if math.isinf(model.m1) or model.cbar1 + model.cbar2 < dividend_bound(model):
        logging.debug("cbar1 + cbar2 = %s below %s: Line 1 always cedes risk", model.cbar1 + model.cbar2,
                      dividend_bound(model))
        return CaseTag.BOUNDED_C

    gammas = gamma_set(model)
    ladder = alpha_ladder(model, gammas, "A")
    if not ladder.alpha_lb < 0.0:
        logging.warning("The lower alpha bound %s is not negative", ladder.alpha_lb)
        raise CaseClassificationError("The lower alpha bound {} is not negative".format(ladder.alpha_lb))
    psi = psi_at(gammas, model.a, ladder.alpha_lb)
    tag = CaseTag.BOUNDED_A if psi <= 0.0 else CaseTag.BOUNDED_B
    logging.debug("psi(alpha_LB = %s) = %s: %s", ladder.alpha_lb, psi, tag.value)
    return tag

def _classify_line2_only(model):
    '''
    With a = 0 Line 1's dividends are worth nothing and only Line 2 ever
    pays. Above u1 the retention then settles where gamma3-(y) + kappa1 / y
    vanishes: at M1 when that root lies beyond M1, at M0 below M1 otherwise.
    '''
    if math.isinf(model.m1):
        tag = CaseTag.BOUNDED_C
    else:
        level = gamma_set(model).gamma3minus + model.kappa1 / model.m1
        tag = CaseTag.BOUNDED_A if level >= 0.0 else CaseTag.BOUNDED_C
        logging.debug("a = 0: gamma3-(M1) + kappa1 / M1 = %s", level)
    logging.info("a = 0: only Line 2 pays dividends, classified as %s", tag.value)
    return tag

def _search_a(model, closure):
    gammas = gamma_set(model)
    if model.a == 0.0:
        # g' = exp(gamma3- (x - u1)) above u1 never comes down to a = 0
        return {"K3minus": 1.0 / gammas.gamma3minus}, {}
    ladder = alpha_ladder(model, gammas, "A")
    k3minus, _ = solve_k3minus(gammas, model.a, (ladder.alpha_lb, ladder.alpha_ub))
    return {"K3minus": k3minus}, {}

def _case_b_shape(model, gammas):
    '''
    For the band after w0, g' = g'(w0) (B+ e^(g3+ t) + B- e^(g3- t)) with
    t = x - w0. Returns (B+, B-, u2 - w0).
    '''
    g3p, g3m, g4m = gammas.gamma3plus, gammas.gamma3minus, gammas.gamma4minus
    start = -model.kappa1 / model.m1
    plus = (start - g3m) / (g3p - g3m)
    minus = (g3p - start) / (g3p - g3m)
    if not plus > 0.0:
        raise CaseClassificationError("gamma3- + kappa1 / M1 must be negative, not {}".format(-start + g3m),
                                      CaseTag.BOUNDED_B)
    ratio = minus * (g4m - g3m) / (plus * (g3p - g4m))
    if not ratio > 1.0:
        raise CaseClassificationError("The band above w0 has non-positive width", CaseTag.BOUNDED_B)
    return plus, minus, math.log(ratio) / (g3p - g3m)

def _search_b(model, closure):
    gammas = gamma_set(model)
    ladder = alpha_ladder(model, gammas, "B")
    g3p, g3m = gammas.gamma3plus, gammas.gamma3minus
    k3minus, k3p = solve_k3minus(gammas, model.a, ((1.0 - model.a) / g3m, ladder.alpha_lb))
    ratio = model.kappa1 / model.m1
    argument = k3minus * g3m * (g3m + ratio) / (k3p * g3p * (-ratio - g3p))
    if not argument > 0.0:
        raise CaseClassificationError("The gap w0 - u1 is undefined (log argument {})".format(argument),
                                      CaseTag.BOUNDED_B)
    gap = math.log(argument) / (g3p - g3m)
    gmap = build_g_map(model)
    u1_gap, w0_gap = shoot_case_b(model, gammas, gap, gmap, CaseTag.BOUNDED_B)
    diagnostics = {"u1_gap": u1_gap, "w0_gap": w0_gap, "gap": gap, "K3minus_psi": k3minus}
    if closure == "gap":
        return {"u1": u1_gap, "K3minus": k3minus}, diagnostics

    plus, minus, width = _case_b_shape(model, gammas)
    shape = plus * math.exp(g3p * width) + minus * math.exp(g3m * width)
    target = math.log((1.0 - model.a) * shape / model.a)
    if not target > 0.0:
        logging.warning("Smooth closure needs (1 - a) f0 / a > 1, found %s", (1.0 - model.a) * shape / model.a)
        raise CaseClassificationError("g' cannot fall from 1 - a to a across the band above w0",
                                      CaseTag.BOUNDED_B)
    u1, _ = shoot_decay(model, model.m1, target, gmap, CaseTag.BOUNDED_B)
    logging.debug("Case B: gap closure u1=%s, smooth closure u1=%s", u1_gap, u1)
    return {"u1": u1}, diagnostics

def _line2_only_m0(model):
    return solve_m0(model.with_changes(cbar1=0.0))

def _search_c(model, closure):
    if model.a == 0.0:
        m0 = _line2_only_m0(model)
        return {"u1": build_g_map(model, m0).x_upper, "m0": m0}, {}
    m0 = solve_m0(model)
    gmap = build_g_map(model, m0)
    u1, _, _ = shoot_case_c(model, m0, gmap, CaseTag.BOUNDED_C)
    return {"u1": u1, "m0": m0}, {}

def _search_none(model, closure):
    return {}, {}

_SEARCHES = {CaseTag.BOUNDED_A: _search_a,
             CaseTag.BOUNDED_B: _search_b,
             CaseTag.BOUNDED_C: _search_c,
             CaseTag.UNBOUNDED_FINITE: _search_none,
             CaseTag.UNBOUNDED_INFINITE: _search_none}

def solve(model, closure="smooth"):
    '''
    Classify a normalized model and build its SolvedPolicy.
    '''
    if closure not in CLOSURES:
        raise DomainError("closure must be one of {}, not {}".format(", ".join(CLOSURES), closure))
    case_tag = classify(model)
    try:
        primary, diagnostics = _SEARCHES[case_tag](model, closure)
        policy = assemble(model, case_tag, primary, closure, diagnostics)
    except CaseClassificationError as err:
        if err.case_tag is None:
            err.case_tag = case_tag
        logging.warning("%s could not be solved: %s", case_tag.value, err)
        raise
    logging.info("%s solved: %s", case_tag.value,
                 ", ".join("{}={}".format(key, value) for key, value in policy.thresholds.items()
                           if value is not None))
    return policy

def _thresholds(w0=None, u1=None, u2=None, m0=None):
    return {"w0": w0, "u1": u1, "u2": u2, "m0": m0}

def assemble(model, case_tag, primary, closure="smooth", diagnostics=None):
    '''
    Derive thresholds, constants, retention maps and segments from the
    primary numbers of a case.
    '''
    builder = {CaseTag.BOUNDED_A: _assemble_a,
               CaseTag.BOUNDED_B: _assemble_b,
               CaseTag.BOUNDED_C: _assemble_c,
               CaseTag.UNBOUNDED_FINITE: _assemble_unbounded_finite,
               CaseTag.UNBOUNDED_INFINITE: _assemble_unbounded_infinite}[case_tag]
    thresholds, constants, gammas, gmap, hmap, segments = builder(model, primary, closure)
    return SolvedPolicy(model, case_tag, closure, primary, thresholds, constants, gammas, gmap, hmap, segments,
                        diagnostics)

def _full_constant(model):
    return (model.a * model.cbar1 + (1.0 - model.a) * model.cbar2) / model.delta

def _assemble_a(model, primary, closure):
    a = model.a
    gammas = gamma_set(model)
    g2p, g2m = gammas.gamma2plus, gammas.gamma2minus
    g3p, g3m, g4m = gammas.gamma3plus, gammas.gamma3minus, gammas.gamma4minus
    k3minus = primary["K3minus"]
    k3p = k3plus(gammas, a, k3minus)
    gmap = build_g_map(model)
    w0 = gmap.x_upper

    ratio = model.kappa1 / model.m1
    alpha2plus = (-g2m - ratio) / (g2p * (g2p - g2m))
    alpha2minus = (g2p + ratio) / (g2m * (g2p - g2m))
    third = alpha3(model, gammas, k3minus)
    argument = alpha2minus * (g2m * third - 1.0) / (alpha2plus * (1.0 - g2p * third))
    if not argument > 0.0:
        raise CaseClassificationError("u1 - w0 is undefined (log argument {})".format(argument),
                                      CaseTag.BOUNDED_A)
    u1 = w0 + math.log(argument) / (g2p - g2m)
    if u1 < w0:
        if w0 - u1 > 1e-10 * (1.0 + w0):
            raise CaseClassificationError("u1 = {} falls below w0 = {}".format(u1, w0), CaseTag.BOUNDED_A)
        u1 = w0
    k1 = (1.0 - a) / (alpha2plus * g2p * math.exp(g2p * (u1 - w0)) + alpha2minus * g2m * math.exp(g2m * (u1 - w0)))

    if a == 0.0:
        u2 = math.inf
    else:
        u2 = u1 + psi_zeta(gammas, a, k3minus)[1]
    k4minus = a / g4m

    constants = {"K1": k1, "alpha2plus": alpha2plus, "alpha2minus": alpha2minus, "alpha3": third,
                 "K3plus": k3p, "K3minus": k3minus, "K4minus": k4minus}
    segments = [RetentionSegment(0.0, w0, gmap, model.kappa1, k1, model.m1),
                ExponentialSegment(w0, u1, [(k1 * alpha2plus, g2p, w0), (k1 * alpha2minus, g2m, w0)]),
                ExponentialSegment(u1, u2, [(k3p, g3p, u1), (k3minus, g3m, u1)],
                                   (1.0 - a) * model.cbar2 / model.delta),
                ExponentialSegment(u2, math.inf, [(k4minus, g4m, u2)], _full_constant(model))]
    return _thresholds(w0, u1, u2), constants, gammas, gmap, None, segments

def _assemble_b(model, primary, closure):
    a = model.a
    gammas = gamma_set(model)
    g3p, g3m, g4m = gammas.gamma3plus, gammas.gamma3minus, gammas.gamma4minus
    u1 = primary["u1"]
    gmap = build_g_map(model)
    start = gmap.retention(u1)
    head = RetentionSegment(0.0, u1, gmap, model.kappa1, 1.0 - a, start)
    base = float(head.evaluate(np.array([u1]))[0][0])
    hmap = h_integrate(model, u1, start, retention_reaches(model.m1))
    w0 = hmap.x_upper
    slope = (1.0 - a) * math.exp(-hmap.decay(w0))

    plus, minus, width = _case_b_shape(model, gammas)
    if closure == "gap":
        k3minus = primary["K3minus"]
        k3p = k3plus(gammas, a, k3minus)
    else:
        offset = w0 - u1
        k3p = slope * plus * math.exp(-g3p * offset) / g3p
        k3minus = slope * minus * math.exp(-g3m * offset) / g3m
    u2 = w0 + width
    k4minus = a / g4m

    constants = {"K1": 1.0 - a, "K2minus": base, "K2plus": slope, "K3plus": k3p, "K3minus": k3minus,
                 "K4minus": k4minus}
    segments = [head,
                BandSegment(u1, w0, hmap, model.kappa1, base, 1.0 - a),
                ExponentialSegment(w0, u2, [(k3p, g3p, u1), (k3minus, g3m, u1)],
                                   (1.0 - a) * model.cbar2 / model.delta),
                ExponentialSegment(u2, math.inf, [(k4minus, g4m, u2)], _full_constant(model))]
    return _thresholds(w0, u1, u2), constants, gammas, gmap, hmap, segments

def _assemble_c(model, primary, closure):
    a = model.a
    u1, m0 = primary["u1"], primary["m0"]
    gmap = build_g_map(model, m0)
    gammas = None if math.isinf(model.m1) else gamma_set(model)
    if a == 0.0:
        # the retention stays at M0 above u1 and Line 1 never pays
        tail_rate = gamma_roots(model, 3, m0)[1]
        constants = {"K1": 1.0, "K3minus": 1.0 / tail_rate, "gamma3minus_m0": tail_rate}
        segments = [RetentionSegment(0.0, u1, gmap, model.kappa1, 1.0, m0),
                    ExponentialSegment(u1, math.inf, [(1.0 / tail_rate, tail_rate, u1)],
                                       model.cbar2 / model.delta)]
        return _thresholds(math.inf, u1, math.inf, m0), constants, gammas, gmap, None, segments
    start = gmap.retention(u1)
    head = RetentionSegment(0.0, u1, gmap, model.kappa1, 1.0 - a, start)
    base = float(head.evaluate(np.array([u1]))[0][0])
    hmap = h_integrate(model, u1, start, retention_reaches(m0))
    u2 = hmap.x_upper
    tail_rate = gamma4_minus(model, m0)
    k4minus = a / tail_rate

    constants = {"K1": 1.0 - a, "K2minus": base, "K4minus": k4minus, "gamma4minus_m0": tail_rate}
    segments = [head,
                BandSegment(u1, u2, hmap, model.kappa1, base, 1.0 - a),
                ExponentialSegment(u2, math.inf, [(k4minus, tail_rate, u2)], _full_constant(model))]
    return _thresholds(math.inf, u1, u2, m0), constants, gammas, gmap, hmap, segments

def _assemble_unbounded_finite(model, primary, closure):
    a = model.a
    gammas = gamma_set(model)
    g2p, g2m = gammas.gamma2plus, gammas.gamma2minus
    gmap = build_g_map(model)
    w0 = gmap.x_upper
    m1, kappa1 = model.m1, model.kappa1
    u1 = w0 + math.log(g2m * (kappa1 + g2p * m1) / (g2p * (kappa1 + g2m * m1))) / (g2p - g2m)
    k1 = (1.0 - a) / (g2p - g2m) * (g2p * math.exp(g2m * (w0 - u1)) - g2m * math.exp(g2p * (w0 - u1)))
    scale = (1.0 - a) / (g2p * g2m * (g2p - g2m))
    drift, _ = nbar(model, m1)
    level = drift / model.delta

    constants = {"K1": k1, "K3lin": level}
    segments = [RetentionSegment(0.0, w0, gmap, kappa1, k1, m1),
                ExponentialSegment(w0, u1, [(scale * g2p * g2p, g2m, u1), (-scale * g2m * g2m, g2p, u1)]),
                LinearSegment(u1, math.inf, 1.0 - a, u1, (1.0 - a) * level)]
    return _thresholds(w0, u1), constants, gammas, gmap, None, segments

def _assemble_unbounded_infinite(model, primary, closure):
    a = model.a
    gmap = build_g_map(model, math.inf)
    u1 = gmap.x_upper + gmap.tail
    drift, _ = nbar(model, math.inf)
    level = drift / model.delta

    constants = {"K1": 1.0 - a, "K3lin": level}
    segments = [RetentionSegment(0.0, u1, gmap, model.kappa1, 1.0 - a, gmap.y_upper),
                LinearSegment(u1, math.inf, 1.0 - a, u1, (1.0 - a) * level)]
    return _thresholds(math.inf, u1), constants, None, gmap, None, segments
