'''
Claim-size distributions and their limited-moment kernels.

A line that buys excess-of-loss reinsurance with retention s keeps Y ^ s of
every claim Y. Under the diffusion approximation only two numbers matter for
that line: the limited mean

    mu(s) = int_0^s survival(y) dy

and the limited second moment

    sigma2(s) = int_0^s 2 y survival(y) dy.

Uniform and exponential claims have closed forms; tabulated survival
functions are integrated with adaptive quadrature.
'''

# core libraries
import csv
from enum import Enum
import logging
import math
import os

# third party libraries
import numpy as np
from scipy import integrate, optimize, special

# twoline libraries
from . exceptions import DomainError, SingularInputError, ValidationError

# quadrature tolerances for tabulated survival functions
QUAD_EPSREL = 1e-10
QUAD_EPSABS = 1e-14

class DistributionKind(Enum):
    '''
    The families of claim-size distribution understood by the solver. The
    value is the token used in problem files.
    '''
    UNIFORM = "uniform"
    EXPONENTIAL = "exponential"
    TABULATED = "table"

class ClaimDistribution:
    '''
    An immutable claim-size distribution. Build one with the ``uniform``,
    ``exponential`` or ``tabulated`` class methods, or from a problem file
    token with ``from_spec``.
    '''
    def __init__(self, kind, parameter=None, points=None, survival_values=None, source=None):
        '''
        Constructor - prefer the named class methods.

        :param kind:            a DistributionKind
        :param parameter:       the upper bound M (uniform) or the rate
                                (exponential)
        :param points:          increasing claim sizes, starting at zero
                                (tabulated)
        :param survival_values: survival function at each point (tabulated)
        :param source:          where a tabulated distribution was read from
        '''
        self._kind = kind
        self._parameter = None if parameter is None else float(parameter)
        self._points = None
        self._survival_values = None
        self._source = source

        if kind is DistributionKind.UNIFORM:
            if not self._parameter > 0.0 or math.isinf(self._parameter):
                raise DomainError("A uniform claim distribution needs a finite upper bound M > 0, not "
                                  "{}".format(parameter))
            self._support_bound = self._parameter

        elif kind is DistributionKind.EXPONENTIAL:
            if not self._parameter > 0.0 or math.isinf(self._parameter):
                raise DomainError("An exponential claim distribution needs a finite rate > 0, not "
                                  "{}".format(parameter))
            self._support_bound = math.inf

        else:
            self._points, self._survival_values = _validate_table(points, survival_values)
            self._support_bound = float(self._points[-1])

    @classmethod
    def uniform(cls, upper):
        '''
        Uniform claims on [0, upper].
        '''
        return cls(DistributionKind.UNIFORM, parameter=upper)

    @classmethod
    def exponential(cls, rate):
        '''
        Exponential claims with the given rate (mean 1 / rate).
        '''
        return cls(DistributionKind.EXPONENTIAL, parameter=rate)

    @classmethod
    def tabulated(cls, points, survival_values, source=None):
        '''
        Claims described by survival values at increasing sizes; the survival
        function is interpolated linearly between points, which keeps it
        monotone.
        '''
        return cls(DistributionKind.TABULATED, points=points, survival_values=survival_values, source=source)

    @classmethod
    def from_spec(cls, token, base_dir=None):
        '''
        Parse a problem file token: ``uniform:M``, ``exponential:rate`` or
        ``table:path``. Relative table paths are resolved against base_dir.
        '''
        kind_name, _, argument = token.strip().partition(":")
        kind_name = kind_name.strip().lower()
        argument = argument.strip()
        if not argument:
            raise ValidationError("Distribution '{}' is missing its parameter".format(token))

        if kind_name == DistributionKind.UNIFORM.value:
            return cls.uniform(_parse_float(argument, token))
        if kind_name == DistributionKind.EXPONENTIAL.value:
            return cls.exponential(_parse_float(argument, token))
        if kind_name == DistributionKind.TABULATED.value:
            path = argument if base_dir is None else os.path.join(base_dir, argument)
            return cls.tabulated(*read_survival_table(path), source=argument)

        raise ValidationError("Unknown distribution kind '{}'; expected one of uniform, exponential or " \
                              "table".format(kind_name))

    @property
    def kind(self):
        '''
        Return the DistributionKind.
        '''
        return self._kind

    @property
    def parameter(self):
        '''
        Return the upper bound (uniform) or rate (exponential); None for
        tabulated distributions.
        '''
        return self._parameter

    @property
    def support_bound(self):
        '''
        Return M, the supremum of the support (math.inf when unbounded).
        '''
        return self._support_bound

    @property
    def points(self):
        '''
        Return the tabulated claim sizes (None unless tabulated).
        '''
        return None if self._points is None else self._points.copy()

    @property
    def survival_values(self):
        '''
        Return the tabulated survival values (None unless tabulated).
        '''
        return None if self._survival_values is None else self._survival_values.copy()

    def to_spec(self):
        '''
        The problem file token for this distribution.
        '''
        if self._kind is DistributionKind.TABULATED:
            return "table:{}".format(self._source or "<memory>")
        return "{}:{!r}".format(self._kind.value, self._parameter)

    def to_dict(self):
        '''
        Produce the dictionary data for saving.
        '''
        data = {"kind": self._kind.value, "parameter": self._parameter}
        if self._kind is DistributionKind.TABULATED:
            data["points"] = self._points.tolist()
            data["survival_values"] = self._survival_values.tolist()
            data["source"] = self._source
        return data

    @classmethod
    def from_dict(cls, data):
        '''
        Construct a ClaimDistribution from its dictionary representation.
        '''
        kind = DistributionKind(data["kind"])
        if kind is DistributionKind.TABULATED:
            return cls.tabulated(data["points"], data["survival_values"], source=data.get("source"))
        return cls(kind, parameter=data["parameter"])

    def __eq__(self, other):
        if not isinstance(other, ClaimDistribution):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(self.to_spec())

    def __repr__(self):
        return "ClaimDistribution({})".format(self.to_spec())


def _parse_float(text, token):
    try:
        return float(text)
    except ValueError:
        raise ValidationError("Distribution '{}' has a non-numeric parameter '{}'".format(token, text))

def _validate_table(points, survival_values):
    '''
    Check a survival table: starts at y = 0 with survival 1, increasing sizes,
    non-increasing survival ending at 0 (finite second moment).
    '''
    points = np.asarray(points, dtype=float)
    survival_values = np.asarray(survival_values, dtype=float)
    if points.ndim != 1 or points.shape != survival_values.shape or points.size < 2:
        raise DomainError("A survival table needs at least two (y, survival) pairs of equal length")
    if points[0] != 0.0 or survival_values[0] != 1.0:
        raise DomainError("A survival table must start at y = 0 with survival 1")
    if np.any(np.diff(points) <= 0.0):
        raise DomainError("Survival table claim sizes must be strictly increasing")
    if np.any(np.diff(survival_values) > 0.0) or np.any(survival_values < 0.0):
        raise DomainError("Survival table values must be non-increasing and non-negative")
    if survival_values[-1] != 0.0:
        raise DomainError("A survival table must end with survival 0 so that the support is bounded")

    # trim trailing zeros so the last point is the support bound
    first_zero = int(np.argmax(survival_values == 0.0))
    return points[:first_zero + 1], survival_values[:first_zero + 1]

def read_survival_table(path):
    '''
    Read a two-column CSV file (y, survival), ignoring a header row and blank
    lines.
    '''
    points = []
    values = []
    try:
        with open(path, "r", newline="") as table_ref:
            for line_number, row in enumerate(csv.reader(table_ref), start=1):
                if not row or not "".join(row).strip():
                    continue
                try:
                    points.append(float(row[0]))
                    values.append(float(row[1]))
                except (ValueError, IndexError):
                    if line_number == 1:
                        continue
                    raise ValidationError("Survival table '{}' has a malformed row".format(path), line_number)
    except OSError as os_error:
        logging.warning("Survival table '%s' could not be read: %s", path, os_error)
        raise ValidationError("Survival table '{}' could not be read".format(path))
    return points, values

def _check_retention(s):
    s = np.asarray(s, dtype=float)
    if np.any(np.isnan(s)) or np.any(s < 0.0):
        logging.warning("Negative or undefined retention passed to a limited moment: %s", s)
        raise DomainError("Retention levels must be non-negative")
    return s

def _output(values, scalar):
    return float(values) if scalar else values

def survival(dist, y):
    '''
    The survival function 1 - F(y); accepts scalars or arrays.
    '''
    scalar = np.ndim(y) == 0
    y = np.asarray(y, dtype=float)
    if dist.kind is DistributionKind.UNIFORM:
        values = np.clip(1.0 - y / dist.parameter, 0.0, 1.0)
    elif dist.kind is DistributionKind.EXPONENTIAL:
        values = np.exp(-dist.parameter * np.maximum(y, 0.0))
    else:
        values = np.interp(y, dist._points, dist._survival_values, left=1.0, right=0.0) # pylint: disable=protected-access
    return _output(values, scalar)

def _tabulated_integral(dist, s, weight):
    '''
    int_0^s weight(y) survival(y) dy by adaptive quadrature, breaking at the
    table knots.
    '''
    upper = min(s, dist.support_bound)
    if upper <= 0.0:
        return 0.0
    knots = [point for point in dist._points if 0.0 < point < upper] # pylint: disable=protected-access
    value, _ = integrate.quad(lambda y: weight(y) * survival(dist, y), 0.0, upper, points=knots or None,
                              epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=max(100, 4 * len(knots)))
    return value

def limited_mean(dist, s):
    '''
    mu(s), the expected retained claim E[Y ^ s]. s may be math.inf (the full
    mean) and may be an array.
    '''
    scalar = np.ndim(s) == 0
    s = _check_retention(s)
    if dist.kind is DistributionKind.UNIFORM:
        upper = dist.parameter
        capped = np.minimum(s, upper)
        values = capped - capped * capped / (2.0 * upper)
    elif dist.kind is DistributionKind.EXPONENTIAL:
        rate = dist.parameter
        values = special.gammainc(1.0, rate * s) / rate
    else:
        values = np.vectorize(lambda level: _tabulated_integral(dist, level, lambda y: 1.0))(s)
    return _output(values, scalar)

def limited_second_moment(dist, s):
    '''
    sigma2(s), the retained second moment E[(Y ^ s)^2].
    '''
    scalar = np.ndim(s) == 0
    s = _check_retention(s)
    if dist.kind is DistributionKind.UNIFORM:
        upper = dist.parameter
        capped = np.minimum(s, upper)
        values = capped * capped - 2.0 * capped ** 3 / (3.0 * upper)
    elif dist.kind is DistributionKind.EXPONENTIAL:
        # regularized incomplete gamma keeps full relative precision near 0
        rate = dist.parameter
        values = 2.0 * special.gammainc(2.0, rate * s) / (rate * rate)
    else:
        values = np.vectorize(lambda level: _tabulated_integral(dist, level, lambda y: 2.0 * y))(s)
    return _output(values, scalar)

def full_moments(dist):
    '''
    The unlimited first and second moments (mu(inf), sigma2(inf)).
    '''
    return limited_mean(dist, math.inf), limited_second_moment(dist, math.inf)

def h_ratio(dist, s):
    '''
    h(s) = sigma2(s) / mu(s)^2, which is increasing in s.
    '''
    mean = limited_mean(dist, s)
    if np.any(np.asarray(mean) <= 0.0):
        logging.warning("h ratio requested where the limited mean vanishes (s = %s)", s)
        raise SingularInputError("h(s) is undefined where mu(s) = 0; use s > 0")
    return limited_second_moment(dist, s) / (np.asarray(mean) ** 2 if np.ndim(mean) else mean ** 2)

def mixed_moments(dist, theta, pi):
    '''
    Drift and variance kernels of a line that first cedes a proportion 1 - theta
    and then applies excess-of-loss retention pi to its share: it keeps
    (theta Y) ^ pi, whose moments are theta mu(pi / theta) and
    theta^2 sigma2(pi / theta).
    '''
    _check_proportion(theta, allow_one=True)
    level = pi / theta
    return theta * limited_mean(dist, level), theta * theta * limited_second_moment(dist, level)

def proportional_moments(dist, theta):
    '''
    Drift and variance kernels of pure proportional reinsurance keeping the
    share theta.
    '''
    return mixed_moments(dist, theta, math.inf)

def _check_proportion(theta, allow_one=False):
    upper_ok = theta <= 1.0 if allow_one else theta < 1.0
    if not (theta > 0.0 and upper_ok):
        logging.warning("Proportion %s outside its admissible range", theta)
        raise DomainError("The retained proportion theta must lie in (0, 1), not {}".format(theta))

def dominating_pure_xl(dist, theta, pi):
    '''
    The pure excess-of-loss retention pi0 with the same volatility as the
    mixed treaty (theta, pi):

        theta^2 sigma2(pi / theta) = sigma2(pi0).

    Because h is increasing, that retention also carries at least the mixed
    treaty's drift, theta mu(pi / theta) <= mu(pi0).
    '''
    _check_proportion(theta)
    if pi < 0.0 or pi > dist.support_bound:
        logging.warning("Retention %s outside [0, %s]", pi, dist.support_bound)
        raise DomainError("The retention must lie in [0, M] = [0, {}]".format(dist.support_bound))

    target = theta * theta * limited_second_moment(dist, pi / theta)
    if target <= 0.0:
        return 0.0

    # theta Y ^ pi <= Y ^ pi, so sigma2(pi) already reaches the target
    def excess(level):
        return limited_second_moment(dist, level) - target

    if excess(pi) <= 0.0:
        return float(pi)
    root = optimize.bisect(excess, 0.0, pi, xtol=1e-15, maxiter=200)
    logging.debug("Dominating retention for theta=%s, pi=%s: %s", theta, pi, root)
    return float(root)

def drift_gain(dist, theta, pi):
    '''
    mu(pi0) - theta mu(pi / theta), the extra drift gained by switching a mixed
    treaty to its dominating pure excess-of-loss retention.
    '''
    replacement = dominating_pure_xl(dist, theta, pi)
    return limited_mean(dist, replacement) - theta * limited_mean(dist, pi / theta)
