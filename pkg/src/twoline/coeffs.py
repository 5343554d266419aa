'''
Scalar coefficient machinery for the capped and uncapped dividend regimes:
aggregate drift and variance, the roots of the characteristic quadratics, the
psi / zeta pair that pins K3-, and the alpha bounds that bracket it.

Everything here is a pure function of an AggregateModel.
'''

# core libraries
import logging
import math

# third party libraries
import numpy as np
from scipy import optimize

# twoline libraries
from . claims import limited_mean, limited_second_moment
from . exceptions import CaseClassificationError, DomainError, SingularInputError
from . model import AlphaLadder, DividendMode, GammaSet

def nbar(model, y):
    '''
    Aggregate drift and variance at Line 1 retention y (Line 2 retains
    (kappa2 / kappa1) y):

        N1(y) = kappa1 mu1(y) + kappa2 mu2(r y)
        N2(y) = sigma1^2(y) + sigma2^2(r y)

    y may be an array; every value must lie in [0, M1].
    '''
    values = np.asarray(y, dtype=float)
    if np.any(np.isnan(values)) or np.any(values < 0.0) or np.any(values > model.m1):
        logging.warning("Aggregate moments requested outside [0, %s]: %s", model.m1, y)
        raise DomainError("The retention must lie in [0, M1] = [0, {}]".format(model.m1))
    line2 = model.ratio * values if np.ndim(y) else model.ratio * float(y)
    drift = model.kappa1 * limited_mean(model.dist1, y) + model.kappa2 * limited_mean(model.dist2, line2)
    variance = limited_second_moment(model.dist1, y) + limited_second_moment(model.dist2, line2)
    return drift, variance

def family_drift(model, family, drift):
    '''
    The first-order coefficient of family 2, 3 or 4: N1, N1 - cbar2 or
    N1 - cbar1 - cbar2.
    '''
    if family == 2:
        return drift
    if model.mode is not DividendMode.BOUNDED:
        raise DomainError("Root families 3 and 4 need capped dividend rates")
    if family == 3:
        return drift - model.cbar2
    if family == 4:
        return drift - model.cbar1 - model.cbar2
    raise DomainError("Unknown root family {}; expected 2, 3 or 4".format(family))

def quadratic_roots(variance, drift, delta):
    '''
    The roots (plus, minus) of (variance / 2) g^2 + drift g - delta = 0 without
    cancellation: the root that would subtract nearly equal numbers is taken
    from the product of the roots instead.
    '''
    discriminant = math.sqrt(drift * drift + 2.0 * delta * variance)
    if drift >= 0.0:
        plus = 2.0 * delta / (drift + discriminant)
        minus = (-drift - discriminant) / variance
    else:
        plus = (-drift + discriminant) / variance
        minus = -2.0 * delta / (-drift + discriminant)
    return plus, minus

def gamma_roots(model, family, y):
    '''
    Roots of family 2, 3 or 4 at retention y, as (plus, minus). Family 4 only
    has its negative root; plus is None.
    '''
    drift, variance = nbar(model, y)
    if variance <= 0.0:
        logging.warning("Root family %s requested where N2 vanishes (y = %s)", family, y)
        raise SingularInputError("The characteristic quadratic degenerates where N2(y) = 0; use y > 0")
    plus, minus = quadratic_roots(variance, family_drift(model, family, drift), model.delta)
    if family == 4:
        return None, minus
    return plus, minus

def gamma4_minus(model, y):
    '''
    The negative family 4 root at y; used by the M0 fixed point.
    '''
    return gamma_roots(model, 4, y)[1]

def gamma_set(model, y=None):
    '''
    All root families at retention y (M1 by default).
    '''
    y = model.m1 if y is None else y
    gamma2plus, gamma2minus = gamma_roots(model, 2, y)
    if model.mode is not DividendMode.BOUNDED:
        return GammaSet(gamma2plus, gamma2minus, retention=y)
    gamma3plus, gamma3minus = gamma_roots(model, 3, y)
    _, gamma4minus = gamma_roots(model, 4, y)
    return GammaSet(gamma2plus, gamma2minus, gamma3plus, gamma3minus, gamma4minus, retention=y)

def dividend_bound(model):
    '''
    N1 - kappa1 N2 / (2 M1) + delta M1 / kappa1, the total dividend rate that
    separates the regime with a finite reinsurance threshold from the one
    where Line 1 always cedes risk. Infinite when M1 is.
    '''
    if math.isinf(model.m1):
        return math.inf
    drift, variance = nbar(model, model.m1)
    return drift - model.kappa1 * variance / (2.0 * model.m1) + model.delta * model.m1 / model.kappa1

def psi_zeta(gammas, a, z):
    '''
    Return (psi(z), zeta(z)). zeta is the distance u2 - u1 implied by K3- = z
    and psi(z) = g'(u2) - a; K3- is the root of psi.
    '''
    g3p, g3m, g4m = gammas.gamma3plus, gammas.gamma3minus, gammas.gamma4minus
    if not z < 0.0:
        raise DomainError("psi is defined for negative coefficients only, not {}".format(z))
    slack = 1.0 - a - g3m * z
    if slack <= 0.0:
        logging.warning("psi evaluated at or below (1 - a) / gamma3-: z = %s", z)
        raise DomainError("psi needs z > (1 - a) / gamma3- = {}".format((1.0 - a) / g3m))
    numerator = g3m * (g4m - g3m) * z
    denominator = g3p - g4m
    if numerator <= 0.0 or denominator <= 0.0:
        logging.warning("zeta log argument not positive: gamma4- - gamma3- = %s, gamma3+ - gamma4- = %s",
                        g4m - g3m, denominator)
        raise DomainError("zeta is undefined: gamma3- < gamma4- < gamma3+ is violated")

    log_argument = math.log(numerator) - math.log(slack) - math.log(denominator)
    zeta = log_argument / (g3p - g3m)
    psi = math.exp(math.log(slack) + g3p * zeta) + g3m * z * math.exp(g3m * zeta) - a
    return psi, zeta

def alpha_ladder(model, gammas, case_hint):
    '''
    The alpha bounds for K3-. case_hint "A" builds the lower bound used when
    the reinsurance threshold sits below both dividend thresholds, "B" the one
    used when it sits between them.
    '''
    if model.mode is not DividendMode.BOUNDED or math.isinf(model.m1):
        raise DomainError("The alpha bounds need capped dividends and M1 < infinity")
    a, delta, m1 = model.a, model.delta, model.m1
    g2p = gammas.gamma2plus
    g3p, g3m, g4m = gammas.gamma3plus, gammas.gamma3minus, gammas.gamma4minus
    drift, variance = nbar(model, m1)
    cbar2 = model.cbar2

    scale = (1.0 - a) * g3p / (g3p - g3m)
    alpha0 = scale * (drift / delta - model.kappa1 * variance / (2.0 * delta * m1) - 1.0 / g3p - cbar2 / delta)
    alpha_underline = -scale * (1.0 / g3p + cbar2 / delta)
    alpha_overline = scale * (1.0 / g2p - 1.0 / g3p - cbar2 / delta)
    alpha_ub = (1.0 - a) * (g3p - g4m) / (g3m * (g3p - g3m))
    floor = (1.0 - a) / g3m

    if case_hint == "A":
        if drift > model.kappa1 * variance / (2.0 * m1):
            alpha_lb = floor if cbar2 >= dividend_bound(model) else alpha0
        else:
            alpha_lb = floor if cbar2 >= delta * variance / (2.0 * drift) else alpha_underline
    elif case_hint == "B":
        alpha_lb = alpha0 if cbar2 > delta * variance / (2.0 * drift) else alpha_underline
    else:
        raise DomainError("case_hint must be 'A' or 'B', not {}".format(case_hint))

    logging.debug("alpha bounds (%s): alpha0=%s underline=%s overline=%s lb=%s ub=%s", case_hint, alpha0,
                  alpha_underline, alpha_overline, alpha_lb, alpha_ub)
    return AlphaLadder(alpha0, alpha_underline, alpha_overline, alpha_lb, alpha_ub, case_hint)

def psi_at(gammas, a, z):
    '''
    psi(z), continued by its limit -a at and below (1 - a) / gamma3-.
    '''
    if 1.0 - a - gammas.gamma3minus * z <= 0.0:
        return -a
    return psi_zeta(gammas, a, z)[0]

def k3plus(gammas, a, k3minus):
    '''
    K3+ = (1 - a - K3- gamma3-) / gamma3+, from g'(u1) = 1 - a.
    '''
    return (1.0 - a - k3minus * gammas.gamma3minus) / gammas.gamma3plus

def solve_k3minus(gammas, a, bracket):
    '''
    Bisect for the root of psi on bracket = (lo, hi). Returns (K3-, K3+).
    '''
    lo, hi = bracket
    psi_lo = psi_at(gammas, a, lo)
    psi_hi = psi_at(gammas, a, hi)
    logging.debug("K3- bracket (%s, %s) with psi values (%s, %s)", lo, hi, psi_lo, psi_hi)

    if psi_lo == 0.0:
        root = lo
    elif psi_hi == 0.0:
        root = hi
    elif psi_lo * psi_hi > 0.0:
        logging.warning("psi does not change sign on (%s, %s): %s, %s", lo, hi, psi_lo, psi_hi)
        raise CaseClassificationError("psi has no sign change on the K3- bracket ({}, {})".format(lo, hi))
    else:
        width = 1e-14 * max(abs(lo), abs(hi))
        root = optimize.bisect(lambda z: psi_at(gammas, a, z), lo, hi, xtol=width, maxiter=400)

    if not root < 0.0:
        raise CaseClassificationError("K3- must be negative, found {}".format(root))
    return root, k3plus(gammas, a, root)

def alpha3(model, gammas, k3minus):
    '''
    alpha3 = g(u1) / g'(u1) in the first dividend band:
    1 / gamma3+ + cbar2 / delta + (1 - gamma3- / gamma3+) K3- / (1 - a).
    '''
    g3p, g3m = gammas.gamma3plus, gammas.gamma3minus
    return 1.0 / g3p + model.cbar2 / model.delta + (1.0 - g3m / g3p) * k3minus / (1.0 - model.a)
