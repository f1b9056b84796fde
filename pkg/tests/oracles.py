"""Independent quadrature oracles used to check the closed forms.

Everything here integrates the *defining* expressions directly (adaptive
Gauss-Kronrod on a log-transformed semi-infinite domain) and never calls
the closed-form code under test.
"""

import math
import warnings

from scipy import special as sp
from scipy.integrate import IntegrationWarning, quad


def semi_infinite_quad(f, lower=0.0, u_min=-60.0, u_max=60.0):
    """integral of f over (lower, inf), via t = lower + e^u.

    The transformed range must cover the integrand's support: stretch
    u_min for integrable singularities at the origin and u_max for slow
    power-law tails.  The tolerance is set below what nested quadrature
    can always certify, so roundoff reports are expected and ignored;
    the achieved accuracy is what the tests assert.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        value, _err = quad(lambda u: f(lower + math.exp(u)) * math.exp(u),
                           u_min, u_max, limit=800, epsabs=1e-13,
                           epsrel=1e-12)
    return value


def upper_gamma_quad(s, x):
    """Gamma(s, x) from its defining integral (any real s, x > 0)."""
    if s > 0.0:
        return float(sp.gammaincc(s, x)) * math.gamma(s)
    return semi_infinite_quad(lambda t: t ** (s - 1.0) * math.exp(-t), x)


def i1_quad(x, y, z, nu):
    """Defining integral of the exponential-times-incomplete-gamma form.

    For x + z < 0.75 the t^(x+z-1) origin singularity defeats the
    adaptive pass, so one integration by parts (differentiating the
    incomplete gamma factor) lifts the exponent first:

        I(x) = (y I(x+1) + nu^z Gamma(x+z) / (y+nu)^(x+z)) / x
    """
    if x + z < 0.75:
        lifted = i1_quad(x + 1.0, y, z, nu)
        return (y * lifted + nu**z * math.gamma(x + z)
                / (y + nu) ** (x + z)) / x
    return semi_infinite_quad(
        lambda t: t ** (x - 1.0) * math.exp(-y * t) * upper_gamma_quad(z, nu * t),
        u_min=-140.0, u_max=80.0)


def i0_quad(y, z, nu):
    """Defining integral of the truncated power-law tail form; the tail
    decays like t^(1-nu), so the range grows as nu approaches 2 (capped
    where t^nu would overflow, which the decay makes irrelevant)."""
    u_max = min(max(60.0, 80.0 / (nu - 2.0)), 680.0 / nu)
    return semi_infinite_quad(lambda t: float(t) / (1.0 + y * float(t)**nu),
                              z ** (1.0 / nu), u_max=u_max)


def laplace_hd_quad(tier, s, d_min):
    """HD-cell interference Laplace transform from its exponent integral."""
    inner = semi_infinite_quad(
        lambda x: x / (1.0 + x**tier.pathloss_exp / (s * tier.ap_power)), d_min)
    return math.exp(-2.0 * math.pi * tier.hd_density * inner)


def laplace_fd_quad(tier, s, d_min):
    """FD-cell interference Laplace transform by double quadrature over the
    combined-gain density and the radial exponent integral."""
    p_a, p_u = tier.ap_power, tier.user_power
    alpha = tier.pathloss_exp

    if abs(p_a - p_u) <= 1e-9 * max(p_a, p_u):
        def g_pdf(g):
            return g * math.exp(-g / p_a) / p_a**2
    else:
        def g_pdf(g):
            return (math.exp(-g / p_u) - math.exp(-g / p_a)) / (p_u - p_a)

    def inner(g):
        return semi_infinite_quad(
            lambda x: x * (1.0 - math.exp(-s * g * x**-alpha)), d_min)

    outer = semi_infinite_quad(lambda g: g_pdf(g) * inner(g))
    return math.exp(-2.0 * math.pi * tier.fd_density * outer)
