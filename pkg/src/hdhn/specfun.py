"""Special functions backing the closed-form network expressions.

Everything here is pure, deterministic and thread-safe.  The surface is
deliberately narrow: the network formulas only ever need

* the Gauss hypergeometric function with a unit first parameter,
  ``2F1(1, b; c; z)`` for real ``z < 1``,
* the upper incomplete gamma function ``Gamma(s, x)`` including small
  negative ``s``,
* the scaled complementary error function ``erfcx(x) = exp(x^2) erfc(x)``,
* two semi-infinite integrals that reduce to the above:

  ``I1(x, y, z, nu) = int_0^inf t^(x-1) exp(-y t) Gamma(z, nu t) dt``
  ``I0(y, z, nu)    = int_(z^(1/nu))^inf t / (1 + y t^nu) dt``

Each operation returns an :class:`EvalResult` carrying the value together
with a conservative absolute error bound, so callers can propagate
accuracy claims instead of guessing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import special as _sp

__all__ = [
    "EvalResult",
    "SpecFunDomainError",
    "ConvergenceError",
    "hyp2f1_one",
    "upper_inc_gamma",
    "erfcx",
    "integral_i1",
    "integral_i0",
]

_EPS = 2.220446049250313e-16
# Stop once a term no longer moves the running sum.  The connection
# formulas can cancel two large terms, which amplifies any truncation
# slack, so the series runs machine-tight rather than to the nominal
# 1e-12 target the callers actually need.
_SERIES_TOL = 2.0 * _EPS
_SERIES_MAX_TERMS = 100_000  # exceeding this is an error, never a truncation


class SpecFunDomainError(ValueError):
    """Arguments outside the supported domain of a special function."""


class ConvergenceError(ArithmeticError):
    """A series failed to reach tolerance within the iteration cap."""


@dataclass(frozen=True)
class EvalResult:
    """A function value with an absolute error bound.

    ``abs_error_bound`` is finite and nonnegative; it over-covers both
    truncation and rounding error of the evaluation path taken.
    """

    value: float
    abs_error_bound: float

    def __float__(self) -> float:
        return self.value


def _series_2f1_one(b: float, c: float, z: float) -> EvalResult:
    """Direct power series of 2F1(1, b; c; z).

    With a = 1 the Pochhammer (1)_n cancels n!, so the terms obey
    t_0 = 1, t_{n+1} = t_n (b+n)/(c+n) z.  Caller guarantees |z| < 1 and
    that c + n never vanishes.
    """
    term = 1.0
    total = 1.0
    total_abs = 1.0
    for n in range(_SERIES_MAX_TERMS):
        term *= (b + n) / (c + n) * z
        total += term
        total_abs += abs(term)
        if abs(term) <= _SERIES_TOL * max(1.0, abs(total)):
            ratio = abs(z)
            tail = abs(term) * ratio / (1.0 - ratio)
            return EvalResult(total, tail + 8.0 * _EPS * total_abs)
    raise ConvergenceError(
        f"2F1 series did not converge within {_SERIES_MAX_TERMS} terms "
        f"(b={b}, c={c}, z={z})"
    )


def _euler_linear_2f1_one(
    b: float, c: float, z: float, one_minus_z: float
) -> EvalResult:
    """2F1(1, b; c; z) for 0.5 < z < 1 via the 1-z connection formula.

    For a = 1 the second series collapses to an elementary term:

        F(1,b;c;z) = G(c)G(c-1-b)/(G(c-1)G(c-b)) F(1, b; b+2-c; 1-z)
                     + G(c)G(1+b-c)/G(b) (1-z)^(c-1-b) z^(1-c)

    using F(c-1, c-b; c-b; w) = (1-w)^(1-c).  ``one_minus_z`` is supplied
    by the caller because the Pfaff path knows it exactly as 1/(1-z_orig)
    while the float subtraction 1-z would lose digits as z -> 1.
    Degenerate when c-1-b is an integer (the logarithmic case), which the
    network formulas never hit.
    """
    d = c - 1.0 - b
    # Near an integer the two branches blow up and cancel (the logarithmic
    # case); past this guard the cancellation would eat the error budget.
    dist = abs(d - round(d))
    if dist < 1e-3:
        raise SpecFunDomainError(
            f"2F1 connection formula degenerate: c-1-b={d} is (near-)integer"
        )
    inner = _series_2f1_one(b, b + 2.0 - c, one_minus_z)
    # 1/Gamma handles the poles of Gamma(c-1) and Gamma(c-b) gracefully.
    coef = math.gamma(c) * math.gamma(d) * float(_sp.rgamma(c - 1.0)) * float(
        _sp.rgamma(c - b)
    )
    elem = (
        math.gamma(c) * math.gamma(-d) * float(_sp.rgamma(b))
        * one_minus_z**d * z ** (1.0 - c)
    )
    value = coef * inner.value + elem
    mag = abs(coef * inner.value) + abs(elem)
    # The gamma factors sit 'dist' away from their poles, so their own
    # rounding is amplified by roughly 1/dist on top of the cancellation
    # already reflected in mag.
    bound = abs(coef) * inner.abs_error_bound + _EPS * mag * (
        16.0 + 8.0 * (1.0 + abs(d)) / dist
    )
    return EvalResult(value, bound)


def _eval_2f1_one(b: float, c: float, z: float) -> EvalResult:
    if z == 0.0:
        return EvalResult(1.0, 0.0)
    if abs(z) <= 0.5:
        return _series_2f1_one(b, c, z)
    if z < 0.0:
        # Pfaff: F(1,b;c;z) = (1-z)^-1 F(1, c-b; c; z/(z-1)), argument in (1/3, 1).
        scale = 1.0 / (1.0 - z)
        w = z / (z - 1.0)
        if w <= 0.5:
            inner = _series_2f1_one(c - b, c, w)
        else:
            # 1 - w = 1/(1-z) exactly; do not subtract.
            inner = _euler_linear_2f1_one(c - b, c, w, scale)
        return EvalResult(
            scale * inner.value,
            scale * inner.abs_error_bound + 4.0 * _EPS * abs(scale * inner.value),
        )
    # z in (0.5, 1): the subtraction 1-z is exact here (Sterbenz).
    return _euler_linear_2f1_one(b, c, z, 1.0 - z)


def hyp2f1_one(b: float, c: float, z: float) -> EvalResult:
    """Gauss hypergeometric function 2F1(1, b; c; z) for real z < 1.

    Region policy: direct series for |z| <= 0.5, Pfaff transformation
    z -> z/(z-1) for z < -0.5, and the linear 1-z connection formula for
    0.5 < z < 1.  Terminating cases (b a non-positive integer) are exact.
    """
    if not (math.isfinite(b) and math.isfinite(c) and math.isfinite(z)):
        raise SpecFunDomainError("hyp2f1_one requires finite arguments")
    if z >= 1.0:
        raise SpecFunDomainError(f"hyp2f1_one requires z < 1, got z={z}")
    if c <= 0.0:
        raise SpecFunDomainError(f"hyp2f1_one requires c > 0, got c={c}")
    return _eval_2f1_one(b, c, z)


def upper_inc_gamma(s: float, x: float) -> EvalResult:
    """Upper incomplete gamma function Gamma(s, x).

    Positive ``s`` delegates to the regularized scipy routine.  Negative
    ``s`` climbs the recurrence

        Gamma(s, x) = (Gamma(s+1, x) - x^s exp(-x)) / s

    downward from a positive-parameter seed; the network formulas only
    need one step (s = -2/alpha in (-1, 0)) but the loop is generic.
    """
    if not (math.isfinite(s) and math.isfinite(x)):
        raise SpecFunDomainError("upper_inc_gamma requires finite arguments")
    if x < 0.0:
        raise SpecFunDomainError(f"upper_inc_gamma requires x >= 0, got x={x}")
    if x == 0.0:
        if s <= 0.0:
            raise SpecFunDomainError(
                "Gamma(s, 0) diverges for s <= 0 (the defining integral has a "
                "non-integrable singularity)"
            )
        value = math.gamma(s)
        return EvalResult(value, 8.0 * _EPS * abs(value))

    if s > 0.0:
        value = float(_sp.gammaincc(s, x)) * math.gamma(s)
        return EvalResult(value, 16.0 * _EPS * abs(value) + 5e-308)
    if s == 0.0:
        value = float(_sp.exp1(x))
        return EvalResult(value, 16.0 * _EPS * abs(value) + 5e-308)

    # Seed at s + m in (0, 1]; integer s lands on the exp1 branch.
    m = math.ceil(-s)
    seed = upper_inc_gamma(s + m, x)
    value = seed.value
    bound = seed.abs_error_bound
    for j in range(m, 0, -1):
        t = s + j  # current parameter; we step down to t - 1
        power = math.exp((t - 1.0) * math.log(x) - x)
        value = (value - power) / (t - 1.0)
        bound = (bound + 4.0 * _EPS * power) / abs(t - 1.0) + 4.0 * _EPS * abs(value)
    return EvalResult(value, bound)


def erfcx(x: float) -> EvalResult:
    """Scaled complementary error function exp(x^2) erfc(x) for x >= 0.

    Computed fused so the closed forms never form exp(x^2) explicitly;
    monotonically decreasing, asymptotically 1/(x sqrt(pi)).
    """
    if not math.isfinite(x):
        raise SpecFunDomainError("erfcx requires a finite argument")
    if x < 0.0:
        raise SpecFunDomainError(f"erfcx requires x >= 0, got x={x}")
    value = float(_sp.erfcx(x))
    return EvalResult(value, 8.0 * _EPS * value)


def integral_i1(x: float, y: float, z: float, nu: float) -> EvalResult:
    """int_0^inf t^(x-1) exp(-y t) Gamma(z, nu t) dt in closed form.

    Equals nu^z Gamma(x+z) / (x (y+nu)^(x+z)) 2F1(1, x+z; x+1; y/(y+nu))
    for y > 0, nu > 0, x > 0 and x + z > 0.
    """
    if y <= 0.0 or nu <= 0.0 or x <= 0.0 or x + z <= 0.0 or y + nu <= 0.0:
        raise SpecFunDomainError(
            f"integral_i1 requires y > 0, nu > 0, x > 0, x+z > 0; "
            f"got x={x}, y={y}, z={z}, nu={nu}"
        )
    hyp = _eval_2f1_one(x + z, x + 1.0, y / (y + nu))
    prefactor = nu**z * math.gamma(x + z) / (x * (y + nu) ** (x + z))
    value = prefactor * hyp.value
    bound = abs(prefactor) * hyp.abs_error_bound + 8.0 * _EPS * abs(value)
    return EvalResult(value, bound)


def integral_i0(y: float, z: float, nu: float) -> EvalResult:
    """int_(z^(1/nu))^inf t / (1 + y t^nu) dt in closed form.

    Equals z^(2/nu - 1) / ((nu-2) y) 2F1(1, 1-2/nu; 2-2/nu; -1/(z y)) for
    nu > 2, y > 0, z > 0.  (In the source integral's four-parameter form
    the leading parameter cancels, so it is not part of the surface.)
    """
    if nu <= 2.0:
        raise SpecFunDomainError(
            f"integral_i0 requires nu > 2 (the tail diverges otherwise), got nu={nu}"
        )
    if y <= 0.0 or z <= 0.0:
        raise SpecFunDomainError(
            f"integral_i0 requires y > 0 and z > 0, got y={y}, z={z}"
        )
    hyp = _eval_2f1_one(1.0 - 2.0 / nu, 2.0 - 2.0 / nu, -1.0 / (z * y))
    prefactor = z ** (2.0 / nu - 1.0) / ((nu - 2.0) * y)
    value = prefactor * hyp.value
    bound = abs(prefactor) * hyp.abs_error_bound + 8.0 * _EPS * abs(value)
    return EvalResult(value, bound)
