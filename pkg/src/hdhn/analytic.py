"""Closed-form network analysis: association, interference transforms,
transmission success, and throughput.

Conventions used throughout (per tier i, observed from a link in tier k):

* ``tau_ik`` is the bias ratio B_i / B_k; biases never enter any other way.
* The serving-distance density and all exclusion radii follow from the
  max-biased-power association rule, giving per-tier guard radius
  ``tau_ik^(1/alpha_i) r^(alpha_k/alpha_i)`` around the receiver.
* Interference from an FD cell is collapsed onto its AP location with the
  combined (hypo-exponential / Erlang) gain of the AP and its user, which
  is the same far-field approximation the Monte Carlo module can switch
  on and off.

The per-tier exponent coefficient ``M_ik`` aggregates the association
guard, HD interferers and FD interferers; every success probability and
throughput expression below is built from it.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

from scipy.integrate import quad

from .model import (
    DuplexMode,
    HdhnConfig,
    LinkDirection,
    LinkQuery,
    TierParams,
    target_sirs,
)
from .specfun import erfcx, integral_i0, integral_i1

__all__ = [
    "StpMethod",
    "StpBreakdown",
    "ThroughputReport",
    "DegenerateNetworkError",
    "AnalyticDomainError",
    "association_probability",
    "link_distance_pdf",
    "gi_moment",
    "laplace_fd",
    "laplace_hd",
    "stp_general",
    "stp_alpha4",
    "stp_perfect_ic",
    "stp",
    "throughput",
    "throughput_closed",
    "optimal_fd_portions",
]

# The P_a != P_u branches cancel catastrophically as the powers approach
# each other; below this relative gap the Erlang branch takes over.
EQUAL_POWER_REL_TOL = 1e-9
# Truncation point for semi-infinite quadrature: integrand below
# exp(-CUTOFF) ~ 1e-14 of its peak.
_EXP_CUTOFF = 32.3
_ALPHA_EQ_TOL = 1e-12
# Conservative accuracy tag for results assembled purely from the
# special-function closed forms (their tracked bounds sit around 1e-13).
_CLOSED_FORM_ERR = 1e-11


class DegenerateNetworkError(ValueError):
    """The operation needs at least one tier with positive density."""


class AnalyticDomainError(ValueError):
    """Inputs outside the supported domain of an analytic operation."""


class StpMethod(enum.Enum):
    GENERAL_INTEGRAL = "general_integral"
    ALPHA4_CLOSED_FORM = "alpha4_closed_form"
    PERFECT_IC_CLOSED_FORM = "perfect_ic_closed_form"


@dataclass(frozen=True)
class StpBreakdown:
    """A successful-transmission probability plus how it was obtained."""

    value: float
    method: StpMethod
    quadrature_error: float


@dataclass(frozen=True)
class ThroughputReport:
    """Area throughput per tier [bits/s/Hz/m^2], their total, and the
    per-cell normalization total / sum(densities) [bits/s/Hz/cell]."""

    per_tier: tuple[float, ...]
    total: float
    per_cell: float


def _alphas_equal(config: HdhnConfig) -> bool:
    alphas = [t.pathloss_exp for t in config.tiers]
    return max(alphas) - min(alphas) <= _ALPHA_EQ_TOL


def _all_alpha4(config: HdhnConfig) -> bool:
    return all(abs(t.pathloss_exp - 4.0) <= _ALPHA_EQ_TOL for t in config.tiers)


def _csc(x: float) -> float:
    return 1.0 / math.sin(x)


def _association_coeffs(config: HdhnConfig, k: int) -> list[tuple[float, float]]:
    """(coef, power) pairs of the association exponent: the probability
    that no AP beats the serving one at distance x is
    exp(-pi * sum_i coef_i x^(2 power_i))."""
    alpha_k = config.tiers[k].pathloss_exp
    out = []
    for i, tier in enumerate(config.tiers):
        tau = config.bias_ratio(i, k)
        out.append((tier.density * tau ** (2.0 / tier.pathloss_exp),
                    alpha_k / tier.pathloss_exp))
    return out


def _decaying_integral(terms: list[tuple[float, float]]) -> tuple[float, float]:
    """integral_0^inf exp(-sum coef * v^power) dv for coef >= 0, power > 0.

    The integrand is 1 at the origin and strictly decreasing; truncation
    happens where the exponent passes _EXP_CUTOFF, i.e. the integrand is
    ~1e-14 of its peak.  Returns (value, error-estimate).
    """
    active = [(c, p) for c, p in terms if c > 0.0]
    if not active:
        raise AnalyticDomainError("integral does not decay: all coefficients zero")

    def exponent(v: float) -> float:
        return sum(c * v**p for c, p in active)

    upper = 1.0
    while exponent(upper) < _EXP_CUTOFF and upper < 1e300:
        upper *= 2.0
    while upper > 1e-280 and exponent(upper * 0.5) > _EXP_CUTOFF:
        upper *= 0.5

    value, err = quad(
        lambda v: math.exp(-exponent(v)), 0.0, upper,
        epsabs=1e-280, epsrel=1e-11, limit=200,
    )
    return value, err


def _norm_integral(config: HdhnConfig, k: int) -> tuple[float, float]:
    """Normalization of the serving-distance density in the v = x^2
    substitution; closed form when all pathloss exponents coincide."""
    coeffs = _association_coeffs(config, k)
    if _alphas_equal(config):
        total = sum(c for c, _ in coeffs)
        return 1.0 / (math.pi * total), 0.0
    return _decaying_integral([(math.pi * c, p) for c, p in coeffs])


def association_probability(config: HdhnConfig, tier: int, mode: DuplexMode) -> float:
    """Probability that the typical user is served by a ``mode``-AP of the
    given tier under the max-biased-power rule."""
    if config.total_density <= 0.0:
        raise DegenerateNetworkError("association undefined: all densities zero")
    t = config.tiers[tier]
    lam_mode = t.fd_density if mode is DuplexMode.FD else t.hd_density
    if lam_mode == 0.0:
        return 0.0
    norm, _ = _norm_integral(config, tier)
    return math.pi * lam_mode * norm


def link_distance_pdf(config: HdhnConfig, tier: int, x: float) -> float:
    """Density of the serving-link distance for a user associated to the
    given tier; identical for HD and FD service (only total tier
    densities enter)."""
    if x < 0.0:
        raise AnalyticDomainError(f"distance must be >= 0, got {x}")
    if config.total_density <= 0.0:
        raise DegenerateNetworkError("link distance undefined: all densities zero")
    coeffs = _association_coeffs(config, tier)
    expo = math.pi * sum(c * x ** (2.0 * p) for c, p in coeffs)
    norm, _ = _norm_integral(config, tier)
    return 2.0 * x * math.exp(-expo) / norm


def gi_moment(p_ap: float, p_user: float, delta: float) -> float:
    """Fractional moment E[G^delta] of the combined FD-cell gain
    G = P_a h + P_u h' with independent unit-mean exponential fadings.

    Erlang branch when the powers are (numerically) equal, otherwise the
    hypo-exponential form; defined for delta > -1.
    """
    if delta <= -1.0:
        raise AnalyticDomainError(f"moment requires delta > -1, got {delta}")
    if p_ap <= 0.0 or p_user <= 0.0:
        raise AnalyticDomainError("powers must be positive")
    if abs(p_ap - p_user) <= EQUAL_POWER_REL_TOL * max(p_ap, p_user):
        return p_ap**delta * math.gamma(2.0 + delta)
    num = math.gamma(1.0 + delta) * (p_user ** (delta + 1.0) - p_ap ** (delta + 1.0))
    return num / (p_user - p_ap)


def _fd_gain_core(alpha: float, p_ap: float, p_user: float, nu: float) -> float:
    """Shared kernel of the FD-interference exponent.

    Covers the expectation over the combined gain G of both the complete
    fractional moment and the truncated (incomplete-gamma) part, with the
    guard-radius information carried entirely by ``nu``.
    """
    two_a = 2.0 / alpha
    csc = math.pi * _csc(2.0 * math.pi / alpha)
    if abs(p_ap - p_user) <= EQUAL_POWER_REL_TOL * max(p_ap, p_user):
        i1 = integral_i1(two_a + 2.0, 1.0 / p_ap, -two_a, nu).value
        return (p_ap ** (two_a + 2.0) * (1.0 + two_a) * csc + i1) / p_ap**2
    i1_user = integral_i1(two_a + 1.0, 1.0 / p_user, -two_a, nu).value
    i1_ap = integral_i1(two_a + 1.0, 1.0 / p_ap, -two_a, nu).value
    gap = csc * (p_user ** (two_a + 1.0) - p_ap ** (two_a + 1.0))
    return (gap + i1_user - i1_ap) / (p_user - p_ap)


def laplace_fd(tier: TierParams, s: float, d_min: float) -> float:
    """Laplace transform at s of the interference from this tier's FD
    cells outside radius ``d_min``, under the combined-gain collapse of
    each cell onto its AP position."""
    if s < 0.0 or d_min <= 0.0:
        raise AnalyticDomainError("laplace_fd requires s >= 0 and d_min > 0")
    if tier.pathloss_exp <= 2.0:
        raise AnalyticDomainError("pathloss exponent must exceed 2")
    lam_fd = tier.fd_density
    if s == 0.0 or lam_fd == 0.0:
        return 1.0
    alpha = tier.pathloss_exp
    core = _fd_gain_core(alpha, tier.ap_power, tier.user_power, s / d_min**alpha)
    bracket = -d_min**2 + s ** (2.0 / alpha) * (2.0 / alpha) * core
    return math.exp(-math.pi * lam_fd * bracket)


def laplace_hd(tier: TierParams, s: float, d_min: float) -> float:
    """Laplace transform at s of the interference from this tier's HD
    (downlink-only) cells outside radius ``d_min``."""
    if s < 0.0 or d_min <= 0.0:
        raise AnalyticDomainError("laplace_hd requires s >= 0 and d_min > 0")
    if tier.pathloss_exp <= 2.0:
        raise AnalyticDomainError("pathloss exponent must exceed 2")
    lam_hd = tier.hd_density
    if s == 0.0 or lam_hd == 0.0:
        return 1.0
    alpha = tier.pathloss_exp
    tail = integral_i0(1.0 / (s * tier.ap_power), d_min**alpha, alpha).value
    return math.exp(-2.0 * math.pi * lam_hd * tail)


def _hd_exponent_term(alpha_i: float, tau_ik: float, p_t: float,
                      p_ap_i: float, theta: float) -> float:
    """HD-interferer contribution to the per-tier exponent coefficient."""
    if theta == 0.0:
        return 0.0
    return integral_i0(p_t / (p_ap_i * theta), tau_ik, alpha_i).value


def _fd_exponent_term(alpha_i: float, tau_ik: float, p_t: float,
                      tier_i: TierParams, theta: float) -> float:
    """FD-interferer contribution to the per-tier exponent coefficient."""
    if theta == 0.0:
        return 0.0
    core = _fd_gain_core(alpha_i, tier_i.ap_power, tier_i.user_power,
                         theta / (p_t * tau_ik))
    return (-tau_ik ** (2.0 / alpha_i) / 2.0
            + (theta / p_t) ** (2.0 / alpha_i) * core / alpha_i)


def _mix_terms(config: HdhnConfig, k: int, p_t: float, theta: float) -> list[float]:
    """Per-tier exponent coefficients M_ik for a tier-k link at target SIR
    ``theta`` transmitted with power ``p_t``.

    M_ik combines the association guard (tau^(2/alpha)/2), the HD
    interferers weighted by 1 - fd_portion, and the FD interferers
    weighted by fd_portion.  The mode of the evaluated link enters only
    through ``theta``; self-interference is handled separately.
    """
    out = []
    for i, tier in enumerate(config.tiers):
        alpha_i = tier.pathloss_exp
        tau = config.bias_ratio(i, k)
        term = tau ** (2.0 / alpha_i) / 2.0
        if tier.fd_portion < 1.0:
            term += (1.0 - tier.fd_portion) * _hd_exponent_term(
                alpha_i, tau, p_t, tier.ap_power, theta)
        if tier.fd_portion > 0.0:
            term += tier.fd_portion * _fd_exponent_term(
                alpha_i, tau, p_t, tier, theta)
        out.append(term)
    return out


def _query_self_interference(config: HdhnConfig, query: LinkQuery) -> float:
    tier = config.tiers[query.tier_index]
    if query.mode is DuplexMode.HD:
        return 0.0
    _, p_r = query.tx_rx_powers(tier)
    return tier.residual_self_interference(p_r)


def stp_general(config: HdhnConfig, query: LinkQuery) -> StpBreakdown:
    """Successful-transmission probability by semi-infinite quadrature.

    Works for any mix of pathloss exponents and any self-interference
    level.  After substituting the squared serving distance, the integrand
    decays as a per-tier mixture exp(-c1 v - c2 v^(alpha/2)); the outer
    integral is truncated where it falls below ~1e-14 of its peak and the
    result is the ratio to the serving-distance normalization.
    """
    if config.total_density <= 0.0:
        raise DegenerateNetworkError("no transmitters: all densities zero")
    k = query.tier_index
    tier = config.tiers[k]
    alpha_k = tier.pathloss_exp
    theta = query.target_sir
    p_t, _ = query.tx_rx_powers(tier)
    self_ic = _query_self_interference(config, query)

    mixes = _mix_terms(config, k, p_t, theta)
    terms: list[tuple[float, float]] = []
    for i, t in enumerate(config.tiers):
        if t.density > 0.0:
            terms.append((2.0 * math.pi * t.density * mixes[i],
                          alpha_k / t.pathloss_exp))
    if self_ic > 0.0:
        terms.append((self_ic * theta / p_t, alpha_k / 2.0))

    numerator, num_err = _decaying_integral(terms)
    norm, norm_err = _norm_integral(config, k)
    ps = numerator / norm
    err = (num_err + ps * norm_err) / norm
    return StpBreakdown(min(max(ps, 0.0), 1.0), StpMethod.GENERAL_INTEGRAL, err)


def stp_perfect_ic(config: HdhnConfig, query: LinkQuery) -> StpBreakdown:
    """Closed-form success probability when every tier shares one
    pathloss exponent and the evaluated link sees no self-interference
    (HD links always qualify; FD links need perfect cancellation)."""
    if config.total_density <= 0.0:
        raise DegenerateNetworkError("no transmitters: all densities zero")
    if not _alphas_equal(config):
        raise AnalyticDomainError(
            "perfect-IC closed form needs one common pathloss exponent")
    if _query_self_interference(config, query) != 0.0:
        raise AnalyticDomainError(
            "closed form only valid without residual self-interference")
    k = query.tier_index
    tier = config.tiers[k]
    alpha = tier.pathloss_exp
    p_t, _ = query.tx_rx_powers(tier)
    mixes = _mix_terms(config, k, p_t, query.target_sir)
    num = sum(t.density * config.bias_ratio(i, k) ** (2.0 / alpha)
              for i, t in enumerate(config.tiers))
    den = 2.0 * sum(t.density * mixes[i] for i, t in enumerate(config.tiers))
    value = min(max(num / den, 0.0), 1.0)
    return StpBreakdown(value, StpMethod.PERFECT_IC_CLOSED_FORM,
                        _CLOSED_FORM_ERR * value)


def stp_alpha4(config: HdhnConfig, query: LinkQuery) -> StpBreakdown:
    """Closed-form success probability for pathloss exponent 4 everywhere
    and nonzero residual self-interference on the evaluated link.

    The Gaussian-type outer integral evaluates to an erfcx expression; the
    scaled form never materializes exp(x^2), so arbitrarily strong
    cancellation stays overflow-free.  With perfect cancellation this
    delegates to the perfect-IC form (its zero-C limit).
    """
    if config.total_density <= 0.0:
        raise DegenerateNetworkError("no transmitters: all densities zero")
    if not _all_alpha4(config):
        raise AnalyticDomainError("closed form requires pathloss exponent 4 "
                                  "in every tier")
    self_ic = _query_self_interference(config, query)
    if self_ic == 0.0:
        return stp_perfect_ic(config, query)
    k = query.tier_index
    tier = config.tiers[k]
    theta = query.target_sir
    p_t, _ = query.tx_rx_powers(tier)
    mixes = _mix_terms(config, k, p_t, theta)
    tau_sum = sum(t.density * math.sqrt(config.bias_ratio(i, k))
                  for i, t in enumerate(config.tiers))
    mix_sum = sum(t.density * mixes[i] for i, t in enumerate(config.tiers))
    scale = math.sqrt(self_ic * theta)
    x = math.pi * math.sqrt(p_t) * mix_sum / scale
    value = (math.pi**1.5 * math.sqrt(p_t) * tau_sum / (2.0 * scale)
             * erfcx(x).value)
    value = min(max(value, 0.0), 1.0)
    return StpBreakdown(value, StpMethod.ALPHA4_CLOSED_FORM,
                        _CLOSED_FORM_ERR * value)


def stp(config: HdhnConfig, query: LinkQuery) -> StpBreakdown:
    """Success probability via the fastest applicable method: perfect-IC
    closed form, then the alpha = 4 closed form, then quadrature."""
    if _alphas_equal(config) and _query_self_interference(config, query) == 0.0:
        return stp_perfect_ic(config, query)
    if _all_alpha4(config):
        return stp_alpha4(config, query)
    return stp_general(config, query)


def throughput(config: HdhnConfig) -> ThroughputReport:
    """Area throughput: per tier, the HD fraction carries the downlink
    rate and the FD fraction carries both directions, each weighted by
    its success probability."""
    if config.total_density <= 0.0:
        zeros = tuple(0.0 for _ in config.tiers)
        return ThroughputReport(zeros, 0.0, 0.0)
    theta_a, theta_u = target_sirs(config)
    w = config.bandwidth
    per_tier = []
    for k, tier in enumerate(config.tiers):
        if tier.density == 0.0:
            per_tier.append(0.0)
            continue
        rate_sum = 0.0
        delta = tier.fd_portion
        if delta < 1.0 and config.rate_ap > 0.0:
            ps_hd = stp(config, LinkQuery(k, DuplexMode.HD,
                                          LinkDirection.DOWNLINK, theta_a))
            rate_sum += (1.0 - delta) * config.rate_ap * ps_hd.value
        if delta > 0.0:
            if config.rate_ap > 0.0:
                ps_dn = stp(config, LinkQuery(k, DuplexMode.FD,
                                              LinkDirection.DOWNLINK, theta_a))
                rate_sum += delta * config.rate_ap * ps_dn.value
            if config.rate_user > 0.0:
                ps_up = stp(config, LinkQuery(k, DuplexMode.FD,
                                              LinkDirection.UPLINK, theta_u))
                rate_sum += delta * config.rate_user * ps_up.value
        per_tier.append(tier.density * rate_sum / w)
    total = sum(per_tier)
    per_cell = total / config.total_density
    return ThroughputReport(tuple(per_tier), total, per_cell)


def _mix_sum(config: HdhnConfig, k: int, p_t: float, theta: float) -> float:
    mixes = _mix_terms(config, k, p_t, theta)
    return sum(t.density * mixes[i] for i, t in enumerate(config.tiers))


def throughput_closed(config: HdhnConfig) -> ThroughputReport:
    """Fully closed-form throughput in either special regime:

    * one common pathloss exponent and perfect self-IC in every tier that
      actually runs FD cells, or
    * pathloss exponent 4 everywhere with nonzero residual
      self-interference in every FD-active tier.

    Anything else raises rather than silently approximating.
    """
    if config.total_density <= 0.0:
        zeros = tuple(0.0 for _ in config.tiers)
        return ThroughputReport(zeros, 0.0, 0.0)
    theta_a, theta_u = target_sirs(config)
    w = config.bandwidth
    fd_active = [t for t in config.tiers if t.density > 0.0 and t.fd_portion > 0.0]
    perfect_ok = (_alphas_equal(config)
                  and all(t.self_ic_linear == 0.0 for t in fd_active))
    alpha4_ok = (_all_alpha4(config)
                 and all(t.self_ic_linear > 0.0 for t in fd_active))
    if not perfect_ok and not alpha4_ok:
        raise AnalyticDomainError(
            "closed-form throughput needs either equal pathloss exponents "
            "with perfect self-IC in FD-active tiers, or pathloss exponent 4 "
            "with nonzero residual self-interference in FD-active tiers"
        )

    per_tier = []
    for k, tier in enumerate(config.tiers):
        if tier.density == 0.0:
            per_tier.append(0.0)
            continue
        alpha = tier.pathloss_exp
        delta = tier.fd_portion
        tau_sum = sum(t.density * config.bias_ratio(i, k) ** (2.0 / alpha)
                      for i, t in enumerate(config.tiers))
        if perfect_ok:
            value = 0.0
            if config.rate_ap > 0.0:
                value += config.rate_ap / _mix_sum(config, k, tier.ap_power,
                                                   theta_a)
            if delta > 0.0 and config.rate_user > 0.0:
                value += delta * config.rate_user / _mix_sum(
                    config, k, tier.user_power, theta_u)
            per_tier.append(tier.density * tau_sum * value / (2.0 * w))
            continue
        # alpha = 4 with residual self-interference on FD links
        value = 0.0
        if delta < 1.0 and config.rate_ap > 0.0:
            value += (config.rate_ap * (1.0 - delta)
                      / (2.0 * _mix_sum(config, k, tier.ap_power, theta_a)))
        if delta > 0.0:
            fd_part = 0.0
            if config.rate_ap > 0.0:
                c_dn = tier.residual_self_interference(tier.user_power)
                scale = math.sqrt(c_dn * theta_a)
                x = (math.pi * math.sqrt(tier.ap_power)
                     * _mix_sum(config, k, tier.ap_power, theta_a) / scale)
                fd_part += (config.rate_ap * math.sqrt(tier.ap_power) / scale
                            * erfcx(x).value)
            if config.rate_user > 0.0:
                c_up = tier.residual_self_interference(tier.ap_power)
                scale = math.sqrt(c_up * theta_u)
                x = (math.pi * math.sqrt(tier.user_power)
                     * _mix_sum(config, k, tier.user_power, theta_u) / scale)
                fd_part += (config.rate_user * math.sqrt(tier.user_power)
                            / scale * erfcx(x).value)
            value += math.pi**1.5 * delta * fd_part / 2.0
        per_tier.append(tier.density * tau_sum * value / w)

    total = sum(per_tier)
    per_cell = total / config.total_density
    return ThroughputReport(tuple(per_tier), total, per_cell)


class _FastThroughput:
    """Grid-search helper: the interference exponent sums are affine in
    the FD portions, so precomputing the HD/FD split per (tier, power)
    makes one throughput evaluation O(K^2) arithmetic.

    Only valid when every tier's link has a closed form for every FD
    portion (common alpha with perfect IC, or alpha = 4 with residual
    self-interference); the optimizer falls back to quadrature otherwise.
    """

    def __init__(self, config: HdhnConfig):
        self.config = config
        self.theta_a, self.theta_u = target_sirs(config)
        self.w = config.bandwidth
        # cases[(k, 'a'|'u')] = (base_i, slope_i) arrays such that
        # sum_i lambda_i M_ik = sum(base) + sum(delta_i * slope_i)
        self.cases = {}
        for k, tier in enumerate(config.tiers):
            for tag, p_t, theta in (("a", tier.ap_power, self.theta_a),
                                    ("u", tier.user_power, self.theta_u)):
                base = []
                slope = []
                for i, t in enumerate(config.tiers):
                    alpha_i = t.pathloss_exp
                    tau = config.bias_ratio(i, k)
                    guard = tau ** (2.0 / alpha_i) / 2.0
                    hd = _hd_exponent_term(alpha_i, tau, p_t, t.ap_power, theta)
                    fd = _fd_exponent_term(alpha_i, tau, p_t, t, theta)
                    base.append(t.density * (guard + hd))
                    slope.append(t.density * (fd - hd))
                self.cases[(k, tag)] = (base, slope)

    def _sum(self, k: int, tag: str, deltas) -> float:
        base, slope = self.cases[(k, tag)]
        return sum(base) + sum(d * s for d, s in zip(deltas, slope))

    def total(self, deltas) -> float:
        config = self.config
        out = 0.0
        for k, tier in enumerate(config.tiers):
            if tier.density == 0.0:
                continue
            alpha = tier.pathloss_exp
            delta = deltas[k]
            tau_sum = sum(t.density * config.bias_ratio(i, k) ** (2.0 / alpha)
                          for i, t in enumerate(config.tiers))
            perfect = tier.self_ic_linear == 0.0
            value = 0.0
            if perfect:
                if config.rate_ap > 0.0:
                    value += config.rate_ap / (2.0 * self._sum(k, "a", deltas))
                if delta > 0.0 and config.rate_user > 0.0:
                    value += (delta * config.rate_user
                              / (2.0 * self._sum(k, "u", deltas)))
            else:
                if delta < 1.0 and config.rate_ap > 0.0:
                    value += (config.rate_ap * (1.0 - delta)
                              / (2.0 * self._sum(k, "a", deltas)))
                if delta > 0.0:
                    fd_part = 0.0
                    if config.rate_ap > 0.0:
                        scale = math.sqrt(
                            tier.residual_self_interference(tier.user_power)
                            * self.theta_a)
                        x = (math.pi * math.sqrt(tier.ap_power)
                             * self._sum(k, "a", deltas) / scale)
                        fd_part += (config.rate_ap * math.sqrt(tier.ap_power)
                                    / scale * erfcx(x).value)
                    if config.rate_user > 0.0:
                        scale = math.sqrt(
                            tier.residual_self_interference(tier.ap_power)
                            * self.theta_u)
                        x = (math.pi * math.sqrt(tier.user_power)
                             * self._sum(k, "u", deltas) / scale)
                        fd_part += (config.rate_user
                                    * math.sqrt(tier.user_power) / scale
                                    * erfcx(x).value)
                    value += math.pi**1.5 * delta * fd_part / 2.0
            out += tier.density * tau_sum * value / self.w
        return out


def _fast_grid_eligible(config: HdhnConfig) -> bool:
    if not _alphas_equal(config):
        return False
    alpha4 = _all_alpha4(config)
    for tier in config.tiers:
        if tier.density > 0.0 and tier.self_ic_linear > 0.0 and not alpha4:
            return False
    return True


def optimal_fd_portions(config: HdhnConfig,
                        grid_step: float = 0.05) -> tuple[list[float], float]:
    """Exhaustive grid search for the FD portions maximizing total
    throughput.

    The grid covers {0, grid_step, ..., 1} per tier; ties break toward
    the lexicographically smaller portion vector.  Cheap closed forms are
    precomputed where available, otherwise each grid point runs the
    quadrature path.
    """
    if not (0.0 < grid_step <= 0.5):
        raise AnalyticDomainError(f"grid_step must lie in (0, 0.5], got {grid_step}")
    steps = int(math.floor(1.0 / grid_step + 1e-9))
    values = [round(i * grid_step, 12) for i in range(steps + 1)]
    if values[-1] < 1.0 - 1e-12:
        values.append(1.0)

    fast = _FastThroughput(config) if _fast_grid_eligible(config) else None
    best_deltas = None
    best_value = -math.inf
    for deltas in itertools.product(values, repeat=config.num_tiers):
        if fast is not None:
            value = fast.total(deltas)
        else:
            value = throughput(config.with_fd_portions(deltas)).total
        if value > best_value:
            best_value = value
            best_deltas = deltas
    return list(best_deltas), best_value
