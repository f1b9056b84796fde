"""Point-process simulation oracle for the analytic formulas.

The estimators here realize the network directly - Poisson access points,
independent duplex marks, per-cell users, exponential fading - and share
no code with the closed forms they check.  Determinism is a hard
guarantee: every realization draws from counter-based streams keyed by
(seed, realization index, entity), so results are bit-identical for a
fixed seed regardless of worker count or call order.

Entity stream assignment within one realization (tier k):
  0         fading and any per-receiver draws during evaluation
  2k + 1    tier-k AP geometry: counts, positions, duplex marks
  2k + 2    tier-k user placement: link distances and angles

Separate per-tier streams keep every tier's interior layout intact when
the window radius grows, which the edge-effect checks rely on.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import DuplexMode, HdhnConfig, LinkDirection, LinkQuery, TierParams
from .analytic import _association_coeffs

__all__ = [
    "ApproxMode",
    "SimSettings",
    "TierRealization",
    "NetworkRealization",
    "Association",
    "Estimate",
    "EmptyWindowError",
    "default_window_radius",
    "sample_ppp",
    "LinkDistanceSampler",
    "sample_realization",
    "associate",
    "estimate_laplace",
    "estimate_laplace_sweep",
    "estimate_stp",
    "estimate_throughput",
]

_SEED_MASK = (1 << 64) - 1


class ApproxMode(enum.Enum):
    """How FD-cell interference is realized: EXACT places each cell's
    user at its own position; COLLAPSED lumps the user's power onto the
    AP location with the combined two-fading gain (the same far-field
    shortcut the analytic transform uses)."""

    EXACT = "exact"
    COLLAPSED = "collapsed"


class EmptyWindowError(RuntimeError):
    """A realization contained no AP to associate with."""


@dataclass(frozen=True)
class SimSettings:
    """Monte Carlo run parameters.

    ``window_radius`` is the disk radius around the typical receiver in
    which transmitters are realized; pick it with
    :func:`default_window_radius` so truncated interference is
    negligible.  ``user_density`` is carried for full user-field
    realizations; the estimators below place exactly one user per cell
    (saturated loading), so it does not enter them.
    """

    window_radius: float
    realizations: int
    seed: int
    user_density: float = 0.0
    approximation: ApproxMode = ApproxMode.COLLAPSED

    def __post_init__(self):
        if self.window_radius <= 0.0:
            raise ValueError("window_radius must be positive")
        if self.realizations <= 0:
            raise ValueError("realizations must be positive")


@dataclass(frozen=True)
class Estimate:
    """Sample mean with its standard error over ``n`` realizations."""

    mean: float
    stderr: float
    n: int
    seed: int

    def agrees_with(self, value: float, n_sigma: float = 3.0) -> bool:
        return abs(self.mean - value) <= n_sigma * self.stderr


@dataclass(frozen=True)
class TierRealization:
    """One tier's sampled cells: AP positions (n, 2), duplex marks (n,)
    and the per-cell user position (n, 2).  HD-cell users never transmit;
    they exist as downlink receivers."""

    ap_xy: np.ndarray
    is_fd: np.ndarray
    user_xy: np.ndarray


@dataclass(frozen=True)
class NetworkRealization:
    """One sampled multi-tier snapshot with the typical receiver at the
    origin.  Fading is not stored: links are receiver-specific, so unit-
    mean exponential gains are drawn per evaluated receiver from the
    realization's fading stream."""

    tiers: tuple[TierRealization, ...]
    window_radius: float

    @property
    def total_aps(self) -> int:
        return sum(len(t.ap_xy) for t in self.tiers)


@dataclass(frozen=True)
class Association:
    tier: int
    mode: DuplexMode
    ap_index: int
    distance: float


def _rng(seed: int, realization: int, entity: int) -> np.random.Generator:
    ss = np.random.SeedSequence(
        entropy=(seed & _SEED_MASK, realization & _SEED_MASK, entity)
    )
    return np.random.Generator(np.random.Philox(ss))


def default_window_radius(config: HdhnConfig, tail_fraction: float = 1e-3) -> float:
    """Disk radius such that expected interference from beyond it is
    below ``tail_fraction`` of the in-window expectation.

    The power-law tail integrates to ~R^(2-alpha), so measured against a
    typical link distance d0 the truncated fraction is (d0/R)^(alpha-2);
    the slowest-decaying tier dictates the radius.
    """
    if config.total_density <= 0.0:
        raise ValueError("window radius undefined for an empty network")
    d0 = 0.5 / math.sqrt(config.total_density)
    alpha_min = min(t.pathloss_exp for t in config.tiers)
    return d0 * tail_fraction ** (-1.0 / (alpha_min - 2.0))


_PPP_BATCH = 512


def _radial_ppp(density: float, rng: np.random.Generator, r2_lo: float,
                r2_hi: float) -> tuple[np.ndarray, np.ndarray]:
    """Points of a planar Poisson process with squared radii in
    [r2_lo, r2_hi), plus one auxiliary uniform mark per point.

    Successive squared radii form a rate-(pi density) Poisson arrival
    sequence, drawn in fixed-size batches: enlarging the window only
    extends the sequence, so the interior point set (and its marks) is
    identical across window radii for the same stream.  That property is
    what makes the edge-effect checks measure edge bias instead of seed
    noise.
    """
    if density == 0.0:
        return np.empty((0, 2)), np.empty(0)
    rate = math.pi * density
    r2_parts, ang_parts, aux_parts = [], [], []
    total = r2_lo
    while True:
        u = rng.random((_PPP_BATCH, 3))
        arrivals = total + np.cumsum(-np.log1p(-u[:, 0]) / rate)
        keep = arrivals < r2_hi
        r2_parts.append(arrivals[keep])
        ang_parts.append(u[keep, 1])
        aux_parts.append(u[keep, 2])
        if not keep.all():
            break
        total = arrivals[-1]
    r = np.sqrt(np.concatenate(r2_parts))
    phi = np.concatenate(ang_parts) * (2.0 * math.pi)
    aux = np.concatenate(aux_parts)
    return np.column_stack((r * np.cos(phi), r * np.sin(phi))), aux


def sample_ppp(density: float, radius: float,
               rng: np.random.Generator) -> np.ndarray:
    """Homogeneous Poisson points on a disk of the given radius, as an
    (n, 2) coordinate array; the count is Poisson with mean
    density * pi * radius^2 and positions are uniform."""
    if density < 0.0 or radius <= 0.0:
        raise ValueError("density must be >= 0 and radius > 0")
    return _radial_ppp(density, rng, 0.0, radius**2)[0]


class LinkDistanceSampler:
    """Draws serving-link distances per tier, matching the association
    rule's distance law for the given config.

    With one common pathloss exponent the squared distance is exponential
    and sampling is exact; otherwise a dense quantile table is
    precomputed once and inverted by interpolation.
    """

    _GRID_POINTS = 4096

    def __init__(self, config: HdhnConfig):
        self._rates: list[float | None] = []
        self._tables: list[tuple[np.ndarray, np.ndarray] | None] = []
        for k in range(config.num_tiers):
            coeffs = _association_coeffs(config, k)
            if all(abs(p - 1.0) < 1e-12 for _, p in coeffs):
                self._rates.append(math.pi * sum(c for c, _ in coeffs))
                self._tables.append(None)
            else:
                self._rates.append(None)
                self._tables.append(self._build_table(coeffs))

    @staticmethod
    def _build_table(coeffs) -> tuple[np.ndarray, np.ndarray]:
        def exponent(v):
            return math.pi * sum(c * v**p for c, p in coeffs if c > 0.0)

        upper = 1.0
        while exponent(upper) < 34.0:
            upper *= 2.0
        v = np.linspace(0.0, upper, LinkDistanceSampler._GRID_POINTS)
        pdf = np.exp(-np.asarray([exponent(x) for x in v]))
        cdf = np.concatenate(([0.0], np.cumsum((pdf[1:] + pdf[:-1]) * 0.5 * np.diff(v))))
        cdf /= cdf[-1]
        return cdf, v

    def from_uniform(self, tier: int, u: np.ndarray) -> np.ndarray:
        rate = self._rates[tier]
        if rate is not None:
            return np.sqrt(-np.log1p(-u) / rate)
        cdf, v = self._tables[tier]
        return np.sqrt(np.interp(u, cdf, v))

    def sample(self, tier: int, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.from_uniform(tier, rng.random(n))


def sample_realization(config: HdhnConfig, window_radius: float, seed: int,
                       index: int,
                       sampler: LinkDistanceSampler | None = None
                       ) -> NetworkRealization:
    """Realize all tiers on the window disk for realization ``index``."""
    if sampler is None:
        sampler = LinkDistanceSampler(config)
    tiers = []
    for k, tier in enumerate(config.tiers):
        rng_geo = _rng(seed, index, 2 * k + 1)
        rng_usr = _rng(seed, index, 2 * k + 2)
        ap_xy, mark = _radial_ppp(tier.density, rng_geo, 0.0, window_radius**2)
        n = len(ap_xy)
        is_fd = mark < tier.fd_portion
        # Per-point (distance, angle) pairs keep the user layout of
        # interior APs stable when the window grows.
        u = rng_usr.random((n, 2))
        dist = sampler.from_uniform(k, u[:, 0])
        angle = u[:, 1] * (2.0 * math.pi)
        offsets = np.column_stack((dist * np.cos(angle), dist * np.sin(angle)))
        tiers.append(TierRealization(ap_xy, is_fd, ap_xy + offsets))
    return NetworkRealization(tuple(tiers), window_radius)


def associate(realization: NetworkRealization, config: HdhnConfig) -> Association:
    """Serve the typical user at the origin by the max-biased-power rule;
    ties break to the lowest tier index, then the nearest AP."""
    best: Association | None = None
    best_metric = -math.inf
    for k, (tier_real, tier) in enumerate(zip(realization.tiers, config.tiers)):
        if len(tier_real.ap_xy) == 0:
            continue
        d = np.hypot(tier_real.ap_xy[:, 0], tier_real.ap_xy[:, 1])
        idx = int(np.argmin(d))
        metric = tier.bias * float(d[idx]) ** -tier.pathloss_exp
        if metric > best_metric:
            mode = DuplexMode.FD if tier_real.is_fd[idx] else DuplexMode.HD
            best = Association(k, mode, idx, float(d[idx]))
            best_metric = metric
    if best is None:
        raise EmptyWindowError("no AP fell inside the simulation window")
    return best


def _interference_at(point: np.ndarray, realization: NetworkRealization,
                     config: HdhnConfig, rng: np.random.Generator,
                     skip: tuple[int, int] | None) -> float:
    """Aggregate interference received at ``point``: every AP transmits
    downlink, every FD cell's user transmits uplink; fresh unit-mean
    exponential fading per link.  ``skip`` = (tier, ap index) excludes the
    serving cell (its AP and its user)."""
    total = 0.0
    for i, (tier_real, tier) in enumerate(zip(realization.tiers, config.tiers)):
        n = len(tier_real.ap_xy)
        if n == 0:
            continue
        keep = np.ones(n, dtype=bool)
        if skip is not None and skip[0] == i:
            keep[skip[1]] = False
        alpha = tier.pathloss_exp
        d_ap = np.hypot(*(tier_real.ap_xy[keep] - point).T)
        total += tier.ap_power * float(
            np.sum(rng.exponential(size=d_ap.size) * d_ap**-alpha))
        fd_keep = keep & tier_real.is_fd
        if np.any(fd_keep):
            d_u = np.hypot(*(tier_real.user_xy[fd_keep] - point).T)
            total += tier.user_power * float(
                np.sum(rng.exponential(size=d_u.size) * d_u**-alpha))
    return total


def _evaluate_link(config: HdhnConfig, real: NetworkRealization,
                   assoc: Association, mode: DuplexMode,
                   direction: LinkDirection, theta: float,
                   rng_fad: np.random.Generator) -> float:
    """Success indicator of the typical link under the given mode and
    direction.

    The serving AP's duplex mark is forced to ``mode``: marks are
    independent of geometry and fading, so conditioning on the mode is
    exactly a substitution.
    """
    tier = config.tiers[assoc.tier]
    if direction is LinkDirection.DOWNLINK:
        receiver = np.zeros(2)
        p_t, p_r = tier.ap_power, tier.user_power
    else:
        receiver = real.tiers[assoc.tier].ap_xy[assoc.ap_index]
        p_t, p_r = tier.user_power, tier.ap_power
    self_ic = (tier.residual_self_interference(p_r)
               if mode is DuplexMode.FD else 0.0)
    signal = p_t * rng_fad.exponential() * assoc.distance**-tier.pathloss_exp
    interf = _interference_at(receiver, real, config, rng_fad,
                              skip=(assoc.tier, assoc.ap_index))
    return 1.0 if signal >= theta * (self_ic + interf) else 0.0


def _stp_one(config: HdhnConfig, query: LinkQuery, radius: float, seed: int,
             index: int, sampler: LinkDistanceSampler) -> float:
    """One realization of the conditioned link: NaN when the association
    lands outside the queried tier (rejected), else the success indicator."""
    real = sample_realization(config, radius, seed, index, sampler)
    try:
        assoc = associate(real, config)
    except EmptyWindowError:
        return math.nan
    if assoc.tier != query.tier_index:
        return math.nan
    rng_fad = _rng(seed, index, 0)
    return _evaluate_link(config, real, assoc, query.mode, query.direction,
                          query.target_sir, rng_fad)


def _chunked(n: int, workers: int) -> list[tuple[int, int]]:
    chunk = max(1, math.ceil(n / max(1, workers)))
    return [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]


def _stp_chunk(args) -> np.ndarray:
    config, query, radius, seed, lo, hi, sampler = args
    return np.asarray([
        _stp_one(config, query, radius, seed, i, sampler) for i in range(lo, hi)
    ])


def _collect(worker, payloads, workers: int) -> np.ndarray:
    """Run chunk payloads (serially or in a process pool) and concatenate
    results in index order, so the estimate never depends on scheduling."""
    if workers <= 1:
        parts = [worker(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(worker, payloads))
    return np.concatenate(parts) if parts else np.empty(0)


def _to_estimate(values: np.ndarray, seed: int) -> Estimate:
    n = values.shape[0]
    mean = float(np.mean(values)) if n else math.nan
    stderr = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return Estimate(mean, stderr, n, seed)


def estimate_stp(config: HdhnConfig, query: LinkQuery, sim: SimSettings,
                 workers: int = 1) -> Estimate:
    """Empirical success probability of the queried link, conditioned on
    the typical user associating to the queried tier (realizations that
    associate elsewhere are rejected)."""
    sampler = LinkDistanceSampler(config)
    payloads = [(config, query, sim.window_radius, sim.seed, lo, hi, sampler)
                for lo, hi in _chunked(sim.realizations, workers)]
    raw = _collect(_stp_chunk, payloads, workers)
    return _to_estimate(raw[~np.isnan(raw)], sim.seed)


def _laplace_chunk(args) -> np.ndarray:
    (tier, s_values, d_min, mode, radius, seed, lo, hi, link_rate) = args
    out = np.empty((hi - lo, len(s_values)))
    lam_fd = tier.fd_density
    alpha = tier.pathloss_exp
    for row, index in enumerate(range(lo, hi)):
        rng_geo = _rng(seed, index, 1)
        rng_usr = _rng(seed, index, 2)
        rng_fad = _rng(seed, index, 0)
        xy, _ = _radial_ppp(lam_fd, rng_geo, d_min**2, radius**2)
        n = len(xy)
        r = np.hypot(xy[:, 0], xy[:, 1])
        gains = rng_fad.random((n, 2))
        h_ap = -np.log1p(-gains[:, 0])
        h_user = -np.log1p(-gains[:, 1])
        if mode is ApproxMode.COLLAPSED:
            interf = float(np.sum(
                (tier.ap_power * h_ap + tier.user_power * h_user) * r**-alpha))
        else:
            u = rng_usr.random((n, 2))
            d_link = np.sqrt(-np.log1p(-u[:, 0]) / link_rate)
            psi = u[:, 1] * (2.0 * math.pi)
            d_user = np.hypot(xy[:, 0] + d_link * np.cos(psi),
                              xy[:, 1] + d_link * np.sin(psi))
            interf = float(
                np.sum(tier.ap_power * h_ap * r**-alpha)
                + np.sum(tier.user_power * h_user * d_user**-alpha))
        out[row] = np.exp(-np.asarray(s_values) * interf)
    return out


def estimate_laplace_sweep(tier: TierParams, s_values, d_min: float,
                           mode: ApproxMode | None, sim: SimSettings,
                           workers: int = 1) -> list[Estimate]:
    """Sample-mean Laplace transform of this tier's FD-cell interference
    outside ``d_min``, evaluated at every s on shared realizations.

    EXACT mode places each cell's user at a distance drawn from the
    single-tier serving-distance law, uniform in angle; COLLAPSED applies
    the same far-field collapse as the analytic transform.  ``mode=None``
    falls back to the settings' approximation field.
    """
    if mode is None:
        mode = sim.approximation
    if d_min <= 0.0 or d_min >= sim.window_radius:
        raise ValueError("need 0 < d_min < window_radius")
    link_rate = math.pi * tier.density
    payloads = [
        (tier, tuple(float(s) for s in s_values), d_min, mode,
         sim.window_radius, sim.seed, lo, hi, link_rate)
        for lo, hi in _chunked(sim.realizations, workers)
    ]
    raw = _collect(_laplace_chunk, payloads, workers)
    out = []
    for col, s in enumerate(s_values):
        if s == 0.0:
            out.append(Estimate(1.0, 0.0, sim.realizations, sim.seed))
        else:
            out.append(_to_estimate(raw[:, col], sim.seed))
    return out


def estimate_laplace(tier: TierParams, s: float, d_min: float,
                     mode: ApproxMode | None, sim: SimSettings,
                     workers: int = 1) -> Estimate:
    """Single-point variant of :func:`estimate_laplace_sweep`."""
    return estimate_laplace_sweep(tier, [s], d_min, mode, sim, workers)[0]


def _throughput_chunk(args) -> np.ndarray:
    config, radius, seed, lo, hi, sampler, theta_a, theta_u = args
    out = np.full((hi - lo, config.num_tiers), np.nan)
    for row, index in enumerate(range(lo, hi)):
        real = sample_realization(config, radius, seed, index, sampler)
        try:
            assoc = associate(real, config)
        except EmptyWindowError:
            continue
        k = assoc.tier
        tier = config.tiers[k]
        delta = tier.fd_portion
        rng_fad = _rng(seed, index, 0)
        rate_sum = 0.0
        if delta < 1.0 and config.rate_ap > 0.0:
            ind = _evaluate_link(config, real, assoc, DuplexMode.HD,
                                 LinkDirection.DOWNLINK, theta_a, rng_fad)
            rate_sum += (1.0 - delta) * config.rate_ap * ind
        if delta > 0.0:
            if config.rate_ap > 0.0:
                ind = _evaluate_link(config, real, assoc, DuplexMode.FD,
                                     LinkDirection.DOWNLINK, theta_a, rng_fad)
                rate_sum += delta * config.rate_ap * ind
            if config.rate_user > 0.0:
                ind = _evaluate_link(config, real, assoc, DuplexMode.FD,
                                     LinkDirection.UPLINK, theta_u, rng_fad)
                rate_sum += delta * config.rate_user * ind
        out[row, k] = rate_sum
    return out


def estimate_throughput(config: HdhnConfig, sim: SimSettings,
                        workers: int = 1) -> list[Estimate]:
    """Per-tier area throughput from typical-link realizations.

    The area sum over cells reduces, through the stationarity of the AP
    processes, to density times the per-link rate-weighted success mix;
    the estimator realizes that mix on the typical link of whichever tier
    the association selects, evaluating the HD and both FD directions
    with the tier's FD portion as the weight.  Realizations serving other
    tiers do not contribute to a tier's sample.
    """
    from .model import target_sirs

    if config.total_density <= 0.0:
        return [Estimate(0.0, 0.0, sim.realizations, sim.seed)
                for _ in config.tiers]
    theta_a, theta_u = target_sirs(config)
    sampler = LinkDistanceSampler(config)
    payloads = [
        (config, sim.window_radius, sim.seed, lo, hi, sampler, theta_a, theta_u)
        for lo, hi in _chunked(sim.realizations, workers)
    ]
    raw = _collect(_throughput_chunk, payloads, workers)
    raw = raw.reshape(-1, config.num_tiers)
    out = []
    for k, tier in enumerate(config.tiers):
        got = raw[~np.isnan(raw[:, k]), k]
        if tier.density == 0.0 or got.size == 0:
            out.append(Estimate(0.0, 0.0, int(got.size), sim.seed))
            continue
        scale = tier.density / config.bandwidth
        est = _to_estimate(got, sim.seed)
        out.append(Estimate(est.mean * scale, est.stderr * scale, est.n,
                            sim.seed))
    return out
