"""Domain types for the K-tier hybrid-duplex network.

A network is a list of tiers.  Each tier's access points form a planar
Poisson process; a fraction ``fd_portion`` of them serve one uplink and
one downlink simultaneously on the same band (full duplex), the rest are
downlink-only (half duplex).  Full-duplex nodes leak a residual of their
own transmission into their receiver, parameterized in dB relative to the
transmit power at the receiving node.

All types are immutable and freely shareable across threads.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

__all__ = [
    "DuplexMode",
    "LinkDirection",
    "TierParams",
    "HdhnConfig",
    "LinkQuery",
    "ConfigError",
    "validate",
    "target_sirs",
    "load_config",
    "dump_config",
    "default_two_tier_config",
]


class DuplexMode(enum.Enum):
    """Cell operating mode: HD cells are downlink-only, FD cells carry both
    directions on the same spectrum."""

    HD = "hd"
    FD = "fd"


class LinkDirection(enum.Enum):
    DOWNLINK = "downlink"
    UPLINK = "uplink"


class ConfigError(ValueError):
    """Raised when a config file cannot be parsed into a valid structure."""


@dataclass(frozen=True)
class TierParams:
    """Per-tier network parameters.

    density        AP spatial density [nodes/m^2]
    pathloss_exp   pathloss exponent, > 2 so interference integrals converge
    bias           association weighting factor (dimensionless, > 0)
    ap_power       AP transmit power [W]
    user_power     user transmit power [W]
    fd_portion     fraction of this tier's APs operating full duplex, in [0, 1]
    self_ic_db     residual self-interference after cancellation, in dB
                   relative to the receiving node's transmit power;
                   ``-inf`` encodes perfect cancellation
    """

    density: float
    pathloss_exp: float
    bias: float
    ap_power: float
    user_power: float
    fd_portion: float = 0.0
    self_ic_db: float = -math.inf

    @property
    def hd_density(self) -> float:
        return self.density * (1.0 - self.fd_portion)

    @property
    def fd_density(self) -> float:
        return self.density * self.fd_portion

    @property
    def self_ic_linear(self) -> float:
        """Residual self-interference power ratio, 10^(self_ic_db/10)."""
        if self.self_ic_db == -math.inf:
            return 0.0
        return 10.0 ** (self.self_ic_db / 10.0)

    def residual_self_interference(self, receiver_tx_power: float) -> float:
        """Residual self-interference power C(P_r) at a node transmitting
        with ``receiver_tx_power`` while it receives."""
        return receiver_tx_power * self.self_ic_linear


@dataclass(frozen=True)
class HdhnConfig:
    """The K-tier network plus global rate/bandwidth targets.

    ``symbol_time`` is carried for completeness; no derived quantity here
    consumes it.
    """

    tiers: tuple[TierParams, ...]
    rate_ap: float = 1e4
    rate_user: float = 1e4
    bandwidth: float = 1e4
    symbol_time: float = 1e-4

    def __init__(self, tiers, rate_ap=1e4, rate_user=1e4, bandwidth=1e4,
                 symbol_time=1e-4):
        object.__setattr__(self, "tiers", tuple(tiers))
        object.__setattr__(self, "rate_ap", float(rate_ap))
        object.__setattr__(self, "rate_user", float(rate_user))
        object.__setattr__(self, "bandwidth", float(bandwidth))
        object.__setattr__(self, "symbol_time", float(symbol_time))

    @property
    def num_tiers(self) -> int:
        return len(self.tiers)

    @property
    def total_density(self) -> float:
        return sum(t.density for t in self.tiers)

    def bias_ratio(self, i: int, k: int) -> float:
        """Association bias ratio between tiers i and k; the only form in
        which biases enter any formula."""
        return self.tiers[i].bias / self.tiers[k].bias

    def replace_tier(self, index: int, **changes) -> "HdhnConfig":
        tiers = list(self.tiers)
        tiers[index] = replace(tiers[index], **changes)
        return HdhnConfig(tiers, self.rate_ap, self.rate_user,
                          self.bandwidth, self.symbol_time)

    def with_fd_portions(self, portions) -> "HdhnConfig":
        if len(portions) != self.num_tiers:
            raise ValueError("one FD portion per tier required")
        tiers = [replace(t, fd_portion=float(p))
                 for t, p in zip(self.tiers, portions)]
        return HdhnConfig(tiers, self.rate_ap, self.rate_user,
                          self.bandwidth, self.symbol_time)


@dataclass(frozen=True)
class LinkQuery:
    """One successful-transmission-probability evaluation.

    Downlink transmits from the AP (the receiving user's own uplink power
    drives its self-interference); uplink transmits from the user (the
    receiving AP's downlink power drives its self-interference).  Uplink
    only exists in FD cells.
    """

    tier_index: int
    mode: DuplexMode
    direction: LinkDirection
    target_sir: float

    def __post_init__(self):
        if self.mode is DuplexMode.HD and self.direction is LinkDirection.UPLINK:
            raise ValueError("HD cells are downlink-only; uplink queries need FD")
        if not (self.target_sir > 0.0 and math.isfinite(self.target_sir)):
            raise ValueError(f"target_sir must be positive, got {self.target_sir}")

    def tx_rx_powers(self, tier: TierParams) -> tuple[float, float]:
        """(transmit power, receiver transmit power) for this link."""
        if self.direction is LinkDirection.DOWNLINK:
            return tier.ap_power, tier.user_power
        return tier.user_power, tier.ap_power


def target_sirs(config: HdhnConfig) -> tuple[float, float]:
    """Target SIRs (theta_ap, theta_user) from the rate targets,
    theta = 2^(R/W) - 1."""
    theta_a = 2.0 ** (config.rate_ap / config.bandwidth) - 1.0
    theta_u = 2.0 ** (config.rate_user / config.bandwidth) - 1.0
    return theta_a, theta_u


def validate(config: HdhnConfig) -> list[str]:
    """Check every type invariant; returns one message per violation.

    An empty list means the config is usable by every operation in the
    package.  Violations are data, not exceptions.
    """
    problems: list[str] = []
    if config.num_tiers < 1:
        problems.append("tiers: at least one tier is required")
    for idx, tier in enumerate(config.tiers):
        tag = f"tier[{idx}]"
        if not (tier.density >= 0.0 and math.isfinite(tier.density)):
            problems.append(f"{tag}.density: must be finite and >= 0")
        if not (tier.pathloss_exp > 2.0 and math.isfinite(tier.pathloss_exp)):
            problems.append(
                f"{tag}.pathloss_exp: must be > 2 (interference integrals "
                "diverge otherwise)"
            )
        if not (tier.bias > 0.0 and math.isfinite(tier.bias)):
            problems.append(f"{tag}.bias: must be finite and > 0")
        if not (tier.ap_power > 0.0 and math.isfinite(tier.ap_power)):
            problems.append(f"{tag}.ap_power: must be finite and > 0")
        if not (tier.user_power > 0.0 and math.isfinite(tier.user_power)):
            problems.append(f"{tag}.user_power: must be finite and > 0")
        if not (0.0 <= tier.fd_portion <= 1.0):
            problems.append(f"{tag}.fd_portion: must lie in [0, 1]")
        if math.isnan(tier.self_ic_db) or tier.self_ic_db == math.inf:
            problems.append(f"{tag}.self_ic_db: must be a real value or -inf")
    if not (config.rate_ap >= 0.0 and math.isfinite(config.rate_ap)):
        problems.append("rate_ap: must be finite and >= 0")
    if not (config.rate_user >= 0.0 and math.isfinite(config.rate_user)):
        problems.append("rate_user: must be finite and >= 0")
    if not (config.bandwidth > 0.0 and math.isfinite(config.bandwidth)):
        problems.append("bandwidth: must be finite and > 0")
    if not (config.symbol_time > 0.0 and math.isfinite(config.symbol_time)):
        problems.append("symbol_time: must be finite and > 0")
    return problems


_TIER_KEYS = {
    "density": "density",
    "alpha": "pathloss_exp",
    "bias": "bias",
    "p_ap_watts": "ap_power",
    "p_user_watts": "user_power",
    "fd_portion": "fd_portion",
    "self_ic_db": "self_ic_db",
}

_GLOBAL_KEYS = {
    "rate_ap": "rate_ap",
    "rate_user": "rate_user",
    "bandwidth_hz": "bandwidth",
    "symbol_time_s": "symbol_time",
}


def load_config(path) -> HdhnConfig:
    """Load a network config from a TOML file.

    Global keys: rate_ap, rate_user, bandwidth_hz, symbol_time_s.
    One ``[[tier]]`` table per tier with keys density, alpha, bias,
    p_ap_watts, p_user_watts, fd_portion, self_ic_db (``-inf`` allowed).
    """
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: not valid TOML: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    tier_tables = raw.get("tier", [])
    if not isinstance(tier_tables, list) or not tier_tables:
        raise ConfigError(f"{path}: expected at least one [[tier]] table")
    tiers = []
    for idx, table in enumerate(tier_tables):
        kwargs = {}
        for file_key, attr in _TIER_KEYS.items():
            if file_key in table:
                value = table[file_key]
                if not isinstance(value, (int, float)) or isinstance(value, bool):
                    raise ConfigError(
                        f"{path}: tier[{idx}].{file_key} must be a number"
                    )
                kwargs[attr] = float(value)
        missing = {"density", "pathloss_exp", "bias", "ap_power", "user_power"} - set(
            kwargs
        )
        if missing:
            raise ConfigError(
                f"{path}: tier[{idx}] missing required keys for {sorted(missing)}"
            )
        unknown = set(table) - set(_TIER_KEYS)
        if unknown:
            raise ConfigError(f"{path}: tier[{idx}] unknown keys {sorted(unknown)}")
        tiers.append(TierParams(**kwargs))

    globals_kwargs = {}
    for file_key, attr in _GLOBAL_KEYS.items():
        if file_key in raw:
            value = raw[file_key]
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ConfigError(f"{path}: {file_key} must be a number")
            globals_kwargs[attr] = float(value)
    unknown = set(raw) - set(_GLOBAL_KEYS) - {"tier"}
    if unknown:
        raise ConfigError(f"{path}: unknown top-level keys {sorted(unknown)}")
    return HdhnConfig(tiers, **globals_kwargs)


def _toml_float(x: float) -> str:
    if x == -math.inf:
        return "-inf"
    if x == math.inf:
        return "inf"
    return repr(float(x))


def dump_config(config: HdhnConfig) -> str:
    """Serialize a config to the TOML format accepted by load_config."""
    lines = [
        f"rate_ap = {_toml_float(config.rate_ap)}",
        f"rate_user = {_toml_float(config.rate_user)}",
        f"bandwidth_hz = {_toml_float(config.bandwidth)}",
        f"symbol_time_s = {_toml_float(config.symbol_time)}",
    ]
    for tier in config.tiers:
        lines += [
            "",
            "[[tier]]",
            f"density = {_toml_float(tier.density)}",
            f"alpha = {_toml_float(tier.pathloss_exp)}",
            f"bias = {_toml_float(tier.bias)}",
            f"p_ap_watts = {_toml_float(tier.ap_power)}",
            f"p_user_watts = {_toml_float(tier.user_power)}",
            f"fd_portion = {_toml_float(tier.fd_portion)}",
            f"self_ic_db = {_toml_float(tier.self_ic_db)}",
        ]
    return "\n".join(lines) + "\n"


def default_two_tier_config() -> HdhnConfig:
    """Default two-tier parameter set used across the built-in sweeps.

    Tier 0: 30 W APs, 3 W users, -40 dB residual self-interference, all FD.
    Tier 1: 30 W APs, 6 W users, -30 dB residual, all HD.  Both tiers at
    1e-3 nodes/m^2, pathloss exponent 4, unit biases; 10 kHz band and
    10 kbit/s rate targets both ways.
    """
    return HdhnConfig(
        tiers=(
            TierParams(density=1e-3, pathloss_exp=4.0, bias=1.0,
                       ap_power=30.0, user_power=3.0, fd_portion=1.0,
                       self_ic_db=-40.0),
            TierParams(density=1e-3, pathloss_exp=4.0, bias=1.0,
                       ap_power=30.0, user_power=6.0, fd_portion=0.0,
                       self_ic_db=-30.0),
        ),
        rate_ap=1e4,
        rate_user=1e4,
        bandwidth=1e4,
        symbol_time=1e-4,
    )
