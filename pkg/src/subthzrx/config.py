"""Receiver configuration types, structural validation, and component counts.

Three base-station receiver front-end layouts are modeled:

- digital array: one full RF chain (mixer, LO, VGA, ADC) behind every antenna;
  combining is entirely digital.
- sub-array hybrid: antennas are partitioned into equal groups, each group is
  phase-shifted and combined into a single RF chain.
- fully-connected hybrid: every antenna feeds every RF chain through a
  dedicated phase shifter.

The number of RF chains bounds the number of simultaneously multiplexed user
streams and is the main hardware/capability knob separating the layouts.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class ConfigError(ValueError):
    """A receiver configuration violates a structural constraint."""


class Architecture(enum.Enum):
    """Receiver array architecture."""

    DIGITAL = "digital"
    SUBARRAY = "subarray"
    FULLY_CONNECTED = "fully_connected"


class PhaseShifterType(enum.Enum):
    """Analog phase-shifter technology: passive (lossy, no DC power) or active."""

    PASSIVE = "passive"
    ACTIVE = "active"


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform planar array layout; elements are addressed row-major."""

    rows: int
    cols: int
    spacing_wavelengths: float = 0.5

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ConfigError(f"array must have rows >= 1 and cols >= 1, got {self.rows}x{self.cols}")
        if self.spacing_wavelengths <= 0:
            raise ConfigError("element spacing must be positive")

    @property
    def count(self) -> int:
        return self.rows * self.cols


@dataclass(frozen=True)
class ReceiverConfig:
    """Full receiver-side system configuration.

    Attributes:
        architecture: array architecture (digital / subarray / fully connected).
        bs_geometry: base-station array layout (N_BS antennas total).
        rf_chains: number of RF chains N_RF. ``None`` resolves to N_BS for the
            digital array and to ``users`` for the hybrids.
        adc_bits: ADC resolution in bits.
        ps_type: phase-shifter technology (irrelevant for the digital array).
        bandwidth_hz: total system bandwidth B.
        subcarriers: number of OFDM subcarriers K.
        users: number of simultaneously served single-stream users U.
        user_geometry: per-user transmit array layout (N_U antennas).
        per_antenna_snr: minimum per-antenna SNR as a linear ratio (1.0 = 0 dB).
        temperature_k: thermal noise reference temperature.
    """

    architecture: Architecture = Architecture.DIGITAL
    bs_geometry: ArrayGeometry = field(default_factory=lambda: ArrayGeometry(32, 16))
    rf_chains: int | None = None
    adc_bits: int = 5
    ps_type: PhaseShifterType = PhaseShifterType.PASSIVE
    bandwidth_hz: float = 800e6
    subcarriers: int = 256
    users: int = 8
    user_geometry: ArrayGeometry = field(default_factory=lambda: ArrayGeometry(16, 4))
    per_antenna_snr: float = 1.0
    temperature_k: float = 300.0

    def __post_init__(self):
        if self.rf_chains is None:
            default = self.bs_geometry.count if self.architecture is Architecture.DIGITAL else self.users
            object.__setattr__(self, "rf_chains", default)

    @property
    def n_bs(self) -> int:
        return self.bs_geometry.count

    @property
    def n_u(self) -> int:
        return self.user_geometry.count


@dataclass(frozen=True)
class ComponentCounts:
    """Per-component device counts implied by an architecture."""

    lna: int
    ps: int
    mixers: int
    lo: int
    vga: int
    adc: int


def validate_config(cfg: ReceiverConfig) -> ReceiverConfig:
    """Check all structural invariants of ``cfg``; return it unchanged if valid.

    Raises:
        ConfigError: naming the violated invariant.
    """
    n_bs = cfg.n_bs
    n_rf = cfg.rf_chains
    if n_rf < 1:
        raise ConfigError("N_RF must be >= 1")
    if n_rf > n_bs:
        raise ConfigError(f"N_RF ({n_rf}) must not exceed N_BS ({n_bs})")
    if cfg.architecture is Architecture.DIGITAL and n_rf != n_bs:
        raise ConfigError(f"digital array requires N_RF == N_BS, got N_RF={n_rf}, N_BS={n_bs}")
    if cfg.architecture is Architecture.SUBARRAY and n_bs % n_rf != 0:
        raise ConfigError(f"N_BS not divisible by N_RF (N_BS={n_bs}, N_RF={n_rf})")
    if cfg.users < 1:
        raise ConfigError("users must be >= 1")
    if cfg.users > n_rf:
        raise ConfigError(f"users ({cfg.users}) must not exceed N_RF ({n_rf})")
    if cfg.bandwidth_hz <= 0:
        raise ConfigError("bandwidth must be positive")
    if cfg.subcarriers < 1:
        raise ConfigError("subcarriers must be >= 1")
    if cfg.adc_bits < 1:
        raise ConfigError("adc_bits must be >= 1")
    if cfg.per_antenna_snr < 0:
        raise ConfigError("per-antenna SNR must be >= 0")
    if cfg.temperature_k <= 0:
        raise ConfigError("temperature must be positive")
    return cfg


def component_counts(cfg: ReceiverConfig) -> ComponentCounts:
    """Device counts for a validated configuration.

    Every layout needs one LNA per antenna. The digital array puts a full
    chain behind each antenna; the hybrids share N_RF chains behind the
    phase-shifting network (one shifter per antenna for the sub-array,
    one per antenna-chain pair for the fully connected).
    """
    n_bs, n_rf = cfg.n_bs, cfg.rf_chains
    if cfg.architecture is Architecture.DIGITAL:
        return ComponentCounts(lna=n_bs, ps=0, mixers=n_bs, lo=n_bs, vga=n_bs, adc=n_bs)
    if cfg.architecture is Architecture.SUBARRAY:
        return ComponentCounts(lna=n_bs, ps=n_bs, mixers=n_rf, lo=n_rf, vga=n_rf, adc=n_rf)
    return ComponentCounts(lna=n_bs, ps=n_bs * n_rf, mixers=n_rf, lo=n_rf, vga=n_rf, adc=n_rf)
