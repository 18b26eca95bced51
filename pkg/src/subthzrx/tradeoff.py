"""Energy-efficiency vs spectral-efficiency sweep orchestration.

A sweep runs the link simulation and the power model over the Cartesian
product of architectures, array sizes, ADC resolutions, phase-shifter types,
and SNR points, emitting one (SE, power, EE) point per combination. ADC
resolution and phase-shifter type do not enter the simulated signal path
(they only move power), so spectral efficiency is simulated once per
(architecture, array size, SNR) group and reused across the power-only axes.

Points are independent jobs: failures are recorded per point and do not
abort the sweep, and results are emitted in a deterministic order regardless
of how workers complete.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .channel import ClusterChannelParams
from .config import Architecture, ArrayGeometry, PhaseShifterType, ReceiverConfig, validate_config
from .power import ComponentPowerCatalog, PowerBreakdown, total_power
from .simulation import MonteCarloResult, SimulationParams, run_monte_carlo

REFERENCE_ARRAY_SIZES = (
    ArrayGeometry(16, 4), ArrayGeometry(32, 4), ArrayGeometry(24, 8), ArrayGeometry(32, 8),
    ArrayGeometry(48, 8), ArrayGeometry(32, 16), ArrayGeometry(48, 16), ArrayGeometry(64, 16),
)

_ARCH_ORDER = {arch: i for i, arch in enumerate(Architecture)}
_PS_ORDER = {ps: i for i, ps in enumerate(PhaseShifterType)}


@dataclass(frozen=True)
class SweepSpec:
    """Axes of an EE-vs-SE sweep."""

    architectures: tuple[Architecture, ...] = tuple(Architecture)
    array_sizes: tuple[ArrayGeometry, ...] = REFERENCE_ARRAY_SIZES
    adc_bits: tuple[int, ...] = (5, 10)
    ps_types: tuple[PhaseShifterType, ...] = tuple(PhaseShifterType)
    snr_db: tuple[float, ...] = (0.0, 10.0)
    sim: SimulationParams = field(default_factory=SimulationParams)

    def __post_init__(self):
        for name in ("architectures", "array_sizes", "adc_bits", "ps_types", "snr_db"):
            if not getattr(self, name):
                raise ValueError(f"sweep axis {name} must be non-empty")


@dataclass(frozen=True)
class TradeoffPoint:
    """One sweep outcome: a configuration with its SE, power, and EE."""

    config_id: str
    config: ReceiverConfig
    se_bits_hz: float
    se_std_bits_hz: float
    power_w: float
    ee_bits_per_joule: float


@dataclass(frozen=True)
class SweepFailure:
    """A sweep point that raised instead of producing a result."""

    config_id: str
    error: str


@dataclass(frozen=True)
class SweepResult:
    points: tuple[TradeoffPoint, ...]
    failures: tuple[SweepFailure, ...]


def compute_ee(se_bits_hz: float, bandwidth_hz: float, power_w: float) -> float:
    """Energy efficiency in bits/J: delivered rate per watt, se * B / P."""
    if power_w <= 0:
        raise ValueError("power must be positive")
    if se_bits_hz < 0:
        raise ValueError("spectral efficiency must be >= 0")
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth must be positive")
    return se_bits_hz * bandwidth_hz / power_w


def point_config(base: ReceiverConfig, architecture: Architecture, geometry: ArrayGeometry,
                 adc_bits: int, ps_type: PhaseShifterType, snr_db: float) -> ReceiverConfig:
    """Specialize the base configuration for one sweep point.

    The digital array gets one chain per antenna; hybrids keep the base
    chain count (which defaults to the user count when the base is digital).
    """
    if architecture is Architecture.DIGITAL:
        rf = geometry.count
    elif base.architecture is Architecture.DIGITAL:
        rf = base.users
    else:
        rf = base.rf_chains
    return dataclasses.replace(
        base, architecture=architecture, bs_geometry=geometry, rf_chains=rf,
        adc_bits=adc_bits, ps_type=ps_type, per_antenna_snr=10 ** (snr_db / 10))


def config_id(cfg: ReceiverConfig, snr_db: float) -> str:
    geom = cfg.bs_geometry
    return (f"{cfg.architecture.value}_{geom.rows}x{geom.cols}_rf{cfg.rf_chains}"
            f"_adc{cfg.adc_bits}_{cfg.ps_type.value}_snr{snr_db:g}dB")


def _simulate_group(args) -> MonteCarloResult:
    cfg, sim_params, chan_params = args
    return run_monte_carlo(cfg, sim_params, chan_params)


def run_sweep(spec: SweepSpec, base: ReceiverConfig | None = None,
              catalog: ComponentPowerCatalog | None = None,
              chan_params: ClusterChannelParams | None = None,
              jobs: int = 1) -> SweepResult:
    """Run the full sweep; emit points sorted by (architecture, N_BS, ...).

    ``jobs > 1`` distributes the simulation groups over worker processes;
    output content and order are independent of the worker count.
    """
    if base is None:
        base = ReceiverConfig()
    if catalog is None:
        catalog = ComponentPowerCatalog()
    if chan_params is None:
        chan_params = ClusterChannelParams()

    combos = sorted(
        ((arch, geom, bits, ps, snr)
         for arch in set(spec.architectures)
         for geom in set(spec.array_sizes)
         for bits in set(spec.adc_bits)
         for ps in set(spec.ps_types)
         for snr in set(spec.snr_db)),
        key=lambda c: (_ARCH_ORDER[c[0]], c[1].count, c[1].rows, c[2], _PS_ORDER[c[3]], c[4]))

    # One simulation per (architecture, geometry, snr): ADC bits and PS type
    # only change power.
    se_results: dict[tuple, MonteCarloResult | Exception] = {}
    group_keys: list[tuple] = []
    group_tasks: list[tuple] = []
    for arch, geom, snr in sorted({(c[0], c[1], c[4]) for c in combos},
                                  key=lambda g: (_ARCH_ORDER[g[0]], g[1].count, g[1].rows, g[2])):
        cfg = point_config(base, arch, geom, spec.adc_bits[0], spec.ps_types[0], snr)
        try:
            validate_config(cfg)
        except ValueError as exc:
            se_results[(arch, geom, snr)] = exc
            continue
        group_keys.append((arch, geom, snr))
        group_tasks.append((cfg, spec.sim, chan_params))

    if jobs > 1 and len(group_tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_simulate_group, task) for task in group_tasks]
            for key, future in zip(group_keys, futures):
                try:
                    se_results[key] = future.result()
                except Exception as exc:  # isolate per point
                    se_results[key] = exc
    else:
        for key, task in zip(group_keys, group_tasks):
            try:
                se_results[key] = _simulate_group(task)
            except Exception as exc:
                se_results[key] = exc

    points: list[TradeoffPoint] = []
    failures: list[SweepFailure] = []
    for arch, geom, bits, ps, snr in combos:
        cfg = point_config(base, arch, geom, bits, ps, snr)
        cid = config_id(cfg, snr)
        outcome = se_results[(arch, geom, snr)]
        if isinstance(outcome, Exception):
            failures.append(SweepFailure(cid, str(outcome)))
            continue
        try:
            breakdown: PowerBreakdown = total_power(cfg, catalog)
            ee = compute_ee(outcome.mean_se_bits_hz, cfg.bandwidth_hz, breakdown.total_w)
        except Exception as exc:
            failures.append(SweepFailure(cid, str(exc)))
            continue
        points.append(TradeoffPoint(
            config_id=cid, config=cfg, se_bits_hz=outcome.mean_se_bits_hz,
            se_std_bits_hz=outcome.std_se_bits_hz, power_w=breakdown.total_w,
            ee_bits_per_joule=ee))
    return SweepResult(points=tuple(points), failures=tuple(failures))
