"""SINR / spectral efficiency and seeded Monte Carlo campaigns."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import rng as streams
from .channel import ChannelMatrix, FadingParams, draw_large_scale_fading, generate_synthetic_channel
from .errors import ConfigurationError, SingularMatrixError
from .measured import MeasuredTensor, check_capacity, make_subsample_plan, subsample_measured
from .precoder import (
    DEFAULT_CONDITION_LIMIT,
    MRT,
    PRECODER_KINDS,
    ZF,
    PrecodingMatrix,
    build_precoder,
    normalize_columns,
)
from .stats import empirical_cdf, likely_95
from .topology import RoomGeometry, Topology, build_ap_ring, sample_placement

SYNTHETIC_TX_TO_NOISE_DB = 75.0
MEASURED_TX_TO_NOISE_DB = 83.0
DEFAULT_REALIZATIONS = 10_000
# fixed so that batching never depends on the worker count
CHUNK_SIZE = 500


@dataclass(frozen=True)
class PowerConfig:
    """Transmit-to-noise power ratio, identical for every UE."""

    tx_to_noise_ratio_db: float = SYNTHETIC_TX_TO_NOISE_DB

    def __post_init__(self):
        if not math.isfinite(self.tx_to_noise_ratio_db):
            raise ConfigurationError("tx_to_noise_ratio_db must be finite")

    @property
    def rho(self) -> float:
        return 10.0 ** (self.tx_to_noise_ratio_db / 10.0)


@dataclass(frozen=True)
class SyntheticSource:
    geometry: RoomGeometry = field(default_factory=build_ap_ring)
    fading: FadingParams = field(default_factory=FadingParams)

    name = "synthetic"


@dataclass(frozen=True)
class MeasuredSource:
    tensor: MeasuredTensor
    path: str | None = None

    name = "measured"


@dataclass(frozen=True)
class Scenario:
    topology: Topology
    source: SyntheticSource | MeasuredSource = field(default_factory=SyntheticSource)
    precoder: str = ZF
    power: PowerConfig = field(default_factory=PowerConfig)
    realizations: int = DEFAULT_REALIZATIONS
    master_seed: int = 0
    zf_condition_limit: float = DEFAULT_CONDITION_LIMIT
    normalize_zf: bool = False

    def __post_init__(self):
        if self.precoder not in PRECODER_KINDS:
            raise ConfigurationError(f"precoder must be one of {PRECODER_KINDS}, got {self.precoder!r}")
        if isinstance(self.realizations, bool) or not isinstance(self.realizations, int) or self.realizations < 1:
            raise ConfigurationError(f"realizations must be a positive integer, got {self.realizations!r}")
        if self.precoder == ZF and self.topology.M < self.topology.K:
            raise ConfigurationError(f"ZF needs M >= K, topology is {self.topology}")
        try:
            streams.check_seed(self.master_seed)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(str(exc)) from None
        if isinstance(self.source, SyntheticSource):
            if self.topology.L > self.source.geometry.ring_size:
                raise ConfigurationError(
                    f"L={self.topology.L} exceeds the {self.source.geometry.ring_size} ring sites"
                )
        else:
            check_capacity(self.source.tensor, self.topology)


@dataclass(frozen=True)
class SEReport:
    """Spectral-efficiency samples of one scenario, shape ``(S, K)``, in bits/s/Hz."""

    scenario: Scenario
    samples: np.ndarray
    precoder_norm_min: float
    precoder_norm_max: float

    @property
    def seed(self) -> int:
        return self.scenario.master_seed

    @property
    def cdf(self):
        return empirical_cdf(self.samples)

    @property
    def median(self) -> float:
        return float(np.median(self.samples.ravel()))

    @property
    def mean(self) -> float:
        # 1-D reduction so a reader of the flattened samples file gets the same bits
        return float(np.mean(self.samples.ravel()))

    @property
    def likely_95(self) -> float:
        return likely_95(self.samples)

    def summary(self) -> dict:
        return {"median": self.median, "likely_95": self.likely_95, "mean": self.mean}


def sinr_all(H, G, power: PowerConfig | float) -> np.ndarray:
    """SINR of every UE, shape ``(..., K)``.

    ``power`` is a :class:`PowerConfig` or a linear transmit-to-noise ratio.
    """
    H = np.asarray(getattr(H, "entries", H))
    G = np.asarray(getattr(G, "entries", G))
    if H.shape[-2:] != G.shape[-2:]:
        raise ValueError(f"channel {H.shape[-2:]} and precoder {G.shape[-2:]} shapes differ")
    rho = power.rho if isinstance(power, PowerConfig) else float(power)
    # gains[..., j, k] = |G[:, j]^T H[:, k]|^2
    gains = np.abs(np.swapaxes(G, -1, -2) @ H) ** 2
    signal = np.diagonal(gains, axis1=-2, axis2=-1)
    interference = gains.sum(axis=-2) - signal
    return rho * signal / (rho * interference + 1.0)


def sinr(H, G, k: int, power: PowerConfig | float) -> float:
    """SINR of UE ``k`` (0-based) for one channel / precoder pair."""
    H = np.asarray(getattr(H, "entries", H))
    G = np.asarray(getattr(G, "entries", G))
    if H.ndim != 2 or H.shape != G.shape:
        raise ValueError(f"expected matching 2-D channel and precoder, got {H.shape} and {G.shape}")
    if not 0 <= k < H.shape[1]:
        raise IndexError(f"UE index {k} outside [0, {H.shape[1]})")
    rho = power.rho if isinstance(power, PowerConfig) else float(power)
    gains = np.abs(G.T @ H[:, k]) ** 2
    signal = gains[k]
    return float(rho * signal / (rho * (gains.sum() - signal) + 1.0))


def spectral_efficiency(sinr_value):
    """``log2(1 + SINR)`` in bits/s/Hz."""
    s = np.asarray(sinr_value, dtype=float)
    if np.any(~(s >= 0)):
        raise ValueError("SINR must be non-negative")
    se = np.log2(1.0 + s)
    return float(se) if se.ndim == 0 else se


def draw_channel(scenario: Scenario, s: int) -> ChannelMatrix:
    """Channel of realization ``s`` (1-based), regenerated from its own streams."""
    seed = scenario.master_seed
    topo = scenario.topology
    src = scenario.source
    if isinstance(src, MeasuredSource):
        plan = make_subsample_plan(src.tensor, topo, streams.realization_stream(seed, s, streams.SUBSAMPLE))
        return subsample_measured(src.tensor, plan, topo, s)
    placement = sample_placement(src.geometry, topo, streams.realization_stream(seed, s, streams.PLACEMENT))
    beta = draw_large_scale_fading(
        src.geometry, placement, src.fading, streams.realization_stream(seed, s, streams.SHADOWING)
    )
    return generate_synthetic_channel(topo, beta, streams.realization_stream(seed, s, streams.SMALL_SCALE), s)


def precode(scenario: Scenario, H) -> PrecodingMatrix:
    Hn = normalize_columns(H)
    if scenario.precoder == ZF:
        return build_precoder(ZF, Hn, condition_limit=scenario.zf_condition_limit,
                              normalize=scenario.normalize_zf)
    return build_precoder(MRT, Hn)


def _evaluate_chunk(scenario: Scenario, start: int, stop: int):
    H = np.stack([draw_channel(scenario, s).entries for s in range(start, stop)])
    try:
        G = precode(scenario, H)
    except SingularMatrixError as exc:
        offset = exc.index[0] if exc.index else 0
        s = start + offset
        raise SingularMatrixError(
            f"realization {s} of scenario {scenario.topology} {scenario.precoder}: {exc}",
            condition=exc.condition,
            realization=s,
        ) from exc
    se = spectral_efficiency(sinr_all(H, G, scenario.power))
    norms = G.column_norms
    return se, float(norms.min()), float(norms.max())


def run_monte_carlo(scenario: Scenario, threads: int = 1) -> SEReport:
    """Evaluate ``scenario.realizations`` independent drops.

    Realization ``s`` only reads its own keyed streams, and chunk boundaries
    are fixed, so the samples are bit-identical for any ``threads``.
    """
    S = scenario.realizations
    bounds = [(a, min(a + CHUNK_SIZE, S + 1)) for a in range(1, S + 1, CHUNK_SIZE)]
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: _evaluate_chunk(scenario, *b), bounds))
    else:
        parts = [_evaluate_chunk(scenario, *b) for b in bounds]
    samples = np.concatenate([p[0] for p in parts])
    samples.setflags(write=False)
    return SEReport(
        scenario,
        samples,
        min(p[1] for p in parts),
        max(p[2] for p in parts),
    )


def with_topology(base: Scenario, topology: Topology) -> Scenario:
    """Copy of ``base`` for another topology, seeded by a child seed keyed on (M, L)."""
    seed = streams.derive_seed(base.master_seed, topology.M, topology.L)
    return replace(base, topology=topology, master_seed=seed)


def semi_distributed_candidates(M: int) -> list[int]:
    return [L for L in range(2, M) if M % L == 0]


def sweep_L(base: Scenario, M: int, K: int, Ls, threads: int = 1) -> dict[int, SEReport]:
    return {L: run_monte_carlo(with_topology(base, Topology(M, L, K)), threads) for L in Ls}


def pick_best_L(reports: dict[int, SEReport]) -> tuple[int, float]:
    """Highest likely_95; ties go to the smaller L."""
    best = max(sorted(reports), key=lambda L: (reports[L].likely_95, -L))
    return best, reports[best].likely_95


def best_semi_distributed_L(M: int, K: int, base_scenario: Scenario, threads: int = 1) -> tuple[int, float]:
    """Semi-distributed L (1 < L < M, L | M) maximizing the 95%-likely SE."""
    candidates = semi_distributed_candidates(M)
    if not candidates:
        raise ConfigurationError(f"M={M} has no divisor strictly between 1 and M")
    return pick_best_L(sweep_L(base_scenario, M, K, candidates, threads))
