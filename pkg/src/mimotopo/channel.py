"""Synthetic channel generation: free-space path loss, log-normal shadowing, Rayleigh fading."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .topology import Placement, RoomGeometry, Topology

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class FadingParams:
    """Large-scale fading model parameters.

    ``height_offset`` is a fixed vertical AP/UE separation in meters added in
    quadrature to the planar distance (0 gives purely planar distances).
    """

    carrier_frequency: float = 3.5e9
    shadow_sigma_db: float = 2.0
    min_distance: float = 0.5
    height_offset: float = 0.0

    def __post_init__(self):
        if not self.carrier_frequency > 0:
            raise ConfigurationError(f"carrier_frequency must be positive, got {self.carrier_frequency}")
        if not self.shadow_sigma_db >= 0:
            raise ConfigurationError(f"shadow_sigma_db must be >= 0, got {self.shadow_sigma_db}")
        if not self.min_distance > 0:
            raise ConfigurationError(f"min_distance must be positive, got {self.min_distance}")
        if not self.height_offset >= 0:
            raise ConfigurationError(f"height_offset must be >= 0, got {self.height_offset}")


@dataclass(frozen=True)
class LargeScaleFading:
    """``beta[l, k]``: linear power gain from AP ``l`` to UE ``k``, shared by the AP's antennas."""

    beta: np.ndarray

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float)
        if beta.ndim != 2:
            raise ValueError(f"beta must be 2-D (L, K), got shape {beta.shape}")
        if not (np.all(np.isfinite(beta)) and np.all(beta > 0)):
            raise ValueError("beta must be strictly positive and finite")
        object.__setattr__(self, "beta", beta)


@dataclass(frozen=True)
class ChannelMatrix:
    entries: np.ndarray
    topology: Topology
    realization_index: int = 1

    def __post_init__(self):
        H = np.asarray(self.entries, dtype=complex)
        if H.shape != (self.topology.M, self.topology.K):
            raise ValueError(
                f"channel shape {H.shape} does not match topology {self.topology} "
                f"(expected {(self.topology.M, self.topology.K)})"
            )
        if not np.all(np.isfinite(H)):
            raise ValueError("channel entries must be finite")
        object.__setattr__(self, "entries", H)


def free_space_path_loss(distance, frequency):
    """Friis free-space loss in dB, ``20 log10(4 pi d f / c)``. Broadcasts over arrays."""
    d = np.asarray(distance, dtype=float)
    f = np.asarray(frequency, dtype=float)
    if np.any(~(d > 0)) or np.any(~(f > 0)):
        raise ValueError("distance and frequency must be positive")
    pl = 20.0 * np.log10(4.0 * math.pi * d * f / SPEED_OF_LIGHT)
    return float(pl) if pl.ndim == 0 else pl


def ap_ue_distances(geometry: RoomGeometry, placement: Placement, params: FadingParams) -> np.ndarray:
    """(L, K) clamped AP-UE distances."""
    aps = placement.ap_positions(geometry)
    planar = np.linalg.norm(aps[:, None, :] - placement.ue_positions[None, :, :], axis=-1)
    d = np.hypot(planar, params.height_offset)
    return np.maximum(d, params.min_distance)


def draw_large_scale_fading(
    geometry: RoomGeometry,
    placement: Placement,
    params: FadingParams,
    rng: np.random.Generator,
) -> LargeScaleFading:
    """Log-normal large-scale gains: ``beta_dB ~ N(-FSPL(d), sigma_sh^2)``.

    With ``shadow_sigma_db == 0`` no random numbers are consumed.
    """
    d = ap_ue_distances(geometry, placement, params)
    beta_db = -free_space_path_loss(d, params.carrier_frequency)
    if params.shadow_sigma_db > 0:
        beta_db = beta_db + rng.normal(0.0, params.shadow_sigma_db, size=beta_db.shape)
    return LargeScaleFading(10.0 ** (beta_db / 10.0))


def generate_synthetic_channel(
    topology: Topology,
    beta: LargeScaleFading | np.ndarray,
    rng: np.random.Generator,
    realization_index: int = 1,
) -> ChannelMatrix:
    """i.i.d. CN(0, beta[l, k]) entries; antenna rows are grouped per AP in contiguous blocks."""
    b = beta.beta if isinstance(beta, LargeScaleFading) else np.asarray(beta, dtype=float)
    if b.shape != (topology.L, topology.K):
        raise ValueError(f"beta shape {b.shape} does not match (L, K) = {(topology.L, topology.K)}")
    scale = np.sqrt(b[topology.ap_of_antenna()] / 2.0)
    z = rng.standard_normal((2, topology.M, topology.K))
    return ChannelMatrix(scale * (z[0] + 1j * z[1]), topology, realization_index)
