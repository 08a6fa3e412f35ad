"""Antenna-system topologies and the synthetic room geometry."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

COLOCATED = "co-located"
SEMI_DISTRIBUTED = "semi-distributed"
FULLY_DISTRIBUTED = "fully-distributed"


@dataclass(frozen=True)
class Topology:
    """``M`` BS antennas split evenly over ``L`` AP locations, serving ``K`` single-antenna UEs."""

    M: int
    L: int
    K: int

    def __post_init__(self):
        for name in ("M", "L", "K"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigurationError(f"{name} must be an integer, got {value!r}")
            if value < 1:
                raise ConfigurationError(f"{name} must be positive, got {value}")
        if self.L > self.M:
            raise ConfigurationError(f"L={self.L} exceeds M={self.M}")
        if self.M % self.L:
            raise ConfigurationError(
                f"M={self.M} is not divisible by L={self.L}: "
                f"antennas per AP would be {self.M / self.L:g}"
            )

    @property
    def antennas_per_ap(self) -> int:
        return self.M // self.L

    @property
    def kind(self) -> str:
        if self.L == 1:
            return COLOCATED
        if self.L == self.M:
            return FULLY_DISTRIBUTED
        return SEMI_DISTRIBUTED

    def ap_of_antenna(self) -> np.ndarray:
        """0-based AP index for each of the M antenna rows (contiguous blocks)."""
        return np.repeat(np.arange(self.L), self.antennas_per_ap)

    def __str__(self):
        return f"({self.M},{self.L},{self.K})"


def make_topology(M: int, L: int, K: int) -> Topology:
    """Validated topology; rejects L > M and M not divisible by L."""
    return Topology(*(v.item() if isinstance(v, np.integer) else v for v in (M, L, K)))


@dataclass(frozen=True)
class RoomGeometry:
    """Square room with APs on a perimeter ring and a centered square UE area.

    ``ap_ring`` is a read-only ``(count, 2)`` array of coordinates in meters.
    """

    side: float
    ap_ring: np.ndarray
    ue_area_side: float
    spacing: float

    @property
    def ring_size(self) -> int:
        return len(self.ap_ring)

    @property
    def perimeter(self) -> float:
        return 4.0 * self.side

    @property
    def ue_area_origin(self) -> float:
        return 0.5 * (self.side - self.ue_area_side)


def _perimeter_point(t: float, side: float) -> tuple[float, float]:
    # counter-clockwise from (0, 0): bottom, right, top, left wall
    wall, offset = divmod(t, side)
    wall = int(wall) % 4
    if wall == 0:
        return offset, 0.0
    if wall == 1:
        return side, offset
    if wall == 2:
        return side - offset, side
    return 0.0, side - offset


def build_ap_ring(
    side: float = 6.0,
    count: int = 64,
    spacing: float = 0.375,
    ue_area_side: float = 4.5,
) -> RoomGeometry:
    """Place ``count`` candidate AP sites evenly around the room perimeter.

    The ring starts half a spacing counter-clockwise from corner (0, 0), so no
    site sits exactly on a corner, and proceeds counter-clockwise.
    """
    if side <= 0 or spacing <= 0 or count < 1:
        raise ConfigurationError("side, spacing and count must be positive")
    if abs(count * spacing - 4.0 * side) > 1e-9:
        raise ConfigurationError(
            f"ring of {count} sites at {spacing} m spacing covers "
            f"{count * spacing:g} m, room perimeter is {4.0 * side:g} m"
        )
    if not 0 < ue_area_side <= side:
        raise ConfigurationError(f"ue_area_side={ue_area_side} must lie in (0, {side}]")
    ring = np.array([_perimeter_point(spacing * (i + 0.5), side) for i in range(count)])
    ring.setflags(write=False)
    return RoomGeometry(float(side), ring, float(ue_area_side), float(spacing))


def perimeter_arc_position(point, side: float) -> float:
    """Inverse of the ring parametrization: arc length from (0, 0), counter-clockwise."""
    x, y = point
    if math.isclose(y, 0.0, abs_tol=1e-12) and x < side:
        return x
    if math.isclose(x, side, abs_tol=1e-12) and y < side:
        return side + y
    if math.isclose(y, side, abs_tol=1e-12) and x > 0:
        return 2 * side + (side - x)
    return 3 * side + (side - y)


@dataclass(frozen=True)
class Placement:
    ap_indices: np.ndarray
    ue_positions: np.ndarray

    def ap_positions(self, geometry: RoomGeometry) -> np.ndarray:
        return geometry.ap_ring[self.ap_indices]


def sample_placement(geometry: RoomGeometry, topology: Topology, rng: np.random.Generator) -> Placement:
    """Draw L distinct ring sites and K uniform UE positions in the UE area."""
    if topology.L > geometry.ring_size:
        raise ConfigurationError(
            f"L={topology.L} exceeds the {geometry.ring_size} available AP sites"
        )
    ap_indices = rng.choice(geometry.ring_size, size=topology.L, replace=False)
    lo = geometry.ue_area_origin
    ue = rng.uniform(lo, lo + geometry.ue_area_side, size=(topology.K, 2))
    return Placement(ap_indices, ue)
