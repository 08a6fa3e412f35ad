"""Measured channel-frequency-response tensors: binary I/O and topology sub-sampling.

File layout (all little-endian)::

    offset  size  field
    0       4     magic b"MCHT"
    4       4     u32 version (= 1)
    8       20    u32 F, B, U, bs_ports_per_location, ue_ports_per_location
    28      16    f64 frequency_start_hz, frequency_spacing_hz
    44      16*N  complex samples as (real, imag) f64 pairs, N = F*B*U,
                  frequency-major, then BS port, then UE port

Global port ``b`` belongs to location ``b // ports_per_location``.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from .channel import ChannelMatrix
from .errors import ConfigurationError, TensorFormatError
from .topology import Topology

MAGIC = b"MCHT"
VERSION = 1
_HEADER = struct.Struct("<4sI5I2d")
HEADER_SIZE = _HEADER.size
_SAMPLE = np.dtype("<c16")


@dataclass(frozen=True)
class MeasuredTensor:
    values: np.ndarray
    bs_ports_per_location: int = 8
    ue_ports_per_location: int = 8
    frequency_start: float = 3.3e9
    frequency_spacing: float = 250e3

    def __post_init__(self):
        values = self.values
        if values.ndim != 3:
            raise TensorFormatError(f"tensor must be 3-D (F, B, U), got shape {values.shape}")
        F, B, U = values.shape
        if min(F, B, U) < 1:
            raise TensorFormatError(f"empty tensor dimensions {values.shape}")
        for name, ports, per in (
            ("bs", B, self.bs_ports_per_location),
            ("ue", U, self.ue_ports_per_location),
        ):
            if per < 1 or ports % per:
                raise TensorFormatError(
                    f"{name}_ports_per_location={per} does not divide {ports} {name.upper()} ports"
                )

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.values.shape

    @property
    def bs_locations(self) -> int:
        return self.values.shape[1] // self.bs_ports_per_location

    @property
    def ue_locations(self) -> int:
        return self.values.shape[2] // self.ue_ports_per_location

    def frequency(self, index: int) -> float:
        return self.frequency_start + index * self.frequency_spacing


def load_measured_tensor(path) -> MeasuredTensor:
    with open(path, "rb") as fh:
        head = fh.read(HEADER_SIZE)
        if len(head) < HEADER_SIZE:
            raise TensorFormatError(f"{path}: file shorter than the {HEADER_SIZE}-byte header")
        magic, version, F, B, U, bs_per, ue_per, f0, df = _HEADER.unpack(head)
        if magic != MAGIC:
            raise TensorFormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise TensorFormatError(f"{path}: unsupported version {version}")
        n = F * B * U
        payload = fh.read()
    expected = n * _SAMPLE.itemsize
    if len(payload) < expected:
        raise TensorFormatError(
            f"{path}: truncated payload, {len(payload)} of {expected} bytes present"
        )
    if len(payload) > expected:
        raise TensorFormatError(f"{path}: {len(payload) - expected} trailing bytes after payload")
    values = np.frombuffer(payload, dtype=_SAMPLE).reshape(F, B, U)
    if not np.all(np.isfinite(values)):
        raise TensorFormatError(f"{path}: payload contains non-finite samples")
    if not (np.isfinite(f0) and np.isfinite(df)):
        raise TensorFormatError(f"{path}: non-finite frequency grid")
    return MeasuredTensor(values, bs_per, ue_per, f0, df)


def write_measured_tensor(tensor: MeasuredTensor, path) -> None:
    F, B, U = tensor.shape
    header = _HEADER.pack(
        MAGIC, VERSION, F, B, U,
        tensor.bs_ports_per_location, tensor.ue_ports_per_location,
        tensor.frequency_start, tensor.frequency_spacing,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(tensor.values, dtype=_SAMPLE).tobytes())


def fixture_tensor(F: int, B: int, U: int, seed: int, bs_ports_per_location: int = 8,
                   ue_ports_per_location: int = 8) -> MeasuredTensor:
    """Deterministic pseudo-random tensor with CN(0, 1) samples."""
    if min(F, B, U) < 1:
        raise ValueError(f"fixture dimensions must be positive, got {(F, B, U)}")
    z = np.random.default_rng(seed).standard_normal((F, B, U, 2))
    values = z.view(np.complex128)[..., 0] / np.sqrt(2.0)
    return MeasuredTensor(values, bs_ports_per_location, ue_ports_per_location)


def emit_fixture_tensor(path, F: int, B: int, U: int, seed: int, bs_ports_per_location: int = 8,
                        ue_ports_per_location: int = 8) -> MeasuredTensor:
    """Write :func:`fixture_tensor` to ``path`` and return the in-memory tensor."""
    tensor = fixture_tensor(F, B, U, seed, bs_ports_per_location, ue_ports_per_location)
    parent = os.path.dirname(os.fspath(path))
    if parent and not os.path.isdir(parent):
        raise OSError(f"cannot write {path}: directory {parent} does not exist")
    write_measured_tensor(tensor, path)
    return tensor


@dataclass(frozen=True)
class SubsamplePlan:
    """Index selection turning one tensor frequency slice into an M x K channel.

    ``bs_ports`` has shape ``(L, M // L)``; ports are local to their location.
    """

    frequency_index: int
    bs_locations: np.ndarray
    bs_ports: np.ndarray
    ue_locations: np.ndarray
    ue_ports: np.ndarray

    def bs_global_ports(self, ports_per_location: int) -> np.ndarray:
        return (self.bs_locations[:, None] * ports_per_location + self.bs_ports).ravel()

    def ue_global_ports(self, ports_per_location: int) -> np.ndarray:
        return self.ue_locations * ports_per_location + self.ue_ports

    def validate(self, tensor: MeasuredTensor) -> None:
        F = tensor.shape[0]
        if not 0 <= self.frequency_index < F:
            raise ConfigurationError(f"frequency index {self.frequency_index} outside [0, {F})")
        checks = (
            ("bs_locations", self.bs_locations, tensor.bs_locations),
            ("bs_ports", self.bs_ports, tensor.bs_ports_per_location),
            ("ue_locations", self.ue_locations, tensor.ue_locations),
            ("ue_ports", self.ue_ports, tensor.ue_ports_per_location),
        )
        for name, idx, bound in checks:
            if idx.size and (idx.min() < 0 or idx.max() >= bound):
                raise ConfigurationError(f"{name} index out of range [0, {bound})")
        if len(set(self.bs_locations.tolist())) != len(self.bs_locations):
            raise ConfigurationError("bs_locations are not distinct")
        if len(set(self.ue_locations.tolist())) != len(self.ue_locations):
            raise ConfigurationError("ue_locations are not distinct")
        if self.bs_ports.shape[0] != len(self.bs_locations):
            raise ConfigurationError("bs_ports needs one row per BS location")
        for row in self.bs_ports:
            if len(set(row.tolist())) != len(row):
                raise ConfigurationError("ports within a BS location are not distinct")
        if len(self.ue_ports) != len(self.ue_locations):
            raise ConfigurationError("ue_ports needs one port per UE location")


def check_capacity(tensor: MeasuredTensor, topology: Topology) -> None:
    if topology.L > tensor.bs_locations:
        raise ConfigurationError(
            f"topology {topology} needs {topology.L} BS locations, tensor has {tensor.bs_locations}"
        )
    if topology.antennas_per_ap > tensor.bs_ports_per_location:
        raise ConfigurationError(
            f"topology {topology} needs {topology.antennas_per_ap} ports per AP, "
            f"tensor has {tensor.bs_ports_per_location}"
        )
    if topology.K > tensor.ue_locations:
        raise ConfigurationError(
            f"topology {topology} needs {topology.K} UE locations, tensor has {tensor.ue_locations}"
        )


def make_subsample_plan(tensor: MeasuredTensor, topology: Topology,
                        rng: np.random.Generator) -> SubsamplePlan:
    """Random frequency point, L distinct BS locations with M/L distinct ports each,
    K distinct UE locations with one port each."""
    check_capacity(tensor, topology)
    freq = int(rng.integers(tensor.shape[0]))
    bs_locations = rng.choice(tensor.bs_locations, size=topology.L, replace=False)
    bs_ports = np.stack([
        rng.choice(tensor.bs_ports_per_location, size=topology.antennas_per_ap, replace=False)
        for _ in range(topology.L)
    ])
    ue_locations = rng.choice(tensor.ue_locations, size=topology.K, replace=False)
    ue_ports = rng.integers(tensor.ue_ports_per_location, size=topology.K)
    return SubsamplePlan(freq, bs_locations, bs_ports, ue_locations, ue_ports)


def subsample_measured(tensor: MeasuredTensor, plan: SubsamplePlan, topology: Topology | None = None,
                       realization_index: int = 1) -> ChannelMatrix:
    plan.validate(tensor)
    rows = plan.bs_global_ports(tensor.bs_ports_per_location)
    cols = plan.ue_global_ports(tensor.ue_ports_per_location)
    if topology is None:
        topology = Topology(len(rows), len(plan.bs_locations), len(cols))
    H = tensor.values[plan.frequency_index][np.ix_(rows, cols)]
    return ChannelMatrix(H, topology, realization_index)
