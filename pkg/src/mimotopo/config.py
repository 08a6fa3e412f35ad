"""YAML run configuration: parsing, validation and expansion into scenarios."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import yaml

from .channel import FadingParams
from .errors import ConfigurationError
from .evaluator import (
    DEFAULT_REALIZATIONS,
    MEASURED_TX_TO_NOISE_DB,
    SYNTHETIC_TX_TO_NOISE_DB,
    semi_distributed_candidates,
)
from .precoder import DEFAULT_CONDITION_LIMIT, PRECODER_KINDS
from .rng import check_seed
from .topology import RoomGeometry, Topology, build_ap_ring

SYNTHETIC = "synthetic"
MEASURED = "measured"

COLOCATED = "colocated"
FULLY = "fully"
BEST_SEMI = "best_semi"
NAMED_POLICIES = (COLOCATED, FULLY, BEST_SEMI)

_TOP_KEYS = {"strict", "geometry", "fading", "power", "zf", "campaign"}
_SHORTHAND_KEYS = {"name", "source", "topology", "topologies", "precoder", "precoders", "S", "seed",
                   "tx_to_noise_db"}
_CAMPAIGN_KEYS = _SHORTHAND_KEYS | {"m_sweep", "l_sweep"}
_GEOMETRY_KEYS = {"room_side", "ring_count", "spacing", "ue_area_side"}
_FADING_KEYS = {"carrier_frequency", "shadow_sigma_db", "min_distance", "height_offset"}
_POWER_KEYS = {SYNTHETIC, MEASURED}
_ZF_KEYS = {"condition_limit", "normalize"}
_M_SWEEP_KEYS = {"M", "K", "policies"}
_L_SWEEP_KEYS = {"M", "K", "L"}


@dataclass(frozen=True)
class TopologyJob:
    """One fixed topology evaluated under one precoder."""

    topology: Topology
    precoder: str
    policy: str | None = None


@dataclass(frozen=True)
class BestLJob:
    """Best semi-distributed L search at fixed M under one precoder."""

    M: int
    K: int
    precoder: str


@dataclass(frozen=True)
class CampaignSpec:
    name: str
    kind: str  # "topologies" | "m_sweep" | "l_sweep"
    source: str
    tensor_path: str | None
    precoders: tuple[str, ...]
    realizations: int
    seed: int
    tx_to_noise_db: float
    topologies: tuple[Topology, ...] = ()
    m_values: tuple[int, ...] = ()
    policies: tuple = ()
    K: int = 4
    l_M: int = 0
    l_values: tuple[int, ...] = ()

    def jobs(self) -> list:
        """Expand into evaluation jobs, in output order."""
        out = []
        for precoder in self.precoders:
            if self.kind == "topologies":
                out.extend(TopologyJob(t, precoder) for t in self.topologies)
            elif self.kind == "l_sweep":
                out.extend(TopologyJob(Topology(self.l_M, L, self.K), precoder) for L in self.l_values)
            else:
                for M in self.m_values:
                    for policy in self.policies:
                        if policy == BEST_SEMI:
                            out.append(BestLJob(M, self.K, precoder))
                        else:
                            L = {COLOCATED: 1, FULLY: M}.get(policy, policy)
                            out.append(TopologyJob(Topology(M, L, self.K), precoder, str(policy)))
        return out


@dataclass(frozen=True)
class RunConfig:
    geometry: RoomGeometry
    fading: FadingParams
    campaigns: tuple[CampaignSpec, ...]
    zf_condition_limit: float = DEFAULT_CONDITION_LIMIT
    normalize_zf: bool = False
    power_db: dict = field(default_factory=lambda: {SYNTHETIC: SYNTHETIC_TX_TO_NOISE_DB,
                                                    MEASURED: MEASURED_TX_TO_NOISE_DB})
    source_path: str | None = None


def _check_keys(block: dict, allowed: set, where: str, strict: bool) -> None:
    if not isinstance(block, dict):
        raise ConfigurationError(f"{where}: expected a mapping, got {type(block).__name__}")
    unknown = sorted(set(block) - allowed)
    if unknown and strict:
        raise ConfigurationError(f"{where}: unknown key(s) {', '.join(map(str, unknown))}")


def _float(value, where: str) -> float:
    # PyYAML reads "3.5e9" (no sign in the exponent) as a string
    if isinstance(value, bool):
        raise ConfigurationError(f"{where}: expected a number, got {value!r}")
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{where}: expected a number, got {value!r}") from None


def _int(value, where: str, minimum: int | None = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigurationError(f"{where}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigurationError(f"{where}: must be >= {minimum}, got {value}")
    return value


def _int_list(value, where: str) -> tuple[int, ...]:
    if isinstance(value, int) and not isinstance(value, bool):
        value = [value]
    if not isinstance(value, list) or not value:
        raise ConfigurationError(f"{where}: expected a non-empty list of integers")
    return tuple(_int(v, f"{where}[{i}]") for i, v in enumerate(value))


def _topology(value, where: str) -> Topology:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ConfigurationError(f"{where}: expected [M, L, K], got {value!r}")
    M, L, K = (_int(v, f"{where}[{i}]") for i, v in enumerate(value))
    try:
        return Topology(M, L, K)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{where}: {exc}") from None


def _precoders(entry: dict, where: str) -> tuple[str, ...]:
    if "precoder" in entry and "precoders" in entry:
        raise ConfigurationError(f"{where}: give either 'precoder' or 'precoders', not both")
    value = entry.get("precoders", entry.get("precoder", "ZF"))
    values = [value] if isinstance(value, str) else value
    if not isinstance(values, list) or not values:
        raise ConfigurationError(f"{where}.precoders: expected a precoder name or a list of them")
    out = []
    for v in values:
        name = str(v).upper()
        if name not in PRECODER_KINDS:
            raise ConfigurationError(f"{where}.precoders: unknown precoder {v!r}, expected {PRECODER_KINDS}")
        out.append(name)
    return tuple(out)


def _geometry(block: dict, strict: bool) -> RoomGeometry:
    _check_keys(block, _GEOMETRY_KEYS, "geometry", strict)
    side = _float(block.get("room_side", 6.0), "geometry.room_side")
    count = _int(block.get("ring_count", 64), "geometry.ring_count")
    spacing = _float(block.get("spacing", 0.375), "geometry.spacing")
    ue_side = _float(block.get("ue_area_side", 4.5), "geometry.ue_area_side")
    try:
        return build_ap_ring(side, count, spacing, ue_side)
    except ConfigurationError as exc:
        raise ConfigurationError(f"geometry: {exc}") from None


def _fading(block: dict, strict: bool) -> FadingParams:
    _check_keys(block, _FADING_KEYS, "fading", strict)
    kwargs = {k: _float(block[k], f"fading.{k}") for k in _FADING_KEYS if k in block}
    try:
        return FadingParams(**kwargs)
    except ConfigurationError as exc:
        raise ConfigurationError(f"fading: {exc}") from None


def _campaign(entry: dict, index: int, ctx: dict) -> CampaignSpec:
    where = f"campaign[{index}]"
    _check_keys(entry, _CAMPAIGN_KEYS, where, ctx["strict"])
    name = str(entry.get("name", f"campaign{index}"))
    if not name or "/" in name or name.startswith("."):
        raise ConfigurationError(f"{where}.name: {name!r} is not a valid directory name")

    source = entry.get("source", SYNTHETIC)
    tensor_path = None
    if isinstance(source, dict):
        _check_keys(source, {MEASURED}, f"{where}.source", True)
        tensor_path = str(source[MEASURED])
        if not os.path.isabs(tensor_path) and ctx["base_dir"]:
            tensor_path = os.path.join(ctx["base_dir"], tensor_path)
        if not os.path.isfile(tensor_path):
            raise ConfigurationError(f"{where}.source.measured: tensor file {tensor_path} not found")
        source = MEASURED
    elif source != SYNTHETIC:
        raise ConfigurationError(f"{where}.source: expected 'synthetic' or {{measured: PATH}}, got {source!r}")

    seed = ctx["seed_override"] if ctx["seed_override"] is not None else entry.get("seed")
    if seed is None:
        raise ConfigurationError(f"{where}.seed: an explicit seed is required")
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigurationError(f"{where}.seed: expected an integer, got {seed!r}")
    try:
        seed = check_seed(seed)
    except ValueError as exc:
        raise ConfigurationError(f"{where}.seed: {exc}") from None

    tx_db = entry.get("tx_to_noise_db", ctx["power"][source])
    common = dict(
        name=name,
        source=source,
        tensor_path=tensor_path,
        precoders=_precoders(entry, where),
        realizations=_int(entry.get("S", DEFAULT_REALIZATIONS), f"{where}.S"),
        seed=seed,
        tx_to_noise_db=_float(tx_db, f"{where}.tx_to_noise_db"),
    )

    layouts = [k for k in ("topology", "topologies", "m_sweep", "l_sweep") if k in entry]
    if len(layouts) != 1:
        raise ConfigurationError(
            f"{where}: give exactly one of topology, topologies, m_sweep, l_sweep (got {layouts or 'none'})"
        )
    layout = layouts[0]
    if layout == "topology":
        spec = CampaignSpec(kind="topologies", topologies=(_topology(entry["topology"], f"{where}.topology"),),
                            **common)
    elif layout == "topologies":
        items = entry["topologies"]
        if not isinstance(items, list) or not items:
            raise ConfigurationError(f"{where}.topologies: expected a non-empty list of [M, L, K]")
        spec = CampaignSpec(kind="topologies",
                            topologies=tuple(_topology(t, f"{where}.topologies[{i}]") for i, t in enumerate(items)),
                            **common)
    elif layout == "m_sweep":
        block = entry["m_sweep"]
        _check_keys(block, _M_SWEEP_KEYS, f"{where}.m_sweep", ctx["strict"])
        if "M" not in block:
            raise ConfigurationError(f"{where}.m_sweep.M: required")
        m_values = _int_list(block["M"], f"{where}.m_sweep.M")
        K = _int(block.get("K", 4), f"{where}.m_sweep.K")
        raw = block.get("policies", list(NAMED_POLICIES))
        if not isinstance(raw, list) or not raw:
            raise ConfigurationError(f"{where}.m_sweep.policies: expected a non-empty list")
        policies = []
        for i, p in enumerate(raw):
            pw = f"{where}.m_sweep.policies[{i}]"
            if isinstance(p, str):
                if p not in NAMED_POLICIES:
                    raise ConfigurationError(f"{pw}: unknown policy {p!r}, expected {NAMED_POLICIES} or an integer L")
                policies.append(p)
            else:
                policies.append(_int(p, pw))
        for M in m_values:
            for p in policies:
                if p == BEST_SEMI and not semi_distributed_candidates(M):
                    raise ConfigurationError(f"{where}.m_sweep: best_semi needs a divisor 1 < L < M, M={M} has none")
                L = {COLOCATED: 1, FULLY: M, BEST_SEMI: 2}.get(p, p) if isinstance(p, str) else p
                if p != BEST_SEMI:
                    _topology([M, L, K], f"{where}.m_sweep (M={M}, policy {p})")
        spec = CampaignSpec(kind="m_sweep", m_values=m_values, policies=tuple(policies), K=K, **common)
    else:
        block = entry["l_sweep"]
        _check_keys(block, _L_SWEEP_KEYS, f"{where}.l_sweep", ctx["strict"])
        for key in ("M", "L"):
            if key not in block:
                raise ConfigurationError(f"{where}.l_sweep.{key}: required")
        M = _int(block["M"], f"{where}.l_sweep.M")
        K = _int(block.get("K", 4), f"{where}.l_sweep.K")
        l_values = _int_list(block["L"], f"{where}.l_sweep.L")
        for L in l_values:
            _topology([M, L, K], f"{where}.l_sweep (L={L})")
        spec = CampaignSpec(kind="l_sweep", l_M=M, l_values=l_values, K=K, **common)

    for job in spec.jobs():
        topos = ([job.topology] if isinstance(job, TopologyJob)
                 else [Topology(job.M, L, job.K) for L in semi_distributed_candidates(job.M)])
        for t in topos:
            if job.precoder == "ZF" and t.M < t.K:
                raise ConfigurationError(f"{where}: ZF needs M >= K, topology {t} has M < K")
            if source == SYNTHETIC and t.L > ctx["geometry"].ring_size:
                raise ConfigurationError(
                    f"{where}: topology {t} needs {t.L} AP sites, ring has {ctx['geometry'].ring_size}"
                )
    return spec


def load_config(data: dict, base_dir: str | None = None, seed: int | None = None) -> RunConfig:
    """Validate an already-parsed config mapping."""
    if not isinstance(data, dict):
        raise ConfigurationError("config: top level must be a mapping")
    strict = data.get("strict", True)
    if not isinstance(strict, bool):
        raise ConfigurationError(f"strict: expected true/false, got {strict!r}")
    campaigns = data.get("campaign")
    if campaigns is None:
        # single-scenario shorthand: campaign keys at top level
        _check_keys(data, _TOP_KEYS | _SHORTHAND_KEYS, "config", strict)
        campaigns = [{k: v for k, v in data.items() if k in _SHORTHAND_KEYS}]
        if "name" not in campaigns[0]:
            campaigns[0]["name"] = "default"
    else:
        _check_keys(data, _TOP_KEYS, "config", strict)
        if not isinstance(campaigns, list) or not campaigns:
            raise ConfigurationError("campaign: expected a non-empty list")

    geometry = _geometry(data.get("geometry") or {}, strict)
    fading = _fading(data.get("fading") or {}, strict)
    power_block = data.get("power") or {}
    _check_keys(power_block, _POWER_KEYS, "power", strict)
    power = {SYNTHETIC: _float(power_block.get(SYNTHETIC, SYNTHETIC_TX_TO_NOISE_DB), "power.synthetic"),
             MEASURED: _float(power_block.get(MEASURED, MEASURED_TX_TO_NOISE_DB), "power.measured")}
    zf = data.get("zf") or {}
    _check_keys(zf, _ZF_KEYS, "zf", strict)
    limit = _float(zf.get("condition_limit", DEFAULT_CONDITION_LIMIT), "zf.condition_limit")
    normalize = zf.get("normalize", False)
    if not isinstance(normalize, bool):
        raise ConfigurationError(f"zf.normalize: expected true/false, got {normalize!r}")

    if seed is not None:
        try:
            seed = check_seed(seed)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"--seed: {exc}") from None
    ctx = dict(strict=strict, base_dir=base_dir, seed_override=seed, power=power, geometry=geometry)
    specs = []
    for i, entry in enumerate(campaigns):
        if not isinstance(entry, dict):
            raise ConfigurationError(f"campaign[{i}]: expected a mapping")
        specs.append(_campaign(entry, i, ctx))
    names = [s.name for s in specs]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise ConfigurationError(f"campaign names must be unique, repeated: {', '.join(dupes)}")
    return RunConfig(geometry, fading, tuple(specs), limit, normalize, power)


def parse_config(path, seed: int | None = None) -> RunConfig:
    """Read and validate a YAML config file; ``seed`` overrides every campaign seed."""
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"config {path} is not valid YAML: {exc}") from None
    config = load_config(data, base_dir=os.path.dirname(os.path.abspath(path)), seed=seed)
    return replace(config, source_path=os.fspath(path))
