"""Run configured campaigns and write plot-ready output files."""

from __future__ import annotations

import json
import logging
import os
import shutil
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .config import MEASURED, BestLJob, CampaignSpec, RunConfig, TopologyJob
from .errors import ConfigurationError
from .evaluator import (
    MeasuredSource,
    PowerConfig,
    Scenario,
    SEReport,
    SyntheticSource,
    pick_best_L,
    run_monte_carlo,
    semi_distributed_candidates,
    with_topology,
)
from .measured import load_measured_tensor
from .stats import downsample_cdf, empirical_cdf
from .topology import Topology

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
FORMATS = ("csv", "json")
FAILURE_MARKER = "FAILED.json"
MAX_CDF_POINTS = 2000

SAMPLE_COLUMNS = ("realization", "ue", "se_bits_per_s_per_hz")
CDF_COLUMNS = ("se_bits_per_s_per_hz", "cdf")


class CampaignError(RuntimeError):
    """An evaluator failure, tagged with the campaign and scenario it occurred in."""


@dataclass
class OutputBundle:
    output_dir: str
    scenario_dirs: list = field(default_factory=list)
    sweep_tables: list = field(default_factory=list)
    manifest: str = ""


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_table(path: str, columns, rows, fmt: str) -> None:
    if fmt == "json":
        payload = {"schema_version": SCHEMA_VERSION, "columns": list(columns),
                   "rows": [[_plain(v) for v in row] for row in rows]}
        with open(path, "w") as fh:
            json.dump(payload, fh)
            fh.write("\n")
        return
    with open(path, "w") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_table(path: str):
    """Inverse of :func:`write_table`: ``(columns, rows)`` with numeric cells parsed."""
    if path.endswith(".json"):
        with open(path) as fh:
            payload = json.load(fh)
        return payload["columns"], payload["rows"]
    with open(path) as fh:
        lines = fh.read().splitlines()
    columns = lines[0].split(",")
    rows = []
    for line in lines[1:]:
        row = []
        for cell in line.split(","):
            try:
                row.append(int(cell))
            except ValueError:
                try:
                    row.append(float(cell))
                except ValueError:
                    row.append(cell)
        rows.append(row)
    return columns, rows


def _plain(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def _write_json(path: str, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def scenario_id(source: str, topology: Topology, precoder: str) -> str:
    return f"{source}_M{topology.M}_L{topology.L}_K{topology.K}_{precoder.lower()}"


def write_scenario(report: SEReport, directory: str, campaign: str, source: str, fmt: str,
                   campaign_seed: int | None = None) -> dict:
    os.makedirs(directory)
    sc = report.scenario
    S, K = report.samples.shape
    s_idx, k_idx = np.divmod(np.arange(S * K), K)
    flat = report.samples.ravel()
    samples_file = f"samples.{fmt}"
    write_table(os.path.join(directory, samples_file), SAMPLE_COLUMNS,
                zip((s_idx + 1).tolist(), (k_idx + 1).tolist(), flat.tolist()), fmt)
    values, probs = downsample_cdf(*empirical_cdf(flat), max_points=MAX_CDF_POINTS)
    cdf_file = f"cdf.{fmt}"
    write_table(os.path.join(directory, cdf_file), CDF_COLUMNS, zip(values.tolist(), probs.tolist()), fmt)
    summary = {
        "schema_version": SCHEMA_VERSION,
        "campaign": campaign,
        "scenario": os.path.basename(directory),
        "topology": {"M": sc.topology.M, "L": sc.topology.L, "K": sc.topology.K, "kind": sc.topology.kind},
        "source": source,
        "precoder": sc.precoder,
        "S": S,
        "seed": sc.master_seed,
        "campaign_seed": campaign_seed,
        "tx_to_noise_ratio_db": sc.power.tx_to_noise_ratio_db,
        "median": report.median,
        "likely_95": report.likely_95,
        "mean": report.mean,
        "precoder_column_norm_min": report.precoder_norm_min,
        "precoder_column_norm_max": report.precoder_norm_max,
        "files": {"samples": samples_file, "cdf": cdf_file},
    }
    _write_json(os.path.join(directory, "summary.json"), summary)
    return summary


class _Runner:
    def __init__(self, config: RunConfig, stage: str, fmt: str, threads: int):
        self.config = config
        self.stage = stage
        self.fmt = fmt
        self.threads = threads
        self._tensors = {}
        self.bundle_dirs = []
        self.sweep_tables = []

    def source_for(self, spec: CampaignSpec):
        if spec.source == MEASURED:
            if spec.tensor_path not in self._tensors:
                self._tensors[spec.tensor_path] = load_measured_tensor(spec.tensor_path)
            return MeasuredSource(self._tensors[spec.tensor_path], spec.tensor_path)
        return SyntheticSource(self.config.geometry, self.config.fading)

    def evaluate(self, spec: CampaignSpec, topology: Topology, precoder: str, done: dict) -> SEReport:
        key = (topology, precoder)
        if key in done:
            return done[key][0]
        base = Scenario(
            topology,
            self.source_for(spec),
            precoder,
            PowerConfig(spec.tx_to_noise_db),
            spec.realizations,
            spec.seed,
            self.config.zf_condition_limit,
            self.config.normalize_zf,
        )
        scenario = with_topology(base, topology)
        sid = scenario_id(spec.source, topology, precoder)
        log.info("%s: %s (S=%d)", spec.name, sid, spec.realizations)
        try:
            report = run_monte_carlo(scenario, self.threads)
        except Exception as exc:
            raise CampaignError(f"campaign {spec.name!r}, scenario {sid}: {exc}") from exc
        directory = os.path.join(self.stage, spec.name, sid)
        summary = write_scenario(report, directory, spec.name, spec.source, self.fmt, spec.seed)
        self.bundle_dirs.append(os.path.relpath(directory, self.stage))
        done[key] = (report, summary)
        return report

    def run(self, spec: CampaignSpec) -> None:
        os.makedirs(os.path.join(self.stage, spec.name))
        done = {}
        rows = []
        for job in spec.jobs():
            if isinstance(job, TopologyJob):
                t = job.topology
                r = self.evaluate(spec, t, job.precoder, done)
                policy = job.policy if job.policy is not None else t.kind
            else:
                reports = {L: self.evaluate(spec, Topology(job.M, L, job.K), job.precoder, done)
                           for L in semi_distributed_candidates(job.M)}
                L, _ = pick_best_L(reports)
                t, r, policy = Topology(job.M, L, job.K), reports[L], "best_semi"
            rows.append((t.M, t.L, t.K, policy, t.kind, job.precoder, r.likely_95, r.median, r.mean))
        if spec.kind in ("m_sweep", "l_sweep"):
            key = "M" if spec.kind == "m_sweep" else "L"
            columns = ("M", "L", "K", "policy", "kind", "precoder", "likely_95", "median", "mean")
            if key == "L":
                rows.sort(key=lambda row: (row[5], row[1]))
            name = os.path.join(spec.name, f"sweep_by_{key}.{self.fmt}")
            write_table(os.path.join(self.stage, name), columns, rows, self.fmt)
            self.sweep_tables.append(name)


def run_campaign(config: RunConfig, output_dir, fmt: str = "csv", threads: int = 1) -> OutputBundle:
    """Evaluate every campaign of ``config`` and write the results under ``output_dir``.

    Files are staged in a temporary directory and moved into place only when
    every scenario succeeded. On failure nothing is moved; a ``FAILED.json``
    marker naming the error is written and the exception re-raised.
    """
    if fmt not in FORMATS:
        raise ConfigurationError(f"format must be one of {FORMATS}, got {fmt!r}")
    if threads < 1:
        raise ConfigurationError(f"threads must be >= 1, got {threads}")
    output_dir = os.fspath(output_dir)
    os.makedirs(output_dir, exist_ok=True)
    marker = os.path.join(output_dir, FAILURE_MARKER)
    stage = tempfile.mkdtemp(prefix=".incomplete-", dir=output_dir)
    runner = _Runner(config, stage, fmt, threads)
    try:
        for spec in config.campaigns:
            runner.run(spec)
        manifest = {
            "schema_version": SCHEMA_VERSION,
            "format": fmt,
            "campaigns": [s.name for s in config.campaigns],
            "scenarios": runner.bundle_dirs,
            "sweep_tables": runner.sweep_tables,
        }
        _write_json(os.path.join(stage, "manifest.json"), manifest)
    except BaseException as exc:
        shutil.rmtree(stage, ignore_errors=True)
        _write_json(marker, {"schema_version": SCHEMA_VERSION, "error": str(exc),
                             "type": type(exc).__name__})
        raise
    for entry in sorted(os.listdir(stage)):
        target = os.path.join(output_dir, entry)
        if os.path.isdir(target):
            shutil.rmtree(target)
        elif os.path.exists(target):
            os.remove(target)
        os.replace(os.path.join(stage, entry), target)
    os.rmdir(stage)
    if os.path.exists(marker):
        os.remove(marker)
    return OutputBundle(
        output_dir,
        [os.path.join(output_dir, d) for d in runner.bundle_dirs],
        [os.path.join(output_dir, t) for t in runner.sweep_tables],
        os.path.join(output_dir, "manifest.json"),
    )
