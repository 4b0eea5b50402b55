"""Experiment orchestration: sweeps, repetitions, metric aggregation and CSV output.

Config and spec files are flat ``key = value`` text (``#`` comments,
comma-separated lists). Recognized keys are listed in ``CONFIG_KEYS``;
every migration, colony and generator constant can be overridden, and
omitted keys keep their defaults.
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
import hashlib
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .acs import AcsParams, consolidate
from .baselines import MmdvmcParams, ffdl1_assign, mmdvmc
from .errors import ConfigError, VmconsolError
from .model import ResourceVector
from .overhead import MigrationConfig
from .problem import ClusterProblem, ClusterResult, evaluate
from .topology import form_clusters
from .workload import SEED_MASK, SWEEP_KINDS, SWEEP_RANGE, GenConfig, generate_datacenter, vm_count

log = logging.getLogger(__name__)

ALGORITHMS = ("ffdl1", "mmdvmc", "amdvmc")
TIMING_MODES = ("decentralized", "centralized")

MB_PER_TB = 1024.0 ** 2
S_PER_H = 3600.0

METRICS = (
    "n_released_pm", "packing_efficiency", "power_kw", "wastage",
    "md_tb", "mt_hours", "dt_hours", "nc", "mo", "mec_kj", "msv",
)
TIMING_METRIC = "decision_time_sec"
CSV_COLUMNS = (
    ("sweep", "sweep_value", "algorithm", "n_pm", "n_vm", "repetitions", "failures")
    + tuple(c for m in METRICS for c in (m, f"{m}_std"))
    + (TIMING_METRIC, f"{TIMING_METRIC}_std")
)
TIMING_COLUMNS = (TIMING_METRIC, f"{TIMING_METRIC}_std")


@dataclass(frozen=True)
class Settings:
    gen: GenConfig = GenConfig()
    migration: MigrationConfig = MigrationConfig()
    acs: AcsParams = AcsParams()
    mmdvmc: MmdvmcParams = MmdvmcParams()


@dataclass(frozen=True)
class ExperimentSpec:
    sweep: str = "np"
    values: tuple = (64,)
    repetitions: int = 30
    algorithms: tuple = ALGORITHMS
    cluster_size: int = 8
    base_seed: int = 0
    timing_mode: str = "decentralized"
    n_pm: int = 64  # fixed fleet size for demand sweeps
    jobs: int = 1
    settings: Settings = field(default_factory=Settings)

    def __post_init__(self):
        if self.sweep not in SWEEP_KINDS:
            raise ConfigError(f"sweep must be one of {SWEEP_KINDS}, got {self.sweep!r}")
        if not self.values:
            raise ConfigError("values must be non-empty")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown or not self.algorithms:
            raise ConfigError(f"unknown algorithm(s) {sorted(unknown)}; choose from {ALGORITHMS}")
        if self.timing_mode not in TIMING_MODES:
            raise ConfigError(f"timing_mode must be one of {TIMING_MODES}")
        for value in self.values:
            if self.sweep == "np":
                if int(value) != value or value < 1:
                    raise ConfigError(f"PM count {value!r} must be a positive integer")
            elif not SWEEP_RANGE[0] - 1e-9 <= value <= SWEEP_RANGE[1] + 1e-9:
                raise ConfigError(f"{self.sweep} value {value} outside {SWEEP_RANGE}")


# key -> (section, field, parser)
def _bool(text):
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _list(kind):
    return lambda text: tuple(kind(x.strip()) for x in text.split(",") if x.strip())


def _int(text):
    return int(text, 0)


CONFIG_KEYS = {
    # generator
    "n_pm": ("gen", "n_pm", _int),
    "mean_rsc": ("gen", "mean_rsc", float),
    "sd_rsc": ("gen", "sd_rsc", float),
    "pr": ("gen", "pr", float),
    "mean_bw": ("gen", "mean_bw", float),
    "sd_bw": ("gen", "sd_bw", float),
    "df": ("gen", "df", float),
    "ports_per_switch": ("gen", "ports_per_switch", _int),
    "link_capacity_mbps": ("gen", "link_capacity_mbps", float),
    "pm_cpu": ("gen", "pm_cpu", float),
    "pm_mem": ("gen", "pm_mem", float),
    "pm_net": ("gen", "pm_net", float),
    "seed": ("gen", "seed", _int),
    # migration model
    **{k: ("migration", k, float) for k in (
        "dv_th", "mu1", "mu2", "mu3", "t_res", "alpha1", "alpha2", "alpha3", "alpha4",
        "gamma1", "gamma2", "sigma")},
    "max_round": ("migration", "max_round", _int),
    # colony
    "n_ants": ("acs", "n_ants", _int),
    "n_cycle_term": ("acs", "n_cycle_term", _int),
    "n_reset_max": ("acs", "n_reset_max", _int),
    "n_cycle_max": ("acs", "n_reset_max", _int),
    "beta": ("acs", "beta", float),
    "delta": ("acs", "delta", float),
    "q0": ("acs", "q0", float),
    "omega": ("acs", "omega", float),
    "lambda": ("acs", "lam", float),
    "phi": ("acs", "phi", float),
    "epsilon_mo": ("acs", "epsilon_mo", float),
    "strict_alg2": ("acs", "strict_alg2", _bool),
    # max-min baseline
    "mm_n_cycles": ("mmdvmc", "n_cycles", _int),
    "mm_n_ants": ("mmdvmc", "n_ants", _int),
    "mm_tau_min": ("mmdvmc", "tau_min", float),
    "mm_tau_max": ("mmdvmc", "tau_max", float),
    "mm_rho": ("mmdvmc", "rho", float),
    "mm_beta": ("mmdvmc", "beta", float),
    "mm_home_bonus": ("mmdvmc", "home_bonus", float),
    # experiment
    "sweep": ("spec", "sweep", str),
    "values": ("spec", "values", _list(float)),
    "repetitions": ("spec", "repetitions", _int),
    "algorithms": ("spec", "algorithms", _list(str)),
    "cluster_size": ("spec", "cluster_size", _int),
    "base_seed": ("spec", "base_seed", _int),
    "timing_mode": ("spec", "timing_mode", str),
    "spec_n_pm": ("spec", "n_pm", _int),
    "jobs": ("spec", "jobs", _int),
}


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse flat ``key = value`` text into {key: typed value}."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string("[config]\n" + text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    out = {}
    for key, raw in parser["config"].items():
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{source}: unknown key {key!r}")
        _, _, kind = CONFIG_KEYS[key]
        try:
            out[key] = kind(raw)
        except ValueError as exc:
            raise ConfigError(f"{source}: bad value for {key!r}: {exc}") from None
    return out


def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config_text(text, str(path))


def build_settings(overrides: dict, base: Settings = Settings()) -> Settings:
    groups = {"gen": {}, "migration": {}, "acs": {}, "mmdvmc": {}}
    for key, value in overrides.items():
        section, name, _ = CONFIG_KEYS[key]
        if section in groups:
            groups[section][name] = value
    gen = groups["gen"]
    cap_fields = {k: gen.pop(k) for k in ("pm_cpu", "pm_mem", "pm_net") if k in gen}
    if cap_fields:
        cap = base.gen.pm_capacity
        gen["pm_capacity"] = ResourceVector(
            cap_fields.get("pm_cpu", cap.cpu), cap_fields.get("pm_mem", cap.mem), cap_fields.get("pm_net", cap.net))
    try:
        return Settings(
            gen=dataclasses.replace(base.gen, **gen),
            migration=dataclasses.replace(base.migration, **groups["migration"]),
            acs=dataclasses.replace(base.acs, **groups["acs"]),
            mmdvmc=dataclasses.replace(base.mmdvmc, **groups["mmdvmc"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def build_spec(overrides: dict) -> ExperimentSpec:
    fields = {}
    for key, value in overrides.items():
        section, name, _ = CONFIG_KEYS[key]
        if section == "spec":
            fields[name] = value
    if fields.get("sweep") == "np" and "values" in fields:
        fields["values"] = tuple(int(v) for v in fields["values"])
    if "algorithms" in fields:
        fields["algorithms"] = tuple(fields["algorithms"])
    return ExperimentSpec(settings=build_settings(overrides), **fields)


def load_spec(path) -> ExperimentSpec:
    return build_spec(load_config(path))


def derive_seed(base_seed: int, sweep: str, value, repetition: int) -> int:
    """Seed for one (sweep value, repetition): base_seed XOR blake2b-64 of the pair."""
    key = f"{sweep}:{float(value):.6g}:{repetition}".encode()
    digest = int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")
    return (base_seed ^ digest) & SEED_MASK


def datacenter_config(spec: ExperimentSpec, value, seed: int) -> tuple[GenConfig, int]:
    gen = spec.settings.gen
    if spec.sweep == "np":
        gen = dataclasses.replace(gen, n_pm=int(value), seed=seed)
    else:
        field_name = "mean_rsc" if spec.sweep == "mean_rsc" else "sd_rsc"
        gen = dataclasses.replace(gen, n_pm=spec.n_pm, seed=seed, **{field_name: float(value)})
    return gen, vm_count(gen.n_pm, spec.sweep, value)


def algorithm_rng(seed: int, cluster_id: int, algorithm: str) -> np.random.Generator:
    return np.random.default_rng([seed & SEED_MASK, cluster_id, ALGORITHMS.index(algorithm)])


def run_algorithm(algorithm: str, problem: ClusterProblem, settings: Settings,
                  rng: np.random.Generator, cluster_id: int = 0) -> ClusterResult:
    objective = settings.acs.objective
    start = time.perf_counter()
    trace = None
    if algorithm == "ffdl1":
        assign = ffdl1_assign(problem)
    elif algorithm == "mmdvmc":
        res = mmdvmc(problem, settings.mmdvmc, rng)
        assign, trace = res.assign, res.trace
    elif algorithm == "amdvmc":
        res = consolidate(problem, settings.acs, rng)
        assign, trace = res.assign, res.trace
    else:
        raise ConfigError(f"unknown algorithm {algorithm!r}")
    seconds = time.perf_counter() - start
    return evaluate(problem, assign, objective, cluster_id, seconds, trace)


def consolidate_datacenter(dc, settings: Settings, algorithms, cluster_size: int, seed: int) -> dict:
    """Run every algorithm on every cluster; {algorithm: [ClusterResult, ...]}."""
    clusters = form_clusters(dc.topology, cluster_size, ((v.id, v.host) for v in dc.vms.values()))
    out = {a: [] for a in algorithms}
    for cluster in clusters:
        if not cluster.vm_ids:
            continue
        problem = ClusterProblem.from_cluster(dc, cluster, settings.migration)
        for algorithm in algorithms:
            rng = algorithm_rng(seed, cluster.id, algorithm)
            out[algorithm].append(run_algorithm(algorithm, problem, settings, rng, cluster.id))
    return out


def aggregate_metrics(results, timing_mode: str = "decentralized") -> dict:
    """Data-center-wide metrics from per-cluster results, in reporting units."""
    if not results:
        raise ValueError("need at least one cluster result")
    total = results[0].overhead
    for r in results[1:]:
        total = total + r.overhead
    n_vms = sum(r.n_vms for r in results)
    n_active = sum(r.n_active for r in results)
    seconds = [r.seconds for r in results]
    return {
        "n_released_pm": float(sum(r.n_released for r in results)),
        "packing_efficiency": n_vms / n_active if n_active else 0.0,
        "power_kw": sum(r.power_w for r in results) / 1000.0,
        "wastage": sum(r.wastage for r in results),
        "md_tb": total.md / MB_PER_TB,
        "mt_hours": total.mt / S_PER_H,
        "dt_hours": total.dt / S_PER_H,
        "nc": total.nc,
        "mo": total.mo,
        "mec_kj": total.mec / 1000.0,
        "msv": total.msv,
        TIMING_METRIC: max(seconds) if timing_mode == "decentralized" else sum(seconds),
    }


def _run_point(args):
    spec, value, rep = args
    seed = derive_seed(spec.base_seed, spec.sweep, value, rep)
    gen, n_vm = datacenter_config(spec, value, seed)
    rows = {}
    try:
        dc = generate_datacenter(gen, n_vm)
        results = consolidate_datacenter(dc, spec.settings, spec.algorithms, spec.cluster_size, seed)
    except VmconsolError as exc:
        log.error("sweep %s=%s rep %d failed: %s", spec.sweep, value, rep, exc)
        return value, rep, gen.n_pm, n_vm, {a: None for a in spec.algorithms}
    for algorithm, res in results.items():
        rows[algorithm] = aggregate_metrics(res, spec.timing_mode) if res else None
    return value, rep, gen.n_pm, n_vm, rows


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if math.isnan(x):
        return ""
    return repr(float(x))


def run_experiment(spec: ExperimentSpec) -> list[dict]:
    """One averaged row per (sweep value, algorithm), in CSV column order."""
    tasks = [(spec, value, rep) for value in spec.values for rep in range(spec.repetitions)]
    if spec.jobs > 1:
        with ProcessPoolExecutor(spec.jobs) as pool:
            points = list(pool.map(_run_point, tasks))
    else:
        points = [_run_point(t) for t in tasks]
    rows = []
    for value in spec.values:
        mine = [p for p in points if p[0] == value]
        n_pm, n_vm = mine[0][2], mine[0][3]
        for algorithm in spec.algorithms:
            ok = [p[4][algorithm] for p in mine if p[4].get(algorithm) is not None]
            row = {
                "sweep": spec.sweep,
                "sweep_value": value,
                "algorithm": algorithm,
                "n_pm": n_pm,
                "n_vm": n_vm,
                "repetitions": len(ok),
                "failures": len(mine) - len(ok),
            }
            for metric in METRICS + (TIMING_METRIC,):
                samples = np.array([r[metric] for r in ok], dtype=float)
                row[metric] = float(samples.mean()) if len(samples) else math.nan
                row[f"{metric}_std"] = float(samples.std()) if len(samples) else math.nan
            rows.append(row)
    return rows


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def write_csv(rows, path) -> None:
    Path(path).write_text(rows_to_csv(rows))


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
