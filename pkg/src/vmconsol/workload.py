"""Synthetic data-center generation: PM fleet, VM demands, dirty rates, initial placement."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InfeasibleError
from .model import CAPACITY_TOL, DEFAULT_PM_CAPACITY, PhysicalMachine, ResourceVector, VirtualMachine
from .topology import NetworkModel, TreeTopology, bandwidth_table

log = logging.getLogger(__name__)

DEMAND_FLOOR = 0.005
DEMAND_CEIL = 1.0
SWEEP_RANGE = (0.05, 0.30)
SWEEP_KINDS = ("np", "mean_rsc", "sd_rsc")
PLACEMENT_ATTEMPTS = 10
SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class GenConfig:
    n_pm: int = 64
    mean_rsc: float = 0.05
    sd_rsc: float = 0.2
    pr: float = 0.25
    pm_capacity: ResourceVector = DEFAULT_PM_CAPACITY
    mean_bw: float = 0.05
    sd_bw: float = 0.2
    df: float = 2.0
    ports_per_switch: int = 8
    link_capacity_mbps: float = 1000.0
    seed: int = 0

    def __post_init__(self):
        if self.n_pm < 1:
            raise ConfigError("n_pm must be >= 1")
        if not 0 < self.mean_rsc < 1:
            raise ConfigError("mean_rsc must lie in (0, 1)")
        if not 0 <= self.sd_rsc < 1:
            raise ConfigError("sd_rsc must lie in [0, 1)")
        if not 0 <= self.pr <= 1:
            raise ConfigError("pr must lie in [0, 1]")


@dataclass
class DataCenter:
    config: GenConfig
    pms: list
    vms: dict
    network: NetworkModel
    n_vm: int = field(init=False)

    def __post_init__(self):
        self.n_vm = len(self.vms)

    @property
    def topology(self) -> TreeTopology:
        return self.network.topology


def vm_count(n_pm: int, sweep_kind: str = "np", sweep_value: float | None = None) -> int:
    """VM population coupled to the swept parameter.

    Plain size sweeps use two VMs per PM; demand sweeps shrink the
    population linearly from 2 per PM at 0.05 to 1 per PM at 0.30.
    """
    if sweep_kind == "np":
        return 2 * n_pm
    if sweep_kind not in SWEEP_KINDS:
        raise ConfigError(f"unknown sweep kind {sweep_kind!r}")
    lo, hi = SWEEP_RANGE
    if sweep_value is None or not lo - 1e-9 <= sweep_value <= hi + 1e-9:
        raise ConfigError(f"{sweep_kind} value {sweep_value!r} outside [{lo}, {hi}]")
    # rounded to nearest, e.g. 1024 * 0.35 / 0.25 = 1433.6 -> 1434
    return int(np.floor(n_pm * (0.55 - sweep_value) / 0.25 + 0.5))


def generate_vms(cfg: GenConfig, n_vm: int, rng: np.random.Generator) -> list[VirtualMachine]:
    if n_vm < 1:
        raise ConfigError("n_vm must be >= 1")
    capacity = cfg.pm_capacity.as_array()
    fractions = np.clip(rng.normal(cfg.mean_rsc, cfg.sd_rsc, size=(n_vm, 3)), DEMAND_FLOOR, DEMAND_CEIL)
    demands = fractions * capacity
    dirty = rng.uniform(0.0, 1.0, size=n_vm) * cfg.pr * demands[:, 1]
    return [
        VirtualMachine(i, ResourceVector.from_array(demands[i]), float(dirty[i]), -1)
        for i in range(n_vm)
    ]


def initial_placement(pms: list[PhysicalMachine], vms: list[VirtualMachine], rng: np.random.Generator) -> None:
    """Deal shuffled VMs round-robin over the PMs, skipping PMs that are full.

    Sets ``vm.host`` and ``pm.hosted`` in place. Raises InfeasibleError when a
    VM fits on no PM.
    """
    n = len(pms)
    load = np.zeros((n, 3))
    caps = np.array([pm.capacity.as_array() for pm in pms])
    ptr = 0
    for idx in rng.permutation(len(vms)):
        vm = vms[idx]
        demand = vm.demand.as_array()
        for step in range(n):
            k = (ptr + step) % n
            if np.all(load[k] + demand <= caps[k] + CAPACITY_TOL):
                break
        else:
            raise InfeasibleError(f"VM {vm.id} fits on no PM")
        load[k] += demand
        vm.host = pms[k].id
        pms[k].hosted.add(vm.id)
        ptr = (k + 1) % n


def attempt_rng(seed: int, attempt: int) -> np.random.Generator:
    return np.random.default_rng([seed & SEED_MASK, attempt])


def generate_datacenter(cfg: GenConfig, n_vm: int) -> DataCenter:
    """Build a full data center; identical (cfg, n_vm) gives identical output."""
    topology = TreeTopology(cfg.n_pm, cfg.ports_per_switch, cfg.df)
    for attempt in range(PLACEMENT_ATTEMPTS):
        rng = attempt_rng(cfg.seed, attempt)
        vms = generate_vms(cfg, n_vm, rng)
        pms = [PhysicalMachine(i, cfg.pm_capacity, set()) for i in range(cfg.n_pm)]
        try:
            initial_placement(pms, vms, rng)
        except InfeasibleError as exc:
            log.warning("placement attempt %d failed: %s", attempt, exc)
            continue
        table = bandwidth_table(rng, cfg.n_pm, cfg.mean_bw, cfg.sd_bw)
        net = NetworkModel(topology, table, cfg.link_capacity_mbps)
        return DataCenter(cfg, pms, {vm.id: vm for vm in vms}, net)
    raise InfeasibleError(f"no feasible initial placement after {PLACEMENT_ATTEMPTS} attempts")
