"""Array view of one cluster, shared by all consolidators.

VMs and PMs are indexed in increasing id order. Assignments are integer
arrays mapping VM index to PM index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .model import (
    CAPACITY_TOL,
    MigrationMap,
    ObjectiveParams,
    PhysicalMachine,
    VirtualMachine,
    objective_value,
    power_from_cpu_fraction,
    validate_map,
    wastage_from_fractions,
)
from .overhead import MigrationConfig, NormalizationCaps, OverheadReport, compute_caps, estimate_migration
from .topology import Cluster, NetworkModel


class ClusterProblem:
    def __init__(self, vms: list[VirtualMachine], pms: list[PhysicalMachine], net: NetworkModel,
                 cfg: MigrationConfig = MigrationConfig(), caps: NormalizationCaps | None = None):
        self.vms = sorted(vms, key=lambda vm: vm.id)
        self.pms = sorted(pms, key=lambda pm: pm.id)
        self.net = net
        self.cfg = cfg
        self.vm_ids = np.array([vm.id for vm in self.vms], dtype=int)
        self.pm_ids = np.array([pm.id for pm in self.pms], dtype=int)
        self.vm_index = {v: i for i, v in enumerate(self.vm_ids.tolist())}
        self.pm_index = {p: j for j, p in enumerate(self.pm_ids.tolist())}
        self.demand = np.array([vm.demand.as_array() for vm in self.vms]).reshape(-1, 3)
        self.capacity = np.array([pm.capacity.as_array() for pm in self.pms]).reshape(-1, 3)
        self.home = np.array([self.pm_index[vm.host] for vm in self.vms], dtype=int)
        self.initially_active = np.zeros(len(self.pms), dtype=bool)
        self.initially_active[self.home] = True

        self.raw = np.zeros((len(self.vms), len(self.pms), 4))
        for i, vm in enumerate(self.vms):
            for j, p in enumerate(self.pm_ids.tolist()):
                if p != vm.host:
                    self.raw[i, j] = estimate_migration(vm, p, net, cfg)
        if caps is None:
            caps = self._caps_from_raw()
        self.caps = caps
        ratios = np.clip(self.raw / np.asarray(caps), 0.0, 1.0)
        self.mo = ratios @ np.asarray(cfg.alphas)
        self.mo[np.arange(len(self.vms)), self.home] = 0.0

    @classmethod
    def from_cluster(cls, dc, cluster: Cluster, cfg: MigrationConfig = MigrationConfig()) -> ClusterProblem:
        vms = [dc.vms[v] for v in cluster.vm_ids]
        pms = [dc.pms[p] for p in cluster.pm_ids]
        return cls(vms, pms, dc.network, cfg)

    def _caps_from_raw(self) -> NormalizationCaps:
        if self.raw.size == 0:
            return NormalizationCaps(1.0, 1.0, 1.0, 1.0)
        best = self.raw.reshape(-1, 4).max(axis=0)
        best[best == 0] = 1.0
        return NormalizationCaps(*map(float, best))

    def reference_caps(self) -> NormalizationCaps:
        """Caps via the pair-by-pair estimator, independent of the cached array."""
        return compute_caps(self.vms, self.pm_ids.tolist(), self.net, self.cfg)

    @property
    def n_vms(self) -> int:
        return len(self.vms)

    @property
    def n_pms(self) -> int:
        return len(self.pms)

    def identity(self) -> np.ndarray:
        return self.home.copy()

    def to_map(self, assign) -> MigrationMap:
        return MigrationMap(zip(self.vm_ids.tolist(), self.pm_ids[np.asarray(assign, dtype=int)].tolist()))

    def from_map(self, mm: MigrationMap) -> np.ndarray:
        return np.array([self.pm_index[mm[v]] for v in self.vm_ids.tolist()], dtype=int)

    def loads(self, assign) -> np.ndarray:
        load = np.zeros_like(self.capacity)
        np.add.at(load, np.asarray(assign, dtype=int), self.demand)
        return load

    def is_feasible(self, assign) -> bool:
        return bool(np.all(self.loads(assign) <= self.capacity + CAPACITY_TOL))

    def validate(self, mm: MigrationMap):
        return validate_map(mm, self.pms, {vm.id: vm for vm in self.vms})

    def n_released(self, assign) -> int:
        used = np.zeros(self.n_pms, dtype=bool)
        used[np.asarray(assign, dtype=int)] = True
        return int(np.count_nonzero(self.initially_active & ~used))

    def n_migrations(self, assign) -> int:
        return int(np.count_nonzero(np.asarray(assign) != self.home))

    def overhead(self, assign) -> float:
        return float(self.mo[np.arange(self.n_vms), np.asarray(assign, dtype=int)].sum())

    def score(self, assign, params: ObjectiveParams = ObjectiveParams()) -> float:
        """Objective value without validation; for use inside the search loops."""
        return objective_value(self.n_released(assign), self.overhead(assign), params)

    def report(self, assign) -> OverheadReport:
        assign = np.asarray(assign, dtype=int)
        moved = assign != self.home
        raw = self.raw[np.arange(self.n_vms), assign][moved]
        md, mt, dt, nc = raw.sum(axis=0) if len(raw) else np.zeros(4)
        cfg = self.cfg
        return OverheadReport(
            md=float(md), mt=float(mt), dt=float(dt), nc=float(nc),
            mo=self.overhead(assign),
            mec=float((cfg.gamma1 * raw[:, 0] + cfg.gamma2).sum()) if len(raw) else 0.0,
            msv=float((cfg.sigma * self.demand[moved, 0] * raw[:, 1]).sum()) if len(raw) else 0.0,
            n_migrations=int(moved.sum()),
        )


def objective(mm: MigrationMap, problem: ClusterProblem, params: ObjectiveParams = ObjectiveParams()) -> float:
    violations = problem.validate(mm)
    if violations:
        raise ValidationError(f"migration map violates {len(violations)} constraint(s)", violations)
    return problem.score(problem.from_map(mm), params)


@dataclass
class ClusterResult:
    cluster_id: int
    assign: np.ndarray
    f: float
    overhead: OverheadReport
    n_released: int
    n_active: int
    n_vms: int
    power_w: float
    wastage: float
    seconds: float = 0.0
    trace: list | None = None
    migration_map: MigrationMap | None = None


def evaluate(problem: ClusterProblem, assign, params: ObjectiveParams = ObjectiveParams(),
             cluster_id: int = 0, seconds: float = 0.0, trace=None) -> ClusterResult:
    """Gain and cost metrics of ``assign`` on the cluster."""
    assign = np.asarray(assign, dtype=int)
    mm = problem.to_map(assign)
    violations = problem.validate(mm)
    if violations:
        raise ValidationError(f"cluster {cluster_id}: returned map is infeasible", violations)
    fractions = problem.loads(assign) / problem.capacity
    active = np.zeros(problem.n_pms, dtype=bool)
    active[assign] = True
    return ClusterResult(
        cluster_id=cluster_id,
        assign=assign,
        f=problem.score(assign, params),
        overhead=problem.report(assign),
        n_released=problem.n_released(assign),
        n_active=int(active.sum()),
        n_vms=problem.n_vms,
        power_w=float(power_from_cpu_fraction(fractions[active, 0]).sum()),
        wastage=float(wastage_from_fractions(fractions[active]).sum()) if active.any() else 0.0,
        seconds=seconds,
        trace=trace,
        migration_map=mm,
    )
