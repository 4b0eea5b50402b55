"""Pre-copy live migration overhead estimation and its aggregates."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, NetworkModelError
from .model import VirtualMachine
from .topology import NetworkModel


@dataclass(frozen=True)
class MigrationConfig:
    dv_th: float = 200.0           # MB
    max_round: int = 20
    mu1: float = -0.0463
    mu2: float = -0.0001
    mu3: float = 0.3586
    t_res: float = 0.020           # s
    alpha1: float = 0.25
    alpha2: float = 0.25
    alpha3: float = 0.25
    alpha4: float = 0.25
    gamma1: float = 0.512          # J/MB
    gamma2: float = 20.165         # J
    sigma: float = 0.1

    def __post_init__(self):
        alphas = self.alphas
        if any(not 0 <= a <= 1 for a in alphas) or abs(sum(alphas) - 1.0) > 1e-9:
            raise ConfigError("alpha weights must lie in [0, 1] and sum to 1")
        if self.max_round < 1:
            raise ConfigError("max_round must be >= 1")
        if self.dv_th <= 0:
            raise ConfigError("dv_th must be > 0")
        if not 0 <= self.sigma <= 1:
            raise ConfigError("sigma must lie in [0, 1]")

    @property
    def alphas(self):
        return (self.alpha1, self.alpha2, self.alpha3, self.alpha4)


class RawFactors(NamedTuple):
    md: float  # MB
    mt: float  # s
    dt: float  # s
    nc: float  # MB x distance units


ZERO_FACTORS = RawFactors(0.0, 0.0, 0.0, 0.0)


class NormalizationCaps(NamedTuple):
    md: float
    mt: float
    dt: float
    nc: float


UNIT_CAPS = NormalizationCaps(1.0, 1.0, 1.0, 1.0)


@dataclass
class OverheadReport:
    md: float = 0.0
    mt: float = 0.0
    dt: float = 0.0
    nc: float = 0.0
    mo: float = 0.0
    mec: float = 0.0
    msv: float = 0.0
    n_migrations: int = 0

    def __add__(self, other):
        return OverheadReport(*(getattr(self, k) + getattr(other, k) for k in self.__dataclass_fields__))


def precopy_rounds(mem: float, dirty_rate: float, bandwidth: float, cfg: MigrationConfig):
    """Per-round transferred data and durations, stop-and-copy round last.

    Returns (data volumes, round times, downtime).
    """
    volumes = [mem]
    times = []
    for i in range(cfg.max_round + 1):
        dv = volumes[-1]
        t = dv / bandwidth
        times.append(t)
        kappa = cfg.mu1 * t + cfg.mu2 * dirty_rate + cfg.mu3
        wws = kappa * t * dirty_rate
        # kappa goes negative on long rounds; transferable data cannot
        nxt = max(t * dirty_rate - wws, 0.0)
        if nxt <= cfg.dv_th or nxt > dv or i == cfg.max_round:
            break
        volumes.append(nxt)
    last = times[-1] * dirty_rate
    volumes.append(last)
    times.append(last / bandwidth)
    return volumes, times, times[-1] + cfg.t_res


def estimate_migration(vm: VirtualMachine, dst: int, net: NetworkModel, cfg: MigrationConfig) -> RawFactors:
    src = vm.host
    if src == dst:
        return ZERO_FACTORS
    bandwidth = net.available_bandwidth(src, dst)
    if not bandwidth > 0:
        raise NetworkModelError(f"no bandwidth between PM {src} and PM {dst}")
    volumes, times, downtime = precopy_rounds(vm.demand.mem, vm.dirty_rate, bandwidth, cfg)
    md = sum(volumes)
    return RawFactors(md, sum(times), downtime, md * net.distance(src, dst))


def unified_overhead(factors, caps: NormalizationCaps, cfg: MigrationConfig) -> float:
    ratios = np.clip(np.asarray(factors, dtype=float) / np.asarray(caps, dtype=float), 0.0, 1.0)
    return float(np.dot(cfg.alphas, ratios))


def migration_energy(md: float, cfg: MigrationConfig) -> float:
    """Joules for one actual migration moving ``md`` MB."""
    return cfg.gamma1 * md + cfg.gamma2


def sla_violation(vm: VirtualMachine, mt: float, cfg: MigrationConfig) -> float:
    return cfg.sigma * vm.demand.cpu * mt


def compute_caps(vms, pm_ids, net: NetworkModel, cfg: MigrationConfig) -> NormalizationCaps:
    """Per-factor maxima over every cross-PM (VM, PM) pair; zero maxima become 1."""
    best = np.zeros(4)
    for vm in vms:
        for p in pm_ids:
            if p != vm.host:
                best = np.maximum(best, estimate_migration(vm, p, net, cfg))
    best[best == 0] = 1.0
    return NormalizationCaps(*map(float, best))


def migration_report(vm: VirtualMachine, dst: int, net: NetworkModel, cfg: MigrationConfig,
                     caps: NormalizationCaps) -> OverheadReport:
    if vm.host == dst:
        return OverheadReport()
    raw = estimate_migration(vm, dst, net, cfg)
    return OverheadReport(
        md=raw.md, mt=raw.mt, dt=raw.dt, nc=raw.nc,
        mo=unified_overhead(raw, caps, cfg),
        mec=migration_energy(raw.md, cfg),
        msv=sla_violation(vm, raw.mt, cfg),
        n_migrations=1,
    )


def aggregate(mm, vms, net: NetworkModel, cfg: MigrationConfig, caps: NormalizationCaps) -> OverheadReport:
    """Summed overhead of every migration in ``mm``; non-moves add nothing."""
    total = OverheadReport()
    for vm_id, dst in mm:
        total = total + migration_report(vms[vm_id], dst, net, cfg, caps)
    return total
