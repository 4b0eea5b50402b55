"""Domain types, resource arithmetic, the consolidation objective and gain metrics.

Resources are always ordered (cpu, mem, net) with units GHz, MB and Mbps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .errors import ConfigError, ModelIntegrityError, ValidationError

RESOURCES = ("cpu", "mem", "net")

E_IDLE = 162.0
E_FULL = 215.0

WASTAGE_EPSILON = 1e-4
RIV_FLOOR = 1e-4
# -log10(RIV_FLOOR); maps the balance term onto [0, 1]
LOG_BALANCE_SCALE = 4.0

# absolute slack on capacity comparisons so summed float demands that
# exactly reach capacity are not rejected
CAPACITY_TOL = 1e-9


@dataclass(frozen=True)
class ResourceVector:
    cpu: float
    mem: float
    net: float

    def __post_init__(self):
        for name in RESOURCES:
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"resource {name} must be finite and >= 0, got {value!r}")

    @classmethod
    def zero(cls) -> ResourceVector:
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def from_array(cls, values) -> ResourceVector:
        cpu, mem, net = (float(v) for v in values)
        return cls(cpu, mem, net)

    def as_array(self) -> np.ndarray:
        return np.array([self.cpu, self.mem, self.net], dtype=float)

    def __add__(self, other: ResourceVector) -> ResourceVector:
        return ResourceVector(self.cpu + other.cpu, self.mem + other.mem, self.net + other.net)

    def __iter__(self):
        return iter((self.cpu, self.mem, self.net))


DEFAULT_PM_CAPACITY = ResourceVector(5.0, 10240.0, 1000.0)


@dataclass
class VirtualMachine:
    id: int
    demand: ResourceVector
    dirty_rate: float
    host: int

    def __post_init__(self):
        if self.demand.mem <= 0:
            raise ValueError(f"VM {self.id}: memory demand must be > 0")
        if self.dirty_rate < 0:
            raise ValueError(f"VM {self.id}: dirty rate must be >= 0")


@dataclass
class PhysicalMachine:
    id: int
    capacity: ResourceVector = DEFAULT_PM_CAPACITY
    hosted: set = field(default_factory=set)

    @property
    def active(self) -> bool:
        return bool(self.hosted)


@dataclass(frozen=True)
class ObjectiveParams:
    phi: float = 1.0
    epsilon_mo: float = 1e-6

    def __post_init__(self):
        if self.phi <= 0:
            raise ConfigError("phi must be > 0")
        if self.epsilon_mo <= 0:
            raise ConfigError("epsilon_mo must be > 0")


class MigrationMap:
    """Total assignment of a cluster's VMs to target PMs.

    Entries whose target equals the VM's current host are non-moves.
    """

    def __init__(self, entries: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        self.entries: dict[int, int] = dict(entries)

    @classmethod
    def identity(cls, vms: Iterable[VirtualMachine]) -> MigrationMap:
        return cls((vm.id, vm.host) for vm in vms)

    def __getitem__(self, vm_id: int) -> int:
        return self.entries[vm_id]

    def __contains__(self, pair) -> bool:
        vm_id, pm_id = pair
        return self.entries.get(vm_id) == pm_id

    def __iter__(self):
        return iter(sorted(self.entries.items()))

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        return isinstance(other, MigrationMap) and self.entries == other.entries

    def __repr__(self):
        return f"MigrationMap({dict(sorted(self.entries.items()))})"

    def moves(self, vms: Mapping[int, VirtualMachine]) -> list[tuple[int, int]]:
        """(vm id, target) pairs that actually migrate."""
        return [(v, p) for v, p in self if vms[v].host != p]


def utilization(pm: PhysicalMachine, vms: Mapping[int, VirtualMachine]) -> ResourceVector:
    total = np.zeros(3)
    for vm_id in pm.hosted:
        try:
            total += vms[vm_id].demand.as_array()
        except KeyError:
            raise ModelIntegrityError(f"PM {pm.id} hosts unknown VM {vm_id}") from None
    return ResourceVector.from_array(total)


def normalized_utilization(pm: PhysicalMachine, vms: Mapping[int, VirtualMachine]) -> np.ndarray:
    capacity = pm.capacity.as_array()
    if np.any(capacity <= 0):
        raise ConfigError(f"PM {pm.id} has a zero capacity component")
    return utilization(pm, vms).as_array() / capacity


def power_from_cpu_fraction(cpu_fraction):
    return E_IDLE + (E_FULL - E_IDLE) * np.asarray(cpu_fraction, dtype=float)


def power_consumption(pm: PhysicalMachine, vms: Mapping[int, VirtualMachine]) -> float:
    """Watts drawn by ``pm``; released (empty) PMs draw nothing."""
    if not pm.active:
        return 0.0
    return float(power_from_cpu_fraction(normalized_utilization(pm, vms)[0]))


def wastage_from_fractions(fractions) -> np.ndarray:
    """Wastage for one or many normalized utilization vectors (last axis = resources)."""
    fractions = np.asarray(fractions, dtype=float)
    remaining = 1.0 - fractions
    return (remaining.std(axis=-1) + WASTAGE_EPSILON) / fractions.sum(axis=-1)


def resource_wastage(pm: PhysicalMachine, vms: Mapping[int, VirtualMachine]) -> float:
    if not pm.active:
        return 0.0
    return float(wastage_from_fractions(normalized_utilization(pm, vms)))


def packing_efficiency(n_vms: int, n_active_pms: int) -> float:
    if n_vms == 0:
        return 0.0
    if n_active_pms <= 0:
        raise ModelIntegrityError(f"{n_vms} VMs but no active PM")
    return n_vms / n_active_pms


def gain_from_fractions(fractions, omega: float) -> np.ndarray:
    """Utilization gain for post-placement normalized utilizations.

    Blends a log-scaled balance term (how close the resources are to each
    other) with the mean utilization, weighted by ``omega``.
    """
    fractions = np.asarray(fractions, dtype=float)
    mean = fractions.mean(axis=-1)
    imbalance = np.sqrt(((fractions - mean[..., None]) ** 2).sum(axis=-1))
    balance = -np.log10(np.maximum(imbalance, RIV_FLOOR)) / LOG_BALANCE_SCALE
    return np.clip(omega * balance + (1.0 - omega) * mean, 0.0, 1.0)


def utilization_gain(pm: PhysicalMachine, vms: Mapping[int, VirtualMachine],
                     candidate: VirtualMachine, omega: float = 0.5) -> float:
    capacity = pm.capacity.as_array()
    post = utilization(pm, vms).as_array() + candidate.demand.as_array()
    if np.any(post > capacity + CAPACITY_TOL):
        raise ValidationError(f"VM {candidate.id} does not fit on PM {pm.id}")
    return float(gain_from_fractions(post / capacity, omega))


def objective_value(n_released: int, mo: float, params: ObjectiveParams = ObjectiveParams()) -> float:
    if n_released == 0:
        return 0.0
    return n_released ** params.phi / max(mo, params.epsilon_mo)


class Violation(NamedTuple):
    kind: str  # "capacity", "missing", "unknown-vm" or "unknown-pm"
    pm: int | None
    resource: str | None
    vm: int | None


def validate_map(mm: MigrationMap, pms: Iterable[PhysicalMachine],
                 vms: Mapping[int, VirtualMachine]) -> list[Violation]:
    """Every capacity overrun and every missing or unknown assignment; empty if ok."""
    pms = {pm.id: pm for pm in pms}
    violations = []
    load = {pm_id: np.zeros(3) for pm_id in pms}
    for vm_id, pm_id in mm:
        if vm_id not in vms:
            violations.append(Violation("unknown-vm", pm_id, None, vm_id))
        elif pm_id not in pms:
            violations.append(Violation("unknown-pm", pm_id, None, vm_id))
        else:
            load[pm_id] += vms[vm_id].demand.as_array()
    for vm_id in sorted(vms):
        if vm_id not in mm.entries:
            violations.append(Violation("missing", None, None, vm_id))
    for pm_id in sorted(pms):
        over = load[pm_id] > pms[pm_id].capacity.as_array() + CAPACITY_TOL
        for r, name in enumerate(RESOURCES):
            if over[r]:
                violations.append(Violation("capacity", pm_id, name, None))
    return violations


def released_pms(mm: MigrationMap, vms: Mapping[int, VirtualMachine], pm_ids: Iterable[int]) -> list[int]:
    """PMs that host at least one VM before the map and none after."""
    before = {vms[v].host for v in mm.entries}
    after = set(mm.entries.values())
    return sorted(p for p in pm_ids if p in before and p not in after)


def apply_map(mm: MigrationMap, pms: Iterable[PhysicalMachine]) -> list[PhysicalMachine]:
    """New PM objects with hosted sets following ``mm``."""
    out = [PhysicalMachine(pm.id, pm.capacity, set()) for pm in pms]
    by_id = {pm.id: pm for pm in out}
    for vm_id, pm_id in mm:
        by_id[pm_id].hosted.add(vm_id)
    return out
