"""Three-tier tree network: hop distances, migration bandwidth and PM clustering.

PMs are leaves attached to access switches in id order. With k-port
switches, k PMs share an access switch and k access switches share an
aggregation pod.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import ConfigError, NetworkModelError

BW_FLOOR = 1e-2
BW_CEIL = 1.0
MBPS_PER_MB_S = 8.0  # 1 Gbps link = 125 MB/s


@dataclass(frozen=True)
class TreeTopology:
    pm_count: int
    ports_per_switch: int = 8
    distance_factor: float = 2.0

    def __post_init__(self):
        if self.pm_count < 1:
            raise ConfigError("pm_count must be >= 1")
        if self.ports_per_switch < 2:
            raise ConfigError("ports_per_switch must be >= 2")

    def access_switch(self, pm: int) -> int:
        return pm // self.ports_per_switch

    def pod(self, pm: int) -> int:
        return pm // (self.ports_per_switch * self.ports_per_switch)

    def _check(self, *pms):
        for pm in pms:
            if not 0 <= pm < self.pm_count:
                raise NetworkModelError(f"unknown PM id {pm}")


def hop_count(p1: int, p2: int, topology: TreeTopology) -> int:
    """Switches on the path: 0 self, 1 same access, 3 same pod, 5 across core."""
    topology._check(p1, p2)
    if p1 == p2:
        return 0
    if topology.access_switch(p1) == topology.access_switch(p2):
        return 1
    if topology.pod(p1) == topology.pod(p2):
        return 3
    return 5


def clamp_bandwidth(fraction):
    return np.clip(fraction, BW_FLOOR, BW_CEIL)


def sample_bandwidth(rng: np.random.Generator, mean_bw: float, sd_bw: float) -> float:
    return float(clamp_bandwidth(rng.normal(mean_bw, sd_bw)))


def bandwidth_table(rng: np.random.Generator, pm_count: int, mean_bw: float, sd_bw: float) -> np.ndarray:
    """Symmetric link-fraction matrix; one draw per unordered pair in row-major order."""
    table = np.ones((pm_count, pm_count))
    iu = np.triu_indices(pm_count, k=1)
    draws = clamp_bandwidth(rng.normal(mean_bw, sd_bw, size=len(iu[0])))
    table[iu] = draws
    table[(iu[1], iu[0])] = draws
    return table


class NetworkModel:
    def __init__(self, topology: TreeTopology, bandwidth: np.ndarray, link_capacity_mbps: float = 1000.0):
        bandwidth = np.asarray(bandwidth, dtype=float)
        n = topology.pm_count
        if bandwidth.shape != (n, n):
            raise NetworkModelError(f"bandwidth table shape {bandwidth.shape} does not match {n} PMs")
        if not np.array_equal(bandwidth, bandwidth.T):
            raise NetworkModelError("bandwidth table is not symmetric")
        if link_capacity_mbps <= 0:
            raise ConfigError("link capacity must be > 0")
        self.topology = topology
        self.bandwidth = bandwidth
        self.link_capacity_mbps = float(link_capacity_mbps)

    def distance(self, p1: int, p2: int) -> float:
        return hop_count(p1, p2, self.topology) * self.topology.distance_factor

    def available_bandwidth(self, p1: int, p2: int) -> float:
        """Migration bandwidth between two PMs in MB/s."""
        self.topology._check(p1, p2)
        return self.bandwidth[p1, p2] * self.link_capacity_mbps / MBPS_PER_MB_S


def distance(p1: int, p2: int, net: NetworkModel) -> float:
    return net.distance(p1, p2)


@dataclass
class Cluster:
    id: int
    pm_ids: list
    vm_ids: list = field(default_factory=list)


def form_clusters(topology: TreeTopology, target_size: int | None = None,
                  vm_hosts: Iterable[tuple[int, int]] = ()) -> list[Cluster]:
    """Group contiguous access switches into clusters of ``target_size`` PMs.

    ``vm_hosts`` is an iterable of (vm id, host PM id) used to fill each
    cluster's VM list.
    """
    ports = topology.ports_per_switch
    if target_size is None:
        target_size = ports
    if target_size < 1:
        raise ConfigError("cluster size must be >= 1")
    if target_size != ports and target_size % ports:
        raise ConfigError(f"cluster size {target_size} must equal or be a multiple of {ports}")
    clusters = [
        Cluster(i, list(range(start, min(start + target_size, topology.pm_count))))
        for i, start in enumerate(range(0, topology.pm_count, target_size))
    ]
    for vm_id, host in sorted(vm_hosts):
        clusters[host // target_size].vm_ids.append(vm_id)
    return clusters
