import numpy as np
import pytest

from vmconsol.errors import ConfigError, InfeasibleError
from vmconsol.model import validate_map, MigrationMap
from vmconsol.workload import (
    DEMAND_FLOOR,
    GenConfig,
    attempt_rng,
    generate_datacenter,
    generate_vms,
    initial_placement,
    vm_count,
)

from conftest import pm, vm


@pytest.mark.parametrize("value,expected", [(0.05, 128), (0.10, 115), (0.15, 102), (0.20, 90),
                                            (0.25, 77), (0.30, 64)])
def test_vm_count_for_demand_sweeps_at_64(value, expected):
    assert vm_count(64, "mean_rsc", value) == expected


def test_vm_count_rounds_to_nearest():
    assert vm_count(1024, "sd_rsc", 0.20) == 1434
    assert vm_count(64, "np") == 128


def test_vm_count_rejects_out_of_range():
    with pytest.raises(ConfigError):
        vm_count(64, "mean_rsc", 0.5)
    with pytest.raises(ConfigError):
        vm_count(64, "bogus", 0.1)


def test_generated_demands_obey_bounds():
    cfg = GenConfig(n_pm=8, seed=1)
    vms = generate_vms(cfg, 500, np.random.default_rng(4))
    cap = cfg.pm_capacity.as_array()
    demand = np.array([v.demand.as_array() for v in vms]) / cap
    assert demand.min() >= DEMAND_FLOOR and demand.max() <= 1.0
    dirty = np.array([v.dirty_rate for v in vms])
    mem = np.array([v.demand.mem for v in vms])
    assert np.all(dirty >= 0) and np.all(dirty <= cfg.pr * mem)


def test_initial_placement_round_robin_skips_full():
    vms = [vm(0, 4.0, 10.0), vm(1, 4.0, 10.0), vm(2, 0.5, 10.0)]
    pms = [pm(0), pm(1)]

    class Fixed:
        def permutation(self, n):
            return np.arange(n)

    initial_placement(pms, vms, Fixed())
    # VM 0 -> PM 0, VM 1 -> PM 1, VM 2 back to PM 0 (room left there)
    assert [v.host for v in vms] == [0, 1, 0]

    tight = [vm(0, 4.0, 10.0), vm(1, 4.0, 10.0), vm(2, 4.0, 10.0)]
    with pytest.raises(InfeasibleError):
        initial_placement([pm(0), pm(1)], tight, Fixed())


def test_datacenter_is_feasible_and_deterministic():
    cfg = GenConfig(n_pm=16, seed=42)
    a = generate_datacenter(cfg, 32)
    b = generate_datacenter(cfg, 32)
    assert [(v.demand, v.dirty_rate, v.host) for v in a.vms.values()] == \
           [(v.demand, v.dirty_rate, v.host) for v in b.vms.values()]
    assert np.array_equal(a.network.bandwidth, b.network.bandwidth)
    identity = MigrationMap({v.id: v.host for v in a.vms.values()})
    assert validate_map(identity, a.pms, a.vms) == []
    assert sum(len(p.hosted) for p in a.pms) == 32


def test_datacenter_draw_order():
    cfg = GenConfig(n_pm=4, seed=7)
    dc = generate_datacenter(cfg, 6)
    rng = attempt_rng(7, 0)
    vms = generate_vms(cfg, 6, rng)
    rng.permutation(6)
    table = np.clip(rng.normal(cfg.mean_bw, cfg.sd_bw, size=6), 0.01, 1.0)
    assert [v.demand for v in vms] == [dc.vms[i].demand for i in range(6)]
    assert np.array_equal(dc.network.bandwidth[np.triu_indices(4, 1)], table)


def test_different_seeds_differ():
    a = generate_datacenter(GenConfig(n_pm=8, seed=1), 16)
    b = generate_datacenter(GenConfig(n_pm=8, seed=2), 16)
    assert a.vms[0].demand != b.vms[0].demand


def test_gen_config_validation():
    with pytest.raises(ConfigError):
        GenConfig(n_pm=0)
    with pytest.raises(ConfigError):
        GenConfig(pr=-0.1)
