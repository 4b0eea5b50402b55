import numpy as np
import pytest

from vmconsol.errors import ConfigError, NetworkModelError
from vmconsol.topology import (
    NetworkModel,
    TreeTopology,
    bandwidth_table,
    clamp_bandwidth,
    distance,
    form_clusters,
    hop_count,
)


def test_hop_counts_by_tier():
    topo = TreeTopology(128, 8)
    assert hop_count(3, 3, topo) == 0
    assert hop_count(0, 7, topo) == 1
    assert hop_count(0, 8, topo) == 3
    assert hop_count(0, 63, topo) == 3
    assert hop_count(0, 64, topo) == 5


def test_hop_count_unknown_pm():
    with pytest.raises(NetworkModelError):
        hop_count(0, 8, TreeTopology(8, 8))


def test_distance_scales_hops():
    table = np.ones((16, 16))
    net = NetworkModel(TreeTopology(16, 8, distance_factor=2.0), table)
    assert distance(0, 1, net) == 2.0
    assert distance(0, 9, net) == 6.0


def test_bandwidth_clamping():
    assert clamp_bandwidth(-3.0) == 0.01
    assert clamp_bandwidth(7.0) == 1.0
    assert clamp_bandwidth(0.4) == 0.4


def test_bandwidth_table_draw_order():
    table = bandwidth_table(np.random.default_rng(9), 4, 0.05, 0.2)
    draws = np.clip(np.random.default_rng(9).normal(0.05, 0.2, size=6), 0.01, 1.0)
    iu = np.triu_indices(4, k=1)
    assert np.array_equal(table[iu], draws)
    assert np.array_equal(table, table.T)
    assert np.all(np.diag(table) == 1.0)


def test_available_bandwidth_units():
    table = np.full((2, 2), 0.5)
    net = NetworkModel(TreeTopology(2, 8), table, link_capacity_mbps=1000.0)
    assert net.available_bandwidth(0, 1) == 62.5


def test_network_model_rejects_bad_tables():
    topo = TreeTopology(3, 8)
    with pytest.raises(NetworkModelError):
        NetworkModel(topo, np.ones((2, 2)))
    asym = np.ones((3, 3))
    asym[0, 1] = 0.5
    with pytest.raises(NetworkModelError):
        NetworkModel(topo, asym)


def test_form_clusters_by_access_switch():
    topo = TreeTopology(32, 8)
    clusters = form_clusters(topo, None, [(0, 3), (1, 9), (2, 31), (3, 8)])
    assert [c.pm_ids for c in clusters] == [list(range(i, i + 8)) for i in range(0, 32, 8)]
    assert [c.vm_ids for c in clusters] == [[0], [1, 3], [], [2]]


def test_form_clusters_multiple_of_ports():
    clusters = form_clusters(TreeTopology(64, 8), 48)
    assert [len(c.pm_ids) for c in clusters] == [48, 16]
    with pytest.raises(ConfigError):
        form_clusters(TreeTopology(64, 8), 12)
