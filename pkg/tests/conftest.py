import numpy as np
import pytest

from vmconsol.model import DEFAULT_PM_CAPACITY, PhysicalMachine, ResourceVector, VirtualMachine
from vmconsol.problem import ClusterProblem
from vmconsol.topology import NetworkModel, TreeTopology
from vmconsol.workload import GenConfig, generate_datacenter

# acceptance lines collected by tests/test_acceptance.py, echoed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def vm(vm_id, cpu, mem, net=10.0, dirty=0.0, host=0):
    return VirtualMachine(vm_id, ResourceVector(cpu, mem, net), dirty, host)


def pm(pm_id, hosted=(), capacity=DEFAULT_PM_CAPACITY):
    return PhysicalMachine(pm_id, capacity, set(hosted))


def flat_network(n_pm, fraction=0.5, ports=8):
    table = np.full((n_pm, n_pm), fraction)
    np.fill_diagonal(table, 1.0)
    return NetworkModel(TreeTopology(n_pm, ports), table)


def small_problem(vms, n_pm, fraction=0.5):
    """Cluster problem on ``n_pm`` default PMs, hosting from each VM's ``host``."""
    pms = [pm(j, [v.id for v in vms if v.host == j]) for j in range(n_pm)]
    return ClusterProblem(vms, pms, flat_network(n_pm, fraction))


def generated_problem(n_pm, n_vm, seed):
    dc = generate_datacenter(GenConfig(n_pm=n_pm, seed=seed), n_vm)
    return ClusterProblem(list(dc.vms.values()), dc.pms, dc.network)


@pytest.fixture
def two_pm_problem():
    # one small VM on each PM; both fit together on either PM. The VMs differ in
    # size so one move is cheaper than the normalization cap.
    vms = [vm(0, 0.5, 512.0, dirty=5.0, host=0), vm(1, 1.0, 2048.0, dirty=40.0, host=1)]
    return small_problem(vms, 2)


@pytest.fixture
def dc64():
    return generate_datacenter(GenConfig(n_pm=64, seed=3), 128)
