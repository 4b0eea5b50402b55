"""Migration-overhead-aware dynamic VM consolidation simulator."""

from .acs import AcsParams, consolidate
from .baselines import MmdvmcParams, ffdl1_assign, mmdvmc
from .model import MigrationMap, ObjectiveParams, PhysicalMachine, ResourceVector, VirtualMachine
from .overhead import MigrationConfig, estimate_migration
from .problem import ClusterProblem, evaluate
from .topology import NetworkModel, TreeTopology, form_clusters
from .workload import GenConfig, generate_datacenter, vm_count

__version__ = "0.1.0"
