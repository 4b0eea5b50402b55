"""Migration-overhead-aware consolidation with an Ant Colony System.

Each ant starts from empty replicas of the cluster's PMs and assigns every
VM, choosing (VM, PM) pairs with the pseudo-random proportional rule over
pheromone times heuristic desirability. The heuristic rewards utilization
gain on the target PM and penalizes the normalized migration overhead of
moving the VM there, so staying on the current host is cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .baselines import ffdl1_assign
from .errors import ConfigError, InfeasibleError, ValidationError
from .model import CAPACITY_TOL, ObjectiveParams, gain_from_fractions
from .problem import ClusterProblem

TAU_FLOOR = 1e-6


@dataclass(frozen=True)
class AcsParams:
    n_ants: int = 5
    n_cycle_term: int = 5
    n_reset_max: int = 100
    beta: float = 1.0
    delta: float = 0.3
    q0: float = 0.8
    omega: float = 0.5
    lam: float = 0.05
    phi: float = 1.0
    epsilon_mo: float = 1e-6
    # True: the reset counter grows on every GBMM improvement.
    # False: it counts cycles, making n_reset_max an absolute cap.
    strict_alg2: bool = True

    def __post_init__(self):
        if self.n_ants < 1 or self.n_cycle_term < 1 or self.n_reset_max < 1:
            raise ConfigError("n_ants, n_cycle_term and n_reset_max must be >= 1")
        if not 0 < self.delta < 1:
            raise ConfigError("delta must lie in (0, 1)")
        for name in ("q0", "omega", "lam"):
            if not 0 <= getattr(self, name) <= 1:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.beta < 0:
            raise ConfigError("beta must be >= 0")

    @property
    def objective(self) -> ObjectiveParams:
        return ObjectiveParams(self.phi, self.epsilon_mo)


def init_pheromone(problem: ClusterProblem, params: AcsParams = AcsParams()) -> np.ndarray:
    """Uniform matrix at the quality of the first-fit-decreasing map."""
    tau0 = problem.score(ffdl1_assign(problem), params.objective)
    return np.full((problem.n_vms, problem.n_pms), max(tau0, TAU_FLOOR))


def heuristic_values(problem: ClusterProblem, rows, col: int, load, params: AcsParams):
    """Feasibility and desirability of placing VMs ``rows`` on PM ``col`` given ``load``."""
    post = load[col] + problem.demand[rows]
    cap = problem.capacity[col]
    feasible = np.all(post <= cap + CAPACITY_TOL, axis=-1)
    gain = gain_from_fractions(post / cap, params.omega)
    eta = params.lam * gain + (1.0 - params.lam) * (1.0 - problem.mo[rows, col])
    return feasible, eta


def heuristic(problem: ClusterProblem, v: int, p: int, load, params: AcsParams = AcsParams()) -> float:
    """Desirability of moving VM index ``v`` to PM index ``p`` on an ant's replica."""
    feasible, eta = heuristic_values(problem, np.array([v]), p, load, params)
    if not feasible[0]:
        raise ValidationError(f"VM index {v} does not fit on PM index {p}")
    return float(eta[0])


def _empty_heuristics(problem: ClusterProblem, params: AcsParams):
    post = problem.demand[:, None, :] / problem.capacity[None, :, :]
    feasible = np.all(problem.demand[:, None, :] <= problem.capacity[None, :, :] + CAPACITY_TOL, axis=-1)
    gain = gain_from_fractions(post, params.omega)
    eta = params.lam * gain + (1.0 - params.lam) * (1.0 - problem.mo)
    return feasible, eta


class AntState:
    """One ant's partial migration map over empty PM replicas."""

    def __init__(self, problem: ClusterProblem, tau: np.ndarray, params: AcsParams,
                 rng: np.random.Generator, empty=None):
        self.problem = problem
        self.params = params
        self.rng = rng
        self.tau = tau
        feasible, eta = empty if empty is not None else _empty_heuristics(problem, params)
        self.feasible = feasible.copy()
        self.eta = eta.copy()
        self.load = np.zeros_like(problem.capacity)
        self.assign = np.full(problem.n_vms, -1, dtype=int)
        self.unplaced = np.ones(problem.n_vms, dtype=bool)
        self.vm_list = [int(v) for v in rng.permutation(problem.n_vms)]
        self.weights = np.where(self.feasible, tau * self.eta ** params.beta, 0.0)

    @property
    def done(self) -> bool:
        return not self.vm_list

    def place(self, v: int, p: int) -> None:
        self.assign[v] = p
        self.unplaced[v] = False
        self.vm_list.remove(v)
        self.load[p] += self.problem.demand[v]
        self.feasible[v] = False
        self.weights[v] = 0.0
        rows = np.flatnonzero(self.unplaced)
        if len(rows):
            feasible, eta = heuristic_values(self.problem, rows, p, self.load, self.params)
            self.feasible[rows, p] = feasible
            self.eta[rows, p] = eta
            self.weights[rows, p] = np.where(feasible, self.tau[rows, p] * eta ** self.params.beta, 0.0)


def feasible_moves(state: AntState) -> list[tuple[int, int]]:
    """(VM index, PM index) pairs that fit, in increasing lexicographic order."""
    return [tuple(x) for x in np.argwhere(state.feasible & state.unplaced[:, None]).tolist()]


def choose_move(state: AntState, rng: np.random.Generator | None = None,
                params: AcsParams | None = None) -> tuple[int, int]:
    rng = rng if rng is not None else state.rng
    params = params if params is not None else state.params
    mask = state.feasible & state.unplaced[:, None]
    if not mask.any():
        raise InfeasibleError(f"no feasible move for {len(state.vm_list)} unplaced VM(s)")
    n_pms = mask.shape[1]
    weights = state.weights.ravel()
    q = rng.random()
    cumulative = np.cumsum(weights)
    total = cumulative[-1]
    if total <= 0:
        choices = np.flatnonzero(mask.ravel())
        idx = int(choices[rng.integers(len(choices))])
    elif q <= params.q0:
        # first maximum = lowest (VM id, PM id) on ties
        idx = int(np.argmax(weights))
    else:
        idx = int(np.searchsorted(cumulative, rng.random() * total, side="right"))
    return divmod(idx, n_pms)


def build_map(problem: ClusterProblem, tau: np.ndarray, params: AcsParams,
              rng: np.random.Generator, empty=None) -> np.ndarray:
    state = AntState(problem, tau, params, rng, empty)
    while not state.done:
        v, p = choose_move(state)
        state.place(v, p)
    return state.assign


def pheromone_update(tau: np.ndarray, gbmm, f_gbmm: float, delta: float) -> np.ndarray:
    """Evaporate everywhere, deposit ``f_gbmm`` on the global-best pairs."""
    out = (1.0 - delta) * tau
    gbmm = np.asarray(gbmm, dtype=int)
    out[np.arange(len(gbmm)), gbmm] += delta * f_gbmm
    return out


@dataclass
class AcsResult:
    assign: np.ndarray
    f: float
    trace: list = field(default_factory=list)
    cycles: int = 0
    resets: int = 0


def consolidate(problem: ClusterProblem, params: AcsParams = AcsParams(),
                rng: np.random.Generator | None = None) -> AcsResult:
    """Run the colony on one cluster and return the global-best map.

    Stops after ``n_cycle_term`` cycles without improvement or once the reset
    counter reaches ``n_reset_max``. ``trace`` holds the global-best
    objective after each cycle.
    """
    rng = rng if rng is not None else np.random.default_rng()
    obj = params.objective
    best = problem.identity()
    best_f = 0.0
    if problem.n_vms == 0:
        return AcsResult(best, best_f)
    tau = init_pheromone(problem, params)
    empty = _empty_heuristics(problem, params)
    trace = []
    n_cycle = n_reset = cycles = 0
    while True:
        n_cycle += 1
        cycles += 1
        seeds = rng.integers(0, 2**63, size=params.n_ants)
        maps = [build_map(problem, tau, params, np.random.default_rng(int(s)), empty) for s in seeds]
        for assign in maps:
            f = problem.score(assign, obj)
            if f > best_f:
                best, best_f = assign, f
                n_cycle = 0
                if params.strict_alg2:
                    n_reset += 1
        if not params.strict_alg2:
            n_reset += 1
        trace.append(best_f)
        tau = pheromone_update(tau, best, best_f, params.delta)
        if n_cycle >= params.n_cycle_term or n_reset >= params.n_reset_max:
            break
    return AcsResult(best, best_f, trace, cycles, n_reset)
