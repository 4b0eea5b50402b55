"""Comparison consolidators.

``ffdl1`` ignores where VMs currently run: it pools the cluster's VMs, sorts
them by decreasing L1 norm of normalized demand and first-fits them onto the
PMs in id order.

``mmdvmc`` is a reconstruction of a max-min ant system consolidator that
trades released PMs against the *number* of migrations. Its score, heuristic
and parameter values are our own choices, not a published algorithm's exact
internals.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InfeasibleError
from .model import CAPACITY_TOL


def l1_norms(problem) -> np.ndarray:
    return (problem.demand / problem.capacity[problem.home]).sum(axis=1)


def ffdl1_order(problem) -> np.ndarray:
    """VM indices in placement order: decreasing L1 norm, ties by VM id."""
    norms = l1_norms(problem)
    return np.lexsort((np.arange(problem.n_vms), -norms))


def ffdl1_assign(problem) -> np.ndarray:
    load = np.zeros_like(problem.capacity)
    assign = np.full(problem.n_vms, -1, dtype=int)
    for v in ffdl1_order(problem):
        fits = np.all(load + problem.demand[v] <= problem.capacity + CAPACITY_TOL, axis=1)
        if not fits.any():
            raise InfeasibleError(f"VM {problem.vm_ids[v]} fits on no PM")
        p = int(np.argmax(fits))
        assign[v] = p
        load[p] += problem.demand[v]
    return assign


@dataclass(frozen=True)
class MmdvmcParams:
    n_cycles: int = 50
    n_ants: int = 5
    tau_min: float = 0.2
    tau_max: float = 1.0
    rho: float = 0.02
    beta: float = 2.0
    home_bonus: float = 1.0

    def __post_init__(self):
        if not 0 < self.tau_min < self.tau_max:
            raise ConfigError("need 0 < tau_min < tau_max")
        if not 0 < self.rho < 1:
            raise ConfigError("rho must lie in (0, 1)")
        if self.n_cycles < 1 or self.n_ants < 1:
            raise ConfigError("n_cycles and n_ants must be >= 1")


def mmdvmc_score(problem, assign) -> float:
    """Released PMs per (1 + migrations)."""
    return problem.n_released(assign) / (1 + problem.n_migrations(assign))


def clamp_pheromone(tau: np.ndarray, params: MmdvmcParams) -> np.ndarray:
    return np.clip(tau, params.tau_min, params.tau_max)


def _mmas_ant(problem, tau, params: MmdvmcParams, rng) -> np.ndarray:
    load = np.zeros_like(problem.capacity)
    assign = np.full(problem.n_vms, -1, dtype=int)
    for v in rng.permutation(problem.n_vms):
        post = load + problem.demand[v]
        fits = np.all(post <= problem.capacity + CAPACITY_TOL, axis=1)
        if not fits.any():
            raise InfeasibleError(f"VM {problem.vm_ids[v]} fits on no PM")
        eta = (post / problem.capacity).mean(axis=1)
        eta[problem.home[v]] += params.home_bonus
        weights = np.where(fits, tau[v] * eta ** params.beta, 0.0)
        cumulative = np.cumsum(weights)
        p = int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side="right"))
        assign[v] = p
        load[p] += problem.demand[v]
    return assign


@dataclass
class MmdvmcResult:
    assign: np.ndarray
    score: float
    trace: list = field(default_factory=list)
    tau_bounds: list = field(default_factory=list)


def mmdvmc(problem, params: MmdvmcParams = MmdvmcParams(), rng: np.random.Generator | None = None) -> MmdvmcResult:
    rng = rng if rng is not None else np.random.default_rng()
    best = problem.identity()
    best_score = 0.0
    tau = np.full((problem.n_vms, problem.n_pms), params.tau_max)
    trace, bounds = [], []
    if problem.n_vms == 0:
        return MmdvmcResult(best, best_score)
    rows = np.arange(problem.n_vms)
    for _ in range(params.n_cycles):
        for _ in range(params.n_ants):
            assign = _mmas_ant(problem, tau, params, rng)
            score = mmdvmc_score(problem, assign)
            # fewer migrations wins a tie
            if score > best_score or (score == best_score and
                                      problem.n_migrations(assign) < problem.n_migrations(best)):
                best, best_score = assign, score
        tau = (1.0 - params.rho) * tau
        tau[rows, best] += best_score
        tau = clamp_pheromone(tau, params)
        trace.append(best_score)
        bounds.append((float(tau.min()), float(tau.max())))
    return MmdvmcResult(best, best_score, trace, bounds)
