import numpy as np
import pytest

from vmconsol.baselines import (
    MmdvmcParams,
    clamp_pheromone,
    ffdl1_assign,
    ffdl1_order,
    l1_norms,
    mmdvmc,
    mmdvmc_score,
)
from vmconsol.errors import ConfigError

from conftest import generated_problem, small_problem, vm


def test_ffdl1_order_by_l1_then_id():
    vms = [vm(0, 0.5, 1024.0, 100.0), vm(1, 2.5, 1024.0, 100.0), vm(2, 0.5, 1024.0, 100.0)]
    problem = small_problem(vms, 2)
    assert list(ffdl1_order(problem)) == [1, 0, 2]
    assert l1_norms(problem)[1] == pytest.approx(0.5 + 0.1 + 0.1)


def test_ffdl1_first_fit_hand_example():
    # cpu 3.0, 3.0, 2.0, 1.0 on 5 GHz PMs: 3 -> PM0, 3 -> PM1, 2 -> PM0, 1 -> PM1
    vms = [vm(0, 3.0, 10.0, host=0), vm(1, 3.0, 10.0, host=1), vm(2, 2.0, 10.0, host=2), vm(3, 1.0, 10.0, host=2)]
    problem = small_problem(vms, 3)
    assert list(ffdl1_assign(problem)) == [0, 1, 0, 1]
    assert problem.n_released(ffdl1_assign(problem)) == 1


def test_ffdl1_ignores_current_hosts():
    vms = [vm(0, 1.0, 10.0, host=1), vm(1, 1.0, 10.0, host=1)]
    problem = small_problem(vms, 2)
    assert list(ffdl1_assign(problem)) == [0, 0]
    assert problem.n_migrations(ffdl1_assign(problem)) == 2


def test_mmdvmc_score_and_clamp():
    vms = [vm(0, 1.0, 10.0, host=0), vm(1, 1.0, 10.0, host=1)]
    problem = small_problem(vms, 2)
    assert mmdvmc_score(problem, np.array([1, 1])) == 0.5
    assert mmdvmc_score(problem, np.array([0, 1])) == 0.0
    params = MmdvmcParams()
    assert list(clamp_pheromone(np.array([0.0, 0.5, 3.0]), params)) == [0.2, 0.5, 1.0]


def test_mmdvmc_params_validation():
    with pytest.raises(ConfigError):
        MmdvmcParams(tau_min=1.0, tau_max=0.5)
    with pytest.raises(ConfigError):
        MmdvmcParams(rho=1.0)


def test_mmdvmc_pheromone_stays_bounded_and_trace_monotone():
    problem = generated_problem(8, 16, seed=3)
    res = mmdvmc(problem, MmdvmcParams(), np.random.default_rng(0))
    assert len(res.trace) == 50
    assert all(b >= a for a, b in zip(res.trace, res.trace[1:]))
    assert all(0.2 <= lo <= hi <= 1.0 for lo, hi in res.tau_bounds)
    assert problem.validate(problem.to_map(res.assign)) == []
    assert res.score == pytest.approx(mmdvmc_score(problem, res.assign))


def test_mmdvmc_deterministic():
    problem = generated_problem(8, 16, seed=9)
    a = mmdvmc(problem, MmdvmcParams(), np.random.default_rng(4))
    b = mmdvmc(problem, MmdvmcParams(), np.random.default_rng(4))
    assert np.array_equal(a.assign, b.assign)


def test_ffdl1_maps_valid_on_generated_clusters():
    for seed in range(10):
        problem = generated_problem(8, 16, seed)
        assert problem.validate(problem.to_map(ffdl1_assign(problem))) == []
