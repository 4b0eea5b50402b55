import numpy as np
import pytest

from vmconsol.errors import ConfigError
from vmconsol.harness import (
    CSV_COLUMNS,
    ExperimentSpec,
    TIMING_COLUMNS,
    aggregate_metrics,
    build_settings,
    build_spec,
    derive_seed,
    parse_config_text,
    rows_to_csv,
    run_experiment,
)
from vmconsol.overhead import OverheadReport
from vmconsol.problem import ClusterResult


def result(released=0, md=0.0, seconds=0.0, n_vms=2, n_active=1, power=200.0, **over):
    return ClusterResult(
        cluster_id=0, assign=np.zeros(n_vms, dtype=int), f=0.0,
        overhead=OverheadReport(md=md, **over), n_released=released, n_active=n_active,
        n_vms=n_vms, power_w=power, wastage=0.1, seconds=seconds,
    )


def test_aggregate_sums_released():
    m = aggregate_metrics([result(released=3), result(released=4)])
    assert m["n_released_pm"] == 7


def test_aggregate_unit_conversions():
    # 1 TB = 1024 * 1024 MB
    m = aggregate_metrics([result(md=512 * 1024.0, mt=7200.0, dt=36.0, mec=5000.0)])
    assert m["md_tb"] == 0.5
    assert aggregate_metrics([result(md=1024.0 ** 2)])["md_tb"] == 1.0
    assert m["mt_hours"] == 2.0
    assert m["dt_hours"] == 0.01
    assert m["mec_kj"] == 5.0
    assert m["power_kw"] == 0.2


def test_aggregate_packing_efficiency_is_datacenter_wide():
    m = aggregate_metrics([result(n_vms=6, n_active=2), result(n_vms=3, n_active=1)])
    assert m["packing_efficiency"] == 3.0


def test_single_cluster_row_equals_cluster():
    r = result(released=2, md=1024.0 ** 2, mo=0.4, nc=7.0, seconds=0.3)
    m = aggregate_metrics([r])
    assert (m["n_released_pm"], m["md_tb"], m["mo"], m["nc"], m["decision_time_sec"]) == (2, 1.0, 0.4, 7.0, 0.3)


def test_timing_modes():
    rs = [result(seconds=0.2), result(seconds=0.5)]
    assert aggregate_metrics(rs, "decentralized")["decision_time_sec"] == 0.5
    assert aggregate_metrics(rs, "centralized")["decision_time_sec"] == pytest.approx(0.7)


def test_derive_seed_is_stable_and_distinct():
    a = derive_seed(0, "np", 64, 0)
    assert a == derive_seed(0, "np", 64.0, 0)
    assert a != derive_seed(0, "np", 64, 1)
    assert a != derive_seed(0, "mean_rsc", 64, 0)
    assert derive_seed(5, "np", 64, 0) == a ^ 5


def test_config_parsing_and_aliases():
    cfg = parse_config_text("""
# comment
n_cycle_max = 40
lambda = 0.1
mm_rho = 0.05
mean_rsc = 0.15   # inline comment
values = 0.05, 0.10
strict_alg2 = no
seed = 0x10
""")
    settings = build_settings(cfg)
    assert settings.acs.n_reset_max == 40
    assert settings.acs.lam == 0.1
    assert settings.acs.strict_alg2 is False
    assert settings.mmdvmc.rho == 0.05
    assert settings.gen.mean_rsc == 0.15
    assert settings.gen.seed == 16
    assert cfg["values"] == (0.05, 0.10)


def test_config_rejects_unknown_and_bad_values():
    with pytest.raises(ConfigError):
        parse_config_text("n_antz = 3")
    with pytest.raises(ConfigError):
        parse_config_text("n_ants = three")
    with pytest.raises(ConfigError):
        build_settings(parse_config_text("delta = 1.5"))


def test_capacity_override():
    s = build_settings(parse_config_text("pm_cpu = 8.0"))
    assert tuple(s.gen.pm_capacity) == (8.0, 10240.0, 1000.0)


def test_build_spec():
    spec = build_spec(parse_config_text("sweep = np\nvalues = 8, 16\nrepetitions = 2\nalgorithms = ffdl1"))
    assert spec.values == (8, 16) and spec.algorithms == ("ffdl1",)
    with pytest.raises(ConfigError):
        build_spec(parse_config_text("sweep = mean_rsc\nvalues = 0.9"))
    with pytest.raises(ConfigError):
        build_spec(parse_config_text("algorithms = greedy"))


def test_one_row_per_value_and_algorithm():
    rows = run_experiment(ExperimentSpec(sweep="np", values=(64,), repetitions=1, algorithms=("ffdl1",)))
    assert len(rows) == 1
    assert rows[0]["n_pm"] == 64 and rows[0]["n_vm"] == 128 and rows[0]["failures"] == 0


def test_identity_optimal_instance_costs_nothing():
    # a single PM cluster cannot release anything, so every consolidator keeps the identity map
    spec = ExperimentSpec(sweep="np", values=(1,), repetitions=1)
    for row in run_experiment(spec):
        for metric in ("md_tb", "mt_hours", "dt_hours", "nc", "mo", "mec_kj", "msv"):
            assert row[metric] == 0.0


def test_csv_columns_and_std():
    rows = run_experiment(ExperimentSpec(sweep="mean_rsc", values=(0.3,), repetitions=2,
                                         algorithms=("ffdl1", "amdvmc"), n_pm=16))
    text = rows_to_csv(rows)
    header = text.splitlines()[0].split(",")
    assert tuple(header) == CSV_COLUMNS
    assert set(TIMING_COLUMNS) <= set(header)
    assert "md_tb_std" in header and len(text.splitlines()) == 3
