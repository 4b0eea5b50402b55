import csv
import io

from vmconsol.cli import main


def test_generate_then_consolidate(tmp_path, capsys):
    snap = tmp_path / "dc.snap"
    assert main(["generate", "--out", str(snap), "--n-pm", "16", "--seed", "3"]) == 0
    assert snap.read_text().startswith("# vmconsol")
    map_out = tmp_path / "map.csv"
    assert main(["consolidate", "--snapshot", str(snap), "--algo", "amdvmc", "--map-out", str(map_out)]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(rows) == 1 and rows[0]["algorithm"] == "amdvmc" and rows[0]["n_vm"] == "32"
    lines = map_out.read_text().splitlines()
    assert lines[0] == "vm_id,source_pm,target_pm" and len(lines) == 33


def test_experiment_and_plot(tmp_path, capsys):
    spec = tmp_path / "spec.cfg"
    spec.write_text("sweep = np\nvalues = 8\nrepetitions = 1\nalgorithms = ffdl1, amdvmc\n")
    out = tmp_path / "res.csv"
    assert main(["experiment", "--spec", str(spec), "--out", str(out), "--plot-dir", str(tmp_path / "fig")]) == 0
    assert (tmp_path / "fig" / "np_gain.svg").exists()
    assert main(["plot", "--csv", str(out), "--out-dir", str(tmp_path / "fig2"), "--format", "pdf"]) == 0
    assert "np_mo.pdf" in capsys.readouterr().out


def test_exit_codes(tmp_path, capsys):
    bad_cfg = tmp_path / "bad.cfg"
    bad_cfg.write_text("no_such_key = 1\n")
    assert main(["generate", "--out", str(tmp_path / "x"), "--config", str(bad_cfg)]) == 2
    snap = tmp_path / "broken.snap"
    snap.write_text("# vmconsol data-center snapshot\n[meta]\nschema_version = 1\n")
    assert main(["consolidate", "--snapshot", str(snap)]) == 3
    assert main(["consolidate", "--snapshot", str(tmp_path / "missing.snap")]) == 4
    assert "error:" in capsys.readouterr().err
