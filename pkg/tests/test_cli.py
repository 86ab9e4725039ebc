import json
import subprocess
import sys

import pytest

from photomech import __version__
from photomech.cli import main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "photomech", "steady"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.startswith("# schema: branch,photons")


def test_steady_and_chi(capsys):
    code, out, _ = run(["steady"], capsys)
    lines = out.splitlines()
    assert code == 0 and len(lines) == 3
    assert lines[2].split(",")[-1] == "1"
    code, out, _ = run(["chi", "--omega", "0.5:1.5:11"], capsys)
    assert code == 0 and len(out.splitlines()) == 13


def test_cool_json_and_overrides(capsys):
    code, out, _ = run(["cool"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["n_eff"] == pytest.approx(0.685, abs=5e-3)
    code, out, _ = run(["cool", "--set", "T=0", "--set", "gamma1=0.5"], capsys)
    assert code == 0 and json.loads(out)["n_eff"] < rep["n_eff"]


def test_global_options_after_subcommand(capsys, tmp_path):
    out_file = tmp_path / "c.csv"
    code, _, _ = run(["covariance", "--method", "quadrature", "--out", str(out_file), "--seed", "5"], capsys)
    assert code == 0
    text = out_file.read_text().splitlines()
    assert text[0] == "# schema: row,q,p,x,y"
    meta = json.loads((tmp_path / "c.csv.meta.json").read_text())
    assert meta["command"] == "covariance" and meta["version"] == __version__ and meta["seed"] == 5
    assert meta["method"] == "quadrature" and "base" in meta


def test_sweep_csv_and_json(capsys):
    code, out, _ = run(["sweep", "--axis1", "Δ=0.5:1.5:3", "--observable", "n_eff,E_N"], capsys)
    assert code == 0
    assert out.splitlines()[1] == "delta,n_eff,E_N,stable"
    code, out, _ = run(["--format", "json", "sweep", "--axis1", "delta=0.5:1.5:3"], capsys)
    assert code == 0 and len(json.loads(out)["rows"]) == 3


def test_output_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for f in (a, b):
        assert main(["figure", "fig3b", "--out", str(f)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.csv.meta.json").read_bytes() == (tmp_path / "b.csv.meta.json").read_bytes()


def test_stability_map(capsys):
    code, out, _ = run(["stability-map", "--axis1", "power_mW=1:300:5:log", "--set", "gamma1=0.1"], capsys)
    assert code == 0
    assert {line.split(",")[-1] for line in out.splitlines()[2:]} >= {"1", "0"}


@pytest.mark.parametrize("argv", [
    ["cool", "--set", "nonsense=1"],
    ["cool", "--set", "gamma1"],
    ["cool", "--set", "gamma1=abc"],
    ["cool", "--set", "mass=-1"],
    ["cool", "--config", "/does/not/exist.json"],
    ["sweep", "--axis1", "delta=1:2"],
    ["sweep", "--axis1", "delta=1:2:3", "--observable", "heat"],
    ["figure", "fig3b", "--set", "gamma1=1"],
    ["cool", "--seed", "-3"],
])
def test_config_errors_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2 and "config error" in err


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["nosuchcommand"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["sweep"])
    assert exc.value.code == 2


def test_unstable_point_exit_3(capsys):
    code, _, err = run(["cool", "--set", "gamma1=0.1", "--set", "gamma2_ratio=0.5", "--set", "power_mW=200"], capsys)
    assert code == 3 and "numeric error" in err


def test_bad_config_file(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("[1, 2")
    code, _, _ = run(["cool", "--config", str(p)], capsys)
    assert code == 2
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"bath_temp": 0.0}))
    code, out, _ = run(["cool", "--config", str(good)], capsys)
    assert code == 0


def test_oracle_check(capsys):
    argv = ["oracle-check", "--trajectories", "8", "--decay-times", "150", "--dt-factor", "0.04", "--seed", "11"]
    code, out, _ = run(argv, capsys)
    rep = json.loads(out)
    assert code == 0 and rep["pass"] and len(rep["z"]) == 10
    code, out2, _ = run(argv, capsys)
    assert out2 == out
    code, _, err = run(["oracle-check", "--dt-factor", "10"], capsys)
    assert code == 2
