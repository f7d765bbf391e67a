import json

import pytest

from sharpsob import cli
from sharpsob.blowup import RegimeFailure


def run(tmp_path, *argv):
    return cli.main(list(argv) + ["--output-dir", str(tmp_path), "--workers", "1"])


def test_constants_example(tmp_path):
    assert run(tmp_path, "constants", "--n", "3", "--k", "1") == 0
    rep = json.loads((tmp_path / "constants.json").read_text())
    point = rep["points"][0]
    assert abs(point["measured"]["rho"] - 1 / 3) < 1e-15
    assert point["measured"]["K0_consistency_delta"] <= 1e-6
    assert rep["config"]["dims"] == [[3, 1]]


def test_verify_bubble_example(tmp_path):
    assert run(tmp_path, "verify-bubble", "--n", "5", "--k", "2") == 0
    rep = json.loads((tmp_path / "verify-bubble.json").read_text())
    assert rep["points"][0]["measured"]["max_residual_B"] <= 1e-8


def test_short_sweep_rejected(tmp_path, capsys):
    assert run(tmp_path, "green", "--alpha-count", "1") == 2
    assert "alpha_count" in capsys.readouterr().err
    assert not (tmp_path / "green.json").exists()


@pytest.mark.parametrize("text,needle", [
    ("[common]\ndims = 3,1\n[constants]\ngrid_points = many\n", "c.ini:4"),
    ("[common]\n\ndims = 2,1\n", "dims"),
    ("[constants]\nbogus = 1\n", "c.ini:2: unknown key 'bogus'"),
    ("[nowhere]\nseed = 1\n", "unknown section"),
    ("dims = 3,1\n", "c.ini"),
])
def test_config_errors_are_precise(tmp_path, capsys, text, needle):
    cfg = tmp_path / "c.ini"
    cfg.write_text(text)
    assert run(tmp_path, "constants", "--config", str(cfg)) == 2
    assert needle in capsys.readouterr().err


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[common]\ndims = 3,1; 5,2\nseed = 4\n[constants]\ngrid_points = 300\n")
    assert run(tmp_path, "constants", "--config", str(cfg), "--grid-points", "500") == 0
    rep = json.loads((tmp_path / "constants.json").read_text())
    assert rep["config"]["grid_points"] == 500 and rep["config"]["seed"] == 4
    assert [(p["n"], p["k"]) for p in rep["points"]] == [(3, 1), (5, 2)]


def test_reports_byte_identical_and_csv_header(tmp_path):
    for tag in ("a", "b"):
        assert run(tmp_path / tag, "constants", "--n", "4", "--k", "1") == 0
    for name in ("constants.json", "constants.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    header = (tmp_path / "a" / "constants.csv").read_text().splitlines()[0]
    assert header == ",".join(cli.CSV_HEADER)
    assert header == "subcommand,n,k,alpha,alpha_mu2,metric,value,threshold,passed"


def test_pool_matches_serial(tmp_path):
    argv = ["constants", "--dims", "3,1;5,2;7,3"]
    assert cli.main(argv + ["--output-dir", str(tmp_path / "s"), "--workers", "1"]) == 0
    assert cli.main(argv + ["--output-dir", str(tmp_path / "p"), "--workers", "2"]) == 0
    assert (tmp_path / "s" / "constants.json").read_bytes() == (tmp_path / "p" / "constants.json").read_bytes()


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("SHARPSOB_OUTPUT_DIR", str(tmp_path / "env"))
    assert cli.main(["constants", "--n", "3", "--k", "1", "--workers", "1"]) == 0
    assert (tmp_path / "env" / "constants.json").exists()


def test_regime_failure_exit_and_partial_report(tmp_path, monkeypatch):
    real = cli.JOBS["constants"]

    def flaky(v, n, k, alpha):
        if n == 5:
            raise RegimeFailure("augmented system is singular")
        return real[0](v, n, k, alpha)

    monkeypatch.setitem(cli.JOBS, "constants", (flaky, False))
    assert run(tmp_path, "constants", "--dims", "3,1;5,2") == 3
    rep = json.loads((tmp_path / "constants.json").read_text())
    assert "constants" in rep["regime_failure"]
    assert rep["points"][0]["checks"]["K0_consistency"]["passed"]


def test_failed_check_gives_nonzero_status(tmp_path, monkeypatch):
    monkeypatch.setitem(cli.JOBS, "constants",
                        (lambda v, n, k, a: {"measured": {}, "checks": {"x": cli.check(2.0, 1.0)}}, False))
    assert run(tmp_path, "constants") == 1


def test_float_format():
    assert cli.dumps({"b": 0.1, "a": 2.0, "c": [1, None, True]}) == \
        '{"a": 2.0, "b": 0.10000000000000001, "c": [1, null, true]}'
    assert cli.dumps(float("nan")) == "null"
