import json
from types import SimpleNamespace

import numpy as np
import pytest

from VS_StabCert import cli
from VS_StabCert.config import RunConfig
from VS_StabCert.errors import NoConnection
from VS_StabCert.evolve import BoundReport, GreenProbe


def read(path):
    return json.loads(path.read_text())


def test_identity_lemmas_pass(tmp_path):
    code = cli.main(["verify-lemmas", "--only", "interaction1,interaction2", "--out", str(tmp_path)])
    assert code == cli.EXIT_PASS
    payload = read(tmp_path / "lemma_interaction1.json")
    assert payload["verdict"] is True
    assert payload["checks"][0]["bound"] == "completed_square"
    assert (tmp_path / "lemma_interaction2.json").exists()


def test_malformed_config_writes_nothing(tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"evolution": {"dtt": 0.1}}))
    out = tmp_path / "out"
    code = cli.main(["evolve", "--config", str(config), "--out", str(out)])
    assert code == cli.EXIT_CONFIG
    assert not out.exists()


def test_unknown_lemma_is_a_config_error(tmp_path):
    code = cli.main(["verify-lemmas", "--only", "interaction9", "--out", str(tmp_path / "out")])
    assert code == cli.EXIT_CONFIG


def test_profile_subcommand(tmp_path, capsys):
    code = cli.main(["profile", "--out", str(tmp_path)])
    assert code == cli.EXIT_PASS
    assert read(tmp_path / "profile.json")["verdict"] is True
    assert read(tmp_path / "assumptions.json")["verdict"] is True
    assert (tmp_path / "profile.csv").exists()
    assert "profile burgers" in capsys.readouterr().out


def test_toolkit_error_writes_diagnostics(tmp_path, monkeypatch):
    def failing(cfg, out):
        raise NoConnection("no seed converged", mismatch=0.3)
    monkeypatch.setitem(cli.RUNNERS, "profile", failing)
    code = cli.run("profile", RunConfig(output_dir=str(tmp_path)))
    assert code == cli.EXIT_FAIL
    payload = read(tmp_path / "error.json")
    assert payload["error"] == "NoConnection"
    assert payload["mismatch"] == 0.3
    assert payload["verdict"] is False


def test_report_aggregates_verdicts(tmp_path):
    cli.write_json({"verdict": True}, str(tmp_path), "evans.json")
    cli.write_json({"verdict": True}, str(tmp_path), "trajectory.json")
    cli.write_json({"no": "verdict"}, str(tmp_path), "notes.json")
    assert cli.main(["report", "--out", str(tmp_path)]) == cli.EXIT_PASS
    report = read(tmp_path / "report.json")
    assert report["checks"] == {"evans.json": True, "trajectory.json": True}

    cli.write_json({"error": "BlowUp", "verdict": False}, str(tmp_path), "error.json")
    assert cli.main(["report", "--out", str(tmp_path)]) == cli.EXIT_FAIL
    assert read(tmp_path / "report.json")["verdict"] is False


def test_empty_report_fails(tmp_path):
    assert cli.main(["report", "--out", str(tmp_path)]) == cli.EXIT_FAIL


def test_overrides_are_applied():
    args = cli.build_parser().parse_args(["track", "--seed", "4", "--threads", "2", "--out", "o"])
    cfg = cli.resolve_config(args)
    assert (cfg.seed, cfg.threads, cfg.output_dir) == (4, 2, "o")


def test_unknown_subcommand():
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args(["plot"])


def test_verify_bounds_writes_horizon_comparison(tmp_path, monkeypatch):
    times = np.linspace(0.0, 10.0, 11)
    report = BoundReport(times=times, pointwise_ratio=np.linspace(1.0, 2.0, 11),
                         delta_dot_ratio=np.zeros(11), delta_ratio=np.full(11, 0.02),
                         zeta=np.linspace(1.0, 2.0, 11), lp_slopes={}, derivative_ratio=0.0, E0=0.01)
    green = GreenProbe(y0=-5.0, widths=(0.5, 0.25), fitted_C=[1.0, 1.0], refinement_ratio=1.0,
                       times=times, remainder_sup=np.ones(11), raw_sup=np.ones(11),
                       raw_fitted_C=[20.0, 20.0], raw_ratio=np.full(11, 20.0))
    for name in ("_profile", "_params", "_track"):
        monkeypatch.setattr(cli, name, lambda *args: None)
    monkeypatch.setattr(cli, "_evolve", lambda *args: SimpleNamespace(E0=0.01))
    monkeypatch.setattr(cli, "bound_report", lambda *args, **kwargs: report)
    monkeypatch.setattr(cli, "green_probe", lambda *args: green)
    assert cli.run_verify_bounds(RunConfig(output_dir=str(tmp_path)), str(tmp_path)) is False
    horizons = read(tmp_path / "horizons.json")
    assert horizons["growth"]["pointwise"] == pytest.approx(2.0 / 1.5)
    assert horizons["verdict"] is False
    assert read(tmp_path / "green_probe.json")["verdict"] is True
    assert read(tmp_path / "bounds.json")["verdict"] is True
