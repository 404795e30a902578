import json

import pytest

from revdecoupling.cli import RunConfig, config_from_dict, eval_number, load_config, run
from revdecoupling.errors import ConfigError


def test_minimal_config_valid():
    cfg = config_from_dict({"profile": "cone", "delta": [0.00390625]})
    assert cfg.profile["kind"] == "cone" and cfg.delta == [0.00390625]


def test_delta_out_of_range():
    with pytest.raises(ConfigError, match=r"delta must lie in \(0,1\)"):
        config_from_dict({"profile": "cone", "delta": 1.5})


def test_missing_profile():
    with pytest.raises(ConfigError, match="profile"):
        config_from_dict({"delta": [0.01]})


def test_parse_error_names_line(tmp_path):
    f = tmp_path / "bad.json"
    f.write_text('{\n  "profile": "cone",\n  "delta": [0.1,]\n}\n')
    with pytest.raises(ConfigError, match=r"bad.json:3:"):
        load_config(f)


def test_eval_number():
    assert eval_number("2^-8") == 2.0**-8
    assert eval_number("0.25") == 0.25


def test_unknown_flag_is_usage_error(capsys):
    assert run(["analyze", "--bogus"]) == 2
    assert "usage" in capsys.readouterr().err


def test_missing_subcommand_is_usage_error():
    assert run([]) == 2


def test_bad_delta_flag_is_usage_error(tmp_path):
    assert run(["analyze", "--profile", "torus", "--delta", "1.5", "--out-dir", str(tmp_path)]) == 2


def test_analyze_writes_outputs(tmp_path):
    assert run(["analyze", "--profile", "torus", "--domain", "0.7,1.3", "--out-dir", str(tmp_path)]) == 0
    zeros = json.loads((tmp_path / "zeros.json").read_text())
    assert zeros["zeros"][0]["case"] == "QuasiTorus"
    assert (tmp_path / "curvature.csv").read_text().startswith("r,K,lambda_rad,lambda_ang\n")
    echo = json.loads((tmp_path / "analyze.config.json").read_text())
    assert echo["profile"]["domain"] == [0.7, 1.3]


def test_partition_and_verify(tmp_path):
    out = tmp_path / "m.json"
    assert run(["partition", "--profile", "torus", "--delta", "2.44e-4", "--out", str(out),
                "--out-dir", str(tmp_path)]) == 0
    assert run(["verify", str(out), "--out-dir", str(tmp_path)]) == 0
    m = json.loads(out.read_text())
    m["boxes"][0]["frame"]["halfwidths"] = [1e-9, 1e-9, 1e-9]
    out.write_text(json.dumps(m))
    assert run(["verify", str(out), "--out-dir", str(tmp_path)]) == 1


def test_config_file_with_flag_override(tmp_path):
    f = tmp_path / "cfg.json"
    f.write_text(json.dumps({"profile": "torus", "delta": [0.5], "threads": 3}))
    assert run(["analyze", "--config", str(f), "--delta", "2^-6", "--out-dir", str(tmp_path)]) == 0
    echo = json.loads((tmp_path / "analyze.config.json").read_text())
    assert echo["delta"] == [2.0**-6] and echo["threads"] == 3


def test_thread_env(tmp_path, monkeypatch):
    monkeypatch.setenv("REVDECOUPLING_THREADS", "2")
    run(["analyze", "--profile", "torus", "--out-dir", str(tmp_path)])
    assert json.loads((tmp_path / "analyze.config.json").read_text())["threads"] == 2
    run(["analyze", "--profile", "torus", "--threads", "1", "--out-dir", str(tmp_path)])
    assert json.loads((tmp_path / "analyze.config.json").read_text())["threads"] == 1


def test_segment_subcommand_slope(tmp_path):
    assert run(["prop5", "--N", "8,16,32,64", "--p", "4", "--out-dir", str(tmp_path)]) == 0
    fit = json.loads((tmp_path / "prop5.fit.json").read_text())
    (slope,) = [v["slope"] for v in fit.values()]
    assert slope == pytest.approx(0.25, abs=0.05)


def _experiment(out_dir):
    return run(["experiment", "--preset", "torus", "--delta", "2^-4,2^-5,2^-6", "--p", "4", "--q", "2",
                "--family", "random-phase", "--seed", "5", "--deterministic", "--out-dir", str(out_dir)])


def test_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _experiment(a) == 0 and _experiment(b) == 0
    for name in ("experiment.csv", "experiment.fit.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    m1, m2 = tmp_path / "m1.json", tmp_path / "m2.json"
    for m in (m1, m2):
        run(["partition", "--profile", "perturbed_cone", "--param", "n=3", "--delta", "2^-8", "--out", str(m),
             "--out-dir", str(tmp_path)])
    assert m1.read_bytes() == m2.read_bytes()


def test_derivative_check_subcommand(tmp_path):
    assert run(["lemma-check", "--profile", "perturbed_cone", "--param", "n=3", "--k", "1,2",
                "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "hessian.csv").read_text().count("\n") == 3


def test_runconfig_defaults_validate():
    assert RunConfig().validate().threads == 0
