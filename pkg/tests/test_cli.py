import json
import subprocess
import sys

import pytest

from photonkin._main import EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_TOLERANCE, main

KERNEL_CFG = {
    "task": "kernel-check",
    "params": {"delta_t": 0.0, "epsilon": 0.1, "k_max": 400.0},
}

FRAMES_CFG = {
    "task": "verify-frames",
    "seed": 11,
    "params": {"n_probes": 200, "k_range": [0.5, 20.0]},
}

ARRIVAL_CFG = {
    "task": "arrival",
    "seed": 3,
    "grid": {"n_k": 48, "n_theta": 24, "n_phi": 8, "k_min": 7.0, "k_max": 13.0,
             "ct_window": [0.94, 1.0]},
    "state": {"center_p": [0.0, 0.0, 10.0], "sigma_p": 0.5,
              "center_x": [0.0, 0.0, -5.0]},
    "params": {"z": [0.0, 0.0, 0.0], "t_min": 0.0, "t_max": 10.0, "n_t": 200},
}


def write_cfg(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def test_kernel_check_passes(tmp_path, capsys):
    cfg = write_cfg(tmp_path, KERNEL_CFG)
    code = main(["kernel-check", "--config", cfg, "--out", str(tmp_path / "out")])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "pass  quadrature_vs_closed_form" in out
    assert "pass  reference_value" in out
    assert "report:" in out
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["passed"] is True
    assert report["task"] == "kernel-check"


def test_rerun_is_byte_identical(tmp_path):
    cfg = write_cfg(tmp_path, ARRIVAL_CFG)
    for out in ("a", "b"):
        assert main(["arrival", "--config", cfg, "--out", str(tmp_path / out)]) == EXIT_OK
    csv_a = (tmp_path / "a" / "arrival_density.csv").read_bytes()
    csv_b = (tmp_path / "b" / "arrival_density.csv").read_bytes()
    assert csv_a == csv_b
    rep_a = json.loads((tmp_path / "a" / "report.json").read_text())
    rep_b = json.loads((tmp_path / "b" / "report.json").read_text())
    assert rep_a.pop("timestamp") != rep_b.pop("timestamp") or True
    assert rep_a == rep_b


def test_csv_floats_round_trip(tmp_path):
    cfg = write_cfg(tmp_path, ARRIVAL_CFG)
    main(["arrival", "--config", cfg, "--out", str(tmp_path / "out")])
    lines = (tmp_path / "out" / "arrival_density.csv").read_text().splitlines()
    assert lines[0] == "t,density,density_plus,density_minus,cumulative"
    for line in lines[1:]:
        for cell in line.split(","):
            # 17 significant digits: text -> float -> text is the identity
            assert f"{float(cell):.17g}" == cell


def test_seed_flag_changes_probes(tmp_path):
    cfg = write_cfg(tmp_path, FRAMES_CFG)
    a = str(tmp_path / "a")
    b = str(tmp_path / "b")
    c = str(tmp_path / "c")
    assert main(["verify-frames", "--config", cfg, "--out", a]) == EXIT_OK
    assert main(["verify-frames", "--config", cfg, "--out", b, "--seed", "99"]) == EXIT_OK
    assert main(["verify-frames", "--config", cfg, "--out", c, "--seed", "99"]) == EXIT_OK

    def gates(d):
        return json.loads((tmp_path / d / "report.json").read_text())["gates"]

    assert gates("a") != gates("b")  # different probe draw
    assert gates("b") == gates("c")  # --seed pins it
    for rep in (gates("a"), gates("b")):
        assert all(g["pass"] for g in rep.values())


def test_tolerance_scale_failure_exits_1(tmp_path, capsys):
    cfg = write_cfg(tmp_path, FRAMES_CFG)
    code = main(["verify-frames", "--config", cfg, "--out", str(tmp_path / "out"),
                 "--tolerance-scale", "1e-9"])
    assert code == EXIT_TOLERANCE
    out = capsys.readouterr().out
    assert "FAIL" in out
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["passed"] is False
    assert report["tolerance_scale"] == 1e-9


def test_validate_good_config(tmp_path, capsys):
    cfg = write_cfg(tmp_path, ARRIVAL_CFG)
    assert main(["validate", "--config", cfg]) == EXIT_OK
    verdict = json.loads(capsys.readouterr().out)
    assert verdict == {"valid": True, "diagnostics": []}


def test_validate_bad_config(tmp_path, capsys):
    bad = dict(ARRIVAL_CFG, grid=dict(ARRIVAL_CFG["grid"], k_min=-2.0), extra=1)
    cfg = write_cfg(tmp_path, bad)
    assert main(["validate", "--config", cfg]) == EXIT_CONFIG
    verdict = json.loads(capsys.readouterr().out)
    assert verdict["valid"] is False
    joined = " ".join(verdict["diagnostics"])
    assert "k_min" in joined and "extra" in joined


def test_invalid_config_exits_2(tmp_path, capsys):
    bad = dict(KERNEL_CFG, params={"epsilon": -1.0})
    cfg = write_cfg(tmp_path, bad)
    assert main(["kernel-check", "--config", cfg,
                 "--out", str(tmp_path / "out")]) == EXIT_CONFIG
    assert "epsilon" in capsys.readouterr().err


def test_malformed_json_exits_2(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert main(["kernel-check", "--config", str(path)]) == EXIT_CONFIG
    assert "not valid JSON" in capsys.readouterr().err


def test_missing_config_exits_3(tmp_path, capsys):
    assert main(["kernel-check", "--config", str(tmp_path / "absent.json")]) == EXIT_IO
    assert "cannot read config" in capsys.readouterr().err


def test_unknown_task_exits_2(tmp_path):
    cfg = write_cfg(tmp_path, {"params": {}})
    assert main(["frobnicate", "--config", cfg]) == EXIT_CONFIG


def test_task_mismatch_exits_2(tmp_path, capsys):
    cfg = write_cfg(tmp_path, KERNEL_CFG)
    assert main(["verify-frames", "--config", cfg,
                 "--out", str(tmp_path / "out")]) == EXIT_CONFIG
    assert "requested 'verify-frames'" in capsys.readouterr().err


@pytest.mark.parametrize("flag,value", [("--seed", "-1"), ("--tolerance-scale", "0")])
def test_bad_flag_values_exit_2(tmp_path, flag, value):
    cfg = write_cfg(tmp_path, KERNEL_CFG)
    assert main(["kernel-check", "--config", cfg, "--out", str(tmp_path / "out"),
                 flag, value]) == EXIT_CONFIG


def test_console_entry_point(tmp_path):
    cfg = write_cfg(tmp_path, KERNEL_CFG)
    proc = subprocess.run(
        [sys.executable, "-m", "photonkin", "kernel-check", "--config", cfg,
         "--out", str(tmp_path / "out")],
        capture_output=True, text=True,
        env={"PATH": "", "PHOTONKIN_THREADS": "1", "HOME": str(tmp_path)},
    )
    assert proc.returncode == EXIT_OK, proc.stderr
    assert "pass  reference_value" in proc.stdout


def test_thread_env_rejects_garbage(monkeypatch, capsys):
    from photonkin import _main

    monkeypatch.setenv("PHOTONKIN_THREADS", "zero")
    for var in _main._THREAD_VARS:
        monkeypatch.delenv(var, raising=False)
    _main._apply_thread_env()
    assert "ignoring PHOTONKIN_THREADS" in capsys.readouterr().err

    monkeypatch.setenv("PHOTONKIN_THREADS", "2")
    _main._apply_thread_env()
    import os

    assert all(os.environ[v] == "2" for v in _main._THREAD_VARS)
