import sys
from pathlib import Path

import pytest

from ergobounds.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


@pytest.mark.parametrize(
    "command, config, table",
    [
        ("renewal", "renewal.yaml", True),
        ("kendall", "kendall.yaml", True),
        ("harris", "harris_inputs.yaml", False),
        ("harris", "harris_chain.yaml", True),
        ("verify", "verify.yaml", True),
        ("simulate", "simulate_countdown.yaml", False),
        ("simulate", "simulate_chain.yaml", False),
    ],
)
def test_subcommands_run_clean(tmp_path, capsys, command, config, table):
    code = run(tmp_path, command, "--config", str(CONFIGS / config))
    assert code == 0
    out = capsys.readouterr().out
    assert f"command = {command}" in out
    summary = (tmp_path / f"{command}_summary.txt").read_text()
    assert summary == out
    assert (tmp_path / f"{command}_figure.png").stat().st_size > 0
    if table:
        lines = (tmp_path / f"{command}_table.csv").read_text().splitlines()
        assert lines[0] == "n,exact_distance,bound_value,margin"
        assert len(lines) > 100


def test_reruns_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        code = main(["verify", "--config", str(CONFIGS / "verify.yaml"), "--out", str(out)])
        assert code == 0
    assert (a / "verify_summary.txt").read_bytes() == (b / "verify_summary.txt").read_bytes()
    assert (a / "verify_table.csv").read_bytes() == (b / "verify_table.csv").read_bytes()


def test_false_claim_exits_1(tmp_path, capsys):
    cfg = tmp_path / "claim.yaml"
    cfg.write_text(
        "chain:\n"
        "  matrix:\n"
        "    - [0.90, 0.10]\n"
        "    - [0.10, 0.90]\n"
        "weights: [1.0, 2.0]\n"
        "small_set: [0]\n"
        "inputs:\n"
        "  lam: 0.40\n"
        "  b: 0.15\n"
        "  delta: 0.90\n"
        "  access_steps: 2\n"
        "  access_mass: 0.91\n"
        "  small_sup: 1.0\n"
        "  minorized_sup: 1.0\n"
    )
    code = run(tmp_path, "harris", "--config", str(cfg))
    assert code == 1
    err = capsys.readouterr().err
    assert "HYPOTHESIS_FAIL" in err
    assert "drift" in err


def test_true_claim_is_audited_and_passes(tmp_path):
    cfg = tmp_path / "claim.yaml"
    cfg.write_text(
        "chain:\n"
        "  matrix:\n"
        "    - [0.90, 0.10]\n"
        "    - [0.10, 0.90]\n"
        "weights: [1.0, 2.0]\n"
        "small_set: [0]\n"
        "horizon: 60\n"
        "inputs:\n"
        "  lam: 0.95\n"
        "  b: 0.15\n"
        "  delta: 0.90\n"
        "  access_steps: 2\n"
        "  access_mass: 0.91\n"
        "  small_sup: 1.0\n"
        "  minorized_sup: 1.0\n"
    )
    assert run(tmp_path, "harris", "--config", str(cfg)) == 0


def test_malformed_yaml_reports_line(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("increments: [0.5, 0.5\nhorizon: 10\n")
    code = run(tmp_path, "renewal", "--config", str(cfg))
    assert code == 2
    err = capsys.readouterr().err
    assert "PARSE_ERROR" in err and "line" in err


def test_unknown_field_rejected(tmp_path, capsys):
    cfg = tmp_path / "extra.yaml"
    cfg.write_text("increments: [0.5, 0.5]\nhorizont: 10\n")
    code = run(tmp_path, "renewal", "--config", str(cfg))
    assert code == 2
    assert "PARSE_ERROR" in capsys.readouterr().err


def test_unnormalized_increments_rejected(tmp_path, capsys):
    cfg = tmp_path / "unnorm.yaml"
    cfg.write_text("increments: [0.5, 0.6]\n")
    code = run(tmp_path, "renewal", "--config", str(cfg))
    assert code == 2
    err = capsys.readouterr().err
    assert "VALIDATION_ERROR" in err and "increments" in err


def test_seed_flag_overrides_config(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out, seed in ((a, []), (b, ["--seed", "99"])):
        code = main(
            ["simulate", "--config", str(CONFIGS / "simulate_chain.yaml"), "--out", str(out), *seed]
        )
        assert code == 0
    text_a = (a / "simulate_summary.txt").read_text()
    text_b = (b / "simulate_summary.txt").read_text()
    assert "seed = 20240817" in text_a
    assert "seed = 99" in text_b
    mean_a = [l for l in text_a.splitlines() if l.startswith("mean")]
    mean_b = [l for l in text_b.splitlines() if l.startswith("mean")]
    assert mean_a != mean_b


def test_horizon_flag_controls_table(tmp_path):
    code = run(tmp_path, "renewal", "--config", str(CONFIGS / "renewal.yaml"), "--horizon", "50")
    assert code == 0
    lines = (tmp_path / "renewal_table.csv").read_text().splitlines()
    assert len(lines) == 52


def test_trace_flag_adds_stage_constants(tmp_path, capsys):
    code = run(tmp_path, "harris", "--config", str(CONFIGS / "harris_inputs.yaml"), "--trace")
    assert code == 0
    out = capsys.readouterr().out
    assert "trace_log_rate_set_excess" in out
    assert "trace_log_coefficient_atom" in out


def test_thread_env_rejected_when_not_numeric(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("ERGO_BOUNDS_THREADS", "many")
    with pytest.raises(SystemExit) as exc:
        main(["renewal", "--config", str(CONFIGS / "renewal.yaml"), "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_thread_env_sets_blas_vars(tmp_path, monkeypatch):
    for var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
        "VECLIB_MAXIMUM_THREADS",
    ):
        monkeypatch.delenv(var, raising=False)
    monkeypatch.setenv("ERGO_BOUNDS_THREADS", "2")
    code = run(tmp_path, "renewal", "--config", str(CONFIGS / "renewal.yaml"))
    assert code == 0
    import os

    assert os.environ["OMP_NUM_THREADS"] == "2"
    assert os.environ["OPENBLAS_NUM_THREADS"] == "2"
