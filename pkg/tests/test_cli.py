"""CLI surface: subcommands, option layering, exit codes."""

import json
import os
from pathlib import Path

import pytest

from posetmc.cli import main


def test_run_and_analyze_end_to_end(tmp_path):
    run_dir = tmp_path / "run9"
    assert main([
        "run", "--n", "9", "--seed", "5", "--sweeps", "120",
        "--starts", "chain,antichain", "--out", str(run_dir),
    ]) == 0
    assert (run_dir / "manifest.txt").exists()
    assert (run_dir / "chain.csv").exists()
    rows = (run_dir / "chain.csv").read_text().count("\n") - 1
    assert rows == 121

    out_dir = tmp_path / "analysis"
    assert main(["analyze", str(run_dir), "--out", str(out_dir), "--gnuplot"]) == 0
    for name in ("heights_vs_n.csv", "mean_r_vs_n.csv", "chi_fraction.csv",
                 "r_hist_n9.csv", "asym_hist_n9.csv", "ttherm_tau.csv",
                 "fit_report.txt", "heights_vs_n.gp"):
        assert (out_dir / name).exists(), name


def test_run_requires_n_and_sweeps(tmp_path):
    with pytest.raises(SystemExit):
        main(["run", "--sweeps", "10", "--out", str(tmp_path)])
    with pytest.raises(SystemExit):
        main(["run", "--n", "9", "--out", str(tmp_path)])


def test_run_reports_invalid_field(tmp_path):
    with pytest.raises(SystemExit, match="sweeps"):
        main(["run", "--n", "9", "--sweeps", "0", "--out", str(tmp_path)])


def test_run_resume_flag(tmp_path):
    run_dir = tmp_path / "r"
    main(["run", "--n", "9", "--seed", "1", "--sweeps", "40",
          "--starts", "chain", "--checkpoint-every", "20", "--out", str(run_dir)])
    assert main(["run", "--resume", str(run_dir)]) == 0


def test_env_override_and_flag_precedence(tmp_path, monkeypatch):
    run_dir = tmp_path / "env"
    monkeypatch.setenv("POSETMC_SWEEPS", "30")
    monkeypatch.setenv("POSETMC_STARTS", "chain")
    assert main(["run", "--n", "9", "--seed", "2", "--out", str(run_dir)]) == 0
    rows = (run_dir / "chain.csv").read_text().count("\n") - 1
    assert rows == 31  # env supplied the sweep count

    run_dir2 = tmp_path / "env2"
    assert main(["run", "--n", "9", "--seed", "2", "--sweeps", "10",
                 "--out", str(run_dir2)]) == 0
    rows2 = (run_dir2 / "chain.csv").read_text().count("\n") - 1
    assert rows2 == 11  # explicit flag beats the environment


def test_config_file_layering(tmp_path):
    cfg = tmp_path / "conf"
    cfg.write_text("n = 9\nsweeps = 25\nstarts = chain\nseed = 4\n")
    run_dir = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--out", str(run_dir)]) == 0
    rows = (run_dir / "chain.csv").read_text().count("\n") - 1
    assert rows == 26


def test_enumerate_writes_csv(tmp_path):
    out = tmp_path / "h3.csv"
    assert main(["enumerate", "--n", "3", "--observable", "height",
                 "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "value,count,fraction"
    assert len(lines) == 4  # heights 1, 2, 3
    assert sum(int(l.split(",")[1]) for l in lines[1:]) == 7


def test_enumerate_bound_error():
    with pytest.raises(SystemExit, match="bound"):
        main(["enumerate", "--n", "12", "--observable", "height"])


def test_validate_pass_and_report(tmp_path, capsys):
    code = main(["validate", "--n", "4", "--samples", "4000", "--seed", "6",
                 "--out", str(tmp_path)])
    output = capsys.readouterr().out
    assert code == 0
    assert "PASS" in output and "worst bin" in output
    assert (tmp_path / "validate_n4.csv").exists()


def test_analyze_missing_dir_fails(tmp_path):
    with pytest.raises(SystemExit, match="no runs"):
        main(["analyze", str(tmp_path / "nowhere"), "--out", str(tmp_path / "o")])


def test_analyze_reports_short_trace(tmp_path, capsys):
    run_dir = tmp_path / "r"
    main(["run", "--n", "9", "--seed", "1", "--sweeps", "30",
          "--starts", "chain,antichain", "--out", str(run_dir)])
    (run_dir / "antichain.csv").write_text(
        (run_dir / "antichain.csv").read_text().splitlines()[0] + "\n"
    )
    code = main(["analyze", str(run_dir), "--out", str(tmp_path / "o")])
    output = capsys.readouterr().out
    assert code == 1
    assert "antichain.csv" in output
