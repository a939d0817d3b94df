"""The analyze pipeline: trace directories in, plot-ready data files out.

Each run directory (a manifest plus one trace CSV per chain) yields a
thermalization estimate, autocorrelation fits, and thinned equilibrium
histograms; runs at several sizes combine into the cross-size files
(heights_vs_n, mean_r_vs_n, chi_fraction) and exponential growth fits of
the thermalization and autocorrelation times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import (
    TraceSet,
    autocorrelation_time,
    growth_fit,
    histogram_with_errors,
    mean_with_error,
    sampling_stride,
    thermalization_estimate,
)
from .observables import CHI_ABANDONED, Trace
from .runner import RunConfig, chain_name


@dataclass
class RunAnalysis:
    n: int
    directory: str
    t_therm: int | None
    tau_nmin: float
    tau_r: float
    stride: int
    samples: int
    errors: list[str] = field(default_factory=list)


def discover_runs(trace_dirs) -> list[Path]:
    found = []
    for d in trace_dirs:
        d = Path(d)
        if (d / "manifest.txt").exists():
            found.append(d)
        else:
            found.extend(sorted(p.parent for p in d.glob("*/manifest.txt")))
    return found


def _load_traceset(run_dir: Path, errors: list[str]) -> tuple[RunConfig, TraceSet | None]:
    config = RunConfig.from_manifest(run_dir / "manifest.txt")
    traces = {}
    for start in config.starts:
        for replica in range(config.chains):
            name = chain_name(start, replica, config.chains)
            path = run_dir / f"{name}.csv"
            if not path.exists():
                errors.append(f"{path}: missing trace file")
                continue
            try:
                trace = Trace.read_csv(path, n=config.n)
            except ValueError as exc:
                errors.append(f"{path}: {exc}")
                continue
            if len(trace) < 3:
                errors.append(f"{path}: too short ({len(trace)} rows)")
                continue
            traces[name] = trace
    if len(traces) < 2:
        errors.append(f"{run_dir}: fewer than two usable traces")
        return config, None
    return config, TraceSet(config.n, config.resolved_moves(), traces)


def _write_csv(path: Path, header: str, rows) -> None:
    lines = [header]
    lines.extend(",".join(repr(v) if isinstance(v, float) else str(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


GNUPLOT_FILES = {
    "heights_vs_n": (
        'set datafile separator ","\nset key autotitle columnhead\n'
        'set xlabel "n"\nset ylabel "height fraction"\n'
        "plot for [h=2:7] 'heights_vs_n.csv' using 1:($2==h?$3:1/0):4 with yerrorlines title sprintf('h=%d', h)\n"
    ),
    "mean_r_vs_n": (
        'set datafile separator ","\nset key autotitle columnhead\n'
        'set xlabel "n"\nset ylabel "mean ordering fraction"\n'
        "plot 'mean_r_vs_n.csv' using 1:2:3 with yerrorlines title 'mean r', 1.0/3 title '1/3', 0.375 title '3/8'\n"
    ),
    "chi_fraction": (
        'set datafile separator ","\nset key autotitle columnhead\n'
        'set xlabel "n"\nset ylabel "fraction"\n'
        "plot 'chi_fraction.csv' using 1:2:5 with yerrorlines title 'chi=0', '' using 1:3:6 with yerrorlines title 'chi=1'\n"
    ),
}


def analyze_runs(
    trace_dirs,
    out_dir,
    gnuplot: bool = False,
    therm_window: int | None = None,
    therm_k: float = 3.0,
    therm_override: int | None = None,
) -> list[RunAnalysis]:
    """Analyze every run under trace_dirs; write data files into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    run_dirs = discover_runs(trace_dirs)
    if not run_dirs:
        raise ValueError(f"no runs (manifest.txt) found under {list(map(str, trace_dirs))}")

    analyses: list[RunAnalysis] = []
    heights_rows = []
    mean_r_rows = []
    chi_rows = []
    therm_tau_rows = []
    ttherm_points = []
    tau_points = []

    for run_dir in run_dirs:
        errors: list[str] = []
        config, traceset = _load_traceset(run_dir, errors)
        if traceset is None:
            analyses.append(RunAnalysis(config.n, str(run_dir), None, 0.0, 0.0, 1, 0, errors))
            continue
        n = config.n

        if therm_override is not None:
            t_therm = therm_override
        else:
            result = thermalization_estimate(traceset, window=therm_window, k=therm_k)
            if not result.thermalized:
                errors.append(f"{run_dir}: traces never thermalized; skipping measurement")
                analyses.append(RunAnalysis(n, str(run_dir), None, 0.0, 0.0, 1, 0, errors))
                continue
            t_therm = result.sweep

        post = {name: tr.slice(t_therm) for name, tr in traceset.traces.items()}
        taus_nmin = []
        taus_r = []
        for tr in post.values():
            if len(tr) >= 11:
                fit_n = autocorrelation_time(tr.n_min.astype(np.float64))
                fit_r = autocorrelation_time(tr.r)
                taus_nmin.append(1.0 if fit_n.below_resolution else fit_n.rate)
                taus_r.append(1.0 if fit_r.below_resolution else fit_r.rate)
        tau_nmin = max(taus_nmin) if taus_nmin else 1.0
        tau_r = max(taus_r) if taus_r else 1.0
        tau = max(tau_nmin, tau_r)
        stride = sampling_stride(n, tau)

        def pooled(column: str) -> np.ndarray:
            return np.concatenate([getattr(tr, column)[::stride] for tr in post.values()])

        heights = pooled("height")
        total = len(heights)
        analyses.append(RunAnalysis(n, str(run_dir), t_therm, tau_nmin, tau_r, stride, total, errors))
        therm_tau_rows.append((n, t_therm, float(tau_nmin), float(tau_r), stride))
        if t_therm > 0:
            ttherm_points.append((n, t_therm))
        if tau > 1.0:
            tau_points.append((n, tau))

        hist_h = histogram_with_errors(heights)
        for value, f, err in zip(hist_h.values, hist_h.f, hist_h.err):
            heights_rows.append((n, int(value), float(f), float(err)))

        r_pool = pooled("r")
        mean_r, err_r = mean_with_error(r_pool, thin=1)  # already thinned
        mean_r_rows.append((n, mean_r, err_r))

        chi_pool = pooled("chi")
        chi_total = len(chi_pool)
        row = [n]
        for target in (0, 1, CHI_ABANDONED):
            f = float(np.mean(chi_pool == target))
            row.append(f)
        for target in (0, 1, CHI_ABANDONED):
            f = float(np.mean(chi_pool == target))
            row.append(math.sqrt(f * (1 - f) / (chi_total - 1)))
        chi_rows.append(tuple(row))

        hist_r = histogram_with_errors(r_pool)
        hist_r.to_csv(out / f"r_hist_n{n}.csv")
        diff = pooled("n_max").astype(np.int64) - pooled("n_min").astype(np.int64)
        histogram_with_errors(diff).to_csv(out / f"asym_hist_n{n}.csv")
        histogram_with_errors(pooled("n_min")).to_csv(out / f"nmin_hist_n{n}.csv")
        histogram_with_errors(pooled("n_max")).to_csv(out / f"nmax_hist_n{n}.csv")

        lvl2 = np.concatenate(
            [
                tr.level_sizes[::stride, 1][tr.height[::stride] == 3]
                for tr in post.values()
                if tr.level_sizes.shape[1] > 1
            ]
        )
        if len(lvl2) >= 2:
            histogram_with_errors(lvl2 / n).to_csv(out / f"level2_hist_n{n}.csv")

    _write_csv(out / "ttherm_tau.csv", "n,t_therm,tau_nmin,tau_r,stride", therm_tau_rows)
    _write_csv(out / "heights_vs_n.csv", "n,height,fraction,err", sorted(heights_rows))
    _write_csv(out / "mean_r_vs_n.csv", "n,mean_r,err", sorted(mean_r_rows))
    _write_csv(
        out / "chi_fraction.csv",
        "n,frac_chi0,frac_chi1,frac_abandoned,err0,err1,err_abandoned",
        sorted(chi_rows),
    )

    report_lines = []
    for label, points in (("T_therm", ttherm_points), ("tau", tau_points)):
        if len({n for n, _ in points}) >= 3:
            fit = growth_fit(points)
            report_lines.append(
                f"{label} = a*exp(b*n): ln a = {fit.amplitude:.3f} +- {fit.amplitude_err:.3f}, "
                f"b = {fit.rate:.4f} +- {fit.rate_err:.4f}, "
                f"window n in {fit.window}, residual norm {fit.residual_norm:.3e}"
            )
        else:
            report_lines.append(f"{label}: not enough sizes for a growth fit (need 3)")
    for analysis in analyses:
        for err in analysis.errors:
            report_lines.append(f"ERROR {err}")
    (out / "fit_report.txt").write_text("\n".join(report_lines) + "\n")

    if gnuplot:
        for name, script in GNUPLOT_FILES.items():
            (out / f"{name}.gp").write_text(script)

    return analyses
