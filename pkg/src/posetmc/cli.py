"""Command-line surface: run, enumerate, validate, analyze.

Option resolution order: explicit flag > POSETMC_<FLAG> environment
variable > --config key=value file > built-in default. For example
`--moves-per-sweep` can also arrive as POSETMC_MOVES_PER_SWEEP=... or a
`moves_per_sweep = ...` config line.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

ENV_PREFIX = "POSETMC_"


def _read_config_file(path: str) -> dict[str, str]:
    values = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SystemExit(f"config file {path}: bad line {line!r} (expected key = value)")
        key, _, val = line.partition("=")
        values[key.strip().lower()] = val.strip()
    return values


def _resolve(args: argparse.Namespace, spec: dict[str, tuple]) -> dict:
    """Layer flag/env/config-file/default for each option in spec."""
    file_values = _read_config_file(args.config) if getattr(args, "config", None) else {}
    out = {}
    for dest, (parse, default) in spec.items():
        value = getattr(args, dest, None)
        if value is None:
            env = os.environ.get(ENV_PREFIX + dest.upper())
            if env is not None:
                value = parse(env)
            elif dest in file_values:
                value = parse(file_values[dest])
            else:
                value = default
        out[dest] = value
    return out


def _parse_starts(text: str) -> tuple[str, ...]:
    return tuple(s.strip() for s in text.split(",") if s.strip())


def _parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    return str(text).lower() in ("1", "true", "yes", "on")


def cmd_run(args: argparse.Namespace) -> int:
    from .runner import RunConfig, resume, run_all

    if args.resume:
        traces = resume(args.resume)
        print(f"resumed run in {args.resume}: {len(traces.traces)} chains complete")
        return 0

    spec = {
        "n": (int, None),
        "seed": (int, 0),
        "sweeps": (int, None),
        "starts": (_parse_starts, ("chain", "antichain", "random_kr", "bipartite")),
        "moves_per_sweep": (int, None),
        "record_interval": (int, 1),
        "intervals": (_parse_bool, False),
        "h0": (int, None),
        "out": (str, None),
        "checkpoint_every": (int, 100),
        "chains": (int, 1),
    }
    values = _resolve(args, spec)
    for required in ("n", "sweeps"):
        if values[required] is None:
            raise SystemExit(f"--{required.replace('_', '-')} is required for run")
    if values["out"] is None:
        raise SystemExit("--out is required for run (trace files need a directory)")
    config = RunConfig(**values)
    try:
        config.check()
    except ValueError as exc:
        raise SystemExit(str(exc))
    out_dir = Path(config.out)
    if out_dir.exists() and not os.access(out_dir, os.W_OK):
        raise SystemExit(f"output directory {out_dir} is not writable")
    try:
        traces = run_all(config)
    except OSError as exc:
        raise SystemExit(f"output directory {out_dir}: {exc}")
    for name, trace in sorted(traces.traces.items()):
        print(f"{name}: {len(trace)} rows -> {out_dir / (name + '.csv')}")
    print(f"manifest: {out_dir / 'manifest.txt'}")
    return 0


def cmd_enumerate(args: argparse.Namespace) -> int:
    from .enumeration import exact_distribution

    spec = {
        "n": (int, None),
        "observable": (str, "height"),
        "h0": (int, None),
        "out": (str, None),
    }
    values = _resolve(args, spec)
    if values["n"] is None:
        raise SystemExit("--n is required for enumerate")
    try:
        dist = exact_distribution(values["n"], values["observable"], h0=values["h0"])
    except ValueError as exc:
        raise SystemExit(str(exc))
    path = values["out"] or f"exact_{values['observable']}_n{values['n']}.csv"
    dist.to_csv(path)
    print(f"{dist.total} posets at n={values['n']}; wrote {path}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    from .validation import run_validation

    spec = {
        "n": (int, 9),
        "samples": (int, 10_000),
        "seed": (int, 0),
        "out": (str, None),
    }
    values = _resolve(args, spec)
    try:
        report = run_validation(values["n"], samples=values["samples"], seed=values["seed"])
    except ValueError as exc:
        raise SystemExit(str(exc))
    print(report.summary())
    if values["out"]:
        out = Path(values["out"])
        out.mkdir(parents=True, exist_ok=True)
        lines = ["observable,value,exact_fraction,measured_fraction,sigma,deviation"]
        for c in report.comparisons:
            lines.append(
                f"{c.observable},{c.value},{c.exact_fraction!r},"
                f"{c.measured_fraction!r},{c.sigma!r},{c.deviation!r}"
            )
        (out / f"validate_n{values['n']}.csv").write_text("\n".join(lines) + "\n")
    return 0 if report.passed else 1


def cmd_analyze(args: argparse.Namespace) -> int:
    from .pipeline import analyze_runs

    spec = {
        "out": (str, None),
        "gnuplot": (_parse_bool, False),
        "therm_window": (int, None),
        "therm_k": (float, 3.0),
        "therm": (int, None),
    }
    values = _resolve(args, spec)
    out = values["out"] or "analysis"
    try:
        analyses = analyze_runs(
            args.traces,
            out,
            gnuplot=values["gnuplot"],
            therm_window=values["therm_window"],
            therm_k=values["therm_k"],
            therm_override=values["therm"],
        )
    except ValueError as exc:
        raise SystemExit(str(exc))
    status = 0
    for a in analyses:
        line = (
            f"n={a.n} {a.directory}: T_therm={a.t_therm} tau_nmin={a.tau_nmin:.2f} "
            f"tau_r={a.tau_r:.2f} stride={a.stride} samples={a.samples}"
        )
        print(line)
        for err in a.errors:
            print(f"  ERROR: {err}")
            status = 1
    print(f"data files in {out}/")
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="posetmc",
        description="Uniform MCMC sampling of naturally labeled partial orders",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run seeded chains from the standard starts")
    run.add_argument("--n", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--sweeps", type=int)
    run.add_argument("--starts", type=_parse_starts, help="comma list: chain,antichain,random_kr,bipartite")
    run.add_argument("--moves-per-sweep", type=int, dest="moves_per_sweep")
    run.add_argument("--record-interval", type=int, dest="record_interval")
    run.add_argument("--intervals", action="store_const", const=True, default=None,
                     help="record interval-size histograms (costly)")
    run.add_argument("--h0", type=int, help="chi check level cutoff")
    run.add_argument("--out", type=str)
    run.add_argument("--checkpoint-every", type=int, dest="checkpoint_every")
    run.add_argument("--chains", type=int, help="replicas per start")
    run.add_argument("--config", type=str, help="key = value config file")
    run.add_argument("--resume", type=str, metavar="DIR", help="continue an interrupted run directory")
    run.set_defaults(func=cmd_run)

    enum = sub.add_parser("enumerate", help="exact small-n invariant distributions")
    enum.add_argument("--n", type=int)
    enum.add_argument("--observable", type=str, choices=["height", "R", "N_min", "N_max", "chi"])
    enum.add_argument("--h0", type=int)
    enum.add_argument("--out", type=str)
    enum.add_argument("--config", type=str)
    enum.set_defaults(func=cmd_enumerate)

    val = sub.add_parser("validate", help="chain vs exact enumeration at n <= 9")
    val.add_argument("--n", type=int)
    val.add_argument("--samples", type=int)
    val.add_argument("--seed", type=int)
    val.add_argument("--out", type=str)
    val.add_argument("--config", type=str)
    val.set_defaults(func=cmd_validate)

    ana = sub.add_parser("analyze", help="traces -> thermalization, tau, histograms, plot data")
    ana.add_argument("traces", nargs="+", help="run directories (or parents of them)")
    ana.add_argument("--out", type=str)
    ana.add_argument("--gnuplot", action="store_const", const=True, default=None)
    ana.add_argument("--therm-window", type=int, dest="therm_window")
    ana.add_argument("--therm-k", type=float, dest="therm_k")
    ana.add_argument("--therm", type=int, help="manual thermalization cut (sweeps)")
    ana.add_argument("--config", type=str)
    ana.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
