"""Seeded multi-start chain runs with checkpoint/resume.

Every chain (one start kind, one replica) gets its own stream derived from
the master seed, runs in checkpoint-sized chunks, and appends to its own
trace CSV. A checkpoint stores the poset, the RNG state and the cumulative
move statistics, so resuming reproduces the uninterrupted trajectory
bit-for-bit. A manifest records everything needed to replay the run.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analysis import TraceSet
from .kernel import KernelChain
from .moves import SweepStats, default_moves_per_sweep
from .observables import Trace, default_h0, record
from .poset import STANDARD_KINDS, Poset, standard_poset
from .rng import RandomStream, child_seed

FORMAT_VERSION = 1


@dataclass
class RunConfig:
    n: int
    seed: int
    sweeps: int
    starts: tuple[str, ...] = ("chain", "antichain", "random_kr", "bipartite")
    moves_per_sweep: int | None = None  # default 2 n^3
    record_interval: int = 1
    intervals: bool = False
    h0: int | None = None
    out: str | None = None
    checkpoint_every: int = 100
    chains: int = 1

    def resolved_moves(self) -> int:
        return self.moves_per_sweep or default_moves_per_sweep(self.n)

    def resolved_h0(self) -> int:
        return default_h0(self.n) if self.h0 is None else self.h0

    def check(self) -> None:
        if self.n < 2:
            raise ValueError("config field n must be >= 2")
        if self.sweeps < 1:
            raise ValueError("config field sweeps must be >= 1")
        if not self.starts:
            raise ValueError("config field starts must be nonempty")
        for s in self.starts:
            if s not in STANDARD_KINDS:
                raise ValueError(f"config field starts contains unknown kind {s!r}")
        if self.resolved_moves() < 1:
            raise ValueError("config field moves_per_sweep must be >= 1")
        if self.record_interval < 1:
            raise ValueError("config field record_interval must be >= 1")
        if self.checkpoint_every < 1:
            raise ValueError("config field checkpoint_every must be >= 1")
        if self.checkpoint_every % self.record_interval:
            raise ValueError("config field checkpoint_every must be a multiple of record_interval")
        if self.chains < 1:
            raise ValueError("config field chains must be >= 1")

    # -- manifest ------------------------------------------------------------

    def manifest_items(self) -> list[tuple[str, str]]:
        return [
            ("format_version", str(FORMAT_VERSION)),
            ("n", str(self.n)),
            ("seed", str(self.seed)),
            ("sweeps", str(self.sweeps)),
            ("starts", ",".join(self.starts)),
            ("moves_per_sweep", str(self.resolved_moves())),
            ("record_interval", str(self.record_interval)),
            ("intervals", str(int(self.intervals))),
            ("h0", str(self.resolved_h0())),
            ("checkpoint_every", str(self.checkpoint_every)),
            ("chains", str(self.chains)),
        ]

    def config_hash(self) -> str:
        payload = "\n".join(
            f"{k}={v}" for k, v in self.manifest_items() if k != "checkpoint_every"
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def write_manifest(self, out_dir: Path) -> None:
        lines = [f"{k} = {v}" for k, v in self.manifest_items()]
        lines.append(f"config_hash = {self.config_hash()}")
        _atomic_write(out_dir / "manifest.txt", "\n".join(lines) + "\n")

    @classmethod
    def from_manifest(cls, path) -> "RunConfig":
        values: dict[str, str] = {}
        for line in Path(path).read_text().splitlines():
            if "=" in line:
                key, _, val = line.partition("=")
                values[key.strip()] = val.strip()
        config = cls(
            n=int(values["n"]),
            seed=int(values["seed"]),
            sweeps=int(values["sweeps"]),
            starts=tuple(values["starts"].split(",")),
            moves_per_sweep=int(values["moves_per_sweep"]),
            record_interval=int(values["record_interval"]),
            intervals=bool(int(values["intervals"])),
            h0=int(values["h0"]),
            checkpoint_every=int(values["checkpoint_every"]),
            chains=int(values["chains"]),
            out=str(Path(path).parent),
        )
        if values.get("config_hash") and config.config_hash() != values["config_hash"]:
            raise ValueError(f"manifest hash mismatch in {path}")
        return config


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def chain_name(start: str, replica: int, chains: int) -> str:
    return start if chains == 1 else f"{start}_{replica}"


def chain_index(config: RunConfig, start: str, replica: int) -> int:
    return config.starts.index(start) * config.chains + replica


def _initial_chain(config: RunConfig, start: str, replica: int) -> KernelChain:
    stream = RandomStream(child_seed(config.seed, chain_index(config, start, replica)))
    poset = standard_poset(start, config.n, stream)
    return KernelChain(
        poset,
        stream,
        moves_per_sweep=config.resolved_moves(),
        h0=config.resolved_h0(),
        intervals=config.intervals,
    )


def _initial_trace(config: RunConfig, chain: KernelChain) -> Trace:
    rec = record(chain.poset(), 0, h0=config.resolved_h0(), intervals=config.intervals)
    trace = Trace.from_records(config.n, [rec])
    if config.intervals:
        row = np.zeros((1, config.n + 1), dtype=np.int64)
        for size, count in (rec.interval_hist or {}).items():
            row[0, size] = count
        trace.intervals = row
    return trace


def _checkpoint_payload(config: RunConfig, start: str, replica: int, chain: KernelChain) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "config_hash": config.config_hash(),
        "n": config.n,
        "start": start,
        "replica": replica,
        "sweep": chain.sweep,
        "poset": chain.poset().to_text(),
        "rng": chain.rng().state(),
        "stats": vars(chain.stats).copy(),
    }


def _restore_chain(config: RunConfig, payload: dict) -> KernelChain:
    chain = KernelChain(
        Poset.from_text(payload["poset"]),
        RandomStream.from_state(payload["rng"]),
        moves_per_sweep=config.resolved_moves(),
        h0=config.resolved_h0(),
        intervals=config.intervals,
    )
    chain.sweep = int(payload["sweep"])
    chain.stats = SweepStats(**payload["stats"])
    return chain


def _truncate_trace_csv(path: Path, max_sweep: int) -> None:
    lines = path.read_text().splitlines()
    kept = [lines[0]]
    kept.extend(ln for ln in lines[1:] if ln and int(ln.split(",", 1)[0]) <= max_sweep)
    _atomic_write(path, "\n".join(kept) + "\n")


def run_chain(
    config: RunConfig, start: str, replica: int = 0, stop_after: int | None = None
) -> Trace:
    """Run (or resume) one chain to config.sweeps; returns its full trace.

    stop_after bounds the work of this invocation: the chain stops at the
    first checkpoint at or past that sweep (what an interrupt would leave
    behind), and a later call picks up from the checkpoint.
    """
    config.check()
    out_dir = Path(config.out) if config.out else None
    name = chain_name(start, replica, config.chains)
    ckpt_path = out_dir / f"{name}.ckpt.json" if out_dir else None
    csv_path = out_dir / f"{name}.csv" if out_dir else None

    parts: list[Trace] = []
    if ckpt_path and ckpt_path.exists():
        payload = json.loads(ckpt_path.read_text())
        if payload["config_hash"] != config.config_hash():
            raise ValueError(f"checkpoint {ckpt_path} belongs to a different config")
        chain = _restore_chain(config, payload)
        _truncate_trace_csv(csv_path, chain.sweep)
        parts.append(Trace.read_csv(csv_path, n=config.n))
    else:
        chain = _initial_chain(config, start, replica)
        first = _initial_trace(config, chain)
        parts.append(first)
        if csv_path:
            first.write_csv(csv_path, append=False)

    while chain.sweep < config.sweeps:
        if stop_after is not None and chain.sweep >= stop_after:
            break
        chunk = min(config.checkpoint_every, config.sweeps - chain.sweep)
        chunk -= chunk % config.record_interval
        if chunk == 0:
            chunk = config.sweeps - chain.sweep
        piece = chain.run(chunk, record_interval=config.record_interval)
        parts.append(piece)
        if out_dir:
            piece.write_csv(csv_path, append=True)
            _atomic_write(ckpt_path, json.dumps(_checkpoint_payload(config, start, replica, chain)))
    trace = Trace.concatenate(parts)
    if out_dir:
        _atomic_write(
            out_dir / f"{name}.stats.json",
            json.dumps({"sweeps": chain.sweep, **vars(chain.stats)}, indent=0),
        )
        if config.intervals and trace.intervals is not None:
            np.savetxt(
                out_dir / f"{name}.intervals.csv",
                trace.intervals,
                fmt="%d",
                delimiter=",",
                header=",".join(f"k{j}" for j in range(trace.intervals.shape[1])),
                comments="",
            )
    return trace


def run_all(config: RunConfig, max_workers: int | None = None) -> TraceSet:
    """Run every (start, replica) chain, concurrently; returns all traces."""
    config.check()
    if config.out:
        out_dir = Path(config.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        config.write_manifest(out_dir)
    jobs = [(s, r) for s in config.starts for r in range(config.chains)]
    workers = max_workers or min(len(jobs), os.cpu_count() or 1)
    traces: dict[str, Trace] = {}
    if workers == 1:
        for start, replica in jobs:
            traces[chain_name(start, replica, config.chains)] = run_chain(config, start, replica)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(run_chain, config, start, replica): (start, replica)
                for start, replica in jobs
            }
            for fut, (start, replica) in futures.items():
                traces[chain_name(start, replica, config.chains)] = fut.result()
    return TraceSet(config.n, config.resolved_moves(), traces)


def resume(out_dir) -> TraceSet:
    """Continue an interrupted run directory to its configured sweep count."""
    config = RunConfig.from_manifest(Path(out_dir) / "manifest.txt")
    return run_all(config)
