"""Equilibrium measurement runs: thermalize from every start, pool samples.

This is the workhorse behind the scan scripts and the acceptance suite.
Each start kind runs its own chain (own stream split from the master seed);
the thermalization stretch is discarded for measurement but kept in the
per-start indicator traces so the multi-start agreement can be inspected.
Results cache to disk keyed by the full parameter set, so repeated analyses
do not rerun the chains.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._cache import cache_dir
from .analysis import TraceSet, autocorrelation_time, sampling_stride, thermalization_estimate
from .kernel import KernelChain
from .moves import default_moves_per_sweep
from .observables import Trace, default_h0
from .poset import standard_poset
from .rng import RandomStream, child_seed

DEFAULT_STARTS = ("chain", "antichain", "random_kr", "bipartite")
CACHE_FORMAT = 1


@dataclass
class EquilibriumResult:
    """Pooled post-thermalization samples plus run diagnostics."""

    n: int
    seed: int
    therm_sweeps: int
    sweeps: int
    starts: tuple[str, ...]
    moves_per_sweep: int
    # pooled post-thermalization samples (starts concatenated in order)
    height: np.ndarray
    R: np.ndarray
    n_min: np.ndarray
    n_max: np.ndarray
    chi: np.ndarray
    level2: np.ndarray
    # full per-start indicator traces (therm stretch included), for diagnostics
    nmin_traces: np.ndarray  # (starts, therm+sweeps)
    r_traces: np.ndarray
    # equilibrium acceptance accounting
    relation_attempted: int
    relation_accepted: int
    link_attempted: int
    link_accepted: int
    tau_nmin: float
    tau_r: float

    @property
    def r(self) -> np.ndarray:
        return self.R / (self.n * (self.n - 1) // 2)

    @property
    def acceptance_fraction(self) -> float:
        att = self.relation_attempted + self.link_attempted
        acc = self.relation_accepted + self.link_accepted
        return acc / att

    @property
    def tau(self) -> float:
        return max(self.tau_nmin, self.tau_r)

    @property
    def stride(self) -> int:
        return sampling_stride(self.n, self.tau)

    def thinned(self, values: np.ndarray) -> np.ndarray:
        """Per-start 5*tau/2 thinning (keeps starts independent)."""
        per_start = len(values) // len(self.starts)
        parts = [
            values[i * per_start : (i + 1) * per_start : self.stride]
            for i in range(len(self.starts))
        ]
        return np.concatenate(parts)

    def height_fraction(self, h: int) -> float:
        return float(np.mean(self.height == h))

    def multi_start_agreement(self, window: int | None = None, k: float = 3.0):
        """Thermalization check recomputed from the retained indicator traces."""
        traces = {}
        for i, start in enumerate(self.starts):
            npairs = self.n * (self.n - 1) // 2
            length = self.nmin_traces.shape[1]
            traces[start] = Trace(
                self.n,
                np.arange(length, dtype=np.int64),
                np.zeros(length, np.int32),
                np.rint(self.r_traces[i] * npairs).astype(np.int64),
                np.zeros(length, np.int64),
                self.nmin_traces[i].astype(np.int32),
                np.zeros(length, np.int32),
                np.zeros(length, np.int8),
                np.zeros((length, 1), np.uint16),
            )
        ts = TraceSet(self.n, self.moves_per_sweep, traces)
        return thermalization_estimate(ts, window=window, k=k)


def _result_key(params: dict) -> str:
    return hashlib.sha256(json.dumps(params, sort_keys=True).encode()).hexdigest()[:20]


def run_equilibrium(
    n: int,
    sweeps: int,
    therm_sweeps: int,
    seed: int,
    starts: tuple[str, ...] = DEFAULT_STARTS,
    moves_per_sweep: int | None = None,
    h0: int | None = None,
    max_workers: int | None = None,
    use_cache: bool = True,
) -> EquilibriumResult:
    """Run all starts at size n and pool equilibrium samples (disk-cached)."""
    moves = moves_per_sweep or default_moves_per_sweep(n)
    h0 = default_h0(n) if h0 is None else h0
    params = {
        "format": CACHE_FORMAT,
        "n": n,
        "seed": seed,
        "therm": therm_sweeps,
        "sweeps": sweeps,
        "starts": list(starts),
        "moves": moves,
        "h0": h0,
    }
    path = cache_dir("equilibrium") / f"eq_{_result_key(params)}.npz"
    if use_cache and path.exists():
        return _load(path)

    def one(args):
        index, start = args
        stream = RandomStream(child_seed(seed, index))
        poset = standard_poset(start, n, stream)
        chain = KernelChain(poset, stream, moves_per_sweep=moves, h0=h0)
        t_therm = chain.run(therm_sweeps)
        pre = vars(chain.stats).copy()
        t_eq = chain.run(sweeps)
        eq_stats = {k: vars(chain.stats)[k] - pre[k] for k in pre}
        return start, t_therm, t_eq, eq_stats

    jobs = list(enumerate(starts))
    import os

    workers = max_workers or min(len(jobs), os.cpu_count() or 1)
    if workers == 1:
        results = [one(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, jobs))

    heights, rs, nmins, nmaxs, chis, lvl2 = [], [], [], [], [], []
    nmin_traces, r_traces = [], []
    stats_sum = {"relation_attempted": 0, "relation_accepted": 0,
                 "link_attempted": 0, "link_accepted": 0}
    taus_nmin, taus_r = [], []
    for start, t_therm, t_eq, eq_stats in results:
        heights.append(t_eq.height)
        rs.append(t_eq.R)
        nmins.append(t_eq.n_min)
        nmaxs.append(t_eq.n_max)
        chis.append(t_eq.chi)
        lvl2.append(t_eq.level_sizes[:, 1] if t_eq.level_sizes.shape[1] > 1
                    else np.zeros(len(t_eq), np.uint16))
        full = Trace.concatenate([t_therm, t_eq])
        nmin_traces.append(full.n_min)
        r_traces.append(full.r)
        for key in stats_sum:
            stats_sum[key] += eq_stats[key]
        fit_n = autocorrelation_time(t_eq.n_min.astype(np.float64))
        fit_r = autocorrelation_time(t_eq.r)
        taus_nmin.append(fit_n.rate if not fit_n.below_resolution else 1.0)
        taus_r.append(fit_r.rate if not fit_r.below_resolution else 1.0)

    result = EquilibriumResult(
        n=n,
        seed=seed,
        therm_sweeps=therm_sweeps,
        sweeps=sweeps,
        starts=tuple(starts),
        moves_per_sweep=moves,
        height=np.concatenate(heights).astype(np.int16),
        R=np.concatenate(rs).astype(np.int32),
        n_min=np.concatenate(nmins).astype(np.int16),
        n_max=np.concatenate(nmaxs).astype(np.int16),
        chi=np.concatenate(chis).astype(np.int8),
        level2=np.concatenate(lvl2).astype(np.int16),
        nmin_traces=np.vstack(nmin_traces).astype(np.int16),
        r_traces=np.vstack(r_traces).astype(np.float32),
        relation_attempted=stats_sum["relation_attempted"],
        relation_accepted=stats_sum["relation_accepted"],
        link_attempted=stats_sum["link_attempted"],
        link_accepted=stats_sum["link_accepted"],
        tau_nmin=float(max(taus_nmin)),
        tau_r=float(max(taus_r)),
    )
    if use_cache:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            _save(path, params, result)
        except OSError:
            pass
    return result


def _save(path, params: dict, res: EquilibriumResult) -> None:
    meta = dict(params)
    meta.update(
        relation_attempted=res.relation_attempted,
        relation_accepted=res.relation_accepted,
        link_attempted=res.link_attempted,
        link_accepted=res.link_accepted,
        tau_nmin=res.tau_nmin,
        tau_r=res.tau_r,
    )
    np.savez_compressed(
        path,
        meta=json.dumps(meta),
        height=res.height,
        R=res.R,
        n_min=res.n_min,
        n_max=res.n_max,
        chi=res.chi,
        level2=res.level2,
        nmin_traces=res.nmin_traces,
        r_traces=res.r_traces,
    )


def _load(path) -> EquilibriumResult:
    data = np.load(path)
    meta = json.loads(str(data["meta"]))
    return EquilibriumResult(
        n=meta["n"],
        seed=meta["seed"],
        therm_sweeps=meta["therm"],
        sweeps=meta["sweeps"],
        starts=tuple(meta["starts"]),
        moves_per_sweep=meta["moves"],
        height=data["height"],
        R=data["R"],
        n_min=data["n_min"],
        n_max=data["n_max"],
        chi=data["chi"],
        level2=data["level2"],
        nmin_traces=data["nmin_traces"],
        r_traces=data["r_traces"],
        relation_attempted=meta["relation_attempted"],
        relation_accepted=meta["relation_accepted"],
        link_attempted=meta["link_attempted"],
        link_accepted=meta["link_accepted"],
        tau_nmin=meta["tau_nmin"],
        tau_r=meta["tau_r"],
    )
