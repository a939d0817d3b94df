#!/usr/bin/env python3
"""Probe equilibrium behavior across sizes to size the acceptance budgets.

Writes one JSON line per size to results/calibration.jsonl as runs finish,
so partial progress is visible. Heavy run outputs land in the shared result
cache and are reused by later analyses with the same parameters.
"""

import argparse
import json
import time
from pathlib import Path

import numpy as np

from posetmc.equilibrium import run_equilibrium


def summarize(res):
    r = res.r
    d = res.n_max.astype(np.int64) - res.n_min.astype(np.int64)
    absd = np.abs(d)
    vals, counts = np.unique(absd, return_counts=True)
    mode_absd = int(vals[np.argmax(counts)])
    hfr = {h: float(np.mean(res.height == h)) for h in range(2, 9)}
    rel_acc = res.relation_accepted / res.relation_attempted
    lnk_acc = res.link_accepted / res.link_attempted
    agreement = res.multi_start_agreement()
    return {
        "n": res.n,
        "sweeps": res.sweeps,
        "therm": res.therm_sweeps,
        "seed": res.seed,
        "samples": int(len(res.height)),
        "tau_nmin": round(res.tau_nmin, 2),
        "tau_r": round(res.tau_r, 2),
        "acc": round(res.acceptance_fraction, 4),
        "acc_rel": round(rel_acc, 4),
        "acc_link": round(lnk_acc, 4),
        "height_fracs": {k: round(v, 4) for k, v in hfr.items()},
        "mean_r": round(float(r.mean()), 4),
        "r_below_024": round(float(np.mean(r < 0.24)), 5),
        "r_mode_bin": round(r_mode(res), 4),
        "mode_absdiff": mode_absd,
        "mean_absdiff": round(float(absd.mean()), 2),
        "thermalized_at": agreement.sweep if agreement.thermalized else None,
    }


def r_mode(res, width=0.005):
    r = res.r
    bins = np.arange(0.0, 1.0 + width, width)
    counts, edges = np.histogram(r, bins=bins)
    i = int(np.argmax(counts))
    return float(0.5 * (edges[i] + edges[i + 1]))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--plan", default="probe", choices=["probe", "final"])
    ap.add_argument("--out", default="results/calibration.jsonl")
    args = ap.parse_args()

    if args.plan == "probe":
        plan = [
            (20, 3000, 500, 101),
            (40, 5000, 500, 102),
            (30, 30000, 1000, 103),
            (44, 15000, 500, 104),
            (48, 25000, 1000, 105),
            (52, 20000, 2000, 106),
            (56, 20000, 3000, 107),
            (58, 30000, 3500, 108),
        ]
    else:
        plan = [
            (56, 60000, 3000, 107),
            (58, 80000, 3500, 108),
        ]

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    for n, sweeps, therm, seed in plan:
        t0 = time.time()
        res = run_equilibrium(n, sweeps=sweeps, therm_sweeps=therm, seed=seed)
        info = summarize(res)
        info["wall_s"] = round(time.time() - t0, 1)
        with out.open("a") as fh:
            fh.write(json.dumps(info) + "\n")
        print(json.dumps(info), flush=True)


if __name__ == "__main__":
    main()
