"""Order invariants measured per sweep, and the trace container they live in.

The layeredness indicator chi uses the level partition as a proxy for the
layer partition: it is 1 iff every pair of elements two or more levels apart
is related, 0 otherwise, and "abandoned" (recorded as -1) when the poset has
more levels than the configured cutoff h0.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .poset import Poset, iter_bits

#: chi value recorded when the level count exceeded the check cutoff.
CHI_ABANDONED = -1


def default_h0(n: int) -> int:
    """Level-count cutoff for the chi check (7 in the 13..24 band, else 6)."""
    return 7 if 13 <= n <= 24 else 6


def ordering_fraction(n: int, relation_count: int) -> float:
    return relation_count / (n * (n - 1) // 2) if n >= 2 else 0.0


def linking_fraction(n: int, link_count: int) -> float:
    denom = n * n if n % 2 == 0 else n * n - 1
    return 4 * link_count / denom if denom else 0.0


def level_indices(p: Poset) -> list[int]:
    """level_indices(p)[x] = length of the longest chain terminating at x."""
    lv = [0] * p.n
    for x in range(p.n):  # ascending labels: every predecessor is already done
        best = 0
        for z in iter_bits(p.down[x]):
            if lv[z] > best:
                best = lv[z]
        lv[x] = best + 1
    return lv


def levels(p: Poset) -> list[set[int]]:
    """Partition of [n] into levels L1, L2, ... (L1 = empty-past elements)."""
    lv = level_indices(p)
    out: list[set[int]] = [set() for _ in range(max(lv))]
    for x, m in enumerate(lv):
        out[m - 1].add(x)
    return out


def height(p: Poset) -> int:
    """Length of the longest chain = number of levels."""
    return max(level_indices(p))


def scalar_invariants(p: Poset) -> tuple[int, int, float, float, int, int]:
    """(R, L, r, l, N_min, N_max) for one poset."""
    r_count = p.relation_count()
    l_count = p.link_count()
    n_min = sum(1 for x in range(p.n) if p.down[x] == 0)
    n_max = sum(1 for x in range(p.n) if p.up[x] == 0)
    return (
        r_count,
        l_count,
        ordering_fraction(p.n, r_count),
        linking_fraction(p.n, l_count),
        n_min,
        n_max,
    )


def chi_layered(p: Poset, h0: int | None = None) -> int:
    """1 iff all pairs in non-adjacent levels are related; -1 once the level
    count exceeds h0 (check abandoned). Adjacent-level pairs are free."""
    if h0 is None:
        h0 = default_h0(p.n)
    lv = level_indices(p)
    h = max(lv)
    if h > h0:
        return CHI_ABANDONED
    masks = [0] * (h + 3)
    for x, m in enumerate(lv):
        masks[m] |= 1 << x
    suffix = [0] * (h + 4)
    for j in range(h, 0, -1):
        suffix[j] = suffix[j + 1] | masks[j]
    for x in range(p.n):
        if lv[x] + 2 <= h and (suffix[lv[x] + 2] & ~p.up[x]):
            return 0
    return 1


def interval_size_histogram(p: Poset) -> dict[int, int]:
    """Counts of |I(x,y)| = |fut(x) & past(y)| over all related pairs x < y."""
    hist: dict[int, int] = {}
    for x in range(p.n):
        for y in iter_bits(p.up[x]):
            k = (p.up[x] & p.down[y]).bit_count()
            hist[k] = hist.get(k, 0) + 1
    return hist


@dataclass
class ObservableRecord:
    sweep: int
    height: int
    R: int
    L: int
    r: float
    l: float
    n_min: int
    n_max: int
    level_sizes: tuple[int, ...]
    chi: int
    interval_hist: dict[int, int] | None = None


def record(p: Poset, sweep: int, h0: int | None = None, intervals: bool = False) -> ObservableRecord:
    """Full per-sweep snapshot of one poset."""
    r_count, l_count, r, l, n_min, n_max = scalar_invariants(p)
    lv = level_indices(p)
    h = max(lv)
    sizes = [0] * h
    for m in lv:
        sizes[m - 1] += 1
    return ObservableRecord(
        sweep=sweep,
        height=h,
        R=r_count,
        L=l_count,
        r=r,
        l=l,
        n_min=n_min,
        n_max=n_max,
        level_sizes=tuple(sizes),
        chi=chi_layered(p, h0),
        interval_hist=interval_size_histogram(p) if intervals else None,
    )


TRACE_COLUMNS = ("sweep", "height", "R", "L", "r", "l", "N_min", "N_max", "chi", "level_sizes")


@dataclass
class Trace:
    """Column-array form of a per-sweep observable series for one chain."""

    n: int
    sweep: np.ndarray
    height: np.ndarray
    R: np.ndarray
    L: np.ndarray
    n_min: np.ndarray
    n_max: np.ndarray
    chi: np.ndarray
    level_sizes: np.ndarray  # uint16, zero-padded rows
    intervals: np.ndarray | None = None  # optional [records, n+1] size counts

    @property
    def r(self) -> np.ndarray:
        return self.R / (self.n * (self.n - 1) // 2)

    @property
    def l(self) -> np.ndarray:
        denom = self.n * self.n if self.n % 2 == 0 else self.n * self.n - 1
        return 4 * self.L / denom

    def __len__(self) -> int:
        return len(self.sweep)

    def record_at(self, i: int) -> ObservableRecord:
        sizes = tuple(int(v) for v in self.level_sizes[i][: self.height[i]])
        return ObservableRecord(
            sweep=int(self.sweep[i]),
            height=int(self.height[i]),
            R=int(self.R[i]),
            L=int(self.L[i]),
            r=float(self.r[i]),
            l=float(self.l[i]),
            n_min=int(self.n_min[i]),
            n_max=int(self.n_max[i]),
            level_sizes=sizes,
            chi=int(self.chi[i]),
        )

    def slice(self, start: int, stop: int | None = None) -> "Trace":
        sl = np.s_[start:stop]
        return Trace(
            self.n,
            self.sweep[sl],
            self.height[sl],
            self.R[sl],
            self.L[sl],
            self.n_min[sl],
            self.n_max[sl],
            self.chi[sl],
            self.level_sizes[sl],
            None if self.intervals is None else self.intervals[sl],
        )

    @classmethod
    def concatenate(cls, parts: list["Trace"]) -> "Trace":
        n = parts[0].n
        width = max(p.level_sizes.shape[1] for p in parts)
        padded = [
            np.pad(p.level_sizes, ((0, 0), (0, width - p.level_sizes.shape[1])))
            for p in parts
        ]
        intervals = None
        if all(p.intervals is not None for p in parts):
            intervals = np.concatenate([p.intervals for p in parts])
        return cls(
            n,
            np.concatenate([p.sweep for p in parts]),
            np.concatenate([p.height for p in parts]),
            np.concatenate([p.R for p in parts]),
            np.concatenate([p.L for p in parts]),
            np.concatenate([p.n_min for p in parts]),
            np.concatenate([p.n_max for p in parts]),
            np.concatenate([p.chi for p in parts]),
            np.concatenate(padded),
            intervals,
        )

    @classmethod
    def from_records(cls, n: int, records: list[ObservableRecord]) -> "Trace":
        width = max((len(r.level_sizes) for r in records), default=1)
        sizes = np.zeros((len(records), width), np.uint16)
        for i, rec in enumerate(records):
            sizes[i, : len(rec.level_sizes)] = rec.level_sizes
        return cls(
            n,
            np.array([r.sweep for r in records], np.int64),
            np.array([r.height for r in records], np.int32),
            np.array([r.R for r in records], np.int64),
            np.array([r.L for r in records], np.int64),
            np.array([r.n_min for r in records], np.int32),
            np.array([r.n_max for r in records], np.int32),
            np.array([r.chi for r in records], np.int8),
            sizes,
        )

    # -- trace CSV: sweep,height,R,L,r,l,N_min,N_max,chi,level_sizes ---------

    def write_csv(self, path, append: bool = False) -> None:
        mode = "a" if append else "w"
        with open(path, mode, newline="") as fh:
            writer = csv.writer(fh)
            if not append:
                writer.writerow(TRACE_COLUMNS)
            r_arr = self.r
            l_arr = self.l
            for i in range(len(self)):
                chi = int(self.chi[i])
                writer.writerow(
                    [
                        int(self.sweep[i]),
                        int(self.height[i]),
                        int(self.R[i]),
                        int(self.L[i]),
                        repr(float(r_arr[i])),
                        repr(float(l_arr[i])),
                        int(self.n_min[i]),
                        int(self.n_max[i]),
                        "abandoned" if chi == CHI_ABANDONED else chi,
                        ";".join(str(int(v)) for v in self.level_sizes[i][: self.height[i]]),
                    ]
                )

    @classmethod
    def read_csv(cls, path, n: int | None = None) -> "Trace":
        rows = []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if tuple(header) != TRACE_COLUMNS:
                raise ValueError(f"unexpected trace header in {path}: {header}")
            for row in reader:
                rows.append(row)
        if not rows:
            raise ValueError(f"empty trace file: {path}")
        count = len(rows)
        heights = np.array([int(r[1]) for r in rows], np.int32)
        width = int(heights.max())
        sizes = np.zeros((count, width), np.uint16)
        for i, row in enumerate(rows):
            parts = [int(v) for v in row[9].split(";") if v]
            sizes[i, : len(parts)] = parts
        if n is None:
            n = int(sizes[0].sum())
        return cls(
            n,
            np.array([int(r[0]) for r in rows], np.int64),
            heights,
            np.array([int(r[2]) for r in rows], np.int64),
            np.array([int(r[3]) for r in rows], np.int64),
            np.array([int(r[6]) for r in rows], np.int32),
            np.array([int(r[7]) for r in rows], np.int32),
            np.array(
                [CHI_ABANDONED if r[8] == "abandoned" else int(r[8]) for r in rows],
                np.int8,
            ),
            sizes,
        )
