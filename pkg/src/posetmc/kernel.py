"""Compiled chain loop: same moves, same draw sequence as the Python path.

Rows are packed into uint64 words (W words per row), so every cone
intersection, subset test and link test in the move inner loop is a handful
of word operations. The RNG is the identical combined Tausworthe update as
``rng.RandomStream``; the per-move draw protocol (move-kind word, then pair
word, rejection sampling in both) is frozen so the compiled and plain paths
produce bit-identical trajectories from equal seeds — a property the tests
rely on.

Functions here release the GIL, so independent chains can run on threads.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .moves import SweepStats, default_moves_per_sweep
from .observables import Trace, default_h0
from .poset import Poset
from .rng import RandomStream

U0 = np.uint64(0)
U1 = np.uint64(1)
_P1 = np.uint64(0x5555555555555555)
_P2 = np.uint64(0x3333333333333333)
_P4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_PM = np.uint64(0x0101010101010101)


@njit(cache=True, nogil=True, inline="always")
def _popcount(x):
    x = x - ((x >> 1) & _P1)
    x = (x & _P2) + ((x >> 2) & _P2)
    x = (x + (x >> 4)) & _P4
    return np.int64((x * _PM) >> 56)


@njit(cache=True, nogil=True, inline="always")
def _taus_next(state):
    # state: int64[4] = (s1, s2, s3, draw count); values stay below 2^32
    s1 = state[0]
    s2 = state[1]
    s3 = state[2]
    s1 = (((s1 & 4294967294) << 12) & 0xFFFFFFFF) ^ ((((s1 << 13) & 0xFFFFFFFF) ^ s1) >> 19)
    s2 = (((s2 & 4294967288) << 4) & 0xFFFFFFFF) ^ ((((s2 << 2) & 0xFFFFFFFF) ^ s2) >> 25)
    s3 = (((s3 & 4294967280) << 17) & 0xFFFFFFFF) ^ ((((s3 << 3) & 0xFFFFFFFF) ^ s3) >> 11)
    state[0] = s1
    state[1] = s2
    state[2] = s3
    state[3] += 1
    return s1 ^ s2 ^ s3


@njit(cache=True, nogil=True, inline="always")
def _uniform_index(state, k):
    if k == 1:
        return 0
    limit = (4294967296 // k) * k
    while True:
        w = _taus_next(state)
        if w < limit:
            return w % k


@njit(cache=True, nogil=True)
def _relation_move(up, down, w_words, x, y):
    """0 = noop, 1 = added, 2 = removed."""
    wy = y >> 6
    bity = U1 << np.uint64(y & 63)
    wx = x >> 6
    bitx = U1 << np.uint64(x & 63)
    if up[x, wy] & bity:
        inter = U0
        for k in range(w_words):
            inter |= up[x, k] & down[y, k]
        if inter != U0:
            return 0  # related but not a link
        up[x, wy] ^= bity
        down[y, wx] ^= bitx
        return 2
    for k in range(w_words):
        if down[x, k] & ~down[y, k]:
            return 0
        if up[y, k] & ~up[x, k]:
            return 0
    up[x, wy] |= bity
    down[y, wx] |= bitx
    return 1


@njit(cache=True, nogil=True)
def _link_move(up, down, w_words, x, y, amask, bmask):
    """0 = noop, 1 = added, 2 = removed. amask/bmask are scratch rows."""
    wy = y >> 6
    bity = U1 << np.uint64(y & 63)
    wx = x >> 6
    bitx = U1 << np.uint64(x & 63)
    for k in range(w_words):
        amask[k] = down[x, k]
        bmask[k] = up[y, k]
    amask[wx] |= bitx
    bmask[wy] |= bity

    if up[x, wy] & bity:
        inter = U0
        for k in range(w_words):
            inter |= up[x, k] & down[y, k]
        if inter != U0:
            return 0  # related but not a link
        # Drop the Hasse edge: a cone-to-cone relation survives only with a
        # witness chain through an element outside both inclusive cones.
        # (Witness edges are never cone-to-cone, so in-place removal is safe.)
        for kz in range(w_words):
            mz = amask[kz]
            while mz:
                lowz = mz & (~mz + U1)
                z = (kz << 6) + _popcount(lowz - U1)
                for kw in range(w_words):
                    mw = up[z, kw] & bmask[kw]
                    while mw:
                        loww = mw & (~mw + U1)
                        w = (kw << 6) + _popcount(loww - U1)
                        witness = U0
                        for t in range(w_words):
                            witness |= up[z, t] & down[w, t] & ~(amask[t] | bmask[t])
                        if witness == U0:
                            up[z, kw] ^= loww
                            down[w, z >> 6] ^= U1 << np.uint64(z & 63)
                        mw ^= loww
                mz ^= lowz
        return 2

    # suitable test: no link may run from incpast(x) into incfut(y)
    for kz in range(w_words):
        mz = amask[kz]
        while mz:
            lowz = mz & (~mz + U1)
            z = (kz << 6) + _popcount(lowz - U1)
            for kw in range(w_words):
                mw = up[z, kw] & bmask[kw]
                while mw:
                    loww = mw & (~mw + U1)
                    w = (kw << 6) + _popcount(loww - U1)
                    inter = U0
                    for t in range(w_words):
                        inter |= up[z, t] & down[w, t]
                    if inter == U0:
                        return 0  # (z, w) is a link
                    mw ^= loww
            mz ^= lowz
    for kz in range(w_words):
        mz = amask[kz]
        while mz:
            lowz = mz & (~mz + U1)
            z = (kz << 6) + _popcount(lowz - U1)
            for t in range(w_words):
                up[z, t] |= bmask[t]
            mz ^= lowz
    for kw in range(w_words):
        mw = bmask[kw]
        while mw:
            loww = mw & (~mw + U1)
            w = (kw << 6) + _popcount(loww - U1)
            for t in range(w_words):
                down[w, t] |= amask[t]
            mw ^= loww
    return 1


@njit(cache=True, nogil=True)
def _snapshot(up, down, n, w_words, h0, level, lvlmask, suffix, acc, want_intervals, interval_row):
    """(height, R, L, nmin, nmax, chi) of the current state; fills level[]."""
    height = 0
    for z in range(n):
        best = 0
        for k in range(w_words):
            m = down[z, k]
            while m:
                low = m & (~m + U1)
                v = (k << 6) + _popcount(low - U1)
                if level[v] > best:
                    best = level[v]
                m ^= low
        level[z] = best + 1
        if level[z] > height:
            height = level[z]

    r_count = np.int64(0)
    n_min = 0
    n_max = 0
    for z in range(n):
        up_empty = True
        down_empty = True
        for k in range(w_words):
            r_count += _popcount(up[z, k])
            if up[z, k] != U0:
                up_empty = False
            if down[z, k] != U0:
                down_empty = False
        if up_empty:
            n_max += 1
        if down_empty:
            n_min += 1

    l_count = np.int64(0)
    for z in range(n):
        for t in range(w_words):
            acc[t] = U0
        for k in range(w_words):
            m = up[z, k]
            while m:
                low = m & (~m + U1)
                w = (k << 6) + _popcount(low - U1)
                for t in range(w_words):
                    acc[t] |= up[w, t]
                m ^= low
        for t in range(w_words):
            l_count += _popcount(up[z, t] & ~acc[t])

    if height > h0:
        chi = -1
    else:
        for j in range(height + 3):
            for t in range(w_words):
                lvlmask[j, t] = U0
        for z in range(n):
            lvlmask[level[z], z >> 6] |= U1 << np.uint64(z & 63)
        for t in range(w_words):
            suffix[height + 1, t] = U0
            suffix[height + 2, t] = U0
        for j in range(height, 0, -1):
            for t in range(w_words):
                suffix[j, t] = suffix[j + 1, t] | lvlmask[j, t]
        chi = 1
        for z in range(n):
            if level[z] + 2 <= height:
                bad = U0
                for t in range(w_words):
                    bad |= suffix[level[z] + 2, t] & ~up[z, t]
                if bad != U0:
                    chi = 0
                    break

    if want_intervals:
        for z in range(n):
            for k in range(w_words):
                m = up[z, k]
                while m:
                    low = m & (~m + U1)
                    w = (k << 6) + _popcount(low - U1)
                    size = np.int64(0)
                    for t in range(w_words):
                        size += _popcount(up[z, t] & down[w, t])
                    interval_row[size] += 1
                    m ^= low

    return height, r_count, l_count, n_min, n_max, chi


@njit(cache=True, nogil=True)
def run_sweeps(
    up,
    down,
    n,
    state,
    nsweeps,
    moves_per_sweep,
    sweep_offset,
    record_interval,
    h0,
    want_intervals,
    out_scalars,
    out_levels,
    out_intervals,
    out_accept,
):
    """Advance the chain nsweeps, recording every record_interval-th sweep.

    out_scalars rows: (sweep, height, R, L, N_min, N_max, chi)
    out_accept rows: per-window (rel att, rel acc, link att, link acc).
    """
    w_words = up.shape[1]
    npairs = n * (n - 1) // 2
    amask = np.zeros(w_words, np.uint64)
    bmask = np.zeros(w_words, np.uint64)
    acc = np.zeros(w_words, np.uint64)
    level = np.zeros(n, np.int64)
    lvlmask = np.zeros((n + 3, w_words), np.uint64)
    suffix = np.zeros((n + 4, w_words), np.uint64)

    rec = 0
    rel_att = np.int64(0)
    rel_acc = np.int64(0)
    lnk_att = np.int64(0)
    lnk_acc = np.int64(0)
    for s in range(nsweeps):
        for _ in range(moves_per_sweep):
            kind = _uniform_index(state, 2)
            i = _uniform_index(state, npairs)
            y = int((1.0 + math.sqrt(1.0 + 8.0 * i)) * 0.5)
            while y * (y - 1) // 2 > i:
                y -= 1
            while (y + 1) * y // 2 <= i:
                y += 1
            x = i - y * (y - 1) // 2
            if kind == 0:
                act = _relation_move(up, down, w_words, x, y)
                rel_att += 1
                if act != 0:
                    rel_acc += 1
            else:
                act = _link_move(up, down, w_words, x, y, amask, bmask)
                lnk_att += 1
                if act != 0:
                    lnk_acc += 1
        if (s + 1) % record_interval == 0:
            interval_row = out_intervals[rec] if want_intervals else out_intervals[0]
            height, r_count, l_count, n_min, n_max, chi = _snapshot(
                up, down, n, w_words, h0, level, lvlmask, suffix, acc,
                want_intervals, interval_row,
            )
            out_scalars[rec, 0] = sweep_offset + s + 1
            out_scalars[rec, 1] = height
            out_scalars[rec, 2] = r_count
            out_scalars[rec, 3] = l_count
            out_scalars[rec, 4] = n_min
            out_scalars[rec, 5] = n_max
            out_scalars[rec, 6] = chi
            for j in range(n):
                out_levels[rec, j] = 0
            for z in range(n):
                out_levels[rec, level[z] - 1] += 1
            out_accept[rec, 0] = rel_att
            out_accept[rec, 1] = rel_acc
            out_accept[rec, 2] = lnk_att
            out_accept[rec, 3] = lnk_acc
            rel_att = np.int64(0)
            rel_acc = np.int64(0)
            lnk_att = np.int64(0)
            lnk_acc = np.int64(0)
            rec += 1
    return rec


def words_for(n: int) -> int:
    return (n + 63) // 64


def poset_to_arrays(p: Poset) -> tuple[np.ndarray, np.ndarray]:
    w_words = words_for(p.n)
    up = np.zeros((p.n, w_words), np.uint64)
    down = np.zeros((p.n, w_words), np.uint64)
    mask = (1 << 64) - 1
    for x in range(p.n):
        for k in range(w_words):
            up[x, k] = (p.up[x] >> (64 * k)) & mask
            down[x, k] = (p.down[x] >> (64 * k)) & mask
    return up, down


def arrays_to_poset(n: int, up: np.ndarray, down: np.ndarray) -> Poset:
    w_words = up.shape[1]
    up_rows = [0] * n
    down_rows = [0] * n
    for x in range(n):
        for k in range(w_words):
            up_rows[x] |= int(up[x, k]) << (64 * k)
            down_rows[x] |= int(down[x, k]) << (64 * k)
    return Poset(n, up_rows, down_rows)


class KernelChain:
    """One chain: poset state + RNG state, advanced by the compiled loop."""

    def __init__(
        self,
        poset: Poset,
        stream: RandomStream,
        moves_per_sweep: int | None = None,
        h0: int | None = None,
        intervals: bool = False,
    ):
        self.n = poset.n
        if self.n < 2:
            raise ValueError("chains need n >= 2")
        self.up, self.down = poset_to_arrays(poset)
        self.state = np.array([stream.s1, stream.s2, stream.s3, stream.draws], np.int64)
        self.moves_per_sweep = moves_per_sweep or default_moves_per_sweep(self.n)
        self.h0 = default_h0(self.n) if h0 is None else h0
        self.intervals = intervals
        self.sweep = 0
        self.stats = SweepStats()

    def run(self, nsweeps: int, record_interval: int = 1) -> Trace:
        """Advance nsweeps; returns the newly recorded trace rows."""
        if nsweeps % record_interval:
            raise ValueError("nsweeps must be a multiple of record_interval")
        nrows = nsweeps // record_interval
        out_scalars = np.zeros((nrows, 7), np.int64)
        out_levels = np.zeros((nrows, self.n), np.uint16)
        out_intervals = np.zeros((nrows if self.intervals else 1, self.n + 1), np.int64)
        out_accept = np.zeros((nrows, 4), np.int64)
        rec = run_sweeps(
            self.up,
            self.down,
            self.n,
            self.state,
            nsweeps,
            self.moves_per_sweep,
            self.sweep,
            record_interval,
            self.h0,
            self.intervals,
            out_scalars,
            out_levels,
            out_intervals,
            out_accept,
        )
        self.sweep += nsweeps
        self.stats.relation_attempted += int(out_accept[:rec, 0].sum())
        self.stats.relation_accepted += int(out_accept[:rec, 1].sum())
        self.stats.link_attempted += int(out_accept[:rec, 2].sum())
        self.stats.link_accepted += int(out_accept[:rec, 3].sum())
        self.stats.attempted = self.stats.relation_attempted + self.stats.link_attempted
        self.stats.accepted = self.stats.relation_accepted + self.stats.link_accepted
        return Trace(
            self.n,
            out_scalars[:rec, 0].copy(),
            out_scalars[:rec, 1].astype(np.int32),
            out_scalars[:rec, 2].copy(),
            out_scalars[:rec, 3].copy(),
            out_scalars[:rec, 4].astype(np.int32),
            out_scalars[:rec, 5].astype(np.int32),
            out_scalars[:rec, 6].astype(np.int8),
            out_levels[:rec].copy(),
            out_intervals[:rec].copy() if self.intervals else None,
        )

    def poset(self) -> Poset:
        return arrays_to_poset(self.n, self.up, self.down)

    def rng(self) -> RandomStream:
        stream = RandomStream.__new__(RandomStream)
        stream.s1, stream.s2, stream.s3 = (int(v) for v in self.state[:3])
        stream.draws = int(self.state[3])
        return stream
