"""Compiled chain loop: draw-for-draw parity with the plain-Python path."""

import numpy as np
import pytest

from posetmc.kernel import KernelChain, arrays_to_poset, poset_to_arrays, words_for
from posetmc.moves import SweepStats, mcmc_step
from posetmc.observables import record
from posetmc.poset import standard_poset
from posetmc.rng import RandomStream


def python_reference(n, start, seed, nsweeps, moves, h0=None, intervals=False):
    stream = RandomStream(seed)
    p = standard_poset(start, n, stream)
    stats = SweepStats()
    recs = []
    for s in range(nsweeps):
        for _ in range(moves):
            stats.add(mcmc_step(p, stream))
        recs.append(record(p, s + 1, h0=h0, intervals=intervals))
    return p, stats, recs


CASES = [
    (2, "antichain", 25, 3),
    (5, "chain", 60, 20),
    (9, "bipartite", 40, 100),
    (9, "random_kr", 40, 100),
    (21, "chain", 8, 400),
    (70, "antichain", 3, 600),  # two 64-bit words per row
]


@pytest.mark.parametrize("n,start,nsweeps,moves", CASES,
                         ids=[f"n{c[0]}-{c[1]}" for c in CASES])
def test_kernel_matches_python_reference(n, start, nsweeps, moves):
    seed = 1000 + n
    p_ref, stats_ref, recs = python_reference(n, start, seed, nsweeps, moves)

    stream = RandomStream(seed)
    p0 = standard_poset(start, n, stream)
    chain = KernelChain(p0, stream, moves_per_sweep=moves)
    trace = chain.run(nsweeps)

    assert chain.poset() == p_ref
    assert chain.rng().state() == python_rng_state(seed, n, start, nsweeps * moves)
    assert chain.stats.attempted == stats_ref.attempted
    assert chain.stats.accepted == stats_ref.accepted
    assert chain.stats.relation_accepted == stats_ref.relation_accepted
    assert chain.stats.link_accepted == stats_ref.link_accepted
    for i, rec in enumerate(recs):
        assert trace.sweep[i] == rec.sweep
        assert trace.height[i] == rec.height
        assert trace.R[i] == rec.R
        assert trace.L[i] == rec.L
        assert trace.n_min[i] == rec.n_min
        assert trace.n_max[i] == rec.n_max
        assert trace.chi[i] == rec.chi
        assert tuple(int(v) for v in trace.level_sizes[i][: rec.height]) == rec.level_sizes


def python_rng_state(seed, n, start, nmoves):
    stream = RandomStream(seed)
    p = standard_poset(start, n, stream)
    for _ in range(nmoves):
        mcmc_step(p, stream)
    return stream.state()


def test_kernel_interval_recording_matches_python():
    n, moves = 9, 50
    stream = RandomStream(4)
    chain = KernelChain(standard_poset("chain", n), stream, moves_per_sweep=moves,
                        intervals=True)
    trace = chain.run(10)
    _, _, recs = python_reference(n, "chain", 4, 10, moves, intervals=True)
    for i, rec in enumerate(recs):
        hist = {k: int(v) for k, v in enumerate(trace.intervals[i]) if v}
        assert hist == rec.interval_hist


def test_chunked_run_equals_single_run():
    mk = lambda: KernelChain(standard_poset("bipartite", 12), RandomStream(8))
    whole = mk()
    t_whole = whole.run(30)
    parts = mk()
    pieces = [parts.run(10) for _ in range(3)]
    assert parts.poset() == whole.poset()
    assert parts.rng().state() == whole.rng().state()
    assert vars(parts.stats) == vars(whole.stats)
    merged = np.concatenate([p.R for p in pieces])
    assert np.array_equal(merged, t_whole.R)
    assert np.array_equal(np.concatenate([p.sweep for p in pieces]), t_whole.sweep)


def test_record_interval_thins_rows():
    chain = KernelChain(standard_poset("chain", 10), RandomStream(2))
    trace = chain.run(20, record_interval=5)
    assert list(trace.sweep) == [5, 10, 15, 20]
    with pytest.raises(ValueError):
        chain.run(7, record_interval=2)


def test_array_roundtrip():
    for n in (1, 5, 64, 65, 100):
        p = standard_poset("chain", n)
        up, down = poset_to_arrays(p)
        assert up.shape == (n, words_for(n))
        assert arrays_to_poset(n, up, down) == p


def test_kernel_rejects_n1():
    with pytest.raises(ValueError):
        KernelChain(standard_poset("chain", 1), RandomStream(0))


@pytest.mark.parametrize("n", [15, 30])
def test_long_runs_preserve_validity(n):
    chain = KernelChain(standard_poset("bipartite", n), RandomStream(n))
    chain.run(50)
    assert chain.poset().violations() == []
