"""Observables: invariants, chi, intervals, records, trace CSV."""

import numpy as np
import pytest
from hypothesis import given, settings

from posetmc.observables import (
    CHI_ABANDONED,
    Trace,
    chi_layered,
    default_h0,
    height,
    interval_size_histogram,
    level_indices,
    levels,
    record,
    scalar_invariants,
)
from posetmc.poset import Poset, standard_poset
from posetmc.rng import RandomStream

from test_poset import random_posets


def test_height_chain_and_antichain():
    assert height(standard_poset("chain", 9)) == 9
    assert height(standard_poset("antichain", 9)) == 1


def test_random_kr_height_at_most_3():
    for seed in range(10):
        p = standard_poset("random_kr", 24, RandomStream(seed))
        assert height(p) <= 3


def test_random_kr_chi_characterization():
    # chi uses levels as layer proxies: it is 1 whenever the level partition
    # matches the construction's layers, but an adjacent-layer gap can demote
    # an element a level and break the non-adjacent condition, so chi=0
    # occurs too. Never abandoned (height <= 3 <= h0).
    seen = set()
    for seed in range(60):
        p = standard_poset("random_kr", 12, RandomStream(seed))
        value = chi_layered(p)
        assert value in (0, 1)
        seen.add(value)
    assert seen == {0, 1}


def test_levels_chain():
    assert levels(standard_poset("chain", 3)) == [{0}, {1}, {2}]


def test_levels_hand_example():
    p = Poset.from_relations(4, [(0, 1), (0, 2), (1, 3)], close=True)
    assert levels(p) == [{0}, {1, 2}, {3}]


def test_levels_antichain():
    assert levels(standard_poset("antichain", 4)) == [{0, 1, 2, 3}]


def test_scalar_invariants_chain4():
    assert scalar_invariants(standard_poset("chain", 4)) == (6, 3, 1.0, 0.75, 1, 1)


def test_scalar_invariants_antichain5():
    assert scalar_invariants(standard_poset("antichain", 5)) == (0, 0, 0.0, 0.0, 5, 5)


def test_linking_fraction_parity():
    # odd n uses n^2 - 1 in the denominator
    r_count, l_count, r, l, *_ = scalar_invariants(standard_poset("chain", 5))
    assert l == 4 * 4 / (25 - 1)


def test_chi_chain3_is_1():
    assert chi_layered(standard_poset("chain", 3)) == 1


def test_chi_isolated_element_breaks_condition():
    p = Poset.from_relations(4, [(0, 1), (1, 2)], close=True)  # element 3 isolated
    assert chi_layered(p) == 0


def test_chi_antichain_vacuous():
    assert chi_layered(standard_poset("antichain", 7)) == 1


def test_chi_abandoned_above_cutoff():
    assert chi_layered(standard_poset("chain", 9), h0=6) == CHI_ABANDONED
    assert chi_layered(standard_poset("chain", 9), h0=9) == 1


def test_default_h0_band():
    assert default_h0(12) == 6
    assert default_h0(13) == 7
    assert default_h0(24) == 7
    assert default_h0(25) == 6
    assert default_h0(9) == 6


def test_interval_hist_chain3():
    assert interval_size_histogram(standard_poset("chain", 3)) == {0: 2, 1: 1}


def test_interval_hist_antichain_empty():
    assert interval_size_histogram(standard_poset("antichain", 5)) == {}


def test_interval_hist_bipartite4():
    assert interval_size_histogram(standard_poset("bipartite", 4)) == {0: 4}


def test_record_chain2():
    rec = record(standard_poset("chain", 2), 0)
    assert (rec.height, rec.R, rec.r, rec.n_min, rec.n_max, rec.chi) == (2, 1, 1.0, 1, 1, 1)
    assert rec.level_sizes == (1, 1)


def test_record_antichain2():
    rec = record(standard_poset("antichain", 2), 0)
    assert (rec.height, rec.R, rec.r, rec.n_min, rec.n_max, rec.chi) == (1, 0, 0.0, 2, 2, 1)


def test_record_with_intervals():
    rec = record(standard_poset("chain", 3), 5, intervals=True)
    assert rec.interval_hist == {0: 2, 1: 1}
    assert rec.sweep == 5


@settings(max_examples=200, deadline=None)
@given(random_posets())
def test_record_consistent_with_parts(p):
    rec = record(p, 0)
    r_count, l_count, r, l, n_min, n_max = scalar_invariants(p)
    assert (rec.R, rec.L, rec.r, rec.l, rec.n_min, rec.n_max) == (
        r_count, l_count, r, l, n_min, n_max,
    )
    assert rec.height == height(p) == len(levels(p))
    assert sum(rec.level_sizes) == p.n
    assert rec.L <= rec.R
    # links are exactly the empty intervals
    hist = interval_size_histogram(p)
    assert hist.get(0, 0) == rec.L
    # N_min counts the first level
    assert rec.n_min == rec.level_sizes[0]


@settings(max_examples=100, deadline=None)
@given(random_posets())
def test_min_max_swap_under_reversal(p):
    rec = record(p, 0)
    rev = record(p.time_reversed(), 0)
    assert rev.n_min == rec.n_max and rev.n_max == rec.n_min
    assert rev.height == rec.height and rev.R == rec.R and rev.L == rec.L


def test_trace_csv_roundtrip(tmp_path):
    recs = [record(standard_poset("chain", 4), 0), record(standard_poset("antichain", 4), 1)]
    trace = Trace.from_records(4, recs)
    path = tmp_path / "t.csv"
    trace.write_csv(path)
    back = Trace.read_csv(path)
    assert back.n == 4
    assert np.array_equal(back.sweep, trace.sweep)
    assert np.array_equal(back.height, trace.height)
    assert np.array_equal(back.R, trace.R)
    assert np.array_equal(back.chi, trace.chi)
    assert np.array_equal(back.level_sizes[0][:4], trace.level_sizes[0][:4])
    header = path.read_text().splitlines()[0]
    assert header == "sweep,height,R,L,r,l,N_min,N_max,chi,level_sizes"


def test_trace_csv_abandoned_chi(tmp_path):
    p = standard_poset("chain", 9)
    trace = Trace.from_records(9, [record(p, 0, h0=6)])
    path = tmp_path / "t.csv"
    trace.write_csv(path)
    assert ",abandoned," in path.read_text().splitlines()[1]
    back = Trace.read_csv(path)
    assert back.chi[0] == CHI_ABANDONED


def test_trace_read_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        Trace.read_csv(path)


def test_trace_slice_and_concat():
    recs = [record(standard_poset("chain", 3), s) for s in range(5)]
    trace = Trace.from_records(3, recs)
    merged = Trace.concatenate([trace.slice(0, 2), trace.slice(2)])
    assert np.array_equal(merged.sweep, trace.sweep)
    assert len(trace.slice(3)) == 2
