"""Enumeration: dual oracles, the extension recursion, exact distributions."""

import numpy as np
import pytest

from posetmc.enumeration import (
    BRUTE_FORCE_BOUND,
    brute_force_count,
    enumerate_posets,
    exact_distribution,
    ideal_count_rows,
    iter_order_ideals,
    order_ideals,
    sum_order_ideals,
)
from posetmc.observables import CHI_ABANDONED
from posetmc.poset import Poset, standard_poset, transitive_closure
from posetmc.rng import RandomStream


def brute_force_python(n):
    """Third route for tiny n: filter all upper-triangular matrices in Python."""
    m = n * (n - 1) // 2
    pairs = [(x, y) for y in range(n) for x in range(y)]
    count = 0
    for mask in range(1 << m):
        rows = [0] * n
        for b in range(m):
            if (mask >> b) & 1:
                x, y = pairs[b]
                rows[x] |= 1 << y
        if transitive_closure(n, rows) == rows:
            count += 1
    return count


@pytest.mark.parametrize("n", range(1, 8))
def test_dual_oracle_counts_agree(n):
    assert enumerate_posets(n) == brute_force_count(n)


@pytest.mark.parametrize("n", range(1, 5))
def test_python_brute_force_agrees(n):
    assert brute_force_python(n) == enumerate_posets(n)


@pytest.mark.parametrize("n", range(1, 7))
def test_visitor_walk_matches_fast_count(n):
    seen = []
    total = enumerate_posets(n, visitor=seen.append)
    assert total == len(seen) == enumerate_posets(n)
    # no duplicates, all valid
    assert len({p.key() for p in seen}) == len(seen)
    assert all(p.violations() == [] for p in seen)


def test_small_counts_frozen():
    # values computed by the oracles above (three independent routes)
    assert [enumerate_posets(n) for n in range(1, 7)] == [1, 2, 7, 40, 357, 4824]


@pytest.mark.parametrize("n", range(2, 9))
def test_extension_recursion_identity(n):
    assert enumerate_posets(n) == sum_order_ideals(n - 1)


def test_recursion_identity_via_python_ideals():
    # fully independent right-hand side at n <= 7
    for n in (2, 3, 4, 5, 6, 7):
        total = 0

        def visit(p):
            nonlocal total
            total += order_ideals(p)

        enumerate_posets(n - 1, visitor=visit)
        assert total == enumerate_posets(n)


def test_order_ideals_examples():
    assert order_ideals(standard_poset("antichain", 2)) == 4
    assert order_ideals(standard_poset("chain", 2)) == 3
    for k in (1, 3, 6):
        assert order_ideals(standard_poset("chain", k)) == k + 1


def test_iter_order_ideals_matches_count():
    for kind, n in (("chain", 5), ("antichain", 4), ("bipartite", 5)):
        p = standard_poset(kind, n)
        masks = list(iter_order_ideals(p))
        assert len(masks) == order_ideals(p)
        assert len(set(masks)) == len(masks)
        for mask in masks:  # downward closure
            for x in range(p.n):
                if (mask >> x) & 1:
                    assert p.down[x] & ~mask == 0


def test_python_vs_compiled_ideal_counts_small():
    for n in range(1, 7):
        posets = []
        enumerate_posets(n, visitor=posets.append)
        for p in posets:
            assert order_ideals(p) == ideal_count_rows(p.n, p.down)


def test_python_vs_compiled_ideal_counts_random_larger():
    for seed in range(30):
        p = standard_poset("random_kr", 9, RandomStream(seed))
        assert order_ideals(p) == ideal_count_rows(p.n, p.down)


def test_bounds_enforced():
    with pytest.raises(ValueError):
        enumerate_posets(10)
    with pytest.raises(ValueError):
        enumerate_posets(0)
    with pytest.raises(ValueError):
        brute_force_count(BRUTE_FORCE_BOUND + 1)
    with pytest.raises(ValueError):
        exact_distribution(12, "height")
    with pytest.raises(ValueError):
        exact_distribution(3, "widgets")


def test_exact_distribution_height_n2():
    d = exact_distribution(2, "height")
    assert d.counts == {1: 1, 2: 1} and d.total == 2


def test_exact_distribution_height_n3():
    d = exact_distribution(3, "height")
    assert d.counts == {1: 1, 2: 5, 3: 1} and d.total == 7


def test_exact_distribution_R_n3():
    d = exact_distribution(3, "R")
    # 7 posets: empty, three 1-relation, two 2-relation, the chain
    assert d.counts == {0: 1, 1: 3, 2: 2, 3: 1}


def test_exact_min_max_distributions_coincide():
    # time reversal is a bijection swapping N_min and N_max
    for n in range(2, 8):
        assert exact_distribution(n, "N_min").counts == exact_distribution(n, "N_max").counts


def test_exact_chi_n3():
    d = exact_distribution(3, "chi", h0=6)
    # hand check over the 7 posets on 3 elements: only the two-level posets
    # with an unrelated non-adjacent pair fail; of the 7, exactly one does
    # ({0<1,1<2,0<2} is chi=1, antichain 1, single-relation and vee/wedge...)
    assert d.counts.get(CHI_ABANDONED, 0) == 0
    assert sum(d.counts.values()) == 7
    chi1 = d.counts[1]
    # independent recount in python
    from posetmc.observables import chi_layered

    posets = []
    enumerate_posets(3, visitor=posets.append)
    assert chi1 == sum(1 for p in posets if chi_layered(p, 6) == 1)


def test_exact_chi_abandoned_bucket():
    d = exact_distribution(7, "chi", h0=6)
    assert d.counts[CHI_ABANDONED] == 1  # only the 7-chain exceeds 6 levels


def test_exact_distribution_python_crosscheck_n5():
    posets = []
    enumerate_posets(5, visitor=posets.append)
    from posetmc.observables import height as height_of

    by_height = {}
    for p in posets:
        by_height[height_of(p)] = by_height.get(height_of(p), 0) + 1
    assert exact_distribution(5, "height").counts == by_height


def test_exact_distribution_csv(tmp_path):
    d = exact_distribution(3, "height")
    path = tmp_path / "d.csv"
    d.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "value,count,fraction"
    assert lines[1].startswith("1,1,")
    total = sum(int(line.split(",")[1]) for line in lines[1:])
    assert total == 7


def test_fractions_sum_to_one():
    d = exact_distribution(6, "R")
    assert abs(sum(d.fractions().values()) - 1.0) < 1e-12
