"""Oracle-vs-chain validation pipeline, including the negative control."""

import numpy as np
import pytest

from posetmc.enumeration import exact_distribution
from posetmc.moves import link_move, relation_move
from posetmc.poset import standard_poset
from posetmc.rng import RandomStream
from posetmc.validation import compare_to_exact, run_validation


def test_validation_passes_at_n3():
    report = run_validation(3, samples=5000, seed=1)
    assert report.passed
    assert report.worst.deviation <= 3.0
    assert "PASS" in report.summary()


def test_validation_passes_at_n5():
    report = run_validation(5, samples=5000, seed=2)
    assert report.passed


def test_validation_bounds():
    with pytest.raises(ValueError):
        run_validation(12)
    with pytest.raises(ValueError):
        run_validation(5, samples=10)


def test_resolvable_bins_only():
    report = run_validation(3, samples=2000, seed=3)
    assert all(c.exact_fraction >= report.min_fraction for c in report.comparisons)


def broken_chain_samples(n, sweeps, seed):
    """Chain with the suitable-pair check disabled: stationary distribution
    is biased toward relation-heavy posets, so validation must fail."""
    rng = RandomStream(seed)
    p = standard_poset("antichain", n)
    npairs = n * (n - 1) // 2
    r_values = []
    h_values = []
    from posetmc.observables import height

    for s in range(sweeps):
        for _ in range(60):
            kind = rng.uniform_index(2)
            i = rng.uniform_index(npairs)
            from posetmc.moves import decode_pair

            x, y = decode_pair(i)
            if kind == 0:
                relation_move(p, x, y)
            else:
                link_move(p, x, y, skip_suitable_check=True)
        r_values.append(p.relation_count())
        h_values.append(height(p))
    return np.array(r_values), np.array(h_values)


def test_negative_control_broken_move_fails_validation():
    n = 5
    r_values, h_values = broken_chain_samples(n, sweeps=3000, seed=9)
    failures = []
    for observable, series in (("R", r_values), ("height", h_values)):
        exact = exact_distribution(n, observable)
        comparisons, unexpected = compare_to_exact(
            observable, series, exact, min_fraction=10 / len(series)
        )
        assert not unexpected  # still valid posets, just the wrong measure
        failures.extend(c for c in comparisons if c.deviation > 3.0)
    assert failures, "broken suitable check should bias the sampled measure"


def test_compare_flags_impossible_values():
    exact = exact_distribution(3, "height")
    comparisons, unexpected = compare_to_exact(
        "height", np.array([1, 2, 9]), exact, min_fraction=0.0
    )
    assert ("height", 9) in unexpected
