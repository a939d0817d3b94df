"""Random stream: golden vectors, determinism, distributions."""

import json
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from posetmc.rng import RandomStream, WORD_RANGE, child_seed, splitmix64

GOLDEN = json.loads((Path(__file__).parent / "data" / "gsl_taus2_vectors.json").read_text())


@pytest.mark.parametrize("vector", GOLDEN["vectors"], ids=lambda v: f"seed{v['seed']}")
def test_golden_vectors_match_gsl(vector):
    stream = RandomStream.from_gsl_seed(vector["seed"])
    assert [stream.next_word() for _ in range(len(vector["outputs"]))] == vector["outputs"]


@pytest.mark.parametrize("entry", GOLDEN["long_run"], ids=lambda v: f"seed{v['seed']}")
def test_golden_long_run_checkpoints(entry):
    stream = RandomStream.from_gsl_seed(entry["seed"])
    checkpoints = {int(k): v for k, v in entry["checkpoints"].items()}
    last = max(checkpoints)
    for i in range(last + 1):
        word = stream.next_word()
        if i in checkpoints:
            assert word == checkpoints[i], f"draw {i} diverged"


def test_same_seed_same_sequence():
    a = RandomStream(1)
    b = RandomStream(1)
    assert [a.next_word() for _ in range(10_000)] == [b.next_word() for _ in range(10_000)]


def test_different_seeds_diverge_quickly():
    a = RandomStream(1)
    b = RandomStream(2)
    assert [a.next_word() for _ in range(16)] != [b.next_word() for _ in range(16)]


def test_all_64_seed_bits_matter():
    low = RandomStream(1)
    high = RandomStream(1 + (1 << 32))
    assert [low.next_word() for _ in range(16)] != [high.next_word() for _ in range(16)]


def test_state_roundtrip_continues_identically():
    a = RandomStream(99)
    for _ in range(1000):
        a.next_word()
    b = RandomStream.from_state(a.state())
    reference = RandomStream(99)
    for _ in range(1000):
        reference.next_word()
    for _ in range(2000):
        assert b.next_word() == reference.next_word()
    assert b.draws == reference.draws


def test_state_rejects_unknown_algorithm():
    state = RandomStream(1).state()
    state["algorithm"] = "other"
    with pytest.raises(ValueError):
        RandomStream.from_state(state)


def test_uniform_index_k1_always_zero():
    stream = RandomStream(5)
    assert all(stream.uniform_index(1) == 0 for _ in range(100))
    # k=1 consumes no words: next outputs equal a fresh stream's
    assert stream.next_word() == RandomStream(5).next_word()


def test_uniform_index_rejects_k0():
    with pytest.raises(ValueError):
        RandomStream(1).uniform_index(0)


def test_uniform_index_range_contract():
    stream = RandomStream(7)
    k = 85 * 84 // 2  # C(85,2) = 3570
    draws = [stream.uniform_index(k) for _ in range(100_000)]
    assert min(draws) >= 0 and max(draws) < k


@pytest.mark.parametrize("k", [2, 7, 3570])
def test_uniform_index_chi_square(k):
    stream = RandomStream(12345 + k)
    n_draws = 1_000_000
    counts = np.zeros(k, dtype=np.int64)
    for _ in range(n_draws):
        counts[stream.uniform_index(k)] += 1
    _, p = stats.chisquare(counts)
    assert p > 0.001


def test_poisson_zero_mean():
    stream = RandomStream(3)
    assert all(stream.poisson(0.0) == 0 for _ in range(50))


def test_poisson_rejects_negative_mean():
    with pytest.raises(ValueError):
        RandomStream(3).poisson(-1.0)


def test_poisson_moments_mean_10():
    stream = RandomStream(2024)
    draws = np.array([stream.poisson(10.0) for _ in range(1_000_000)])
    assert abs(draws.mean() - 10.0) < 0.02
    assert abs(draws.var() - 10.0) < 0.1


@pytest.mark.parametrize("mean,n_draws", [(10.0, 100_000), (100.0, 20_000)])
def test_poisson_distribution_chi_square(mean, n_draws):
    # mean=100 exercises the additivity-splitting path
    stream = RandomStream(int(mean))
    draws = np.array([stream.poisson(mean) for _ in range(n_draws)])
    lo = int(stats.poisson.ppf(1e-4, mean))
    hi = int(stats.poisson.ppf(1 - 1e-4, mean))
    observed = np.array([(draws == v).sum() for v in range(lo, hi + 1)])
    observed = np.concatenate([[np.sum(draws < lo)], observed, [np.sum(draws > hi)]])
    pmf = stats.poisson.pmf(np.arange(lo, hi + 1), mean)
    expected = np.concatenate(
        [[stats.poisson.cdf(lo - 1, mean)], pmf, [stats.poisson.sf(hi, mean)]]
    )
    expected = expected * n_draws
    keep = expected > 5
    _, p = stats.chisquare(observed[keep], expected[keep] * observed[keep].sum() / expected[keep].sum())
    assert p > 0.001


def test_child_seeds_distinct_streams():
    seeds = {child_seed(42, i) for i in range(64)}
    assert len(seeds) == 64
    a = RandomStream(child_seed(42, 0))
    b = RandomStream(child_seed(42, 1))
    assert [a.next_word() for _ in range(16)] != [b.next_word() for _ in range(16)]


def test_splitmix64_is_permutation_like():
    outs = {splitmix64(x) for x in range(1000)}
    assert len(outs) == 1000


def test_uniform_in_unit_interval():
    stream = RandomStream(8)
    draws = [stream.uniform() for _ in range(1000)]
    assert all(0.0 <= u < 1.0 for u in draws)
    assert WORD_RANGE == 2**32
