"""Seedable, serializable random stream (L'Ecuyer combined Tausworthe).

The core generator is the three-component maximally equidistributed
combined Tausworthe generator, in the exact form used by GSL's ``taus2``.
Its update constants are locked by golden vectors captured from GSL
(tests/data/gsl_taus2_vectors.json), so a run seeded the same way is
bit-reproducible across machines.

Two seeding paths exist:

* ``RandomStream(seed)`` takes a 64-bit seed and expands it with the
  splitmix64 permutation (all 64 bits matter).
* ``RandomStream.from_gsl_seed(seed)`` replicates GSL's 32-bit LCG
  seeding procedure exactly; this is what the golden-vector tests use.
"""

from __future__ import annotations

import math

_M32 = 0xFFFFFFFF
_M64 = 0xFFFFFFFFFFFFFFFF

#: Number of distinct 32-bit words the generator can emit per draw.
WORD_RANGE = 1 << 32


def _taus_step(s1: int, s2: int, s3: int) -> tuple[int, int, int]:
    # Component updates from L'Ecuyer's combined Tausworthe construction
    # (shift/mask constants as in GSL taus2; see golden-vector test).
    s1 = (((s1 & 4294967294) << 12) & _M32) ^ ((((s1 << 13) & _M32) ^ s1) >> 19)
    s2 = (((s2 & 4294967288) << 4) & _M32) ^ ((((s2 << 2) & _M32) ^ s2) >> 25)
    s3 = (((s3 & 4294967280) << 17) & _M32) ^ ((((s3 << 3) & _M32) ^ s3) >> 11)
    return s1, s2, s3


def splitmix64(x: int) -> int:
    """One application of the splitmix64 output permutation (bijective on 64 bits)."""
    x = (x + 0x9E3779B97F4A7C15) & _M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _M64
    return x ^ (x >> 31)


def child_seed(master_seed: int, index: int) -> int:
    """Derive the seed of chain number `index` from a master seed.

    Distinct indices give unrelated streams: the master seed is XORed with
    an index-dependent odd multiplier and pushed through splitmix64.
    """
    if index < 0:
        raise ValueError("chain index must be nonnegative")
    return splitmix64((master_seed & _M64) ^ (((index + 1) * 0x9E3779B97F4A7C15) & _M64))


class RandomStream:
    """One independent random stream; never share an instance between chains."""

    algorithm = "taus2"

    __slots__ = ("s1", "s2", "s3", "draws")

    def __init__(self, seed: int):
        x = seed & _M64
        words = []
        while len(words) < 3:
            x = (x + 0x9E3779B97F4A7C15) & _M64
            words.append(splitmix64(x) & _M32)
        s1, s2, s3 = words
        # Component minima required by the Tausworthe recurrences.
        if s1 < 2:
            s1 += 2
        if s2 < 8:
            s2 += 8
        if s3 < 16:
            s3 += 16
        self.s1, self.s2, self.s3 = s1, s2, s3
        self.draws = 0
        for _ in range(6):
            self.next_word()
        self.draws = 0

    @classmethod
    def from_gsl_seed(cls, seed: int) -> "RandomStream":
        """Seed exactly as GSL's taus2 does (32-bit LCG chain + 6 warmup draws)."""
        stream = cls.__new__(cls)
        s = seed & _M32
        if s == 0:
            s = 1
        s1 = (69069 * s) & _M32
        if s1 < 2:
            s1 += 2
        s2 = (69069 * s1) & _M32
        if s2 < 8:
            s2 += 8
        s3 = (69069 * s2) & _M32
        if s3 < 16:
            s3 += 16
        stream.s1, stream.s2, stream.s3 = s1, s2, s3
        stream.draws = 0
        for _ in range(6):
            stream.next_word()
        stream.draws = 0
        return stream

    def next_word(self) -> int:
        """Next raw 32-bit output."""
        self.s1, self.s2, self.s3 = _taus_step(self.s1, self.s2, self.s3)
        self.draws += 1
        return self.s1 ^ self.s2 ^ self.s3

    def uniform_index(self, k: int) -> int:
        """Exactly uniform integer in [0, k), by rejection (no modulo bias)."""
        if k < 1:
            raise ValueError("k must be >= 1")
        if k == 1:
            return 0
        limit = (WORD_RANGE // k) * k
        while True:
            w = self.next_word()
            if w < limit:
                return w % k

    def uniform(self) -> float:
        """Uniform float in [0, 1) with 32-bit resolution."""
        return self.next_word() * (1.0 / WORD_RANGE)

    def poisson(self, mean: float) -> int:
        """Poisson-distributed count.

        Knuth-style inversion for mean <= 30; larger means are split into
        <=30 chunks and summed, which is exact by Poisson additivity.
        """
        if mean < 0:
            raise ValueError("mean must be >= 0")
        if mean == 0:
            return 0
        total = 0
        remaining = mean
        while remaining > 30.0:
            total += self._poisson_small(30.0)
            remaining -= 30.0
        return total + self._poisson_small(remaining)

    def _poisson_small(self, mean: float) -> int:
        threshold = math.exp(-mean)
        k = 0
        prod = self.uniform()
        while prod > threshold:
            k += 1
            prod *= self.uniform()
        return k

    # -- state serialization (embedded in checkpoints) ---------------------

    def state(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "state": [format(self.s1, "08x"), format(self.s2, "08x"), format(self.s3, "08x")],
            "draws": self.draws,
        }

    @classmethod
    def from_state(cls, state: dict) -> "RandomStream":
        if state.get("algorithm") != cls.algorithm:
            raise ValueError(f"unsupported rng algorithm: {state.get('algorithm')!r}")
        stream = cls.__new__(cls)
        stream.s1, stream.s2, stream.s3 = (int(w, 16) for w in state["state"])
        stream.draws = int(state["draws"])
        return stream

    def __repr__(self) -> str:  # pragma: no cover
        return f"RandomStream(taus2, draws={self.draws})"
