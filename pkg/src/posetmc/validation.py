"""Oracle-vs-MCMC validation at exactly enumerable sizes.

Runs a chain at n <= 9, thins by 5*tau/2 with tau measured from the run
itself, and compares the thinned histograms of R and height bin-by-bin
against the exact enumeration fractions. A bin passes when it sits within
k_sigma binomial error bars of the exact value; only bins whose exact
fraction is resolvable (>= min_fraction, default 10/samples) are judged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import autocorrelation_time
from .enumeration import DEFAULT_BOUND, ExactDistribution, exact_distribution
from .kernel import KernelChain
from .poset import standard_poset
from .rng import RandomStream, child_seed


@dataclass
class BinComparison:
    observable: str
    value: int
    exact_fraction: float
    measured_fraction: float
    sigma: float
    deviation: float  # |measured - exact| / sigma

    def line(self) -> str:
        return (
            f"{self.observable}={self.value}: exact {self.exact_fraction:.3e} "
            f"measured {self.measured_fraction:.3e} ({self.deviation:.2f} sigma)"
        )


@dataclass
class ValidationReport:
    n: int
    samples: int
    seed: int
    k_sigma: float
    min_fraction: float
    tau: float
    stride: int
    passed: bool
    comparisons: list[BinComparison] = field(default_factory=list)
    unexpected_values: list[tuple[str, int]] = field(default_factory=list)

    @property
    def worst(self) -> BinComparison:
        return max(self.comparisons, key=lambda c: c.deviation)

    def summary(self) -> str:
        lines = [
            f"validate n={self.n}: {'PASS' if self.passed else 'FAIL'} "
            f"({self.samples} samples, thinning stride {self.stride}, tau {self.tau:.2f})",
            f"  bins judged: {len(self.comparisons)} "
            f"(exact fraction >= {self.min_fraction:.2e}), tolerance {self.k_sigma} sigma",
            f"  worst bin: {self.worst.line()}",
        ]
        for obs, value in self.unexpected_values:
            lines.append(f"  IMPOSSIBLE VALUE measured: {obs}={value}")
        return "\n".join(lines)


def compare_to_exact(
    observable: str,
    values: np.ndarray,
    exact: ExactDistribution,
    min_fraction: float,
    k_sigma: float = 3.0,
) -> tuple[list[BinComparison], list[tuple[str, int]]]:
    """Bin-by-bin comparison of measured values against an exact distribution."""
    total = len(values)
    measured_values, counts = np.unique(np.asarray(values), return_counts=True)
    measured = {int(v): int(c) / total for v, c in zip(measured_values, counts)}
    unexpected = [
        (observable, v) for v in measured if exact.counts.get(v, 0) == 0
    ]
    comparisons = []
    for value, count in sorted(exact.counts.items()):
        f_exact = count / exact.total
        if f_exact < min_fraction:
            continue
        f_meas = measured.get(value, 0.0)
        if 0.0 < f_meas < 1.0:
            sigma = math.sqrt(f_meas * (1.0 - f_meas) / (total - 1))
        else:
            # measured frequency 0 or 1 degenerates the binomial formula;
            # judge against the exact-fraction width instead
            sigma = math.sqrt(f_exact * (1.0 - f_exact) / (total - 1))
        comparisons.append(
            BinComparison(
                observable=observable,
                value=value,
                exact_fraction=f_exact,
                measured_fraction=f_meas,
                sigma=sigma,
                deviation=abs(f_meas - f_exact) / sigma if sigma > 0 else math.inf,
            )
        )
    return comparisons, unexpected


def run_validation(
    n: int,
    samples: int = 10_000,
    seed: int = 0,
    therm_sweeps: int = 500,
    pilot_sweeps: int = 2_000,
    k_sigma: float = 3.0,
    min_fraction: float | None = None,
    start: str = "chain",
) -> ValidationReport:
    """Chain-vs-enumeration comparison of the R and height histograms."""
    if n > DEFAULT_BOUND:
        raise ValueError(f"validation needs the exact oracle: n <= {DEFAULT_BOUND}")
    if samples < 100:
        raise ValueError("validation needs at least 100 samples")
    if min_fraction is None:
        min_fraction = 10.0 / samples

    stream = RandomStream(child_seed(seed, 0))
    poset = standard_poset(start, n, stream)
    chain = KernelChain(poset, stream)
    chain.run(therm_sweeps)
    pilot = chain.run(pilot_sweeps)
    fit = autocorrelation_time(pilot.R.astype(np.float64))
    tau = 1.0 if fit.below_resolution else fit.rate
    stride = max(1, int(round(2.5 * tau)))

    needed = samples * stride
    parts = [pilot]
    if needed > pilot_sweeps:
        parts.append(chain.run(needed - pilot_sweeps))
    r_series = np.concatenate([p.R for p in parts])[::stride][:samples]
    h_series = np.concatenate([p.height for p in parts])[::stride][:samples]

    comparisons: list[BinComparison] = []
    unexpected: list[tuple[str, int]] = []
    for observable, series in (("R", r_series), ("height", h_series)):
        exact = exact_distribution(n, observable)
        comp, unexp = compare_to_exact(observable, series, exact, min_fraction, k_sigma)
        comparisons.extend(comp)
        unexpected.extend(unexp)

    passed = not unexpected and all(c.deviation <= k_sigma for c in comparisons)
    return ValidationReport(
        n=n,
        samples=int(len(r_series)),
        seed=seed,
        k_sigma=k_sigma,
        min_fraction=min_fraction,
        tau=tau,
        stride=stride,
        passed=passed,
        comparisons=comparisons,
        unexpected_values=unexpected,
    )
