"""Post-processing of chain traces.

Thermalization detection is an automated stand-in for eyeballing multi-start
traces: the chain counts as thermalized at the first sweep where the
windowed means of the indicator observables agree across all starts within
k combined standard errors. Autocorrelation times come from a nonlinear
least-squares fit of a*exp(-t/tau) to the raw empirical autocovariance (no
log transform; the tail noise would bias it). Histogram error bars use the
binomial form sqrt(f(1-f)/(T-1)) on thinned samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from .observables import Trace

#: Asymptotic constant in the average natural-labeling count c*a!*b! of a
#: bipartite order with layer sizes a, b.
ETA = 3.4627


@dataclass
class TraceSet:
    """Multi-start traces of one run (all starts share n and sweep length)."""

    n: int
    moves_per_sweep: int
    traces: dict[str, Trace]

    def __post_init__(self):
        for name, trace in self.traces.items():
            if trace.n != self.n:
                raise ValueError(f"trace {name!r} has n={trace.n}, expected {self.n}")

    def aligned_length(self) -> int:
        return min(len(t) for t in self.traces.values())

    def observable(self, name: str) -> np.ndarray:
        """Stacked per-start series, shape (starts, aligned_length)."""
        length = self.aligned_length()
        rows = []
        for trace in self.traces.values():
            col = getattr(trace, name)
            rows.append(np.asarray(col[:length], dtype=np.float64))
        return np.vstack(rows)


@dataclass
class ThermalizationResult:
    thermalized: bool
    sweep: int | None
    window: int
    k: float

    def require(self) -> int:
        if not self.thermalized:
            raise RuntimeError("traces never thermalized under the configured rule")
        return self.sweep


THERM_OBSERVABLES = ("n_min", "r")


THERM_BATCHES = 10


def thermalization_estimate(
    traces: TraceSet,
    observables: tuple[str, ...] = THERM_OBSERVABLES,
    window: int | None = None,
    k: float = 3.0,
) -> ThermalizationResult:
    """First sweep index from which all starts agree on the indicators.

    Agreement over [t, t+window): for every pair of starts and every
    indicator, |mean_a - mean_b| <= k * sqrt(sem_a^2 + sem_b^2), where each
    standard error comes from batch means (the window split into
    THERM_BATCHES blocks), so autocorrelation within the window does not
    shrink the tolerance. Candidate cuts are scanned on a window/10 grid.
    """
    if len(traces.traces) < 2:
        raise ValueError("thermalization detection needs at least two starts")
    length = traces.aligned_length()
    if window is None:
        window = max(2, length // 10)
    nbatch = min(THERM_BATCHES, window)
    if window < 2 or length < window + 1 or nbatch < 2:
        return ThermalizationResult(False, None, window, k)

    stride = max(1, window // 10)
    candidates = np.arange(0, length - window + 1, stride)
    batch = window // nbatch

    ok = np.ones(len(candidates), dtype=bool)
    b0 = candidates[:, None] + np.arange(nbatch)[None, :] * batch  # (C, nbatch)
    for name in observables:
        series = traces.observable(name)  # (S, T)
        nstarts = series.shape[0]
        cs = np.cumsum(np.concatenate([np.zeros((nstarts, 1)), series], axis=1), axis=1)
        bmeans = (cs[:, b0 + batch] - cs[:, b0]) / batch  # (S, C, nbatch)
        mean = bmeans.mean(axis=2)
        sem2 = bmeans.var(axis=2, ddof=1) / nbatch
        for a in range(nstarts):
            for b in range(a + 1, nstarts):
                tol = k * np.sqrt(sem2[a] + sem2[b])
                ok &= np.abs(mean[a] - mean[b]) <= tol
    hits = np.nonzero(ok)[0]
    if len(hits) == 0:
        return ThermalizationResult(False, None, window, k)
    return ThermalizationResult(True, int(candidates[hits[0]]), window, k)


@dataclass
class FitResult:
    """Two-parameter exponential fit. For correlators amplitude=a, rate=tau
    in a*exp(-t/tau); for growth fits amplitude=ln(a), rate=b in a*exp(b*n)."""

    amplitude: float
    rate: float
    amplitude_err: float
    rate_err: float
    window: tuple[int, int]
    below_resolution: bool = False
    residual_norm: float = 0.0


def autocovariance(series: np.ndarray) -> np.ndarray:
    """Unbiased empirical autocovariance over all lags (FFT-based)."""
    x = np.asarray(series, dtype=np.float64)
    x = x - x.mean()
    length = len(x)
    nfft = 1 << (2 * length - 1).bit_length()
    f = np.fft.rfft(x, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[:length]
    return acov / (length - np.arange(length))


def autocorrelation_time(
    series,
    noise_floor: float = 0.05,
    max_lag: int | None = None,
) -> FitResult:
    """Fit a*exp(-t/tau) to the autocovariance of a post-thermalization series.

    The fit window runs from lag 1 to the first lag where the correlator
    drops below noise_floor * variance. A correlator already at or below 0
    at lag 1 means tau is under one sweep; that is reported as a tau = 1
    lower bound with below_resolution set.
    """
    x = np.asarray(series, dtype=np.float64)
    if len(x) < 11:
        raise ValueError("series must provide at least 10 lags")
    acov = autocovariance(x)
    var = acov[0]
    if var <= 0:
        return FitResult(0.0, 1.0, 0.0, 0.0, (1, 1), below_resolution=True)
    if acov[1] <= 0:
        return FitResult(var, 1.0, 0.0, 0.0, (1, 1), below_resolution=True)

    limit = len(x) // 2 if max_lag is None else min(max_lag, len(x) // 2)
    cut = 1
    while cut < limit and acov[cut] >= noise_floor * var:
        cut += 1
    cut = max(cut, 4)  # at least a few points for the two-parameter fit

    lags = np.arange(1, cut, dtype=np.float64)
    values = acov[1:cut]
    tau0 = -1.0 / math.log(max(min(acov[1] / var, 0.999), 1e-12))
    popt, pcov = curve_fit(
        lambda t, a, tau: a * np.exp(-t / tau),
        lags,
        values,
        p0=(var, max(tau0, 0.5)),
        maxfev=20_000,
    )
    amp, tau = popt
    errs = np.sqrt(np.maximum(np.diag(pcov), 0.0))
    resid = values - amp * np.exp(-lags / tau)
    if tau < 1.0:
        return FitResult(float(amp), 1.0, float(errs[0]), float(errs[1]), (1, cut),
                         below_resolution=True, residual_norm=float(np.linalg.norm(resid)))
    return FitResult(float(amp), float(tau), float(errs[0]), float(errs[1]), (1, cut),
                     residual_norm=float(np.linalg.norm(resid)))


def sampling_stride(n: int, tau: float) -> int:
    """Sweeps between retained samples: 5*tau/2 for n > 40, else every sweep."""
    if n <= 40:
        return 1
    return max(1, int(round(2.5 * tau)))


def conservative_t_therm(n: int, measured: dict[int, int]) -> int:
    """Thermalization budget for an unmeasured size: borrow from the smallest
    measured size at or above n (thermalization times increase with n)."""
    if not measured:
        raise ValueError("no measured thermalization times")
    candidates = [m for m in measured if m >= n]
    if not candidates:
        raise ValueError(
            f"no measured size >= {n}; largest measured is {max(measured)}"
        )
    return measured[min(candidates)]


@dataclass
class HistogramWithErrors:
    """Bin frequencies with binomial error bars from T thinned samples."""

    values: np.ndarray  # discrete values, or bin centers when edges is set
    f: np.ndarray
    err: np.ndarray
    T: int
    edges: np.ndarray | None = None

    def frequency(self, value) -> float:
        idx = np.nonzero(self.values == value)[0]
        return float(self.f[idx[0]]) if len(idx) else 0.0

    def error(self, value) -> float:
        idx = np.nonzero(self.values == value)[0]
        return float(self.err[idx[0]]) if len(idx) else 0.0

    def mode(self) -> float:
        return float(self.values[int(np.argmax(self.f))])

    def to_csv(self, path) -> None:
        lines = ["value,f,err"]
        for v, f, e in zip(self.values, self.f, self.err):
            lines.append(f"{v!r},{f!r},{e!r}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def histogram_with_errors(samples, bins=None, thin: int = 1) -> HistogramWithErrors:
    """Histogram of every thin-th sample with err = sqrt(f(1-f)/(T-1)) per bin."""
    data = np.asarray(samples)[::thin]
    total = len(data)
    if total < 2:
        raise ValueError("need at least 2 samples after thinning")
    if bins is None:
        values, counts = np.unique(data, return_counts=True)
        edges = None
    else:
        edges = np.asarray(bins, dtype=np.float64)
        counts, _ = np.histogram(data, bins=edges)
        values = 0.5 * (edges[:-1] + edges[1:])
    f = counts / total
    err = np.sqrt(f * (1.0 - f) / (total - 1))
    return HistogramWithErrors(values=values.astype(np.float64), f=f, err=err, T=total, edges=edges)


def mean_with_error(series, tau: float | None = None, thin: int | None = None) -> tuple[float, float]:
    """Mean of the thinned series and its standard error (stddev / sqrt(T))."""
    if thin is None:
        thin = max(1, int(round(2.5 * tau))) if tau else 1
    data = np.asarray(series, dtype=np.float64)[::thin]
    if len(data) == 0:
        raise ValueError("empty series")
    if len(data) == 1:
        return float(data[0]), float("nan")
    return float(data.mean()), float(data.std(ddof=1) / math.sqrt(len(data)))


def growth_fit(points, sigmas=None) -> FitResult:
    """Fit value = a * exp(b * n) by (weighted) least squares on ln(value).

    Returns amplitude = ln(a) and rate = b with their standard errors.
    """
    pts = sorted((float(n), float(v)) for n, v in points)
    if len(pts) < 3:
        raise ValueError("growth fit needs at least 3 points")
    ns = np.array([p[0] for p in pts])
    vals = np.array([p[1] for p in pts])
    if (vals <= 0).any():
        raise ValueError("growth fit needs positive values")
    logv = np.log(vals)
    if sigmas is None:
        weights = np.ones_like(logv)
        absolute = False
    else:
        sig = np.asarray(sigmas, dtype=np.float64)
        weights = (vals / sig) ** 2  # sigma_ln = sigma / value
        absolute = True
    design = np.column_stack([np.ones_like(ns), ns])
    wdesign = design * weights[:, None]
    normal = design.T @ wdesign
    beta = np.linalg.solve(normal, wdesign.T @ logv)
    resid = logv - design @ beta
    cov = np.linalg.inv(normal)
    if not absolute:
        dof = len(ns) - 2
        scale = float(resid @ (weights * resid)) / dof if dof > 0 else 0.0
        cov = cov * scale
    errs = np.sqrt(np.maximum(np.diag(cov), 0.0))
    return FitResult(
        amplitude=float(beta[0]),
        rate=float(beta[1]),
        amplitude_err=float(errs[0]),
        rate_err=float(errs[1]),
        window=(int(ns[0]), int(ns[-1])),
        residual_norm=float(np.linalg.norm(resid * np.sqrt(weights))),
    )


def kr_estimate(n: int, n1: int, n2: int, n3: int) -> float:
    """log2 of the estimated number of naturally labeled 3-layer orders with
    the given layer sizes, using the asymptotic labeling constant ETA.

    The estimate eta^2 * n2! * 2^(n2(n-n2)) does not depend on how n1+n3
    splits, so for fixed n the bottom-layer size is asymptotically uniform
    on [0, n/2]; the exponential factor peaks sharply at n2 = n/2. Finite-n
    labeling constants run below ETA, so this leans high.
    """
    if min(n1, n2, n3) < 0 or n1 + n2 + n3 != n:
        raise ValueError(f"layer sizes ({n1},{n2},{n3}) do not partition n={n}")
    log2_eta = math.log2(ETA)
    log2_fact = math.lgamma(n2 + 1) / math.log(2.0)
    return 2 * log2_eta + log2_fact + n2 * (n - n2)
