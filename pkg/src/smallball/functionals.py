"""Integral functionals of simulated paths and their growth experiments.

Everything here revolves around I_T = int_0^T f(X_t)**2 dt computed by the
trapezoid rule on exact path samples: cumulative series along dyadic
horizons, log-log rate fits, the normalized lower-bound experiment for
self-similar drivers, and long-horizon ergodic averages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .kernels import ProcessKind, ProcessSpec
from .simulate import SamplePath, sample_values
from .testfuncs import FunctionSpec

__all__ = [
    "IntegralSeries",
    "RateFit",
    "DivergenceReport",
    "SelfSimilarReport",
    "ErgodicReport",
    "dyadic_horizons",
    "integral_functional",
    "fit_divergence_rate",
    "divergence_experiment",
    "selfsimilar_lowerbound_experiment",
    "fbm_unit_box_integral",
    "ergodic_limit",
    "write_divergence_csv",
    "write_selfsimilar_csv",
    "write_ergodic_csv",
]

# Cholesky-backed kinds carry a coarser default step so the default horizon
# ladder stays inside simulate's grid cap
_COARSE_KINDS = (ProcessKind.FRACTIONAL_OU, ProcessKind.TEMPERED_STATIONARY)


def _default_dt(spec: ProcessSpec) -> float:
    return 2.0**-4 if spec.kind in _COARSE_KINDS else 2.0**-6


def _default_horizons(spec: ProcessSpec) -> np.ndarray:
    top = 2**7 if spec.kind in _COARSE_KINDS else 2**9
    return dyadic_horizons(float(top))


def dyadic_horizons(t_max: float, t0: float = 1.0) -> np.ndarray:
    """Horizons t0 * 2**k up to and including t_max."""
    if t_max < t0:
        raise ValueError("t_max must be at least t0")
    k = int(math.floor(math.log2(t_max / t0) + 1e-12))
    return t0 * 2.0 ** np.arange(k + 1)


def _grid_indices(horizons: np.ndarray, dt: float, n: int) -> np.ndarray:
    idx = np.rint(horizons / dt).astype(int)
    off = np.abs(idx * dt - horizons) > 1e-9 * np.maximum(horizons, 1.0)
    if off.any():
        bad = horizons[off][0]
        raise ValueError(f"horizon {bad:g} is not on the simulation grid")
    if idx[-1] > n:
        raise ValueError("path grid ends before the last horizon")
    return idx


@dataclass(frozen=True)
class IntegralSeries:
    """Cumulative I_T of one path at an increasing horizon ladder."""

    t_grid: np.ndarray
    i_values: np.ndarray
    f: FunctionSpec
    spec: ProcessSpec
    seed: int

    def __post_init__(self):
        t = np.asarray(self.t_grid, dtype=float)
        v = np.asarray(self.i_values, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("t_grid and i_values must be equal-length vectors")
        if not np.all(np.diff(t) > 0.0):
            raise ValueError("horizons must increase")
        object.__setattr__(self, "t_grid", t)
        object.__setattr__(self, "i_values", v)


@dataclass(frozen=True)
class RateFit:
    """Least-squares slope of log I_T against log T."""

    slope: float
    intercept: float
    r_squared: float
    t_range: tuple[float, float]


def integral_functional(
    path: SamplePath, f: FunctionSpec, horizons=None
) -> IntegralSeries:
    """Trapezoid cumulative of f(X)**2 along one path, read at horizons.

    Horizons default to the dyadic ladder 1, 2, 4, ... inside the path and
    must land on the simulation grid exactly; the path must start at the
    time origin since the integral does.
    """
    if abs(path.t0) > 1e-12:
        raise ValueError("integral starts at t = 0; sample the path from 0")
    if horizons is None:
        horizons = dyadic_horizons(float(path.times[-1]))
    horizons = np.asarray(horizons, dtype=float)
    idx = _grid_indices(horizons, path.dt, path.n_steps)
    fx2 = f.value(path.values) ** 2
    cum = integrate.cumulative_trapezoid(fx2, dx=path.dt, initial=0.0)
    return IntegralSeries(
        t_grid=horizons,
        i_values=cum[idx],
        f=f,
        spec=path.spec,
        seed=path.seed,
    )


def _log_log_fit(log_t: np.ndarray, log_i: np.ndarray) -> RateFit:
    slope, intercept = np.polyfit(log_t, log_i, 1)
    resid = log_i - (slope * log_t + intercept)
    total = log_i - log_i.mean()
    ss_tot = float(total @ total)
    ss_res = float(resid @ resid)
    r_squared = 1.0 if ss_tot <= 1e-30 else max(0.0, 1.0 - ss_res / ss_tot)
    return RateFit(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=min(1.0, r_squared),
        t_range=(float(math.exp(log_t[0])), float(math.exp(log_t[-1]))),
    )


def fit_divergence_rate(t_grid, i_values) -> RateFit:
    """Ordinary least squares on (log T, log I_T); needs 5 or more horizons."""
    t = np.asarray(t_grid, dtype=float)
    v = np.asarray(i_values, dtype=float)
    if t.size != v.size or t.size < 5:
        raise ValueError("rate fits need at least 5 horizons")
    if np.any(v <= 0.0) or np.any(t <= 0.0):
        raise ValueError("log-log fit needs positive horizons and values")
    return _log_log_fit(np.log(t), np.log(v))


@dataclass(frozen=True)
class DivergenceReport:
    """Normalized-growth summary of T**(eps-1) I_T across replicates."""

    spec: ProcessSpec
    f: FunctionSpec
    epsilon: float
    seed: int
    t_grid: np.ndarray
    i_matrix: np.ndarray = field(repr=False)
    normalized_min: np.ndarray = field(repr=False)
    final_above_median: np.ndarray = field(repr=False)
    rate: RateFit

    @property
    def replicates(self) -> int:
        return self.i_matrix.shape[0]

    @property
    def fraction_final_above_median(self) -> float:
        return float(self.final_above_median.mean())

    def summary(self) -> dict:
        frac = self.fraction_final_above_median
        min_norm = float(self.normalized_min.min())
        return {
            "process": self.spec.label(),
            "function": self.f.label(),
            "epsilon": self.epsilon,
            "replicates": self.replicates,
            "slope": self.rate.slope,
            "intercept": self.rate.intercept,
            "r_squared": self.rate.r_squared,
            "fit_t_range": list(self.rate.t_range),
            "fraction_final_above_median": frac,
            "min_normalized_integral": min_norm,
            "pass_divergence": bool(frac >= 0.99 and min_norm > 0.0),
        }


def divergence_experiment(
    spec: ProcessSpec,
    f: FunctionSpec,
    epsilon: float,
    horizons=None,
    replicates: int = 100,
    seed: int = 0,
    dt: float | None = None,
) -> DivergenceReport:
    """Monte Carlo growth check of T**(epsilon-1) I_T on a horizon ladder.

    Almost-sure divergence is operationalized finitely: per replicate the
    normalized integral at the final horizon must exceed its value at the
    median horizon, and the report carries the per-replicate minimum over
    all horizons.  The rate fit regresses the across-replicate mean of
    log I_T on log T over the upper half of the ladder, where the
    small-horizon transient has died out.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if replicates < 2:
        raise ValueError("need at least 2 replicates")
    if dt is None:
        dt = _default_dt(spec)
    horizons = (
        _default_horizons(spec)
        if horizons is None
        else np.asarray(horizons, dtype=float)
    )
    if horizons.size < 5:
        raise ValueError("need at least 5 horizons")
    n = int(round(horizons[-1] / dt))
    idx = _grid_indices(horizons, dt, n)
    values = sample_values(spec, 0.0, dt, n, seed, replicates=replicates)
    fx2 = f.value(values) ** 2
    cum = integrate.cumulative_trapezoid(fx2, dx=dt, initial=0.0, axis=1)
    i_matrix = cum[:, idx]
    if np.any(i_matrix <= 0.0):
        raise ValueError("integral vanished at some horizon; grid too coarse")
    normalized = i_matrix * horizons ** (epsilon - 1.0)
    median_pos = horizons.size // 2
    final_above = normalized[:, -1] > normalized[:, median_pos]
    fit_count = max(5, horizons.size // 2)
    sel = slice(horizons.size - fit_count, horizons.size)
    mean_log_i = np.log(i_matrix[:, sel]).mean(axis=0)
    rate = _log_log_fit(np.log(horizons[sel]), mean_log_i)
    return DivergenceReport(
        spec=spec,
        f=f,
        epsilon=float(epsilon),
        seed=seed,
        t_grid=horizons,
        i_matrix=i_matrix,
        normalized_min=normalized.min(axis=1),
        final_above_median=final_above,
        rate=rate,
    )


@dataclass(frozen=True)
class SelfSimilarReport:
    """Normalized integrals k**(-beta(1+eps)) * int_0^(k**beta) |X|**p dt."""

    spec: ProcessSpec
    p: float
    epsilon: float
    beta: float
    seed: int
    k_grid: np.ndarray
    normalized: np.ndarray = field(repr=False)

    @property
    def replicate_minima(self) -> np.ndarray:
        return self.normalized.min(axis=1)

    @property
    def all_positive(self) -> bool:
        return bool(self.replicate_minima.min() > 0.0)

    @property
    def median_nondecreasing(self) -> bool:
        med = np.median(self.normalized, axis=0)
        return bool(np.all(np.diff(med) >= 0.0))

    def summary(self) -> dict:
        return {
            "process": self.spec.label(),
            "p": self.p,
            "epsilon": self.epsilon,
            "beta": self.beta,
            "replicates": int(self.normalized.shape[0]),
            "k_grid": [int(k) for k in self.k_grid],
            "min_normalized": float(self.replicate_minima.min()),
            "all_positive": self.all_positive,
            "median_nondecreasing": self.median_nondecreasing,
            "pass_lower_bound": bool(
                self.all_positive and self.median_nondecreasing
            ),
        }


def selfsimilar_lowerbound_experiment(
    spec: ProcessSpec,
    p: float = 2.0,
    epsilon: float = 0.5,
    beta: float | None = None,
    k_max: int = 8,
    replicates: int = 100,
    seed: int = 0,
    dt: float = 2.0**-2,
) -> SelfSimilarReport:
    """Lower-bound experiment along the scaling subsequence T = k**beta.

    Self-similarity turns the normalized integral into a positive random
    variable per k, so every replicate's minimum over k in
    [k_max/2, k_max] must stay strictly positive; across replicates the
    median should grow with k once beta exceeds 1/(hurst - epsilon/p).
    """
    if spec.kind is not ProcessKind.FBM:
        raise ValueError("the scaling argument needs the self-similar fbm")
    hurst = spec.hurst
    if p <= 0.0:
        raise ValueError("p must be positive")
    if not 0.0 < epsilon < p * hurst:
        raise ValueError("need 0 < epsilon < p * hurst")
    critical = 1.0 / (hurst - epsilon / p)
    if beta is None:
        beta = 1.05 * critical
    elif beta <= critical:
        raise ValueError(f"beta must exceed {critical:g}")
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    ks = np.arange(max(1, k_max // 2), k_max + 1, dtype=float)
    n = int(math.ceil(k_max**beta / dt))
    values = sample_values(spec, 0.0, dt, n, seed, replicates=replicates)
    cum = integrate.cumulative_trapezoid(
        np.abs(values) ** p, dx=dt, initial=0.0, axis=1
    )
    idx = np.minimum(np.rint(ks**beta / dt).astype(int), n)
    normalized = cum[:, idx] * ks ** (-beta * (1.0 + epsilon))
    return SelfSimilarReport(
        spec=spec,
        p=float(p),
        epsilon=float(epsilon),
        beta=float(beta),
        seed=seed,
        k_grid=ks,
        normalized=normalized,
    )


def fbm_unit_box_integral(hurst: float) -> float:
    """Quadrature of the fbm covariance over the unit square.

    Equals 1/(2*hurst + 2); the variance of int_0^1 X_t dt.
    """
    if not 0.0 < hurst < 1.0:
        raise ValueError("hurst must lie in (0, 1)")
    h2 = 2.0 * hurst

    def cov(u: float, s: float) -> float:
        return 0.5 * (s**h2 + u**h2 - (s - u) ** h2)

    # fold onto the triangle u <= s so the |s - u| kink sits on the
    # integration boundary where quadpack handles it
    value, _ = integrate.dblquad(
        cov, 0.0, 1.0, 0.0, lambda s: s, epsabs=1e-12, epsrel=1e-12
    )
    return 2.0 * value


@dataclass(frozen=True)
class ErgodicReport:
    """Distribution of the time average I_T / T across replicates."""

    spec: ProcessSpec
    f: FunctionSpec
    t_horizon: float
    seed: int
    averages: np.ndarray = field(repr=False)

    @property
    def mean(self) -> float:
        return float(self.averages.mean())

    @property
    def variance(self) -> float:
        return float(self.averages.var(ddof=1))

    @property
    def minimum(self) -> float:
        return float(self.averages.min())

    def summary(self) -> dict:
        return {
            "process": self.spec.label(),
            "function": self.f.label(),
            "t_horizon": self.t_horizon,
            "replicates": int(self.averages.size),
            "mean": self.mean,
            "variance": self.variance,
            "min": self.minimum,
            "positive_floor": bool(self.minimum > 0.0),
        }


def ergodic_limit(
    spec: ProcessSpec,
    f: FunctionSpec,
    t_horizon: float = 500.0,
    replicates: int = 200,
    seed: int = 0,
    dt: float | None = None,
) -> ErgodicReport:
    """Time averages I_T / T of a stationary process at one long horizon."""
    if not spec.is_stationary:
        raise ValueError("time averages converge for stationary kinds only")
    if t_horizon <= 0.0:
        raise ValueError("t_horizon must be positive")
    if replicates < 2:
        raise ValueError("need at least 2 replicates")
    if dt is None:
        dt = _default_dt(spec)
    n = max(8, int(round(t_horizon / dt)))
    t_eff = n * dt
    values = sample_values(spec, 0.0, dt, n, seed, replicates=replicates)
    fx2 = f.value(values) ** 2
    totals = np.trapezoid(fx2, dx=dt, axis=1)
    return ErgodicReport(
        spec=spec,
        f=f,
        t_horizon=t_eff,
        seed=seed,
        averages=totals / t_eff,
    )


def write_divergence_csv(report: DivergenceReport, target) -> None:
    """CSV rows T,I_T,replicate for every horizon of every replicate."""
    own = isinstance(target, (str, bytes))
    fh = open(target, "w", newline="") if own else target
    try:
        fh.write("T,I_T,replicate\n")
        for rep in range(report.i_matrix.shape[0]):
            for t, val in zip(report.t_grid, report.i_matrix[rep]):
                fh.write(f"{float(t)!r},{float(val)!r},{rep}\n")
    finally:
        if own:
            fh.close()


def write_selfsimilar_csv(report: SelfSimilarReport, target) -> None:
    """CSV rows k,N_k,replicate of the normalized integrals."""
    own = isinstance(target, (str, bytes))
    fh = open(target, "w", newline="") if own else target
    try:
        fh.write("k,N_k,replicate\n")
        for rep in range(report.normalized.shape[0]):
            for k, val in zip(report.k_grid, report.normalized[rep]):
                fh.write(f"{int(k)},{float(val)!r},{rep}\n")
    finally:
        if own:
            fh.close()


def write_ergodic_csv(report: ErgodicReport, target) -> None:
    """CSV rows replicate,time_average."""
    own = isinstance(target, (str, bytes))
    fh = open(target, "w", newline="") if own else target
    try:
        fh.write("replicate,time_average\n")
        for rep, val in enumerate(report.averages):
            fh.write(f"{rep},{float(val)!r}\n")
    finally:
        if own:
            fh.close()
