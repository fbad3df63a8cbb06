"""Exact path samplers for the supported process families.

Every sampler draws from the exact joint law on its grid, no Euler schemes:

* OU uses the stationary AR(1) recursion with the exact one-step variance.
* FBM from the origin uses circulant embedding of the fractional noise
  (eigenvalues checked, Cholesky fallback if the embedding fails).
* The periodic bridge is built per unit interval from scaled Wiener
  increments pinned at both ends, exact zeros at the integers.
* Fractional OU and the tempered process go through a Toeplitz Cholesky
  factor of the quadrature-backed covariance.
* The sawtooth draws its amplitude by rejection and scales the profile.

Reproducibility contract: replicate r of base seed b is generated from a
counter RNG keyed (b, r), bit-for-bit stable regardless of how many
replicates are requested or in what order streams are consumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.signal import lfilter

from .kernels import (
    ProcessKind,
    ProcessSpec,
    covariance_matrix,
    sawtooth_profile,
)

__all__ = [
    "SimMethod",
    "SimConfig",
    "SamplePath",
    "path_rng",
    "sample_path",
    "sample_values",
    "increment_moments",
    "write_path_csv",
]

MAX_GRID_POINTS = 2**20
MAX_CHOLESKY_POINTS = 2**12
MAX_TOTAL_VALUES = 2**26


class SimMethod(str, Enum):
    AUTO = "auto"
    AR1_EXACT = "ar1"
    CIRCULANT = "circulant"
    CHOLESKY = "cholesky"
    BRIDGE_LOCAL = "bridge"
    SAWTOOTH_DIRECT = "sawtooth"


@dataclass(frozen=True)
class SimConfig:
    method: SimMethod = SimMethod.AUTO
    replicates: int = 1
    base_seed: int = 0

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be positive")


@dataclass(frozen=True)
class SamplePath:
    """One simulated path on the uniform grid t0 + i * dt, i = 0..n."""

    spec: ProcessSpec
    t0: float
    dt: float
    values: np.ndarray
    seed: int

    @property
    def n_steps(self) -> int:
        return self.values.size - 1

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.values.size)


def path_rng(base_seed: int, stream: int = 0) -> np.random.Generator:
    """Counter RNG for one replicate stream; keys are independent words, so
    streams never collide across (base_seed, stream) pairs."""
    key = np.array([base_seed % 2**64, stream % 2**64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _cholesky_with_jitter(mat: np.ndarray) -> np.ndarray:
    """Cholesky with a bounded diagonal-jitter retry: start at
    1e-12 * trace/n, escalate tenfold, give up after three attempts."""
    n = mat.shape[0]
    jitter = 1e-12 * np.trace(mat) / n
    try:
        return np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        pass
    for _ in range(3):
        try:
            return np.linalg.cholesky(mat + jitter * np.eye(n))
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise np.linalg.LinAlgError(
        "covariance matrix is not positive definite within the jitter budget"
    )


def _fgn_autocov(n: int, hurst: float) -> np.ndarray:
    k = np.arange(n + 1, dtype=float)
    h2 = 2.0 * hurst
    return 0.5 * ((k + 1.0) ** h2 - 2.0 * k**h2 + np.abs(k - 1.0) ** h2)


def _fgn_circulant_eigs(n: int, hurst: float) -> np.ndarray | None:
    """Eigenvalues of the minimal circulant embedding (autocovariance out to
    lag n in the Nyquist slot); None when the embedding is indefinite."""
    r = _fgn_autocov(n, hurst)
    c = np.concatenate([r[:n], [r[n]], r[n - 1 : 0 : -1]])
    g = np.fft.fft(c).real
    if g.min() < -1e-8:
        return None
    return np.maximum(g, 0.0)


def _fgn_from_eigs(g: np.ndarray, z: np.ndarray, n: int) -> np.ndarray:
    """Turn 2n standard normals into one exact fractional noise sample."""
    m = 2 * n
    w = np.empty(m, dtype=complex)
    w[0] = math.sqrt(g[0]) * z[0]
    w[n] = math.sqrt(g[n]) * z[1]
    ks = np.arange(1, n)
    half = np.sqrt(g[1:n] / 2.0)
    w[ks] = half * (z[2 * ks] + 1j * z[2 * ks + 1])
    w[m - ks] = np.conj(w[ks])
    return np.fft.ifft(w).real[:n] * math.sqrt(m)


def _bridge_blocks(t0: float, dt: float, n: int):
    """Group grid indices by the unit interval they fall into; integer grid
    points are exact zeros and belong to no block."""
    times = t0 + dt * np.arange(n + 1)
    fl = np.floor(times + 1e-12 * max(1.0, abs(t0) + n * dt))
    frac = times - fl
    interior = frac > 1e-12
    blocks = []
    for k in np.unique(fl[interior]):
        idx = np.nonzero(interior & (fl == k))[0]
        blocks.append((idx, frac[idx]))
    zero_idx = np.nonzero(~interior)[0]
    return blocks, zero_idx


def _draw_matrix(rngs, count: int) -> np.ndarray:
    """One standard-normal row per replicate stream, shape (reps, count)."""
    out = np.empty((len(rngs), count))
    for r, rng in enumerate(rngs):
        out[r] = rng.standard_normal(count)
    return out


def _sample_block(spec, t0, dt, n, rngs, method):
    """Dispatch one batch of replicates sharing pre-built rng streams."""
    reps = len(rngs)
    out = np.empty((reps, n + 1))

    if method is SimMethod.AR1_EXACT:
        th = spec.theta
        phi = math.exp(-th * dt)
        e = _draw_matrix(rngs, n + 1)
        e[:, 0] *= math.sqrt(1.0 / (2.0 * th))
        e[:, 1:] *= math.sqrt((1.0 - phi * phi) / (2.0 * th))
        return lfilter([1.0], [1.0, -phi], e, axis=1)

    if method is SimMethod.CIRCULANT:
        g = _fgn_circulant_eigs(n, spec.hurst)
        if g is None:
            return _sample_block(spec, t0, dt, n, rngs, SimMethod.CHOLESKY)
        z = _draw_matrix(rngs, 2 * n)
        m = 2 * n
        w = np.empty((reps, m), dtype=complex)
        w[:, 0] = math.sqrt(g[0]) * z[:, 0]
        w[:, n] = math.sqrt(g[n]) * z[:, 1]
        ks = np.arange(1, n)
        half = np.sqrt(g[1:n] / 2.0)
        w[:, ks] = half * (z[:, 2 * ks] + 1j * z[:, 2 * ks + 1])
        w[:, m - ks] = np.conj(w[:, ks])
        fgn = np.fft.ifft(w, axis=1).real[:, :n] * math.sqrt(m)
        out[:, 0] = 0.0
        np.cumsum(fgn, axis=1, out=out[:, 1:])
        out[:, 1:] *= dt**spec.hurst
        return out

    if method is SimMethod.BRIDGE_LOCAL:
        blocks, zero_idx = _bridge_blocks(t0, dt, n)
        out[:, zero_idx] = 0.0
        scales = [
            np.sqrt(np.diff(np.concatenate([[0.0], fr, [1.0]]))) for _, fr in blocks
        ]
        z = _draw_matrix(rngs, sum(s.size for s in scales))
        pos = 0
        for (idx, fr), sd in zip(blocks, scales):
            w = np.cumsum(z[:, pos : pos + sd.size] * sd, axis=1)
            pos += sd.size
            out[:, idx] = w[:, :-1] - np.outer(w[:, -1], fr)
        return out

    if method is SimMethod.SAWTOOTH_DIRECT:
        profile = sawtooth_profile(t0 + dt * np.arange(n + 1))
        xi = np.array([spec.xi_law.sample(rng, 1)[0] for rng in rngs])
        return np.outer(xi, profile)

    if method is SimMethod.CHOLESKY:
        times = t0 + dt * np.arange(n + 1)
        shift = 0
        if spec.kind is ProcessKind.FBM and abs(times[0]) < 1e-15:
            # the origin is a.s. zero and makes the matrix singular
            times = times[1:]
            shift = 1
        if times.size > MAX_CHOLESKY_POINTS:
            raise ValueError(
                f"cholesky sampling is limited to {MAX_CHOLESKY_POINTS} grid "
                f"points, got {times.size}; shorten the grid or coarsen dt"
            )
        chol = _cholesky_with_jitter(covariance_matrix(spec, times))
        z = _draw_matrix(rngs, times.size)
        x = z @ chol.T
        if shift:
            out[:, 0] = 0.0
            out[:, 1:] = x
            return out
        return x

    raise ValueError(f"method {method} not available for kind {spec.kind}")


_DEFAULT_METHOD = {
    ProcessKind.STATIONARY_OU: SimMethod.AR1_EXACT,
    ProcessKind.FBM: SimMethod.CIRCULANT,
    ProcessKind.PERIODIC_BRIDGE: SimMethod.BRIDGE_LOCAL,
    ProcessKind.RANDOM_SAWTOOTH: SimMethod.SAWTOOTH_DIRECT,
    ProcessKind.FRACTIONAL_OU: SimMethod.CHOLESKY,
    ProcessKind.TEMPERED_STATIONARY: SimMethod.CHOLESKY,
}

_ALLOWED_METHODS = {
    ProcessKind.STATIONARY_OU: {SimMethod.AR1_EXACT, SimMethod.CHOLESKY},
    ProcessKind.FBM: {SimMethod.CIRCULANT, SimMethod.CHOLESKY},
    ProcessKind.PERIODIC_BRIDGE: {SimMethod.BRIDGE_LOCAL},
    ProcessKind.RANDOM_SAWTOOTH: {SimMethod.SAWTOOTH_DIRECT},
    ProcessKind.FRACTIONAL_OU: {SimMethod.CHOLESKY},
    ProcessKind.TEMPERED_STATIONARY: {SimMethod.CHOLESKY},
}


def resolve_method(spec: ProcessSpec, method: SimMethod, t0: float = 0.0) -> SimMethod:
    if method is SimMethod.AUTO:
        m = _DEFAULT_METHOD[spec.kind]
        if m is SimMethod.CIRCULANT and t0 != 0.0:
            return SimMethod.CHOLESKY  # embedding only covers paths from 0
        return m
    if method not in _ALLOWED_METHODS[spec.kind]:
        raise ValueError(
            f"method {method.value} cannot sample the exact law of "
            f"{spec.label()}; allowed: "
            + ", ".join(sorted(m.value for m in _ALLOWED_METHODS[spec.kind]))
        )
    if method is SimMethod.CIRCULANT and t0 != 0.0:
        raise ValueError(
            "circulant fbm sampling must start at t0 = 0; use cholesky for "
            "windows away from the origin"
        )
    return method


def sample_values(
    spec: ProcessSpec,
    t0: float,
    dt: float,
    n: int,
    base_seed: int,
    replicates: int = 1,
    method: SimMethod = SimMethod.AUTO,
    stream_offset: int = 0,
) -> np.ndarray:
    """Sample ``replicates`` exact paths; returns an array (replicates, n+1).

    Replicate r uses the RNG stream (base_seed, stream_offset + r).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if n < 1:
        raise ValueError("need at least one step")
    if n + 1 > MAX_GRID_POINTS:
        raise ValueError(
            f"grid of {n + 1} points exceeds the {MAX_GRID_POINTS} point cap"
        )
    if replicates * (n + 1) > MAX_TOTAL_VALUES:
        raise ValueError(
            "replicates * grid points exceeds the in-memory budget; "
            "batch the replicates instead"
        )
    method = resolve_method(spec, method, t0)
    rngs = [path_rng(base_seed, stream_offset + r) for r in range(replicates)]
    return _sample_block(spec, t0, dt, n, rngs, method)


def sample_path(
    spec: ProcessSpec,
    t0: float,
    dt: float,
    n: int,
    seed: int,
    method: SimMethod = SimMethod.AUTO,
) -> SamplePath:
    values = sample_values(spec, t0, dt, n, seed, replicates=1, method=method)
    return SamplePath(spec=spec, t0=t0, dt=dt, values=values[0], seed=seed)


def increment_moments(values: np.ndarray, dt: float, r: int, max_lag: int | None = None):
    """Empirical L^r norms of the increments per lag.

    Returns (lags, norms) with norms[l-1] = (mean |X_{k+l} - X_k|^r)^(1/r)
    pooled over replicates and positions.
    """
    if r not in (2, 4, 8):
        raise ValueError("r must be one of 2, 4, 8")
    vals = np.atleast_2d(np.asarray(values, dtype=float))
    n = vals.shape[1] - 1
    top = max_lag if max_lag is not None else n
    if not 1 <= top <= n:
        raise ValueError("max_lag out of range")
    lags = dt * np.arange(1, top + 1)
    norms = np.empty(top)
    for lag in range(1, top + 1):
        d = vals[:, lag:] - vals[:, :-lag]
        norms[lag - 1] = (np.abs(d) ** r).mean() ** (1.0 / r)
    return lags, norms


def write_path_csv(path: SamplePath, target) -> None:
    """CSV with '.' decimals, newline rows and a two-line provenance header."""
    own = isinstance(target, (str, bytes))
    fh = open(target, "w", newline="") if own else target
    try:
        fh.write(f"# spec={path.spec.label()}\n")
        fh.write(f"# seed={path.seed}\n")
        fh.write("t,value\n")
        for t, v in zip(path.times, path.values):
            fh.write(f"{float(t)!r},{float(v)!r}\n")
    finally:
        if own:
            fh.close()
