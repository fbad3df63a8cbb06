"""Process specifications and exact covariance kernels.

Six process families are supported, all centered:

* ``fbm``: fractional Brownian motion, nonstationary, self-similar.
* ``bridge``: an independent standard Brownian bridge on each unit interval,
  pinned to zero at the integers.
* ``ou``: the stationary Ornstein-Uhlenbeck process started from its
  invariant law, EX_t^2 = 1/(2 theta).
* ``fou``: the stationary fractional Ornstein-Uhlenbeck process with
  hurst > 1/2, whose covariance is the exponentially weighted singular
  kernel evaluated by the quadrature oracles.
* ``tempered``: the stationary moving average of an exponentially tempered
  power kernel, exp(-theta u) u**alpha.
* ``sawtooth``: X_t = xi * phi(t) with phi the distance to the nearest
  integer and xi a random amplitude with an essential singularity of its
  density at zero.

Covariances are exact (closed form where one exists, adaptive quadrature
with an explicit error budget otherwise); the simulators in
:mod:`smallball.simulate` are tested against them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.linalg import toeplitz

from .quadrature import exp_kernel_mass, shifted_exp_kernel_integral

__all__ = [
    "ProcessKind",
    "ProcessSpec",
    "XiLaw",
    "default_xi_law",
    "KernelEval",
    "covariance",
    "variogram",
    "covariance_matrix",
    "fou_variance",
    "sawtooth_profile",
]


class ProcessKind(str, Enum):
    FBM = "fbm"
    PERIODIC_BRIDGE = "bridge"
    STATIONARY_OU = "ou"
    FRACTIONAL_OU = "fou"
    TEMPERED_STATIONARY = "tempered"
    RANDOM_SAWTOOTH = "sawtooth"


class XiLaw:
    """Law of the sawtooth amplitude: density c * exp(-1/x**2) on (0, 1],
    reflected to negative x.

    The essential singularity at zero gives the tail bound
    P[|xi| <= x] <= tail_front * exp(-1/x**2), which is what the sawtooth
    small-ball route needs.  Moments and the normalizer are computed once by
    quadrature at construction.
    """

    lambda0 = 2.0

    def __init__(self):
        mass, _ = integrate.quad(lambda x: math.exp(-1.0 / x**2), 0.0, 1.0)
        self._half_mass = mass
        self.tail_front = 1.0 / mass
        self.tail_scale = 1.0
        m2, _ = integrate.quad(lambda x: x**2 * math.exp(-1.0 / x**2), 0.0, 1.0)
        m4, _ = integrate.quad(lambda x: x**4 * math.exp(-1.0 / x**2), 0.0, 1.0)
        self.second_moment = m2 / mass
        self.fourth_moment = m4 / mass

    def abs_cdf(self, x: float) -> float:
        """P[|xi| <= x], exact up to quadrature error."""
        if x <= 0.0:
            return 0.0
        if x >= 1.0:
            return 1.0
        part, _ = integrate.quad(lambda u: math.exp(-1.0 / u**2), 0.0, x)
        return part / self._half_mass

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Rejection sampling from U(0, 1] proposals; the density peaks at
        x = 1 with value exp(-1), so acceptance is exp(1) * normalizer."""
        out = np.empty(size)
        filled = 0
        while filled < size:
            u = rng.uniform(0.0, 1.0, size=64)
            v = rng.uniform(0.0, 1.0, size=64)
            sign = np.where(rng.uniform(size=64) < 0.5, -1.0, 1.0)
            with np.errstate(divide="ignore"):
                accept = v <= np.exp(1.0 - 1.0 / np.maximum(u, 1e-300) ** 2)
            got = u[accept] * sign[accept]
            take = min(size - filled, got.size)
            out[filled : filled + take] = got[:take]
            filled += take
        return out

    def __repr__(self):
        return "XiLaw(default)"


@lru_cache(maxsize=1)
def default_xi_law() -> XiLaw:
    return XiLaw()


@dataclass(frozen=True)
class ProcessSpec:
    """Parameter bundle identifying one process; validated at construction."""

    kind: ProcessKind
    hurst: float | None = None
    theta: float | None = None
    alpha: float | None = None
    xi_law: XiLaw | None = field(default=None, repr=False)

    def __post_init__(self):
        k = self.kind
        if k is ProcessKind.FBM:
            if self.hurst is None or not 0.0 < self.hurst < 1.0:
                raise ValueError("fbm requires hurst in (0, 1)")
        elif k is ProcessKind.PERIODIC_BRIDGE:
            pass
        elif k is ProcessKind.STATIONARY_OU:
            if self.theta is None or not self.theta > 0:
                raise ValueError("ou requires theta > 0")
        elif k is ProcessKind.FRACTIONAL_OU:
            if self.hurst is None or not 0.5 < self.hurst < 1.0:
                raise ValueError("fou requires hurst in (1/2, 1)")
            if self.theta is None or not self.theta > 0:
                raise ValueError("fou requires theta > 0")
        elif k is ProcessKind.TEMPERED_STATIONARY:
            if self.theta is None or not self.theta > 0:
                raise ValueError("tempered requires theta > 0")
            if self.alpha is None or not self.alpha > 0:
                raise ValueError("tempered requires alpha > 0")
        elif k is ProcessKind.RANDOM_SAWTOOTH:
            if self.xi_law is None:
                object.__setattr__(self, "xi_law", default_xi_law())

    # constructors kept short; they read better at call sites than the
    # positional dataclass signature
    @classmethod
    def fbm(cls, hurst: float) -> "ProcessSpec":
        return cls(ProcessKind.FBM, hurst=hurst)

    @classmethod
    def periodic_bridge(cls) -> "ProcessSpec":
        return cls(ProcessKind.PERIODIC_BRIDGE)

    @classmethod
    def stationary_ou(cls, theta: float = 1.0) -> "ProcessSpec":
        return cls(ProcessKind.STATIONARY_OU, theta=theta)

    @classmethod
    def fractional_ou(cls, hurst: float, theta: float = 1.0) -> "ProcessSpec":
        return cls(ProcessKind.FRACTIONAL_OU, hurst=hurst, theta=theta)

    @classmethod
    def tempered(cls, theta: float = 1.0, alpha: float = 0.5) -> "ProcessSpec":
        return cls(ProcessKind.TEMPERED_STATIONARY, theta=theta, alpha=alpha)

    @classmethod
    def random_sawtooth(cls, xi_law: XiLaw | None = None) -> "ProcessSpec":
        return cls(ProcessKind.RANDOM_SAWTOOTH, xi_law=xi_law)

    @property
    def is_stationary(self) -> bool:
        return self.kind in (
            ProcessKind.STATIONARY_OU,
            ProcessKind.FRACTIONAL_OU,
            ProcessKind.TEMPERED_STATIONARY,
        )

    def label(self) -> str:
        k = self.kind.value
        if self.kind is ProcessKind.FBM:
            return f"fbm(hurst={self.hurst:g})"
        if self.kind is ProcessKind.STATIONARY_OU:
            return f"ou(theta={self.theta:g})"
        if self.kind is ProcessKind.FRACTIONAL_OU:
            return f"fou(hurst={self.hurst:g},theta={self.theta:g})"
        if self.kind is ProcessKind.TEMPERED_STATIONARY:
            return f"tempered(theta={self.theta:g},alpha={self.alpha:g})"
        return k


@dataclass(frozen=True)
class KernelEval:
    """One covariance evaluation: value, the matching variogram
    E(X_t - X_s)^2, and the quadrature error budget (zero for closed forms).
    """

    value: float
    variogram: float
    quadrature_error: float = 0.0

    def __post_init__(self):
        if self.quadrature_error < 0:
            raise ValueError("quadrature_error must be nonnegative")


def sawtooth_profile(t):
    """Triangle wave of period 2: rises with unit slope from 0 to 1, falls
    back to 0.  Deterministic factor of the sawtooth process."""
    u = np.asarray(t, dtype=float) % 2.0
    return np.minimum(u, 2.0 - u)


@lru_cache(maxsize=65536)
def _fou_i5(hurst: float, lag: float):
    res = shifted_exp_kernel_integral(hurst, lag)
    return res.value, res.abs_error_estimate


@lru_cache(maxsize=4096)
def _tempered_r(theta: float, alpha: float, lag: float):
    """Covariance of the tempered moving average at nonnegative lag:
    exp(-theta lag) * int_0^inf exp(-2 theta z) z**alpha (z + lag)**alpha dz,
    truncated where the weight is below 1e-17 of its peak."""
    upper = 40.0 / theta
    val, err = integrate.quad(
        lambda z: math.exp(-2.0 * theta * z) * z**alpha * (z + lag) ** alpha,
        0.0,
        upper,
        epsabs=1e-13,
        epsrel=1e-13,
        limit=200,
    )
    scale = math.exp(-theta * lag)
    # crude but safe tail bound: the discarded mass is dominated by
    # exp(-40) times the full integral's scale
    tail = math.exp(-40.0) * max(val, 1.0)
    return scale * val, scale * (err + tail)


def _bridge_cov(s: float, t: float) -> float:
    if math.floor(s) != math.floor(t):
        return 0.0
    u = s - math.floor(s)
    v = t - math.floor(t)
    lo, hi = (u, v) if u <= v else (v, u)
    return lo * (1.0 - hi)


def covariance(spec: ProcessSpec, s: float, t: float) -> KernelEval:
    """E[X_s X_t] together with the variogram E(X_t - X_s)^2."""
    k = spec.kind
    tau = abs(t - s)
    if k is ProcessKind.FBM:
        h2 = 2.0 * spec.hurst
        value = 0.5 * (abs(s) ** h2 + abs(t) ** h2 - tau**h2)
        return KernelEval(value, tau**h2)
    if k is ProcessKind.PERIODIC_BRIDGE:
        value = _bridge_cov(s, t)
        vario = _bridge_cov(s, s) + _bridge_cov(t, t) - 2.0 * value
        return KernelEval(value, max(vario, 0.0))
    if k is ProcessKind.STATIONARY_OU:
        th = spec.theta
        value = math.exp(-th * tau) / (2.0 * th)
        return KernelEval(value, (1.0 - math.exp(-th * tau)) / th)
    if k is ProcessKind.FRACTIONAL_OU:
        # theta scaling: cov_theta(tau) = theta**(-2H) cov_1(theta tau)
        h = spec.hurst
        ch = h * (2.0 * h - 1.0)
        scale = spec.theta ** (-2.0 * h)
        v0, e0 = _fou_i5(h, 0.0)
        vt, et = _fou_i5(h, spec.theta * tau)
        value = scale * ch * vt
        vario = 2.0 * scale * ch * (v0 - vt)
        return KernelEval(value, max(vario, 0.0), scale * ch * (e0 + 2.0 * et))
    if k is ProcessKind.TEMPERED_STATIONARY:
        v0, e0 = _tempered_r(spec.theta, spec.alpha, 0.0)
        vt, et = _tempered_r(spec.theta, spec.alpha, tau)
        return KernelEval(vt, max(2.0 * (v0 - vt), 0.0), e0 + 2.0 * et)
    if k is ProcessKind.RANDOM_SAWTOOTH:
        m2 = spec.xi_law.second_moment
        ps = float(sawtooth_profile(s))
        pt = float(sawtooth_profile(t))
        return KernelEval(m2 * ps * pt, m2 * (pt - ps) ** 2)
    raise ValueError(f"unknown process kind {k!r}")


def variogram(spec: ProcessSpec, s: float, t: float) -> float:
    return covariance(spec, s, t).variogram


def covariance_matrix(spec: ProcessSpec, times) -> np.ndarray:
    """Exact covariance matrix on an arbitrary time grid.

    Stationary kinds on uniform grids reduce to a Toeplitz build over the
    distinct lags, which keeps the quadrature-backed kernels cheap.
    """
    ts = np.asarray(times, dtype=float)
    if ts.ndim != 1:
        raise ValueError("times must be one-dimensional")
    n = ts.size
    k = spec.kind
    if k is ProcessKind.FBM:
        h2 = 2.0 * spec.hurst
        a = np.abs(ts) ** h2
        return 0.5 * (a[:, None] + a[None, :] - np.abs(ts[:, None] - ts[None, :]) ** h2)
    if k is ProcessKind.PERIODIC_BRIDGE:
        fl = np.floor(ts)
        fr = ts - fl
        same = fl[:, None] == fl[None, :]
        lo = np.minimum(fr[:, None], fr[None, :])
        hi = np.maximum(fr[:, None], fr[None, :])
        return np.where(same, lo * (1.0 - hi), 0.0)
    if k is ProcessKind.RANDOM_SAWTOOTH:
        p = sawtooth_profile(ts) * math.sqrt(spec.xi_law.second_moment)
        return np.outer(p, p)
    # stationary kernels: evaluate r on the distinct lags only
    if k is ProcessKind.STATIONARY_OU:
        lags = np.abs(ts[:, None] - ts[None, :])
        return np.exp(-spec.theta * lags) / (2.0 * spec.theta)

    def r_of(u: float) -> float:
        if k is ProcessKind.FRACTIONAL_OU:
            ch = spec.hurst * (2.0 * spec.hurst - 1.0)
            scale = spec.theta ** (-2.0 * spec.hurst)
            return scale * ch * _fou_i5(spec.hurst, float(spec.theta * u))[0]
        return _tempered_r(spec.theta, spec.alpha, float(u))[0]

    steps = np.diff(ts)
    if n > 1 and steps.size and np.allclose(steps, steps[0], rtol=0, atol=1e-12):
        # uniform grid: n distinct lags, Toeplitz structure
        row = np.array([r_of(i * steps[0]) for i in range(n)])
        return toeplitz(row)
    lags = np.abs(ts[:, None] - ts[None, :])
    uniq, inv = np.unique(np.round(lags, 12), return_inverse=True)
    vals = np.array([r_of(u) for u in uniq])
    return vals[inv].reshape(n, n)


def fou_variance(hurst: float) -> float:
    """Stationary variance of the unit-rate fractional OU process, computed
    by quadrature of the defining double integral (diagonal-split form).

    Agrees with the closed form hurst * Gamma(2 * hurst) to quadrature
    accuracy; tests pin that identity.
    """
    ch = hurst * (2.0 * hurst - 1.0)
    return ch * exp_kernel_mass(hurst).value
