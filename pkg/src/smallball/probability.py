"""Small-ball probabilities: derived parameter sets, the adapted Gaussian
chaining bound, exact increment covariance sums, and Monte Carlo estimates.

The analytic side produces exponential upper bounds

    P[ sup_{t in [s, s+delta]} |X_t - X_s| <= eta ]
        <= k1 * exp(-k2 * eta**(-lam) * delta**mu)

valid either below a power curve eta < k3 * delta**gamma (the relaxed form)
or on a full rectangle eta < eta_star (the stronger form).  The empirical
side estimates the same probability from exact path samples with Wilson
score intervals, so the two can be compared on (eta, delta) grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy import integrate

from .kernels import (
    ProcessKind,
    ProcessSpec,
    covariance_matrix,
    sawtooth_profile,
    variogram,
)
from .quadrature import (
    _upper_incomplete_scaled,
    gamma_function,
    shifted_exp_kernel_integral,
)
from .simulate import sample_values

__all__ = [
    "IncrementCorrelation",
    "SmallBallParams",
    "SmallBallResult",
    "FouCrossTerms",
    "derive_small_ball_params",
    "sawtooth_small_ball_params",
    "default_small_ball_params",
    "sawtooth_deviation_floor",
    "sawtooth_worst_anchor",
    "li_shao_bound",
    "increment_cov_sum",
    "fou_increment_cross",
    "fou_cross_terms",
    "empirical_small_ball",
    "default_grid_pairs",
    "small_ball_grid",
    "holder_tail",
    "write_small_ball_csv",
]

_WILSON_Z = 1.959963984540054  # two-sided 95%


class IncrementCorrelation(str, Enum):
    """Sign structure of the increment covariances off the diagonal."""

    POSITIVE = "positive"
    BRIDGE_NEGATIVE = "bridge-negative"
    OU_NEGATIVE = "ou-negative"


@dataclass(frozen=True)
class SmallBallParams:
    """Constants of one exponential small-ball upper bound.

    Two admissibility shapes share this container.  When ``gamma`` and ``k3``
    are set the bound holds below the curve eta < k3 * delta**gamma (with an
    optional extra ceiling ``eta_star``); when they are absent it holds on
    the rectangle eta < eta_star, delta < delta_star.
    """

    delta_star: float
    k1: float
    k2: float
    lam: float
    mu: float
    eta_star: float | None = None
    gamma: float | None = None
    k3: float | None = None

    def __post_init__(self):
        for name in ("delta_star", "k1", "k2", "lam", "mu"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        for name in ("eta_star", "gamma", "k3"):
            v = getattr(self, name)
            if v is not None and not v > 0.0:
                raise ValueError(f"{name} must be positive when given")
        if (self.gamma is None) != (self.k3 is None):
            raise ValueError("gamma and k3 come as a pair")
        if self.gamma is None and self.eta_star is None:
            raise ValueError("need either a curve (gamma, k3) or eta_star")

    @property
    def rectangle(self) -> bool:
        """True when the bound holds on a full (eta, delta) rectangle."""
        return self.gamma is None

    def eta_ceiling(self, delta: float) -> float:
        """Largest admissible eta for the given window length."""
        if not 0.0 < delta < self.delta_star:
            return 0.0
        top = math.inf if self.eta_star is None else self.eta_star
        if self.k3 is not None:
            top = min(top, self.k3 * delta**self.gamma)
        return top

    def admissible(self, eta: float, delta: float) -> bool:
        return eta > 0.0 and eta < self.eta_ceiling(delta)

    def bound(self, eta: float, delta: float) -> float:
        """k1 * exp(-k2 * eta**(-lam) * delta**mu); admissible pairs only."""
        if not self.admissible(eta, delta):
            raise ValueError(
                f"(eta={eta:g}, delta={delta:g}) outside the admissible region"
            )
        return self.k1 * math.exp(-self.k2 * delta**self.mu / eta**self.lam)


@dataclass(frozen=True)
class SmallBallResult:
    """One Monte Carlo small-ball estimate next to its analytic bound."""

    s: float
    delta: float
    eta: float
    p_hat: float
    half_width: float
    analytic_bound: float | None
    admissible: bool


def derive_small_ball_params(
    c1: float,
    c2: float,
    c3: float,
    hurst: float,
    correlation: IncrementCorrelation,
) -> SmallBallParams:
    """Small-ball constants from two-sided variogram bounds.

    Inputs are the envelope constants

        c1 * |t-s|**(2*hurst) <= E(X_t - X_s)**2 <= c2 * |t-s|**(2*hurst)

    valid for |t-s| < c3, plus the correlation structure of the increments.
    The chaining route picks the block size a = c5 * eta**(1/hurst) / delta
    and feeds the resulting covariance sums through ``li_shao_bound``; the
    constants below are what comes out once a is eliminated.

    For positively correlated increments (hurst > 1/2) the admissible region
    is the curve eta < c4 * delta**hurst; for the negatively correlated
    cases the variogram is linear (hurst = 1/2 scaling) and the region is
    eta < c4 * delta**(1/2) with delta_star fixed by where the two-sided
    bounds hold (1 for the bridge, 2 for the unit-rate exponential kernel).
    """
    if not (0.0 < c1 <= c2):
        raise ValueError("need 0 < c1 <= c2")
    if c3 <= 0.0:
        raise ValueError("c3 must be positive")
    if not 0.0 < hurst <= 1.0:
        raise ValueError("hurst must lie in (0, 1]")
    correlation = IncrementCorrelation(correlation)
    c4 = math.sqrt(c1) / (2.0 ** (2.0 + hurst) * math.sqrt(2.0))
    c5 = (4.0 * math.sqrt(2.0) / math.sqrt(c1)) ** (1.0 / hurst)
    if correlation is IncrementCorrelation.POSITIVE:
        if hurst <= 0.5:
            raise ValueError(
                "positively correlated increments need hurst > 1/2"
            )
        c6 = 1.0 / (16.0 * c2**2 * c5 ** (2.0 + 2.0 * hurst))
        return SmallBallParams(
            delta_star=c3,
            k1=1.0,
            k2=c6,
            lam=2.0 / hurst - 2.0,
            mu=2.0 - 2.0 * hurst,
            eta_star=1.0,
            gamma=hurst,
            k3=c4,
        )
    # Negative cases: the S-sum is linear in a, S <= s_mult * a * delta**2,
    # and the optimized exponent is eta**4 / (16 * s_mult * a**3 * delta**2)
    # at a = c5 * eta**2 / delta.
    if correlation is IncrementCorrelation.BRIDGE_NEGATIVE:
        s_mult, delta_star = 2.0, 1.0
    else:
        s_mult, delta_star = 1.0 + math.e / 2.0, 2.0
    return SmallBallParams(
        delta_star=delta_star,
        k1=1.0,
        k2=1.0 / (16.0 * s_mult * c5**3),
        lam=2.0,
        mu=1.0,
        gamma=0.5,
        k3=c4,
    )


def sawtooth_deviation_floor(delta: float) -> float:
    """Worst-phase sup of |phi(t) - phi(s)| over windows of length delta.

    A window anchored at s = 1 - delta/3 rises delta/3 to the peak and falls
    back to delta/3 below the anchor, so the sup there is delta/3; every
    other anchor does worse.  Once delta >= 3/2 the window spans enough of
    the period that the sup is at least 1/2 at every phase, with equality at
    phi(s) = 1/2.
    """
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    return min(delta / 3.0, 0.5)


def sawtooth_worst_anchor(delta: float) -> float:
    """Anchor whose window attains ``sawtooth_deviation_floor(delta)``."""
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    if delta < 1.5:
        return 1.0 - delta / 3.0
    return 0.5


def sawtooth_small_ball_params(xi_law=None) -> SmallBallParams:
    """Rectangle-form small-ball constants for the random sawtooth.

    The path is xi times a fixed profile, so the window sup reduces exactly:
    P[sup <= eta] = P[|xi| <= eta / D(s, delta)] with D the profile
    deviation.  Using the worst-phase floor D >= delta/3 (delta < 3/2) and
    the amplitude tail P[|xi| <= x] <= tail_front * exp(-tail_scale/x**2)
    gives k2 = tail_scale / 3**lambda0 with lam = mu = lambda0.
    """
    from .kernels import default_xi_law

    xi = xi_law if xi_law is not None else default_xi_law()
    return SmallBallParams(
        delta_star=1.5,
        k1=xi.tail_front,
        k2=xi.tail_scale / 3.0**xi.lambda0,
        lam=xi.lambda0,
        mu=xi.lambda0,
        eta_star=1.0,
    )


@lru_cache(maxsize=64)
def _fou_variogram_envelope(hurst: float) -> tuple[float, float]:
    """Scanned (c2, c3) for the fractional OU variogram at unit rate.

    The ratio V(tau)/tau**(2*hurst) starts at 1 and decays, so c1 = 1/2
    holds up to the largest scanned tau where the ratio stays above 0.55
    (the margin absorbs the finite grid); c2 caps the ratio from above with
    5% headroom.
    """
    spec = ProcessSpec.fractional_ou(hurst, 1.0)
    taus = np.geomspace(2.0**-10, 4.0, 49)
    ratios = np.array(
        [variogram(spec, 0.0, t) / t ** (2.0 * hurst) for t in taus]
    )
    c2 = max(1.0, 1.05 * float(ratios.max()))
    ok = ratios >= 0.55
    idx = int(np.argmin(ok)) - 1 if not ok.all() else len(taus) - 1
    if idx < 0:
        raise RuntimeError("variogram ratio below 0.55 on the whole scan")
    return c2, float(taus[idx])


def default_small_ball_params(spec: ProcessSpec) -> SmallBallParams | None:
    """The derived parameter set for a process, or None when there is none.

    FBM with hurst <= 1/2 and the tempered process have no derived
    constants here, and return None so callers flag every pair inadmissible.
    """
    k = spec.kind
    if k is ProcessKind.FBM:
        if spec.hurst <= 0.5:
            return None
        # variogram is exactly tau**(2H): c1 = c2 = 1, any window length
        return derive_small_ball_params(
            1.0, 1.0, 1.0, spec.hurst, IncrementCorrelation.POSITIVE
        )
    if k is ProcessKind.PERIODIC_BRIDGE:
        return derive_small_ball_params(
            0.5, 1.0, 1.0, 0.5, IncrementCorrelation.BRIDGE_NEGATIVE
        )
    if k is ProcessKind.STATIONARY_OU:
        # (1 - exp(-theta*tau))/theta is sandwiched between exp(-1)*tau and
        # tau for theta*tau <= 1, so the unit-rate constants apply on
        # windows shorter than 2/theta.
        params = derive_small_ball_params(
            math.exp(-1.0), 1.0, 1.0, 0.5, IncrementCorrelation.OU_NEGATIVE
        )
        return replace(params, delta_star=2.0 / spec.theta)
    if k is ProcessKind.FRACTIONAL_OU:
        c2, c3 = _fou_variogram_envelope(spec.hurst)
        params = derive_small_ball_params(
            0.5, c2, c3, spec.hurst, IncrementCorrelation.POSITIVE
        )
        return replace(params, delta_star=c3 / spec.theta)
    if k is ProcessKind.RANDOM_SAWTOOTH:
        return sawtooth_small_ball_params(spec.xi_law)
    return None


def li_shao_bound(
    a: float, eta: float, xi_cov_sq_sum: float, xi_var_sum: float
) -> float | None:
    """Adapted Gaussian small-ball bound for one block size.

    Returns exp(-eta**4 / (16 * a**2 * xi_cov_sq_sum)) when the variance
    mass condition a * xi_var_sum >= 32 * eta**2 holds, else None: the
    bound says nothing for that block size.
    """
    if not 0.0 < a <= 0.5:
        raise ValueError("a must lie in (0, 1/2]")
    if eta <= 0.0 or xi_cov_sq_sum <= 0.0 or xi_var_sum <= 0.0:
        raise ValueError("eta and both sums must be positive")
    if a * xi_var_sum < 32.0 * eta**2:
        return None
    return math.exp(-(eta**4) / (16.0 * a**2 * xi_cov_sq_sum))


def increment_cov_sum(
    spec: ProcessSpec, a: float, delta: float
) -> tuple[float, float]:
    """Exact covariance sums of the block increments.

    With xi_i = X(i*a*delta) - X((i-1)*a*delta) for 2 <= i <= floor(1/a),
    returns (sum of E xi_i**2, sum over all pairs of (E xi_i xi_j)**2).
    The pair sum includes the diagonal.
    """
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    if not 0.0 < a < 1.0:
        raise ValueError("a must lie in (0, 1)")
    n = int(math.floor(1.0 / a + 1e-9))
    if n < 3:
        raise ValueError("need 1/a >= 3 so the sum has at least two blocks")
    times = a * delta * np.arange(1.0, n + 1.0)
    cov = covariance_matrix(spec, times)
    inc = cov[1:, 1:] - cov[1:, :-1] - cov[:-1, 1:] + cov[:-1, :-1]
    var_sum = float(np.trace(inc))
    cov_sq_sum = float(np.sum(inc**2))
    return var_sum, cov_sq_sum


@dataclass(frozen=True)
class FouCrossTerms:
    """Decomposition of one fractional-OU increment covariance.

    ``i1`` collects the history integrals both increments share, ``i2`` the
    mixed history/window pieces (reported once; it enters the covariance
    with multiplicity two), and ``i3`` the window/window piece.  ``positive``
    is the sign of the exact covariance, evaluated independently from the
    stationary kernel rather than from the three quadratures.
    """

    i1: float
    i2: float
    i3: float
    positive: bool

    @property
    def cross_sum(self) -> float:
        return self.i1 + 2.0 * self.i2 + self.i3


def fou_increment_cross(
    hurst: float, a: float, delta: float, i: int, j: int
) -> float:
    """Exact E xi_i xi_j for unit-rate fractional OU from the kernel."""
    d = a * delta
    m = (j - i) * d
    ch = hurst * (2.0 * hurst - 1.0)

    def r(u: float) -> float:
        return ch * shifted_exp_kernel_integral(hurst, abs(u)).value

    return 2.0 * r(m) - r(m - d) - r(m + d)


def _exp_weighted_shift(hurst: float, p: float) -> float:
    """int_0^inf exp(-w) |p - w|**(2*hurst - 2) dw for p > 0.

    Folding the two-sided kernel integral: the full line splits into this
    one-sided piece plus exp(p) * Gamma_upper(2h-1, p), so the piece is
    twice the two-sided value minus that tail.
    """
    two_sided = shifted_exp_kernel_integral(hurst, p).value
    tail, _ = _upper_incomplete_scaled(2.0 * hurst - 1.0, p)
    return 2.0 * two_sided - tail


def fou_cross_terms(
    hurst: float, a: float, delta: float, i: int, j: int
) -> FouCrossTerms:
    """Quadrature pieces of E xi_i xi_j for unit-rate fractional OU.

    Splitting each increment's moving-average representation at the left
    endpoint of its own block gives three integrals against the kernel
    |z - w + shift|**(2*hurst - 2): both-history (shift q*d, weight over the
    quarter plane), history/window (shift q*d, window side bounded by the
    block length d), and window/window (shift (q+1)*d, both sides bounded),
    with d = a*delta and q = j - i.  The middle piece carries multiplicity
    two in the covariance.  The sign is taken from the exact covariance so
    small quadrature slack in the pieces cannot flip it.
    """
    if not 0.5 < hurst < 1.0:
        raise ValueError("hurst must lie in (1/2, 1)")
    if not 0.0 < a <= 0.5:
        raise ValueError("a must lie in (0, 1/2]")
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    if not 2 <= i < j <= int(math.floor(1.0 / a + 1e-9)):
        raise ValueError("need 2 <= i < j <= 1/a")
    d = a * delta
    q = j - i
    m = q * d
    ch = hurst * (2.0 * hurst - 1.0)
    decay = math.exp(-d) - 1.0

    i1 = ch * decay**2 * shifted_exp_kernel_integral(hurst, m).value

    inner, _ = integrate.quad(
        lambda z: math.exp(-z) * _exp_weighted_shift(hurst, z + m), 0.0, d
    )
    i2 = ch * decay * inner

    # window/window piece over the d-by-d square, collapsed to the
    # difference variable v = z - w with weight exp(-|v|)(1-exp(-2(d-|v|)))/2
    shift = (q + 1.0) * d
    exponent = 2.0 * hurst - 2.0

    def diag_density(v: float) -> float:
        return (
            (shift + v) ** exponent
            * math.exp(-abs(v))
            * (1.0 - math.exp(-2.0 * (d - abs(v))))
            / 2.0
        )

    window, _ = integrate.quad(diag_density, -d, d, points=[0.0])
    i3 = ch * window

    exact = fou_increment_cross(hurst, a, delta, i, j)
    return FouCrossTerms(i1=float(i1), i2=i2, i3=i3, positive=bool(exact > 0.0))


def _wilson_interval(successes: int, trials: int) -> tuple[float, float]:
    """(p_hat, half width) of the 95% Wilson score interval."""
    z = _WILSON_Z
    p = successes / trials
    denom = 1.0 + z**2 / trials
    half = (
        z
        * math.sqrt(p * (1.0 - p) / trials + z**2 / (4.0 * trials**2))
        / denom
    )
    return p, half


def empirical_small_ball(
    spec: ProcessSpec,
    s: float,
    delta: float,
    eta: float,
    replicates: int,
    dt: float,
    seed: int,
    params: SmallBallParams | None = None,
) -> SmallBallResult:
    """Monte Carlo estimate of P[sup over [s, s+delta] |X_t - X_s| <= eta].

    The window is discretized on at most ``dt`` steps (snapped so the grid
    lands exactly on s + delta) and the sup is taken over the grid, which
    biases p_hat slightly upward; the dt <= delta/32 floor keeps that bias
    inside the Monte Carlo noise for the processes here.  When ``params``
    is omitted the process's derived constants fill the analytic bound for
    admissible (eta, delta).
    """
    if delta <= 0.0 or eta <= 0.0:
        raise ValueError("delta and eta must be positive")
    if dt <= 0.0 or dt > delta / 32.0:
        raise ValueError("dt must be positive and at most delta/32")
    if replicates < 1000:
        raise ValueError("need at least 1000 replicates")
    n = max(32, int(math.ceil(delta / dt - 1e-9)))
    values = sample_values(spec, s, delta / n, n, seed, replicates=replicates)
    dev = np.abs(values - values[:, :1]).max(axis=1)
    p_hat, half_width = _wilson_interval(int(np.sum(dev <= eta)), replicates)
    if params is None:
        params = default_small_ball_params(spec)
    admissible = params is not None and params.admissible(eta, delta)
    bound = params.bound(eta, delta) if admissible else None
    return SmallBallResult(
        s=float(s),
        delta=float(delta),
        eta=float(eta),
        p_hat=p_hat,
        half_width=half_width,
        analytic_bound=bound,
        admissible=admissible,
    )


def default_grid_pairs(
    params: SmallBallParams, n_pairs: int = 20
) -> list[tuple[float, float]]:
    """Admissible (eta, delta) pairs spread over the allowed region.

    Window lengths step geometrically below delta_star and eta fills a
    fixed fraction ladder below the ceiling at each delta.
    """
    fracs = (0.45, 0.6, 0.8, 0.95)
    n_delta = int(math.ceil(n_pairs / len(fracs)))
    ratios = np.geomspace(0.8, 0.2, n_delta)
    pairs = []
    for rho in ratios:
        delta = params.delta_star * float(rho)
        top = params.eta_ceiling(delta)
        for frac in fracs:
            pairs.append((frac * top, delta))
    return pairs[:n_pairs] if len(pairs) > n_pairs else pairs


@dataclass(frozen=True)
class SmallBallGridRow:
    """One grid pair with its refinement re-run."""

    result: SmallBallResult
    refined: SmallBallResult | None

    @property
    def dominated(self) -> bool:
        """p_hat - 2 * half_width <= analytic bound (vacuous without one)."""
        r = self.result
        if r.analytic_bound is None:
            return True
        return r.p_hat - 2.0 * r.half_width <= r.analytic_bound

    @property
    def stable(self) -> bool:
        """Refinement moved p_hat by less than the finer half width."""
        if self.refined is None:
            return True
        return abs(self.result.p_hat - self.refined.p_hat) <= max(
            self.refined.half_width, self.result.half_width
        )


def small_ball_grid(
    spec: ProcessSpec,
    base_seed: int,
    pairs: list[tuple[float, float]] | None = None,
    s: float = 0.0,
    replicates: int = 10_000,
    dt_divisor: int = 64,
    refine: bool = True,
    params: SmallBallParams | None = None,
) -> list[SmallBallGridRow]:
    """Empirical-vs-analytic sweep over an admissible (eta, delta) grid.

    Pair k uses seed base_seed + k, and the refinement re-run (same seed,
    half the step) probes grid bias.  Pairs default to
    ``default_grid_pairs`` of the process's derived constants.
    """
    if params is None:
        params = default_small_ball_params(spec)
    if pairs is None:
        if params is None:
            raise ValueError(
                "no derived small-ball constants for this process; "
                "pass explicit pairs"
            )
        pairs = default_grid_pairs(params)
    rows = []
    for k, (eta, delta) in enumerate(pairs):
        dt = delta / dt_divisor
        result = empirical_small_ball(
            spec, s, delta, eta, replicates, dt, base_seed + k, params=params
        )
        refined = None
        if refine:
            refined = empirical_small_ball(
                spec,
                s,
                delta,
                eta,
                replicates,
                dt / 2.0,
                base_seed + k,
                params=params,
            )
        rows.append(SmallBallGridRow(result=result, refined=refined))
    return rows


_HOLDER_EXPONENT = {
    ProcessKind.FBM: None,  # hurst
    ProcessKind.FRACTIONAL_OU: None,
    ProcessKind.PERIODIC_BRIDGE: 0.5,
    ProcessKind.STATIONARY_OU: 0.5,
    ProcessKind.RANDOM_SAWTOOTH: 1.0,
}


@dataclass(frozen=True)
class HolderTailResult:
    """Tail estimate of the Holder-quotient sup with its reference scale."""

    beta: float
    h: float
    r: float
    rho: float
    reference_m: float
    tail_prob: float
    half_width: float


def holder_tail(
    spec: ProcessSpec,
    beta: float,
    h: float,
    window: float = 1.0,
    replicates: int = 10_000,
    dt: float = 2.0**-7,
    seed: int = 0,
    r: float = 4.0,
    rho: float | None = None,
    s: float = 0.0,
) -> HolderTailResult:
    """Estimate P[sup over t1 != t2 |X_t2 - X_t1| / |t2-t1|**beta >= h].

    The moment route bounds this tail by a constant times M / h**r with
    M = integral over the unit square of |t2 - t1|**(r*rho - r*beta - 2),
    finite exactly when the exponent exceeds -1:
    M = 2 / ((r*rho - r*beta - 1) * (r*rho - r*beta)).  rho defaults to the
    process's mean-square Holder exponent; an infinite M is reported, not
    raised, since the empirical tail exists regardless.
    """
    if beta <= 0.0 or h <= 0.0 or window <= 0.0:
        raise ValueError("beta, h and window must be positive")
    if replicates < 100:
        raise ValueError("need at least 100 replicates")
    if rho is None:
        rho = _HOLDER_EXPONENT.get(spec.kind)
        if rho is None:
            if spec.kind is ProcessKind.TEMPERED_STATIONARY:
                rho = min(spec.alpha + 0.5, 1.0)
            else:
                rho = spec.hurst
    exponent = r * rho - r * beta - 2.0
    if exponent > -1.0:
        reference_m = 2.0 / ((exponent + 1.0) * (exponent + 2.0))
    else:
        reference_m = math.inf
    n = max(8, int(round(window / dt)))
    step = window / n
    values = sample_values(spec, s, step, n, seed, replicates=replicates)
    best = np.zeros(values.shape[0])
    for lag in range(1, n + 1):
        gap = (lag * step) ** beta
        m = np.abs(values[:, lag:] - values[:, :-lag]).max(axis=1)
        np.maximum(best, m / gap, out=best)
    p_hat, half_width = _wilson_interval(
        int(np.sum(best >= h)), values.shape[0]
    )
    return HolderTailResult(
        beta=float(beta),
        h=float(h),
        r=float(r),
        rho=float(rho),
        reference_m=reference_m,
        tail_prob=p_hat,
        half_width=half_width,
    )


def write_small_ball_csv(results, target) -> None:
    """CSV rows s,delta,eta,p_hat,half_width,bound,admissible."""
    own = isinstance(target, (str, bytes))
    fh = open(target, "w", newline="") if own else target
    try:
        fh.write("s,delta,eta,p_hat,half_width,bound,admissible\n")
        for res in results:
            bound = "" if res.analytic_bound is None else repr(res.analytic_bound)
            fh.write(
                f"{res.s!r},{res.delta!r},{res.eta!r},{res.p_hat!r},"
                f"{res.half_width!r},{bound},{str(res.admissible).lower()}\n"
            )
    finally:
        if own:
            fh.close()
