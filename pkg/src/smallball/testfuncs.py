"""Test functions and their window floor diagnostics.

The divergence results need integrands f whose small windows cannot hide:
quantified through the two-sided window floor

    K(eta) = inf_x min( sup_{[x-eta, x]} |f|, sup_{[x, x+eta]} |f| )

which must dominate a power eta**k for small eta.  This module carries a
registry of functions with declared floor constants, the grid machinery to
measure K(eta), a one-sided open-window variant, a derivative-ladder
sufficient condition with its constructive constants, and the polynomial
growth floor used by the self-similar route.

Floors are measured, never assumed: the checks sample |f| on a grid fine
relative to eta, slide exact window maxima across it, and refine until the
floor estimate stabilizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "FunctionKind",
    "FloorParams",
    "GrowthParams",
    "FunctionSpec",
    "FloorReport",
    "LadderReport",
    "BUILTIN_FUNCTIONS",
    "builtin_function",
    "window_floor",
    "check_floor_power_bound",
    "check_floor_consistency",
    "check_derivative_ladder",
    "check_growth_floor",
    "derivative_bound_holds",
]


class FunctionKind(str, Enum):
    POLY = "poly"
    TRIG_COMBO = "trig"
    RATIONAL = "rational"
    X3_SIN_INV = "x3sininv"
    PERIODIC_SIN_CLUSTER = "sincluster"
    ABS_POW = "abspow"
    CUSTOM = "custom"


@dataclass(frozen=True)
class FloorParams:
    """Declared floor constants: K(eta) >= eta**exponent for eta <= eta_star,
    plus the growth constant bounding |f'| by deriv_bound*(1+|x|)**deriv_bound.
    """

    exponent: float
    eta_star: float
    deriv_bound: float


@dataclass(frozen=True)
class GrowthParams:
    """|f(x)| >= scale * |x|**power for |x| >= cutoff."""

    scale: float
    power: float
    cutoff: float


@dataclass(frozen=True)
class FunctionSpec:
    kind: FunctionKind
    coeffs: tuple = ()
    floor: FloorParams | None = None
    growth: GrowthParams | None = None
    name: str = ""
    fn: object = field(default=None, repr=False, compare=False)
    derivs: tuple = field(default=(), repr=False, compare=False)
    period: float | None = None
    default_range: tuple = (-2.0, 2.0)

    def __post_init__(self):
        if self.kind is FunctionKind.POLY and not self.coeffs:
            raise ValueError("poly requires at least one coefficient")
        if self.kind is FunctionKind.TRIG_COMBO and len(self.coeffs) != 4:
            raise ValueError("trig requires coefficients (sin, cos, linear, const)")
        if self.kind is FunctionKind.RATIONAL and len(self.coeffs) != 2:
            raise ValueError("rational requires (numerator, denominator) tuples")
        if self.kind is FunctionKind.ABS_POW:
            if len(self.coeffs) != 1 or not self.coeffs[0] > 1:
                raise ValueError("abspow requires a single power > 1")
        if self.kind is FunctionKind.CUSTOM and self.fn is None:
            raise ValueError("custom requires a callable")

    def label(self) -> str:
        if self.name:
            return self.name
        if self.kind in (FunctionKind.POLY, FunctionKind.ABS_POW):
            return f"{self.kind.value}:" + ",".join(f"{c:g}" for c in self.coeffs)
        if self.kind is FunctionKind.TRIG_COMBO:
            return "trig:" + ",".join(f"{c:g}" for c in self.coeffs)
        if self.kind is FunctionKind.RATIONAL:
            num, den = self.coeffs
            return (
                "rational:"
                + ",".join(f"{c:g}" for c in num)
                + "/"
                + ",".join(f"{c:g}" for c in den)
            )
        return self.kind.value

    def value(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        k = self.kind
        if k is FunctionKind.POLY:
            return np.polynomial.polynomial.polyval(x, self.coeffs)
        if k is FunctionKind.TRIG_COMBO:
            a, b, c, d = self.coeffs
            return a * np.sin(x) + b * np.cos(x) + c * x + d
        if k is FunctionKind.RATIONAL:
            num, den = self.coeffs
            return np.polynomial.polynomial.polyval(x, num) / (
                np.polynomial.polynomial.polyval(x, den)
            )
        if k is FunctionKind.X3_SIN_INV:
            safe = np.where(x == 0.0, 1.0, x)
            return np.where(x == 0.0, 0.0, x**3 * np.sin(1.0 / safe))
        if k is FunctionKind.PERIODIC_SIN_CLUSTER:
            s = np.sin(x)
            safe = np.where(s == 0.0, 1.0, s)
            return np.where(s == 0.0, 0.0, s**3 * np.sin(1.0 / safe))
        if k is FunctionKind.ABS_POW:
            return np.abs(x) ** self.coeffs[0]
        return np.asarray(self.fn(x), dtype=float)

    def derivative(self, x, order: int = 1) -> np.ndarray:
        """Exact derivative where one is implemented; raises otherwise so a
        caller never silently gets a finite-difference stand-in."""
        if order == 0:
            return self.value(x)
        x = np.asarray(x, dtype=float)
        k = self.kind
        if k is FunctionKind.POLY:
            c = np.polynomial.polynomial.polyder(self.coeffs, m=order)
            return np.polynomial.polynomial.polyval(x, c) * np.ones_like(x)
        if k is FunctionKind.TRIG_COMBO:
            a, b, c, d = self.coeffs
            # (sin, cos) rotate with each derivative
            for _ in range(order):
                a, b = -b, a
            lin = c if order == 1 else 0.0
            return a * np.sin(x) + b * np.cos(x) + lin
        if k is FunctionKind.RATIONAL and order == 1:
            num, den = self.coeffs
            p = np.polynomial.polynomial.polyval
            dnum = np.polynomial.polynomial.polyder(num)
            dden = np.polynomial.polynomial.polyder(den)
            dv = p(x, den)
            return (p(x, dnum) * dv - p(x, num) * p(x, dden)) / dv**2
        if k is FunctionKind.X3_SIN_INV and order == 1:
            safe = np.where(x == 0.0, 1.0, x)
            return np.where(
                x == 0.0,
                0.0,
                3.0 * x**2 * np.sin(1.0 / safe) - x * np.cos(1.0 / safe),
            )
        if k is FunctionKind.PERIODIC_SIN_CLUSTER and order == 1:
            s = np.sin(x)
            safe = np.where(s == 0.0, 1.0, s)
            return np.where(
                s == 0.0,
                0.0,
                np.cos(x)
                * (3.0 * s**2 * np.sin(1.0 / safe) - s * np.cos(1.0 / safe)),
            )
        if k is FunctionKind.ABS_POW and order == 1:
            p = self.coeffs[0]
            return p * np.abs(x) ** (p - 1.0) * np.sign(x)
        if k is FunctionKind.CUSTOM and order <= len(self.derivs):
            return np.asarray(self.derivs[order - 1](x), dtype=float)
        raise ValueError(
            f"derivative of order {order} not available for {self.label()}"
        )


def _sliding_max(v: np.ndarray, w: int) -> np.ndarray:
    """Exact max over every window of w consecutive samples, O(len(v)).

    Classic two-pass block trick: prefix maxima and suffix maxima within
    blocks of width w combine into any w-window maximum.
    """
    n = v.size
    if w < 1 or w > n:
        raise ValueError("window length out of range")
    if w == 1:
        return v.copy()
    nblocks = -(-n // w)
    pad = nblocks * w - n
    vp = np.concatenate([v, np.full(pad, -np.inf)]) if pad else v
    blocks = vp.reshape(nblocks, w)
    pre = np.maximum.accumulate(blocks, axis=1).ravel()
    suf = np.maximum.accumulate(blocks[:, ::-1], axis=1)[:, ::-1].ravel()
    i = np.arange(n - w + 1)
    return np.maximum(suf[i], pre[i + w - 1])


def _sliding_min(v: np.ndarray, w: int) -> np.ndarray:
    return -_sliding_max(-v, w)


def _resolve_range(f: FunctionSpec, x_range):
    if x_range is not None:
        return float(x_range[0]), float(x_range[1])
    if f.period is not None:
        return 0.0, float(f.period)
    return float(f.default_range[0]), float(f.default_range[1])


def window_floor(
    f: FunctionSpec,
    eta: float,
    x_range=None,
    samples_per_eta: int = 512,
    one_sided: bool = False,
    open_window: bool = False,
):
    """Measured floor at a single eta; returns (value, witness_x).

    Refines the sampling grid (doubling up to three times) until the floor
    moves by less than 1%, so the result is grid-converged rather than
    grid-lucky.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    if open_window and not one_sided:
        raise ValueError("open windows are only defined for the one-sided floor")
    lo, hi = _resolve_range(f, x_range)
    if hi <= lo:
        raise ValueError("empty x_range")
    prev = None
    ny = samples_per_eta
    for _ in range(4):
        value, witness = _window_floor_once(f, eta, lo, hi, ny, one_sided, open_window)
        if prev is not None and abs(value - prev) <= 0.01 * max(prev, 1e-300):
            break
        prev = value
        ny *= 2
    return value, witness


def _window_floor_once(f, eta, lo, hi, ny, one_sided, open_window):
    step = eta / ny
    start = lo if one_sided else lo - eta
    count = int(math.ceil((hi + eta - start) / step)) + 1
    xs = start + step * np.arange(count)
    fv = np.abs(f.value(xs))
    w = ny  # samples spanning one eta window
    if open_window:
        right = _sliding_max(fv[1:], w - 1)  # samples x+step .. x+eta-step
    else:
        right = _sliding_max(fv, w + 1)
    # valid anchor positions: xs[i] in [lo, hi] and window inside the grid
    anchors = np.nonzero((xs >= lo - 1e-12) & (xs <= hi + 1e-12))[0]
    anchors = anchors[anchors < right.size]
    if one_sided:
        per_anchor = right[anchors]
    else:
        left = right  # same array; left window of x is right window of x-eta
        left_idx = anchors - w
        if np.any(left_idx < 0):
            raise RuntimeError("window grid misaligned")
        per_anchor = np.minimum(left[left_idx], right[anchors])
    j = int(np.argmin(per_anchor))
    return float(per_anchor[j]), float(xs[anchors[j]])


@dataclass(frozen=True)
class FloorReport:
    eta_grid: np.ndarray
    floor_values: np.ndarray
    thresholds: np.ndarray
    witness_x: np.ndarray
    passes: bool

    def margins(self) -> np.ndarray:
        return self.floor_values / self.thresholds


def check_floor_power_bound(
    f: FunctionSpec,
    exponent: float | None = None,
    eta_star: float | None = None,
    x_range=None,
    n_eta: int = 6,
    threshold_scale: float = 1.0,
) -> FloorReport:
    """Measure K(eta) on a geometric eta grid below eta_star and compare
    against threshold_scale * eta**exponent.

    Defaults come from the function's declared floor constants; passing
    explicit values probes alternative declarations.
    """
    if exponent is None or eta_star is None:
        if f.floor is None:
            raise ValueError(
                f"{f.label()} declares no floor constants; pass exponent and "
                "eta_star explicitly"
            )
        exponent = f.floor.exponent if exponent is None else exponent
        eta_star = f.floor.eta_star if eta_star is None else eta_star
    if eta_star <= 0 or threshold_scale <= 0:
        raise ValueError("eta_star and threshold_scale must be positive")
    etas = eta_star * 0.5 ** np.arange(n_eta)
    floors = np.empty(n_eta)
    witnesses = np.empty(n_eta)
    for i, eta in enumerate(etas):
        floors[i], witnesses[i] = window_floor(f, float(eta), x_range)
    thresholds = threshold_scale * etas**exponent
    passes = bool(np.all(floors >= thresholds))
    return FloorReport(etas, floors, thresholds, witnesses, passes)


def check_floor_consistency(f: FunctionSpec, etas=None, x_range=None) -> bool:
    """One-sided open floor at eta dominates the two-sided floor at eta/2.

    An open window (x, x + eta) contains both closed half-windows around its
    midpoint, so K2(eta) >= K(eta/2) up to grid slack.
    """
    if etas is None:
        base = f.floor.eta_star if f.floor is not None else 0.25
        etas = base * 0.5 ** np.arange(4)
    for eta in etas:
        k2, _ = window_floor(f, float(eta), x_range, one_sided=True, open_window=True)
        k, _ = window_floor(f, float(eta) / 2.0, x_range)
        if k2 < k * (1.0 - 0.02):
            return False
    return True


@dataclass(frozen=True)
class LadderReport:
    holds: bool
    depth: int
    eta0: float
    delta: float
    constructive: FloorReport | None

    @property
    def constructive_passes(self) -> bool:
        return self.constructive is not None and self.constructive.passes


def check_derivative_ladder(
    f: FunctionSpec,
    depth: int,
    eta0: float,
    delta: float,
    x_range=None,
    samples_per_eta: int = 1024,
) -> LadderReport:
    """Sufficient condition: on every window [x, x + eta0] some derivative
    order i <= depth stays uniformly above delta.

    When it holds, the floor bound follows constructively with exponent
    depth, eta_star = eta0 / 2**(2*depth) and scale delta / 2**depth; the
    report re-measures that floor instead of trusting the construction.
    """
    if depth < 0 or eta0 <= 0 or delta <= 0:
        raise ValueError("need depth >= 0, eta0 > 0, delta > 0")
    lo, hi = _resolve_range(f, x_range)
    step = eta0 / samples_per_eta
    count = int(math.ceil((hi + eta0 - lo) / step)) + 1
    xs = lo + step * np.arange(count)
    w = samples_per_eta
    best = None
    for order in range(depth + 1):
        g = np.abs(f.derivative(xs, order=order))
        inf_win = _sliding_min(g, w + 1)
        best = inf_win if best is None else np.maximum(best, inf_win)
    anchors = np.nonzero((xs >= lo - 1e-12) & (xs <= hi + 1e-12))[0]
    anchors = anchors[anchors < best.size]
    holds = bool(best[anchors].min() >= delta)
    constructive = None
    if holds:
        constructive = check_floor_power_bound(
            f,
            exponent=depth,
            eta_star=eta0 / 2 ** (2 * depth),
            x_range=x_range,
            threshold_scale=delta / 2**depth,
        )
    return LadderReport(holds, depth, eta0, delta, constructive)


def check_growth_floor(
    f: FunctionSpec,
    scale: float | None = None,
    power: float | None = None,
    cutoff: float | None = None,
    x_bound: float = 1e3,
    samples: int = 4096,
) -> bool:
    """|f(x)| >= scale * |x|**power for cutoff <= |x| <= x_bound, on a grid."""
    if scale is None or power is None or cutoff is None:
        if f.growth is None:
            raise ValueError(
                f"{f.label()} declares no growth constants; pass them explicitly"
            )
        scale = f.growth.scale if scale is None else scale
        power = f.growth.power if power is None else power
        cutoff = f.growth.cutoff if cutoff is None else cutoff
    if cutoff <= 0 or cutoff >= x_bound:
        raise ValueError("need 0 < cutoff < x_bound")
    xs = np.linspace(cutoff, x_bound, samples)
    xs = np.concatenate([-xs[::-1], xs])
    return bool(np.all(np.abs(f.value(xs)) >= scale * np.abs(xs) ** power))


def derivative_bound_holds(
    f: FunctionSpec, c0: float | None = None, x_bound: float = 1e3,
    samples: int = 20001,
) -> bool:
    """Grid check of |f'(x)| <= c0 * (1 + |x|)**c0 on [-x_bound, x_bound]."""
    if c0 is None:
        if f.floor is None:
            raise ValueError("no declared derivative bound; pass c0")
        c0 = f.floor.deriv_bound
    xs = np.linspace(-x_bound, x_bound, samples)
    return bool(np.all(np.abs(f.derivative(xs)) <= c0 * (1 + np.abs(xs)) ** c0))


def _builtin(kind, coeffs, floor, growth, name, **kw):
    return FunctionSpec(
        kind=kind,
        coeffs=coeffs,
        floor=FloorParams(*floor) if floor else None,
        growth=GrowthParams(*growth) if growth else None,
        name=name,
        **kw,
    )


BUILTIN_FUNCTIONS: dict[str, FunctionSpec] = {
    "identity": _builtin(
        FunctionKind.POLY, (0.0, 1.0), (2.0, 0.25, 1.0), (0.9, 1.0, 0.5), "identity"
    ),
    "square": _builtin(
        FunctionKind.POLY, (0.0, 0.0, 1.0), (3.0, 0.25, 2.0), (0.9, 2.0, 0.5), "square"
    ),
    "one": _builtin(FunctionKind.POLY, (1.0,), (1.0, 1.0, 1.0), None, "one"),
    "unit_parabola": _builtin(
        FunctionKind.POLY, (1.0, 0.0, 1.0), (1.0, 0.5, 2.0), (0.9, 2.0, 2.0),
        "unit_parabola",
    ),
    "sine": _builtin(
        FunctionKind.TRIG_COMBO, (1.0, 0.0, 0.0, 0.0), (2.0, 0.25, 1.0), None,
        "sine", period=2 * math.pi,
    ),
    "rational_cubic": _builtin(
        FunctionKind.RATIONAL, ((2.0, 0.0, 0.0, 1.0), (1.0, 0.0, 1.0)),
        (2.0, 0.25, 3.0), (0.5, 1.0, 3.0), "rational_cubic",
        default_range=(-3.0, 3.0),
    ),
    "cubic_sin_inverse": _builtin(
        FunctionKind.X3_SIN_INV, (), (4.0, 0.09, 3.0), None, "cubic_sin_inverse",
        default_range=(-1.0, 1.0),
    ),
    "periodic_sin_cluster": _builtin(
        FunctionKind.PERIODIC_SIN_CLUSTER, (), (4.0, 0.09, 4.0), None,
        "periodic_sin_cluster", period=math.pi,
    ),
    "abs_pow_3_2": _builtin(
        FunctionKind.ABS_POW, (1.5,), (2.0, 0.1, 1.5), (0.9, 1.5, 2.0),
        "abs_pow_3_2",
    ),
}


def builtin_function(name: str) -> FunctionSpec:
    try:
        return BUILTIN_FUNCTIONS[name]
    except KeyError:
        raise ValueError(
            f"unknown builtin function {name!r}; known: "
            + ", ".join(sorted(BUILTIN_FUNCTIONS))
        ) from None
