"""Figure renderers for the command-line reports.

Each function takes a result object from one of the computation modules
and saves a PNG next to the delimited output.  Rendering is headless
(Agg) and every figure is closed after saving, so these are safe to call
from batch runs.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "path_figure",
    "floor_figure",
    "small_ball_figure",
    "divergence_figure",
    "selfsimilar_figure",
    "ergodic_figure",
    "estimate_figure",
]

_DPI = 130


def _save(fig, target: str) -> str:
    fig.tight_layout()
    fig.savefig(target, dpi=_DPI)
    plt.close(fig)
    return target


def path_figure(path, target: str) -> str:
    """Sampled path against time."""
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    ax.plot(path.times, path.values, lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("X(t)")
    ax.set_title(f"{path.spec.label()}  seed {path.seed}  dt {path.dt:g}")
    return _save(fig, target)


def floor_figure(report, f_label: str, target: str) -> str:
    """Measured window floor K(eta) against its declared power threshold."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.loglog(report.eta_grid, report.floor_values, "o-", label="measured floor")
    ax.loglog(report.eta_grid, report.thresholds, "s--", label="declared threshold")
    ax.set_xlabel("eta")
    ax.set_ylabel("K(eta)")
    ax.legend()
    verdict = "passes" if report.passes else "fails"
    ax.set_title(f"{f_label}: floor bound {verdict}")
    return _save(fig, target)


def small_ball_figure(rows, target: str) -> str:
    """Empirical small-ball estimates against their analytic bounds.

    Points below the diagonal are dominated; 2 half-width whiskers show
    the Monte Carlo slack the dominance check allows.
    """
    results = [row.result for row in rows]
    admissible = [r for r in results if r.admissible and r.analytic_bound]
    fig, ax = plt.subplots(figsize=(5.5, 5.0))
    if admissible:
        bounds = np.array([r.analytic_bound for r in admissible])
        p_hats = np.array([r.p_hat for r in admissible])
        errs = 2.0 * np.array([r.half_width for r in admissible])
        floor = max(1e-6, 0.5 * min(bounds.min(), max(p_hats.min(), 1e-6)))
        ax.errorbar(
            bounds,
            np.maximum(p_hats, floor),
            yerr=errs,
            fmt="o",
            ms=4,
            lw=0.8,
            capsize=2,
        )
        lo = floor
        hi = 2.0 * max(bounds.max(), p_hats.max())
        ax.plot([lo, hi], [lo, hi], "k--", lw=0.8, label="p_hat = bound")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.legend()
    else:
        ax.text(0.5, 0.5, "no admissible pairs", ha="center", va="center")
    ax.set_xlabel("analytic bound")
    ax.set_ylabel("empirical p_hat")
    ax.set_title("small-ball dominance")
    return _save(fig, target)


def divergence_figure(report, target: str) -> str:
    """Per-replicate integrals, their mean, and the fitted rate line."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    t = report.t_grid
    sample = report.i_matrix[: min(40, report.i_matrix.shape[0])]
    ax.loglog(t, sample.T, color="C0", alpha=0.15, lw=0.6)
    mean = report.i_matrix.mean(axis=0)
    ax.loglog(t, mean, "C1o-", lw=1.5, label="mean I_T")
    lo, hi = report.rate.t_range
    ts = np.array([lo, hi])
    fit = np.exp(report.rate.intercept) * ts**report.rate.slope
    ax.loglog(
        ts, fit, "k--", lw=1.2, label=f"slope {report.rate.slope:.3f}"
    )
    ax.set_xlabel("T")
    ax.set_ylabel("I_T")
    ax.set_title(
        f"{report.spec.label()}  f = {report.f.label()}  "
        f"eps = {report.epsilon:g}"
    )
    ax.legend()
    return _save(fig, target)


def selfsimilar_figure(report, target: str) -> str:
    """Normalized integrals along the scaling subsequence."""
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    ks = report.k_grid
    ax.semilogy(
        ks,
        report.normalized.T,
        color="C0",
        alpha=0.2,
        lw=0.6,
    )
    ax.semilogy(
        ks, np.median(report.normalized, axis=0), "C1o-", lw=1.5,
        label="median",
    )
    ax.set_xlabel("k")
    ax.set_ylabel("normalized integral")
    ax.set_title(
        f"{report.spec.label()}  p = {report.p:g}  beta = {report.beta:.3f}"
    )
    ax.legend()
    return _save(fig, target)


def ergodic_figure(report, target: str) -> str:
    """Histogram of the time averages with the across-replicate mean."""
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    ax.hist(report.averages, bins=30, color="C0", alpha=0.8)
    ax.axvline(report.mean, color="C1", lw=1.5, label=f"mean {report.mean:.4f}")
    ax.set_xlabel("I_T / T")
    ax.set_ylabel("replicates")
    ax.set_title(
        f"{report.spec.label()}  f = {report.f.label()}  "
        f"T = {report.t_horizon:g}"
    )
    ax.legend()
    return _save(fig, target)


def estimate_figure(theta: float, theta_hats, target: str, title: str) -> str:
    """Histogram of per-seed estimates with the true parameter marked."""
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    ax.hist(np.asarray(theta_hats), bins=25, color="C0", alpha=0.8)
    ax.axvline(theta, color="C1", lw=1.5, label=f"theta = {theta:g}")
    ax.set_xlabel("theta_hat")
    ax.set_ylabel("seeds")
    ax.set_title(title)
    ax.legend()
    return _save(fig, target)
