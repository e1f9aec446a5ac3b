"""Figure rendering for run outputs (always to files, never to a window)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_STYLES = {
    "analytic": {"color": "tab:blue", "ls": "-"},
    "classical-limit": {"color": "tab:green", "ls": "--"},
    "pde": {"color": "tab:red", "ls": ":", "marker": "o", "ms": 3},
    "monte-carlo": {"color": "tab:purple", "ls": "", "marker": "x"},
}


def save_curve_figure(curves, path, title="Probability of disagreement vs. waiting time"):
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for curve in curves:
        style = _STYLES.get(curve.provenance, {})
        ax.plot(curve.times, curve.probabilities, label=curve.provenance, **style)
    ax.set_xlabel("waiting time t (units of 1/omega)")
    ax.set_ylabel("Pr(readers disagree)")
    ax.set_title(title)
    ax.set_ylim(bottom=0)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_density_figure(field, path):
    fig, ax = plt.subplots(figsize=(5.5, 5))
    extent = field.grid.extent
    im = ax.imshow(field.density().T, origin="lower",
                   extent=(-extent, extent, -extent, extent),
                   cmap="magma", aspect="equal")
    ax.axhline(0.0, color="w", lw=0.5, alpha=0.5)
    ax.axvline(0.0, color="w", lw=0.5, alpha=0.5)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"|psi|^2 at t = {field.time:.3f}")
    fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_discrimination_figure(report, path):
    times = [r.waiting_time for r in report.rows]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(times, [r.nu_a for r in report.rows], "o-", label=f"nu({report.source_a})")
    ax.plot(times, [r.nu_b for r in report.rows], "s-", label=f"nu({report.source_b})")
    ax.plot(times, [r.oracle_nu_a for r in report.rows], "--", color="gray",
            lw=1, label="quadrature oracle A")
    ax.plot(times, [r.oracle_nu_b for r in report.rows], ":", color="gray",
            lw=1, label="quadrature oracle B")
    ax.set_xlabel("waiting time T")
    ax.set_ylabel("disagreement fraction")
    ax.set_title(f"Source discrimination (headline |z| = {report.headline_z:.2f})")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_convergence_figure(report, path):
    dts = np.array([e.dt for e in report.entries])
    errs = np.array([max(e.error, 1e-16) for e in report.entries])
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.loglog(dts, errs, "o-", label="|quadrant prob - closed form|")
    ref = errs[0] * (dts / dts[0]) ** 2
    ax.loglog(dts, ref, "--", color="gray", label="slope 2")
    ax.set_xlabel("dt")
    ax.set_ylabel("error")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
