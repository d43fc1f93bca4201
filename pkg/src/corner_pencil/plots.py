"""Figure rendering for CLI reports.

Every CSV the CLI writes can be accompanied by a PNG rendered here; all
figures go straight to files (Agg backend, no display).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .spectrum import BandResult
from .tangential import ConsistencyReport
from .verify import ProbeResult, SingularField


def save_detgrid_figure(
    path: str | Path,
    re_vals: np.ndarray,
    im_vals: np.ndarray,
    logdet: np.ndarray,
) -> Path:
    """Heatmap of log|det| over the sampled rectangle."""
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    mesh = ax.pcolormesh(re_vals, im_vals, logdet.T, shading="auto", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label=r"$\log|\det M_n(\lambda)|$")
    ax.set_xlabel(r"Re $\lambda$")
    ax.set_ylabel(r"Im $\lambda$")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_spectrum_figure(path: str | Path, result: BandResult) -> Path:
    """Band eigenvalues in the complex plane, colored by classification."""
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    a, b, c, d = result.search_rect
    ax.axhspan(result.band[0], result.band[1], color="0.92", zorder=0, label="band")
    for rec, style in (
        ([r for r in result.records if r.classification == "proper"], dict(marker="o", color="tab:green", label="proper")),
        ([r for r in result.records if r.classification == "improper"], dict(marker="s", color="tab:red", label="improper")),
    ):
        if rec:
            ax.scatter([r.lam0.real for r in rec], [r.lam0.imag for r in rec], s=60, zorder=3, **style)
    if result.unstable:
        ax.scatter(
            [u.lam.real for u in result.unstable],
            [u.lam.imag for u in result.unstable],
            marker="x", color="0.4", s=40, zorder=2, label="unstable",
        )
    ax.set_xlim(a, b)
    ax.set_ylim(c - 0.05, d + 0.05)
    ax.set_xlabel(r"Re $\lambda$")
    ax.set_ylabel(r"Im $\lambda$")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_probe_figure(path: str | Path, probes: list[ProbeResult]) -> Path:
    """Truncated seminorm integrals against the inner radius, log-log."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for probe in probes:
        vals = np.asarray(probe.values)
        mask = vals > 0
        ax.loglog(
            np.asarray(probe.deltas)[mask],
            vals[mask],
            marker="o",
            label=f"order {probe.order} (exponent {probe.exponent:.3f})",
        )
    ax.invert_xaxis()
    ax.set_xlabel(r"$\delta$")
    ax.set_ylabel(r"$I(\delta)$")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_field_figure(path: str | Path, field: SingularField) -> Path:
    """Magnitude of each angle's field on its sector, one panel per angle."""
    n_angles = field.config.n_angles
    fig, axes = plt.subplots(1, n_angles, figsize=(4.5 * n_angles, 4.0), squeeze=False)
    eps = field.config.epsilon
    for j in range(1, n_angles + 1):
        ax = axes[0][j - 1]
        omega_j = field.config.angle(j)
        rs = np.linspace(0.02 * eps, eps, 60)
        oms = np.linspace(-omega_j, omega_j, 80)
        r_grid, om_grid = np.meshgrid(rs, oms, indexing="ij")
        vals = np.abs(field.value(j, r_grid.ravel(), om_grid.ravel())).reshape(r_grid.shape)
        y1 = r_grid * np.cos(om_grid)
        y2 = r_grid * np.sin(om_grid)
        mesh = ax.pcolormesh(y1, y2, vals, shading="gouraud", cmap="magma")
        fig.colorbar(mesh, ax=ax, label=rf"$|u_{j}|$")
        ax.set_aspect("equal")
        ax.set_xlabel(r"$y_1$")
        ax.set_ylabel(r"$y_2$")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_consistency_figure(path: str | Path, report: ConsistencyReport) -> Path:
    """Partial integrals F(delta) against ln(1/delta) per checked side."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for entry in report.entries:
        deltas = np.array([d for d, _ in entry.partial_integrals])
        values = np.array([v for _, v in entry.partial_integrals])
        ax.plot(
            np.log(1.0 / deltas),
            values,
            marker=".",
            label=f"side {entry.side.key()} ({'ok' if entry.consistent else 'divergent'})",
        )
    ax.set_xlabel(r"$\ln(1/\delta)$")
    ax.set_ylabel(r"$F(\delta)$")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
