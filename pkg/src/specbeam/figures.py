"""Matplotlib renderings saved next to the delimited outputs."""

from __future__ import annotations

import numpy as np

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

DPI = 150


def save_eigen_figure(spectrum, fit, path) -> None:
    n = np.arange(1, spectrum.count + 1)
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(6.0, 6.0), sharex=True)
    top.semilogy(n, spectrum.mu, "o", ms=4, label="mu_n")
    top.semilogy(n, n.astype(float) ** 4, "-", lw=1, label="n^4")
    if fit is not None:
        top.semilogy(n, n.astype(float) ** 4 + 2.0 * fit.a * n**2 + np.mean(fit.b), "--", lw=1,
                     label=f"n^4 + 2 a n^2 (a = {fit.a:.4g})")
    top.set_ylabel("eigenvalue")
    top.legend(fontsize=8)
    if fit is not None:
        bottom.plot(n, fit.b, "s-", ms=3, lw=0.8)
        bottom.set_ylabel("b_n")
    else:
        bottom.plot(n, spectrum.mu - n.astype(float) ** 4, "s-", ms=3, lw=0.8)
        bottom.set_ylabel("mu_n - n^4")
    bottom.set_xlabel("mode index n")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def save_lattice_figure(lattice, path) -> None:
    m = lattice.freq.m_values()
    n = np.arange(1, lattice.spectrum.count + 1)
    mm, nn = np.meshgrid(m, n, indexing="ij")
    mask = lattice.null_mask
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    mag = np.log10(np.maximum(np.abs(lattice.values), 1e-300))
    sc = ax.scatter(mm[~mask], nn[~mask], c=mag[~mask], s=18, cmap="viridis")
    if mask.any():
        ax.scatter(mm[mask], nn[mask], marker="x", s=40, color="crimson", label="null modes")
        ax.legend(fontsize=8, loc="upper right")
    fig.colorbar(sc, ax=ax, label="log10 |value|")
    gamma = f"{lattice.gamma:.6g}" if np.isfinite(lattice.gamma) else "inf"
    ax.set_title(f"delta = {lattice.delta:.6g}, gamma = {gamma}, null count = {lattice.null_count}")
    ax.set_xlabel("temporal index m")
    ax.set_ylabel("spatial index n")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def save_trace_figure(trace, path) -> None:
    eps = np.array([s.eps for s in trace.steps])
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    for name, label in (
        ("residual_norm", "residual"),
        ("eps_times_norm", "eps * |u|"),
        ("L_u_norm", "|L u|"),
        ("l1_norm", "L1 norm"),
        ("sup_norm", "sup norm"),
    ):
        series = np.array([getattr(s, name) for s in trace.steps])
        ax.loglog(eps, np.maximum(series, 1e-300), "o-", ms=3, lw=0.9, label=label)
    ax.invert_xaxis()
    ax.set_xlabel("regularization eps")
    ax.set_ylabel("monitored value")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def save_field_figure(field, path) -> None:
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    mesh = ax.pcolormesh(field.grid.nodes, field.times, field.values, shading="auto",
                         cmap="RdBu_r")
    fig.colorbar(mesh, ax=ax, label="u(t, x)")
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
