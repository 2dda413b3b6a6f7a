"""Static SVG figures for batch runs.

Figures are written with a fixed SVG hash salt and no date metadata so the
files are reproducible. Nothing here touches numerical outputs.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .spectral import SpectrumEstimate  # noqa: E402

_RC = {
    "svg.hashsalt": "hetcorr",
    "svg.fonttype": "path",
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "figure.figsize": (5.0, 3.2),
}


def _save(fig, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_spectrum(
    est: SpectrumEstimate,
    path: Path | str,
    predicted: float | None = None,
    arm_psd: SpectrumEstimate | None = None,
    title: str | None = None,
) -> Path:
    """CSD real part against frequency with the flat closed-form level."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        f = est.freqs[1:-1] / 1e3
        ax.plot(f, est.values.real[1:-1], lw=0.6, color="C0", label="CSD (real)")
        ax.plot(f, est.values.imag[1:-1], lw=0.4, color="C7", alpha=0.6, label="CSD (imag)")
        if arm_psd is not None:
            ax.plot(f, arm_psd.values.real[1:-1], lw=0.6, color="C2", label="arm PSD")
        if predicted is not None:
            ax.axhline(predicted, color="C3", ls="--", lw=1.0, label=f"predicted {predicted:+.4g}")
        ax.set_xlabel("frequency (kHz)")
        ax.set_ylabel("spectral density (SNU)")
        if title:
            ax.set_title(title)
        ax.legend(loc="best", frameon=False)
        return _save(fig, path)


def plot_sweep(
    r: np.ndarray,
    total: np.ndarray,
    path: Path | str,
    r_star: float | None = None,
    sigma: np.ndarray | None = None,
    analytic: np.ndarray | None = None,
) -> Path:
    """Total noise against squeeze parameter, optimum marked."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        if sigma is not None:
            ax.errorbar(r, total, yerr=3 * sigma, fmt="o", ms=2.5, lw=0.8, color="C0", label="Monte Carlo (3σ)")
        else:
            ax.plot(r, total, color="C0", lw=1.2, label="total noise")
        if analytic is not None:
            ax.plot(r, analytic, color="C1", lw=1.0, label="closed form")
        ax.axhline(0.0, color="k", lw=0.6)
        if r_star is not None:
            ax.axvline(r_star, color="C3", ls="--", lw=1.0, label=f"r* = {r_star:.5f}")
        ax.set_xlabel("squeeze parameter r")
        ax.set_ylabel("total noise (SNU Hz)")
        ax.legend(loc="best", frameon=False)
        return _save(fig, path)


def plot_full_band(omega_frac: np.ndarray, csd: np.ndarray, narrowband: float, path: Path | str) -> Path:
    """Full-band CSD over the analysis range, with the narrowband limit."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        ax.plot(omega_frac, csd, color="C0", lw=1.2, label="full band")
        ax.axhline(narrowband, color="C3", ls="--", lw=1.0, label="narrowband limit")
        ax.set_xlabel(r"$\omega / \omega_l$")
        ax.set_ylabel("CSD (SNU)")
        ax.legend(loc="best", frameon=False)
        return _save(fig, path)


def plot_profile(freqs: np.ndarray, r_star: np.ndarray, path: Path | str) -> Path:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        ax.plot(freqs, r_star, "o-", ms=2.5, color="C0")
        ax.set_xlabel("frequency (Hz)")
        ax.set_ylabel("optimal r")
        return _save(fig, path)
