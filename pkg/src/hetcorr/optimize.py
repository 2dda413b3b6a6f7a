"""Classical-noise compensation by tuning the squeeze parameter.

With the LO at theta_l = pi/2 the cross spectrum is negative,
``(e^{-2r} - 1) snu / 4``, and can cancel a positive classical noise
``N_cl`` in the detector output. Cancellation is possible only while
``N_cl < snu B / 4``; the squeeze that achieves it is

    r* = -ln(1 - 4 N_cl / (snu B)) / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .chain import AcquisitionParams, ChainParams, sample_trajectories
from .spectral import EstimatorConfig, band_average, estimate_csd
from .states import GainConstants, LocalOscillator, SqueezeParams

SQUEEZED_PHASE = np.pi / 2


class InfeasibleBudgetError(ValueError):
    """Classical noise too large to be cancelled by any squeezing."""

    def __init__(self, n_cl: float, limit: float):
        super().__init__(f"classical noise {n_cl:.6g} is not below the cancellation limit {limit:.6g}")
        self.n_cl = n_cl
        self.limit = limit


@dataclass(frozen=True)
class NoiseBudget:
    """Classical noise ``n_cl`` (SNU Hz) and bandwidth ``B`` (Hz).

    Frequency-dependent noise is given as ``table = (freqs_hz, n_cl_values)``
    and interpolated piecewise-linearly; ``n_cl`` is then ignored.
    """

    n_cl: float = 0.0
    bandwidth: float = 1.0
    gains: GainConstants | None = None
    table: tuple[NDArray[np.float64], NDArray[np.float64]] | None = field(default=None)

    def __post_init__(self) -> None:
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be > 0")
        if self.table is None:
            if not (math.isfinite(self.n_cl) and self.n_cl >= 0):
                raise ValueError("classical noise must be finite and >= 0")
            return
        f, v = (np.asarray(a, dtype=float) for a in self.table)
        if f.ndim != 1 or f.shape != v.shape or f.size < 1:
            raise ValueError("noise table needs matching 1-D frequency and value arrays")
        if np.any(np.diff(f) <= 0):
            raise ValueError("noise table frequencies must be strictly increasing")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("tabulated classical noise must be finite and >= 0")
        object.__setattr__(self, "table", (f, v))

    @property
    def snu(self) -> float:
        return 1.0 if self.gains is None else self.gains.snu

    @property
    def K(self) -> float:  # noqa: N802
        return 0.5 * self.snu

    @property
    def limit(self) -> float:
        """Largest classical noise that squeezing can cancel (exclusive)."""
        return 0.5 * self.K * self.bandwidth

    def n_cl_at(self, freq: float | ArrayLike | None = None):
        if self.table is None:
            if freq is None:
                return self.n_cl
            return np.full(np.shape(freq), self.n_cl) if np.ndim(freq) else self.n_cl
        if freq is None:
            raise ValueError("a frequency is required for a tabulated noise budget")
        out = np.interp(freq, *self.table)
        return out if np.ndim(out) else float(out)


def feasible(budget: NoiseBudget, freq: float | None = None) -> bool:
    return bool(budget.n_cl_at(freq) < budget.limit)


def optimal_r(budget: NoiseBudget, freq: float | None = None) -> float:
    """Squeeze parameter that nulls the total noise at theta_l = pi/2."""
    n_cl = budget.n_cl_at(freq)
    if not n_cl < budget.limit:
        raise InfeasibleBudgetError(n_cl, budget.limit)
    return -0.5 * math.log1p(-2.0 * n_cl / (budget.K * budget.bandwidth))


def total_noise(budget: NoiseBudget, r: float | ArrayLike, theta_l: float = SQUEEZED_PHASE, freq: float | None = None):
    """Quantum CSD times bandwidth plus classical noise (SNU Hz). Negative values mean over-compensation."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise ValueError("squeeze parameter must be >= 0")
    v = np.exp(2 * r_arr) * np.cos(theta_l) ** 2 + np.exp(-2 * r_arr) * np.sin(theta_l) ** 2
    out = 0.25 * budget.snu * (v - 1.0) * budget.bandwidth + budget.n_cl_at(freq)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class OptimalProfile:
    """Per-frequency optimum; ``r_star`` is NaN exactly where ``feasible`` is False."""

    freqs: NDArray[np.float64]
    n_cl: NDArray[np.float64]
    feasible: NDArray[np.bool_]
    r_star: NDArray[np.float64]


def optimal_r_profile(budget: NoiseBudget, freqs: ArrayLike) -> OptimalProfile:
    freqs = np.asarray(freqs, dtype=float)
    n_cl = np.asarray(budget.n_cl_at(freqs), dtype=float).reshape(freqs.shape)
    ok = n_cl < budget.limit
    r = np.full(freqs.shape, np.nan)
    r[ok] = -0.5 * np.log1p(-2.0 * n_cl[ok] / (budget.K * budget.bandwidth))
    return OptimalProfile(freqs, n_cl, ok, r)


@dataclass(frozen=True)
class SweepTable:
    """Total noise on an r grid; 2-D ``(n_freqs, n_r)`` when swept per frequency."""

    r: NDArray[np.float64]
    total: NDArray[np.float64]
    freqs: NDArray[np.float64] | None = None

    @property
    def abs_total(self) -> NDArray[np.float64]:
        return np.abs(self.total)

    @property
    def argmin(self):
        return np.argmin(self.abs_total, axis=-1)

    @property
    def r_best(self):
        return self.r[self.argmin]


def sweep_r(
    budget: NoiseBudget,
    r_grid: ArrayLike,
    theta_l: float = SQUEEZED_PHASE,
    freqs: ArrayLike | None = None,
) -> SweepTable:
    r_grid = np.asarray(r_grid, dtype=float)
    if r_grid.ndim != 1 or r_grid.size == 0:
        raise ValueError("r grid must be a non-empty 1-D array")
    if np.any(np.diff(r_grid) <= 0):
        raise ValueError("r grid must be strictly ascending")
    if freqs is None and budget.table is None:
        return SweepTable(r_grid, np.asarray(total_noise(budget, r_grid, theta_l)))
    if freqs is None:
        freqs = budget.table[0]
    freqs = np.asarray(freqs, dtype=float)
    rows = [np.asarray(total_noise(budget, r_grid, theta_l, f)) for f in freqs]
    return SweepTable(r_grid, np.vstack(rows), freqs)


def simulate_total_noise(
    budget: NoiseBudget,
    r_grid: ArrayLike,
    acq: AcquisitionParams,
    est_cfg: EstimatorConfig | None = None,
    theta_l: float = SQUEEZED_PHASE,
    lo: LocalOscillator | None = None,
    band: tuple[float | None, float | None] = (None, None),
) -> tuple[SweepTable, NDArray[np.float64]]:
    """Monte-Carlo counterpart of :func:`sweep_r` for a flat classical noise.

    The classical noise is injected into both arms as a common fluctuation of
    variance ``N_cl / (snu B)`` so that it adds to the measured cross spectrum.
    Returns the table and the per-point standard errors (SNU Hz).
    """
    if budget.table is not None:
        raise ValueError("Monte-Carlo sweep supports a flat classical noise only")
    lo = lo or LocalOscillator()
    lo = LocalOscillator(lo.amplitude, theta_l, lo.angular_frequency)
    injected = budget.n_cl / (budget.snu * budget.bandwidth)
    totals, sigmas = [], []
    for r in np.asarray(r_grid, dtype=float):
        p = ChainParams(lo=lo, sq=SqueezeParams(float(r)))
        tr = sample_trajectories(p, acq, classical_noise=injected)
        est = estimate_csd(tr.j_a_minus, tr.j_b_minus, acq.sample_rate, est_cfg)
        avg = band_average(est, *band)
        scale = budget.snu * budget.bandwidth
        totals.append(avg.mean.real * scale)
        sigmas.append(avg.sigma * scale)
    return SweepTable(np.asarray(r_grid, dtype=float), np.asarray(totals)), np.asarray(sigmas)


__all__ = [
    "InfeasibleBudgetError",
    "NoiseBudget",
    "OptimalProfile",
    "SweepTable",
    "feasible",
    "optimal_r",
    "optimal_r_profile",
    "simulate_total_noise",
    "sweep_r",
    "total_noise",
]
