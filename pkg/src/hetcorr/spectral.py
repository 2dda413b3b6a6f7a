"""Segment-averaged (Welch) cross- and auto-spectral estimation in shot-noise units.

Normalization follows the per-Nyquist-band convention used by the trajectory
sampler: a white series of per-sample variance ``V`` has a flat one-sided
spectrum of value ``V`` on ``[0, fs/2]``. Equivalently the values are the
usual one-sided density multiplied by ``fs/2``.

The cross periodogram of a segment is ``X conj(Y)``, matching a transform of
``<x(t) y(t + tau)>`` with kernel ``exp(+i omega tau)``. The real part is the
physical CSD and may be negative; it is never clipped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from numpy.typing import ArrayLike, NDArray
from scipy.ndimage import uniform_filter1d
from scipy.signal import get_window

WINDOWS = ("hann", "rectangular")

# segments per FFT batch; fixes the reduction order and bounds memory
_BATCH = 256
_SMOOTH_BINS = 65


@dataclass(frozen=True)
class EstimatorConfig:
    segment_len: int = 4096
    window: str = "hann"
    overlap: float = 0.5

    def __post_init__(self) -> None:
        n = self.segment_len
        if not isinstance(n, (int, np.integer)) or n < 2 or n & (n - 1):
            raise ValueError(f"segment_len must be a power of two >= 2, got {n!r}")
        if self.window not in WINDOWS:
            raise ValueError(f"window must be one of {WINDOWS}, got {self.window!r}")
        if not 0.0 <= self.overlap < 1.0:
            raise ValueError("overlap must lie in [0, 1)")

    @property
    def step(self) -> int:
        return max(1, self.segment_len - int(round(self.segment_len * self.overlap)))

    def taper(self) -> NDArray[np.float64]:
        if self.window == "rectangular":
            return np.ones(self.segment_len)
        return get_window("hann", self.segment_len, fftbins=True)


@dataclass(frozen=True)
class SpectrumEstimate:
    """Welch estimate on the one-sided frequency grid.

    ``stat_sigma`` is the per-bin standard error of the real part, from the
    scatter of the segment periodograms, widened for the correlation between
    overlapping segments. ``bin_correlation`` is the factor by
    which tapering inflates the variance of a sum over adjacent bins
    (``N sum w^4 / (sum w^2)^2``: 1 for the rectangular window, 35/18 for Hann).
    """

    freqs: NDArray[np.float64]
    values: NDArray[np.complex128]
    n_segments: int
    window: str
    overlap: float
    stat_sigma: NDArray[np.float64]
    segment_len: int
    sample_rate: float
    bin_correlation: float = 1.0

    @property
    def real(self) -> NDArray[np.float64]:
        return self.values.real

    def config(self) -> dict:
        return {
            "segment_len": self.segment_len,
            "window": self.window,
            "overlap": self.overlap,
            "n_segments": self.n_segments,
            "sample_rate": self.sample_rate,
        }


def _overlap_factor(win: NDArray[np.float64], step: int, n_seg: int) -> float:
    """Variance inflation of a Welch mean from overlapping segments (white-noise approximation)."""
    s2 = float(np.sum(win * win))
    total = 1.0
    lag = step
    j = 1
    while lag < win.size and j < n_seg:
        rho = (float(np.dot(win[lag:], win[: win.size - lag])) / s2) ** 2
        total += 2.0 * rho * (1.0 - j / n_seg)
        lag += step
        j += 1
    return total


def _segments(x: NDArray[np.float64], cfg: EstimatorConfig) -> NDArray[np.float64]:
    return sliding_window_view(x, cfg.segment_len)[:: cfg.step]


def estimate_csd(
    x: ArrayLike,
    y: ArrayLike,
    fs: float,
    cfg: EstimatorConfig | None = None,
) -> SpectrumEstimate:
    """Cross spectral density of ``x`` and ``y``.

    Each segment has its own mean removed before tapering, so only
    fluctuations enter the estimate.
    """
    cfg = cfg or EstimatorConfig()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError("x and y must be 1-D arrays of equal length")
    if x.size < 2 * cfg.segment_len:
        raise ValueError(f"need at least {2 * cfg.segment_len} samples, got {x.size}")
    if not fs > 0:
        raise ValueError("sample rate must be > 0")

    win = cfg.taper()
    n = cfg.segment_len
    s2 = float(np.sum(win * win))
    scale = np.full(n // 2 + 1, 1.0 / s2)
    scale[0] *= 0.5
    scale[-1] *= 0.5

    same = x is y
    xs = _segments(x, cfg)
    ys = xs if same else _segments(y, cfg)
    n_seg = xs.shape[0]

    # Chan's pairwise merge of batch means and M2, in index order
    count = 0
    mean = np.zeros(n // 2 + 1, dtype=complex)
    m2 = np.zeros(n // 2 + 1)
    for start in range(0, n_seg, _BATCH):
        bx = xs[start : start + _BATCH]
        fx = np.fft.rfft((bx - bx.mean(axis=1, keepdims=True)) * win, axis=1)
        if same:
            per = (fx.real**2 + fx.imag**2) * scale + 0j
        else:
            by = ys[start : start + _BATCH]
            fy = np.fft.rfft((by - by.mean(axis=1, keepdims=True)) * win, axis=1)
            # explicit real arithmetic keeps csd(y, x) == conj(csd(x, y)) bit for bit
            re = fx.real * fy.real + fx.imag * fy.imag
            im = fx.imag * fy.real - fx.real * fy.imag
            per = (re * scale) + 1j * (im * scale)
        k = per.shape[0]
        b_mean = per.mean(axis=0)
        b_m2 = ((per.real - b_mean.real) ** 2).sum(axis=0)
        delta = b_mean.real - mean.real
        tot = count + k
        m2 = m2 + b_m2 + delta**2 * count * k / tot
        mean = mean + (b_mean - mean) * (k / tot)
        count = tot

    if n_seg > 1:
        sigma = np.sqrt(m2 / (n_seg - 1) / n_seg * _overlap_factor(win, cfg.step, n_seg))
    else:
        sigma = np.zeros_like(m2)
    freqs = np.fft.rfftfreq(n, d=1.0 / fs)
    inflation = float(n * np.sum(win**4) / s2**2)
    return SpectrumEstimate(
        freqs=freqs,
        values=mean,
        n_segments=n_seg,
        window=cfg.window,
        overlap=cfg.overlap,
        stat_sigma=sigma,
        segment_len=n,
        sample_rate=float(fs),
        bin_correlation=inflation,
    )


def estimate_psd(x: ArrayLike, fs: float, cfg: EstimatorConfig | None = None) -> SpectrumEstimate:
    """Auto spectrum; real and non-negative."""
    x = np.asarray(x, dtype=float)
    return estimate_csd(x, x, fs, cfg)


@dataclass(frozen=True)
class BandAverage:
    mean: complex
    sigma: float
    n_bins: int


def band_average(est: SpectrumEstimate, f_lo: float | None = None, f_hi: float | None = None) -> BandAverage:
    """Inverse-variance weighted mean of the estimate over ``[f_lo, f_hi]``.

    DC and Nyquist bins are always excluded. Weights come from the per-bin
    variance smoothed over ``_SMOOTH_BINS`` neighbours; a bin's raw scatter is
    correlated with its own value and would bias the mean. Bins are weighted
    as if independent; the reported ``sigma`` is then widened by
    ``sqrt(est.bin_correlation)`` to account for taper-induced correlation of
    neighbouring bins.
    """
    freqs = est.freqs
    f_lo = freqs[1] if f_lo is None else f_lo
    f_hi = freqs[-2] if f_hi is None else f_hi
    if not f_lo < f_hi:
        raise ValueError("band requires f_lo < f_hi")
    sel = (freqs >= f_lo) & (freqs <= f_hi)
    sel[0] = sel[-1] = False
    if not sel.any():
        raise ValueError(f"no estimator bins in band [{f_lo}, {f_hi}] Hz")
    vals = est.values[sel]
    sig = est.stat_sigma[sel]
    if np.all(sig > 0):
        w = 1.0 / uniform_filter1d(sig**2, size=min(_SMOOTH_BINS, sig.size), mode="nearest")
        mean = complex(np.sum(w * vals) / np.sum(w))
        sigma = float(np.sqrt(est.bin_correlation / np.sum(w)))
    else:
        mean = complex(np.mean(vals))
        sigma = 0.0
    return BandAverage(mean=mean, sigma=sigma, n_bins=int(sel.sum()))
