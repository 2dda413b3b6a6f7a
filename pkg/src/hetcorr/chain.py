"""Linearized photocurrent model of the four-photodiode heterodyne network.

Expanding the detected intensities to first order in the LO amplitude, the
two differential photocurrent fluctuations reduce to

    dJ_a = (Q + W) / 2,    dJ_b = (Q - W) / 2,

where ``Q`` is the signal quadrature selected by the LO phase (PSD
``V_theta``) and ``W`` is the combination of the two second-stage vacuum
ports (PSD 1). Their cross spectrum is ``(V_theta - 1)/4`` and each arm
carries ``(V_theta + 1)/4``; the sum ``dJ_a + dJ_b = Q`` is the output a
conventional balanced detector would see.

Sampled series use the per-Nyquist-band convention: i.i.d. samples of
variance ``V`` represent a flat one-sided PSD of ``V`` SNU.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy import integrate

from .states import (
    LocalOscillator,
    QuadratureState,
    SqueezeParams,
    apply_two_mode_squeeze,
    attenuate,
    quadrature_variance,
    vacuum,
)

DEFAULT_BLOCK_LEN = 4096


@dataclass(frozen=True)
class ChainParams:
    """Optical configuration of the network.

    ``signal_gain`` converts ``signal_amp**2`` into the beat power scale ``A^2``
    (1 in normalized units).
    """

    lo: LocalOscillator = field(default_factory=LocalOscillator)
    sq: SqueezeParams = field(default_factory=SqueezeParams)
    signal_amp: float = 0.0
    signal_phase: float = 0.0
    het_freq: float = 0.0
    signal_gain: float = 1.0

    def __post_init__(self) -> None:
        if self.signal_amp < 0:
            raise ValueError("signal amplitude must be >= 0")
        if self.het_freq < 0:
            raise ValueError("heterodyne frequency must be >= 0")
        if self.het_freq >= self.lo.angular_frequency:
            raise ValueError("heterodyne frequency must be far below the LO frequency")

    @property
    def signal_state(self) -> QuadratureState:
        """Fluctuation state of the signal field (zero mean)."""
        return apply_two_mode_squeeze(vacuum(), self.sq)


@dataclass(frozen=True)
class AcquisitionParams:
    """Sampling setup. ``n_segments`` is the number of independently seeded generation blocks."""

    sample_rate: float = 1.0e6
    duration: float = 1.048576
    seed: int = 0
    n_segments: int | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.sample_rate) and self.sample_rate > 0):
            raise ValueError("sample rate must be finite and > 0")
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ValueError("duration must be finite and > 0")
        if self.n_samples < 1:
            raise ValueError("acquisition yields zero samples")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.n_segments is not None and not 1 <= self.n_segments <= self.n_samples:
            raise ValueError("n_segments must be in [1, n_samples]")

    @property
    def n_samples(self) -> int:
        return int(round(self.sample_rate * self.duration))

    @property
    def n_blocks(self) -> int:
        if self.n_segments is not None:
            return int(self.n_segments)
        return -(-self.n_samples // DEFAULT_BLOCK_LEN)

    def block_bounds(self) -> list[tuple[int, int]]:
        edges = np.linspace(0, self.n_samples, self.n_blocks + 1).round().astype(int)
        return list(zip(edges[:-1].tolist(), edges[1:].tolist()))

    def rng(self, block: int) -> np.random.Generator:
        """Generator for one block, keyed on (seed, block index) only."""
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(block),))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class ChainStatistics:
    signal_var: float
    vacuum_var: float
    csd_pred: float
    arm_psd_pred: float


@dataclass(frozen=True)
class TrajectoryPair:
    j_a_minus: NDArray[np.float64]
    j_b_minus: NDArray[np.float64]
    params: ChainParams
    acq: AcquisitionParams

    def __post_init__(self) -> None:
        if self.j_a_minus.shape != self.j_b_minus.shape:
            raise ValueError("trajectory arrays differ in length")

    @property
    def t(self) -> NDArray[np.float64]:
        return np.arange(self.j_a_minus.size) / self.acq.sample_rate

    @property
    def conventional(self) -> NDArray[np.float64]:
        """Total differential current of all four photodiodes (a conventional detector)."""
        return self.j_a_minus + self.j_b_minus

    @property
    def difference(self) -> NDArray[np.float64]:
        return self.j_a_minus - self.j_b_minus


def linearize_chain(p: ChainParams) -> ChainStatistics:
    v = quadrature_variance(p.signal_state, p.lo.phase)
    w = quadrature_variance(vacuum(), p.lo.phase)
    return ChainStatistics(signal_var=v, vacuum_var=w, csd_pred=0.25 * (v - w), arm_psd_pred=0.25 * (v + w))


def _projector(state: QuadratureState, theta: float) -> NDArray[np.float64]:
    # maps two standard normals onto the quadrature at angle theta
    chol = np.linalg.cholesky(state.cov)
    return np.array([np.cos(theta), np.sin(theta)]) @ chol


def sample_trajectories(
    p: ChainParams,
    acq: AcquisitionParams,
    *,
    classical_noise: float = 0.0,
    include_beat: bool = False,
    workers: int = 1,
) -> TrajectoryPair:
    """Draw one realization of the two differential photocurrent fluctuations.

    Parameters
    ----------
    classical_noise:
        Variance (SNU per Nyquist band) of a classical fluctuation common to both
        arms. It adds directly to the cross spectrum.
    include_beat:
        Superpose the deterministic mean current of the beat note on both arms.
    workers:
        Threads used to fill blocks. Output does not depend on this value.
    """
    if classical_noise < 0 or not math.isfinite(classical_noise):
        raise ValueError("classical noise variance must be finite and >= 0")
    n = acq.n_samples
    proj = _projector(p.signal_state, p.lo.phase)
    c_std = math.sqrt(classical_noise)
    ja = np.empty(n)
    jb = np.empty(n)

    def fill(item: tuple[int, tuple[int, int]]) -> None:
        idx, (lo, hi) = item
        z = acq.rng(idx).standard_normal((4, hi - lo))
        q = proj @ z[:2]
        w = z[2]
        common = c_std * z[3]
        ja[lo:hi] = 0.5 * (q + w) + common
        jb[lo:hi] = 0.5 * (q - w) + common

    items = list(enumerate(acq.block_bounds()))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, items))
    else:
        for item in items:
            fill(item)

    if include_beat:
        m = mean_current(p, np.arange(n) / acq.sample_rate)
        ja += m
        jb += m
    if not (np.all(np.isfinite(ja)) and np.all(np.isfinite(jb))):
        raise FloatingPointError("non-finite samples generated")
    return TrajectoryPair(ja, jb, p, acq)


def _beat_bracket(p: ChainParams, t: NDArray[np.float64] | float) -> NDArray[np.float64] | float:
    phase = p.het_freq * np.asarray(t) - p.signal_phase
    theta = p.lo.phase - p.sq.squeeze_phase
    r = p.sq.r
    return np.cos(theta) * np.cos(phase) * np.exp(r) - np.sin(theta) * np.sin(phase) * np.exp(-r)


def mean_current(p: ChainParams, t: NDArray[np.float64] | float) -> NDArray[np.float64] | float:
    """Mean differential current of either arm; the two arms carry equal means."""
    amp = math.sqrt(p.signal_gain) * p.signal_amp
    return amp / math.sqrt(2.0) * _beat_bracket(p, t)


def beat_signal(p: ChainParams, t: NDArray[np.float64] | float) -> NDArray[np.float64] | float:
    """Cross-correlation output ``J_a J_b = (A^2/2)[cos th cos(Wt-ths) e^r - sin th sin(Wt-ths) e^-r]^2``."""
    m = mean_current(p, t)
    return m * m


def conventional_beat(p: ChainParams, t: NDArray[np.float64] | float) -> NDArray[np.float64] | float:
    """Squared total differential current of the same photodiodes wired as one balanced detector."""
    m = mean_current(p, t)
    return (m + m) ** 2


def time_average(func, p: ChainParams) -> float:
    """Average of ``func(p, t)`` over one beat period, by adaptive quadrature."""
    if p.het_freq == 0:
        return float(func(p, 0.0))
    period = 2 * math.pi / p.het_freq
    val, _ = integrate.quad(lambda t: float(func(p, t)), 0.0, period, epsabs=0.0, epsrel=1e-12, limit=200)
    return val / period


@dataclass(frozen=True)
class ConventionalReference:
    psd: float
    mean_signal: float
    cross_mean_signal: float

    @property
    def signal_ratio(self) -> float:
        return self.mean_signal / self.cross_mean_signal


def conventional_reference(p: ChainParams, snu: float = 1.0) -> ConventionalReference:
    """Noise PSD and mean signal of a conventional detector fed with the same light."""
    v = linearize_chain(p).signal_var
    return ConventionalReference(
        psd=v * snu,
        mean_signal=time_average(conventional_beat, p),
        cross_mean_signal=time_average(beat_signal, p),
    )


def sample_direct_detection(
    s_f: float,
    gamma: float,
    r_bs: float,
    t_bs: float,
    acq: AcquisitionParams,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Quadrature records of the two outputs of cross-correlation direct detection.

    The field ``f`` has quadrature variance ``s_f`` (its conjugate ``1/s_f``),
    is attenuated by ``gamma`` and split on a real ``(r_bs, t_bs)`` splitter
    whose open port admits vacuum ``v``: ``p = r d + t v``, ``q = t d - r v``.
    """
    if abs(r_bs**2 + t_bs**2 - 1.0) > 1e-9:
        raise ValueError("beamsplitter is not lossless")
    if not s_f > 0:
        raise ValueError("signal spectral density must be > 0")
    d_state = attenuate(QuadratureState(0j, np.diag([s_f, 1.0 / s_f])), gamma)
    d_std = math.sqrt(quadrature_variance(d_state, 0.0))
    n = acq.n_samples
    p_out = np.empty(n)
    q_out = np.empty(n)
    for idx, (lo, hi) in enumerate(acq.block_bounds()):
        z = acq.rng(idx).standard_normal((2, hi - lo))
        d = d_std * z[0]
        v = z[1]
        p_out[lo:hi] = r_bs * d + t_bs * v
        q_out[lo:hi] = t_bs * d - r_bs * v
    return p_out, q_out
