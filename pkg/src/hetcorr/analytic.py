"""Closed-form predictions for cross-correlation heterodyne detection.

Every function returns shot-noise units (SNU) unless the config carries
:class:`~hetcorr.states.GainConstants`, in which case powers are scaled to
physical units (``snu = 2K``). Signals are expressed in units of
``A^2 = signal_scale * beta_s^2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .states import GainConstants, LocalOscillator, SqueezeParams

_UNITARY_TOL = 1e-9


@dataclass(frozen=True)
class AnalyticConfig:
    sq: SqueezeParams = field(default_factory=SqueezeParams)
    lo: LocalOscillator = field(default_factory=LocalOscillator)
    beta_s: float = 0.0
    bandwidth: float = 1.0
    n_cl: float = 0.0
    gains: GainConstants | None = None

    def __post_init__(self) -> None:
        if not self.bandwidth > 0:
            raise ValueError("measurement bandwidth must be > 0")
        if self.n_cl < 0:
            raise ValueError("classical noise must be >= 0")
        if self.beta_s < 0:
            raise ValueError("signal amplitude must be >= 0")

    @property
    def snu(self) -> float:
        return 1.0 if self.gains is None else self.gains.snu

    @property
    def signal_scale(self) -> float:
        return 1.0 if self.gains is None else self.gains.signal_scale

    @property
    def theta(self) -> float:
        """LO phase measured from the anti-squeezed axis."""
        return self.lo.phase - self.sq.squeeze_phase


def measured_quadrature_variance(r: float, theta_l: float) -> float:
    """``e^{2r} cos^2(theta_l) + e^{-2r} sin^2(theta_l)``."""
    return float(np.exp(2 * r) * np.cos(theta_l) ** 2 + np.exp(-2 * r) * np.sin(theta_l) ** 2)


def direct_csd_expanded(
    s_f: float, gamma: float, r_bs: float, t_bs: float, s_s: float = 1.0, s_v: float = 1.0
) -> float:
    """Cross-correlation direct detection CSD before substituting vacuum spectra."""
    _check_direct(gamma, r_bs, t_bs)
    return r_bs * t_bs * (gamma**2 * s_f + (1.0 - gamma**2) * s_s - s_v)


def direct_csd(s_f: float, gamma: float, r_bs: float, t_bs: float) -> float:
    """CSD ``r t gamma^2 (S_f - 1)`` of the two beamsplitter outputs for an attenuated field."""
    _check_direct(gamma, r_bs, t_bs)
    if s_f < 0:
        raise ValueError("signal spectral density must be >= 0")
    return r_bs * t_bs * gamma**2 * (s_f - 1.0)


def _check_direct(gamma: float, r_bs: float, t_bs: float) -> None:
    if abs(r_bs**2 + t_bs**2 - 1.0) > _UNITARY_TOL:
        raise ValueError(f"beamsplitter is not lossless: r^2 + t^2 = {r_bs**2 + t_bs**2}")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("attenuation coefficient must lie in [0, 1]")


def full_band_kernel(r: float, theta_l: float, omega: float | np.ndarray, omega_l: float) -> np.ndarray | float:
    """Frequency kernel F(omega) of the full-band CSD (units of rad/s)."""
    omega = np.asarray(omega, dtype=float)
    out = (
        np.sinh(r) * (np.abs(omega_l + omega) + np.abs(omega_l - omega))
        + 2.0 * np.cos(2.0 * theta_l) * np.cosh(r) * np.sqrt(omega_l**2 - omega**2)
    )
    return out if out.ndim else float(out)


def csd_full_band(cfg: AnalyticConfig, omega: float | np.ndarray) -> np.ndarray | float:
    """CSD at analysis frequency ``omega`` without the ``omega << omega_l`` approximation."""
    omega_l = cfg.lo.angular_frequency
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0) or np.any(w >= omega_l):
        raise ValueError("analysis frequency must satisfy 0 <= omega < omega_l")
    r = cfg.sq.r
    kernel = full_band_kernel(r, cfg.theta, w, omega_l)
    out = cfg.snu * np.sinh(r) * np.asarray(kernel) / (4.0 * omega_l)
    return out if out.ndim else float(out)


def csd_narrowband(cfg: AnalyticConfig) -> float:
    """Flat CSD for ``omega << omega_l``: ``(V_theta - 1) / 4`` SNU."""
    return cfg.snu * 0.25 * (measured_quadrature_variance(cfg.sq.r, cfg.theta) - 1.0)


@dataclass(frozen=True)
class ConventionalNoise:
    total: float
    shot: float
    squeezing: float


def conventional_noise(cfg: AnalyticConfig) -> ConventionalNoise:
    """Quantum noise PSD of a conventional balanced heterodyne detector, split into shot and squeezing terms."""
    shot = cfg.snu
    squeezing = cfg.snu * (measured_quadrature_variance(cfg.sq.r, cfg.theta) - 1.0)
    return ConventionalNoise(total=shot + squeezing, shot=shot, squeezing=squeezing)


def mean_signal(cfg: AnalyticConfig) -> float:
    """Time-averaged cross-correlation beat signal, ``A^2 V_theta / 4``.

    At theta_l = pi/2 this is ``(A^2/4) e^{-2r}``; for coherent light ``A^2/4``.
    """
    a2 = cfg.signal_scale * cfg.beta_s**2
    return 0.25 * a2 * measured_quadrature_variance(cfg.sq.r, cfg.theta)


def conventional_mean_signal(cfg: AnalyticConfig) -> float:
    return 4.0 * mean_signal(cfg)


@dataclass(frozen=True)
class MeasuredOutput:
    signal: float
    quantum_noise: float
    classical_noise: float
    total: float


def measured_output(cfg: AnalyticConfig) -> MeasuredOutput:
    """Detector output with signal, CSD-times-bandwidth and classical noise kept apart."""
    signal = mean_signal(cfg)
    quantum = csd_narrowband(cfg) * cfg.bandwidth
    return MeasuredOutput(signal, quantum, cfg.n_cl, signal + quantum + cfg.n_cl)


def evaluate_all(cfg: AnalyticConfig, omega: float | None = None) -> list[tuple[str, float]]:
    """Rows ``(quantity, value)`` for every closed-form result under ``cfg``."""
    conv = conventional_noise(cfg)
    out = measured_output(cfg)
    rows = [
        ("csd_narrowband", csd_narrowband(cfg)),
        ("csd_full_band_omega0", csd_full_band(cfg, 0.0)),
    ]
    if omega is not None:
        rows.append(("csd_full_band", csd_full_band(cfg, omega)))
    rows += [
        ("conventional_noise", conv.total),
        ("conventional_shot_noise", conv.shot),
        ("conventional_squeezing_term", conv.squeezing),
        ("mean_signal", mean_signal(cfg)),
        ("conventional_mean_signal", conventional_mean_signal(cfg)),
        ("measured_signal", out.signal),
        ("measured_quantum_noise", out.quantum_noise),
        ("measured_classical_noise", out.classical_noise),
        ("measured_total", out.total),
    ]
    return rows
