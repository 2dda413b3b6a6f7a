"""Gaussian quadrature states of single optical modes and the linear maps acting on them.

All covariances are in shot-noise units (SNU): the vacuum has identity
covariance. The quadrature pair is ordered (x, p), with x the component in
phase with the local oscillator at zero phase. A complex mean amplitude
``alpha`` corresponds to the quadrature mean vector ``(Re alpha, Im alpha)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy import constants

# multiplication of a mode by i, written on (x, p)
_ROT90 = np.array([[0.0, -1.0], [1.0, 0.0]])

BS_5050 = np.array([[1.0, 1.0j], [1.0j, 1.0]]) / np.sqrt(2.0)

_PHYS_TOL = 1e-9


def rotation(phi: float) -> NDArray[np.float64]:
    """Phase-space rotation by ``phi`` acting on (x, p)."""
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class QuadratureState:
    """Mean amplitude and 2x2 quadrature covariance of one optical mode."""

    mean: complex = 0j
    cov: NDArray[np.float64] = field(default_factory=lambda: np.eye(2))

    def __post_init__(self) -> None:
        cov = np.array(self.cov, dtype=float)
        if cov.shape != (2, 2):
            raise ValueError(f"covariance must be 2x2, got shape {cov.shape}")
        if not np.all(np.isfinite(cov)):
            raise ValueError("covariance has non-finite entries")
        if abs(cov[0, 1] - cov[1, 0]) > 1e-12 * max(1.0, np.abs(cov).max()):
            raise ValueError("covariance must be symmetric")
        cov = 0.5 * (cov + cov.T)
        if cov[0, 0] <= 0 or np.linalg.det(cov) <= 0:
            raise ValueError("covariance must be positive definite")
        cov.setflags(write=False)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "mean", complex(self.mean))

    @property
    def mean_vector(self) -> NDArray[np.float64]:
        return np.array([self.mean.real, self.mean.imag])

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.cov))

    def is_physical(self, tol: float = _PHYS_TOL) -> bool:
        """True when the uncertainty bound det(cov) >= 1 holds."""
        return self.det >= 1.0 - tol

    def is_pure(self, tol: float = 1e-9) -> bool:
        return abs(self.det - 1.0) <= tol


def _from_vector(mean: NDArray[np.float64], cov: NDArray[np.float64]) -> QuadratureState:
    return QuadratureState(complex(mean[0], mean[1]), cov)


def _require_physical(state: QuadratureState) -> None:
    if not state.is_physical():
        raise ValueError(f"state violates the uncertainty bound (det cov = {state.det:.6g} < 1)")


@dataclass(frozen=True)
class SqueezeParams:
    """Squeeze strength ``r`` and the angle ``squeeze_phase`` of the anti-squeezed axis.

    With ``squeeze_phase = 0`` the anti-squeezed quadrature sits at angle 0 and
    the squeezed one at pi/2.
    """

    r: float = 0.0
    squeeze_phase: float = 0.0

    def __post_init__(self) -> None:
        if not np.isfinite(self.r) or self.r < 0:
            raise ValueError(f"squeeze parameter must be finite and >= 0, got {self.r}")

    def symplectic(self) -> NDArray[np.float64]:
        rot = rotation(self.squeeze_phase)
        return rot @ np.diag([np.exp(self.r), np.exp(-self.r)]) @ rot.T

    def inverse(self) -> "SqueezeParams":
        """Squeeze of equal strength along the orthogonal axis; undoes this one."""
        return SqueezeParams(self.r, self.squeeze_phase + np.pi / 2)


@dataclass(frozen=True)
class LocalOscillator:
    """Monochromatic LO: amplitude ``eps_l``, phase ``theta_l`` and angular frequency ``omega_l`` (rad/s)."""

    amplitude: float = 1.0
    phase: float = 0.0
    angular_frequency: float = 2 * np.pi * constants.c / 1064e-9

    def __post_init__(self) -> None:
        if not self.amplitude > 0:
            raise ValueError("LO amplitude must be > 0")
        if not self.angular_frequency > 0:
            raise ValueError("LO angular frequency must be > 0")


@dataclass(frozen=True)
class GainConstants:
    """Physical prefactors converting SNU values to detector units.

    ``K = c eps0 eta^2 e^2 eps_l^2 hbar omega_l`` is the CSD scale and the
    conventional balanced heterodyne shot-noise level is ``snu = 2 K``.
    ``signal_scale = (eta e c eps0 eps_l)^2`` multiplies ``beta_s^2`` in the
    mean beat signal.
    """

    eta: float = 1.0
    lo: LocalOscillator = field(default_factory=LocalOscillator)
    e_charge: float = constants.e
    c_light: float = constants.c
    eps0: float = constants.epsilon_0
    hbar: float = constants.hbar

    def __post_init__(self) -> None:
        if not self.eta > 0:
            raise ValueError("quantum efficiency must be > 0")

    @property
    def K(self) -> float:  # noqa: N802
        return (
            self.c_light * self.eps0 * self.eta**2 * self.e_charge**2
            * self.lo.amplitude**2 * self.hbar * self.lo.angular_frequency
        )

    @property
    def snu(self) -> float:
        return 2.0 * self.K

    @property
    def signal_scale(self) -> float:
        return (self.eta * self.e_charge * self.c_light * self.eps0 * self.lo.amplitude) ** 2


def vacuum() -> QuadratureState:
    return QuadratureState(0j, np.eye(2))


def coherent(alpha: complex) -> QuadratureState:
    return QuadratureState(alpha, np.eye(2))


def apply_two_mode_squeeze(state: QuadratureState, sq: SqueezeParams) -> QuadratureState:
    """Apply the sideband squeezing transform, seen as a single-quadrature squeeze in the LO frame.

    The signal/idler Bogoliubov mixing ``a_s = b_s cosh r + b_i^dag sinh r``
    acts on the quadratures referenced to the LO as ``diag(e^r, e^-r)`` along
    the axis set by ``sq.squeeze_phase``; means and covariances both transform
    with it.
    """
    if not isinstance(sq, SqueezeParams):
        sq = SqueezeParams(*sq)
    _require_physical(state)
    s = sq.symplectic()
    return _from_vector(s @ state.mean_vector, s @ state.cov @ s.T)


def quadrature_variance(state: QuadratureState, theta: float) -> float:
    """Variance of the quadrature at angle ``theta``: ``x cos(theta) + p sin(theta)``."""
    c, s = np.cos(theta), np.sin(theta)
    cov = state.cov
    return float(c * c * cov[0, 0] + s * s * cov[1, 1] + 2.0 * s * c * cov[0, 1])


def beamsplitter_5050(a: QuadratureState, b: QuadratureState) -> tuple[QuadratureState, QuadratureState]:
    """Mix two independent modes on the lossless 50-50 splitter ``[[1, i], [i, 1]] / sqrt(2)``.

    Returns the marginal states of the two output ports; their mutual
    correlation is available from :func:`beamsplitter_5050_cross`.
    """
    out1 = (a.mean + 1j * b.mean) / np.sqrt(2.0)
    out2 = (1j * a.mean + b.mean) / np.sqrt(2.0)
    ja = _ROT90 @ a.cov @ _ROT90.T
    jb = _ROT90 @ b.cov @ _ROT90.T
    return QuadratureState(out1, 0.5 * (a.cov + jb)), QuadratureState(out2, 0.5 * (ja + b.cov))


def beamsplitter_5050_cross(a: QuadratureState, b: QuadratureState) -> NDArray[np.float64]:
    """Cross-covariance block between the two output ports of :func:`beamsplitter_5050`."""
    # out1 = (q_a + J q_b)/sqrt2, out2 = (J q_a + q_b)/sqrt2
    return 0.5 * (a.cov @ _ROT90.T + _ROT90 @ b.cov)


def attenuate(state: QuadratureState, gamma: float) -> QuadratureState:
    """Amplitude attenuation by ``gamma``, admixing vacuum with weight ``1 - gamma^2``."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"attenuation coefficient must lie in [0, 1], got {gamma}")
    g2 = gamma * gamma
    return QuadratureState(gamma * state.mean, g2 * state.cov + (1.0 - g2) * np.eye(2))
