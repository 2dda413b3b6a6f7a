import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hetcorr.states import (
    BS_5050,
    GainConstants,
    LocalOscillator,
    QuadratureState,
    SqueezeParams,
    apply_two_mode_squeeze,
    attenuate,
    beamsplitter_5050,
    beamsplitter_5050_cross,
    coherent,
    quadrature_variance,
    vacuum,
)

R_HALF_LN2 = math.log(2) / 2


def random_state(draw_r, draw_phase, draw_thermal, mean):
    """Physical Gaussian state: thermal (nbar>=0) then squeezed and rotated."""
    base = QuadratureState(mean, np.eye(2) * (1.0 + draw_thermal))
    return apply_two_mode_squeeze(base, SqueezeParams(draw_r, draw_phase))


states = st.builds(
    random_state,
    st.floats(0, 2),
    st.floats(0, 2 * math.pi),
    st.floats(0, 3),
    st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
)


def test_vacuum():
    v = vacuum()
    assert v.mean == 0
    np.testing.assert_array_equal(v.cov, np.eye(2))
    assert v.det == pytest.approx(1.0)
    for th in np.linspace(0, 2 * np.pi, 9):
        assert quadrature_variance(v, th) == pytest.approx(1.0)


def test_squeeze_identity_at_zero():
    s = apply_two_mode_squeeze(vacuum(), SqueezeParams(0.0))
    np.testing.assert_allclose(s.cov, np.eye(2), atol=1e-15)
    assert s.mean == 0


def test_squeeze_ln2_over_2():
    s = apply_two_mode_squeeze(vacuum(), SqueezeParams(R_HALF_LN2))
    np.testing.assert_allclose(s.cov, np.diag([2.0, 0.5]), atol=1e-14)
    assert s.det == pytest.approx(1.0, abs=1e-12)


def test_quadrature_variance_examples():
    s = apply_two_mode_squeeze(vacuum(), SqueezeParams(R_HALF_LN2))
    assert quadrature_variance(s, math.pi / 2) == pytest.approx(0.5, abs=1e-14)
    # hand evaluation: (2 + 0.5)/2
    assert quadrature_variance(s, math.pi / 4) == pytest.approx(1.25, abs=1e-14)
    assert quadrature_variance(s, 0.0) == pytest.approx(2.0, abs=1e-14)


def test_squeeze_scales_mean_quadratures():
    s = apply_two_mode_squeeze(coherent(1.0 + 1.0j), SqueezeParams(R_HALF_LN2))
    assert s.mean.real == pytest.approx(math.sqrt(2))
    assert s.mean.imag == pytest.approx(1 / math.sqrt(2))


def test_squeeze_rejects_negative_r():
    with pytest.raises(ValueError):
        SqueezeParams(-0.1)


def test_squeeze_rejects_unphysical_input():
    bad = QuadratureState(0j, np.diag([0.5, 0.5]))
    assert not bad.is_physical()
    with pytest.raises(ValueError):
        apply_two_mode_squeeze(bad, SqueezeParams(0.1))


def test_state_validation():
    with pytest.raises(ValueError):
        QuadratureState(0j, np.array([[1.0, 0.2], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        QuadratureState(0j, np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(ValueError):
        QuadratureState(0j, np.eye(3))


def test_beamsplitter_first_column():
    o1, o2 = beamsplitter_5050(coherent(1.0), vacuum())
    assert o1.mean == pytest.approx(1 / math.sqrt(2))
    assert o2.mean == pytest.approx(1j / math.sqrt(2))


def test_beamsplitter_vacuum_invariant():
    o1, o2 = beamsplitter_5050(vacuum(), vacuum())
    np.testing.assert_allclose(o1.cov, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(o2.cov, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(beamsplitter_5050_cross(vacuum(), vacuum()), np.zeros((2, 2)), atol=1e-15)


@given(
    st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
    st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
)
def test_beamsplitter_unitarity(a, b):
    o1, o2 = beamsplitter_5050(coherent(a), coherent(b))
    assert abs(o1.mean) ** 2 + abs(o2.mean) ** 2 == pytest.approx(abs(a) ** 2 + abs(b) ** 2, abs=1e-12)


@given(
    st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
    st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
)
def test_beamsplitter_twice_matches_matrix_square(a, b):
    o1, o2 = beamsplitter_5050(coherent(a), coherent(b))
    t1, t2 = beamsplitter_5050(coherent(o1.mean), coherent(o2.mean))
    expected = BS_5050 @ BS_5050 @ np.array([a, b])
    # known square [[0, i], [i, 0]]
    np.testing.assert_allclose(BS_5050 @ BS_5050, np.array([[0, 1j], [1j, 0]]), atol=1e-15)
    assert t1.mean == pytest.approx(expected[0], abs=1e-12)
    assert t2.mean == pytest.approx(expected[1], abs=1e-12)


def test_beamsplitter_joint_covariance_matches_sampling():
    # independent route: sample complex amplitudes and mix with the matrix directly
    a = apply_two_mode_squeeze(vacuum(), SqueezeParams(0.5, 0.3))
    b = apply_two_mode_squeeze(vacuum(), SqueezeParams(0.2, 1.1))
    rng = np.random.default_rng(1)
    n = 400_000
    qa = rng.multivariate_normal([0, 0], a.cov, n)
    qb = rng.multivariate_normal([0, 0], b.cov, n)
    za = qa[:, 0] + 1j * qa[:, 1]
    zb = qb[:, 0] + 1j * qb[:, 1]
    out = BS_5050 @ np.vstack([za, zb])
    q1 = np.vstack([out[0].real, out[0].imag])
    q2 = np.vstack([out[1].real, out[1].imag])
    o1, o2 = beamsplitter_5050(a, b)
    np.testing.assert_allclose(np.cov(q1), o1.cov, atol=0.02)
    np.testing.assert_allclose(np.cov(q2), o2.cov, atol=0.02)
    np.testing.assert_allclose(q1 @ q2.T / n, beamsplitter_5050_cross(a, b), atol=0.02)


def test_attenuate_examples():
    s = QuadratureState(0.3 + 0.1j, np.diag([0.5, 2.0]))
    same = attenuate(s, 1.0)
    np.testing.assert_allclose(same.cov, s.cov)
    assert same.mean == s.mean
    gone = attenuate(s, 0.0)
    np.testing.assert_allclose(gone.cov, np.eye(2))
    assert gone.mean == 0
    half = attenuate(s, math.sqrt(0.5))
    np.testing.assert_allclose(half.cov, np.diag([0.75, 1.5]), atol=1e-15)


@pytest.mark.parametrize("gamma", [-0.01, 1.01, float("nan")])
def test_attenuate_rejects(gamma):
    with pytest.raises(ValueError):
        attenuate(vacuum(), gamma)


@settings(max_examples=200)
@given(states, st.floats(0, 2), st.floats(0, 2 * math.pi), st.floats(0, 1))
def test_physicality_preserved(s, r, phi, gamma):
    assert s.is_physical()
    assert apply_two_mode_squeeze(s, SqueezeParams(r, phi)).is_physical()
    assert attenuate(s, gamma).is_physical()
    o1, o2 = beamsplitter_5050(s, vacuum())
    assert o1.is_physical() and o2.is_physical()


@given(st.floats(0, 3), st.floats(0, 2 * math.pi))
def test_squeeze_preserves_purity(r, phi):
    s = apply_two_mode_squeeze(vacuum(), SqueezeParams(r, phi))
    assert s.det == pytest.approx(1.0, rel=1e-9)


@given(states, st.floats(0, 2), st.floats(0, 2 * math.pi))
def test_squeeze_inverse_restores(s, r, phi):
    sq = SqueezeParams(r, phi)
    back = apply_two_mode_squeeze(apply_two_mode_squeeze(s, sq), sq.inverse())
    np.testing.assert_allclose(back.cov, s.cov, atol=1e-12 * max(1.0, np.abs(s.cov).max()) * math.exp(4 * r))


@settings(max_examples=200)
@given(states, st.floats(0, 1), st.floats(0, 2 * math.pi))
def test_attenuation_contracts_toward_vacuum(s, gamma, theta):
    before = abs(quadrature_variance(s, theta) - 1)
    after = abs(quadrature_variance(attenuate(s, gamma), theta) - 1)
    assert after <= before + 1e-12


@given(states, st.floats(0, 2 * math.pi))
def test_quadrature_variance_nonnegative(s, theta):
    assert quadrature_variance(s, theta) >= 0


def test_gain_constants():
    g = GainConstants(eta=0.9, lo=LocalOscillator(amplitude=2.0, angular_frequency=1e15))
    assert g.K > 0
    assert g.snu == 2 * g.K
    expected_k = g.c_light * g.eps0 * 0.81 * g.e_charge**2 * 4.0 * g.hbar * 1e15
    assert g.K == pytest.approx(expected_k, rel=1e-14)


def test_local_oscillator_validation():
    with pytest.raises(ValueError):
        LocalOscillator(amplitude=0.0)
    with pytest.raises(ValueError):
        LocalOscillator(angular_frequency=-1.0)
