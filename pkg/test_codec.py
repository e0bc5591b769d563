"""Tests for the follower and leader codecs."""

import numpy as np
import pytest

from quantrack.codec import (
    FollowerCodecState, FollowerDecoder, FollowerEncoder, LeaderCodecState, LeaderDecoder, LeaderEncoder,
    follower_codec_step, leader_codec_step, omega_step, reinflate, theta_step,
)
from quantrack.errors import LeaderOverflowError
from quantrack.quantizers import FollowerQuantizerSpec, LeaderQuantizerSpec


def scalar_follower(z_hat=0.0, theta=1.0, s_bar=1.0, quantized=True):
    return FollowerCodecState(
        s_bar=np.array([[s_bar]]), z_hat=np.array([[z_hat]]), theta=theta,
        gamma1=0.92, gamma2=1.10521, spec=FollowerQuantizerSpec(levels=3, sigma=1.0), quantized=quantized,
    )


def leader_state(s_bar, omega, v_hat=None, rates=None, s_tilde=None):
    s_bar = np.atleast_2d(np.array(s_bar, dtype=float))
    n = s_bar.shape[0]
    rates = tuple(rates or [1.0] * n)
    return LeaderCodecState(
        v_hat=np.zeros(n) if v_hat is None else v_hat, omega=omega, s_bar=s_bar,
        s_tilde=np.abs(s_bar) if s_tilde is None else np.array(s_tilde, dtype=float),
        spec=LeaderQuantizerSpec(bits_per_block=rates, rates=rates),
    )


def test_follower_scalar_step():
    state = scalar_follower()
    step = follower_codec_step(state, 0, np.array([1.5]), jammed=False)
    np.testing.assert_array_equal(step.z_hat, [2.0])
    np.testing.assert_array_equal(step.codewords, [1])
    assert not step.saturated


def test_follower_zero_innovation_keeps_prediction():
    state = scalar_follower(z_hat=0.7, s_bar=1.1)
    step = follower_codec_step(state, 0, np.array([1.1 * 0.7]), jammed=False)
    np.testing.assert_allclose(step.z_hat, [1.1 * 0.7])
    np.testing.assert_array_equal(step.values, [0.0])


def test_follower_jammed_step_propagates():
    state = scalar_follower(z_hat=0.5, s_bar=2.0)
    step = follower_codec_step(state, 0, np.array([100.0]), jammed=True)
    assert step.codewords is None
    np.testing.assert_array_equal(step.z_hat, [1.0])
    np.testing.assert_array_equal(step.values, [0.0])
    assert step.argument[0] == pytest.approx(99.0)


def test_follower_unquantized_step_is_exact():
    state = scalar_follower(quantized=False)
    step = follower_codec_step(state, 0, np.array([1.234]), jammed=False)
    np.testing.assert_array_equal(step.z_hat, [1.234])


def test_theta_zooming():
    state = scalar_follower()
    assert theta_step(state, jammed=False) == pytest.approx(0.92)
    state = scalar_follower()
    assert theta_step(state, jammed=True) == pytest.approx(1.10521)


def test_theta_depends_only_on_counts():
    a, b = scalar_follower(), scalar_follower()
    for jammed in [True, True, False, True, False, False, False]:
        theta_step(a, jammed)
    for jammed in [False, False, False, False, True, True, True]:
        theta_step(b, jammed)
    assert a.theta == pytest.approx(1.10521 ** 3 * 0.92 ** 4, rel=1e-14)
    assert a.theta == pytest.approx(b.theta, rel=1e-14)


def test_follower_encoder_and_decoder_stay_synchronized():
    rng = np.random.default_rng(5)
    s_bar = np.array([[1.1052, 1.0], [0.0, 1.1052]])
    spec = FollowerQuantizerSpec(levels=2 ** 20, sigma=1.0)
    shared = dict(s_bar=s_bar, theta=3.0, gamma1=0.92, gamma2=1.10521, spec=spec)
    enc_state = FollowerCodecState(z_hat=np.zeros((1, 2)), **shared)
    dec_state = FollowerCodecState(z_hat=np.zeros((1, 2)), **shared)
    encoder, decoder = FollowerEncoder(enc_state, 0), FollowerDecoder(dec_state, 0)
    z = np.array([2.0, -1.0])
    for _ in range(300):
        jammed = bool(rng.random() < 0.3)
        z = s_bar @ z + rng.normal(scale=0.1, size=2)
        step = encoder.encode(z, jammed)
        received = decoder.decode(None if jammed else step.codewords, jammed)
        encoder.advance(jammed)
        decoder.advance(jammed)
        np.testing.assert_array_equal(received, step.z_hat)
        np.testing.assert_array_equal(enc_state.z_hat, dec_state.z_hat)
        assert enc_state.theta == dec_state.theta


def test_leader_scalar_step_keeps_error_bound():
    state = leader_state([[2.0]], omega=[1.0])
    v_bar = np.array([-0.9])
    step = leader_codec_step(state, v_bar, jammed=False, step=1)
    assert step.argument[0] == pytest.approx(0.45)
    np.testing.assert_allclose(step.v_hat, [-1.0])
    omega = omega_step(state, jammed=False)
    np.testing.assert_allclose(omega, [1.0])
    assert abs(step.v_hat[0] - v_bar[0]) <= omega[0]


def test_leader_zero_error_step():
    state = leader_state([[1.0]], omega=[2.0], v_hat=np.array([3.0]))
    step = leader_codec_step(state, np.array([3.0]), jammed=False, step=1)
    np.testing.assert_allclose(step.values, [0.5])
    np.testing.assert_allclose(step.v_hat, [3.0 - 2.0 * 0.5])


def test_leader_jammed_step_and_omega():
    state = leader_state([[2.0]], omega=[1.0], v_hat=np.array([0.25]))
    step = leader_codec_step(state, np.array([0.4]), jammed=True, step=1)
    assert step.codewords is None
    np.testing.assert_allclose(step.v_hat, [0.5])
    np.testing.assert_allclose(omega_step(state, jammed=True), [2.0])


def test_omega_uses_all_ones_coupling_for_complex_chains():
    s_tilde = np.array([
        [1.0, 0.0, 1.0, 1.0],
        [0.0, 1.0, 1.0, 1.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
    state = leader_state(np.eye(4), omega=np.ones(4), s_tilde=s_tilde)
    np.testing.assert_allclose(omega_step(state, jammed=True), [3.0, 3.0, 1.0, 1.0])


def test_leader_overflow_is_detected():
    state = leader_state([[1.0]], omega=[0.5])
    with pytest.raises(LeaderOverflowError) as excinfo:
        leader_codec_step(state, np.array([0.8]), jammed=False, step=4)
    assert excinfo.value.step == 4
    assert excinfo.value.component == 0
    assert excinfo.value.ratio == pytest.approx(1.6)


def test_reinflate_after_jump():
    state = leader_state([[1.0]], omega=[0.1])
    assert reinflate(state, np.array([2.0]))
    assert state.omega[0] == pytest.approx(2.1)
    assert not reinflate(state, np.array([1.0]))
    leader_codec_step(state, np.array([2.0]), jammed=False, step=1)


def test_reinflate_with_zero_eigenvalue():
    state = leader_state(np.diag([1.0, 0.0]), omega=[0.1, 0.1])
    assert reinflate(state, np.array([2.0, 0.5]))
    assert np.all(np.isfinite(state.omega))
    np.testing.assert_allclose(state.omega, [2.1, 0.525])
    state = leader_state(np.diag([1.0, 0.0]), omega=[0.1, 0.1])
    assert reinflate(state, np.array([2.0, 0.0]))
    np.testing.assert_allclose(state.omega, [2.1, 0.1])


@pytest.mark.parametrize("seed", range(4))
def test_leader_error_never_exceeds_scaling(seed):
    """|v_hat - v_bar| <= omega on random Jordan blocks, rates and jam sequences"""
    rng = np.random.default_rng(seed)
    for _ in range(250):
        lam = rng.uniform(0.5, 1.5)
        rate = float(rng.choice([1.0, 2.0, 3.0]))
        s_bar = np.array([[lam, 1.0], [0.0, lam]])
        v_bar = rng.uniform(-5, 5, size=2)
        omega0 = np.abs(v_bar) * rng.uniform(1.01, 2.0, size=2)
        enc = LeaderEncoder(leader_state(s_bar, omega0, rates=[rate, rate]))
        dec = LeaderDecoder(leader_state(s_bar, omega0, rates=[rate, rate]))
        for k in range(1, 41):
            jammed = bool(rng.random() < 0.4)
            v_bar = s_bar @ v_bar
            step = enc.encode(v_bar, jammed, step=k)
            dec.decode(None if jammed else step.codewords, jammed)
            omega = enc.advance(jammed)
            dec.advance(jammed)
            # rounding of S_bar v_hat is relative to |v_bar|
            assert np.all(np.abs(step.v_hat - v_bar) <= omega * (1 + 1e-12) + 1e-12 * (1 + np.abs(v_bar)))
            np.testing.assert_array_equal(enc.state.v_hat, dec.state.v_hat)
            np.testing.assert_array_equal(enc.state.omega, dec.state.omega)
