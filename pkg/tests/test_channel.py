import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import gammaincc

from fedalloc import channel as ch
from fedalloc.errors import ChannelNotWarmedError, InvalidParameterError

P = ch.ChannelParams()


def test_k0_default_constants():
    # independent evaluation with scipy's regularized upper incomplete gamma
    a, b, c = 90.2514, 3.4998, 1.0942
    ref = math.sqrt(3 / 4) * 1460 / math.sqrt(c + a / (c * b * b) * gammaincc(1.0, c * b))
    assert ch.k0_constant(P) == pytest.approx(ref, rel=1e-12)
    assert round(ch.k0_constant(P)) == 1135


def test_k0_without_loss_term():
    params = ch.ChannelParams(mss=1.0, loss_a=1e-300, loss_c=1.0)
    assert ch.k0_constant(params) == pytest.approx(math.sqrt(0.75), rel=1e-12)


def test_nonpositive_params_rejected():
    with pytest.raises(InvalidParameterError):
        ch.ChannelParams(mss=0.0)
    with pytest.raises(InvalidParameterError):
        ch.ChannelParams(x_corr=1.0)


def test_delta_ip_support_and_determinism():
    vals = [ch.sample_delta_ip(np.random.default_rng(s), P) for s in range(200)]
    assert all(0.0 <= x <= 0.2 for x in vals)
    assert ch.sample_delta_ip(np.random.default_rng(5), P) == ch.sample_delta_ip(np.random.default_rng(5), P)
    tiny = ch.ChannelParams(delta_ip_max=1e-300)
    assert ch.sample_delta_ip(np.random.default_rng(0), tiny) == pytest.approx(0.0, abs=1e-300)


@pytest.mark.parametrize("prev, delta, want", [(0.0, 0.4, 0.1), (0.1, 0.1, 0.1), (0.2, 0.0, 0.15)])
def test_step_rtt_examples(prev, delta, want):
    assert ch.step_rtt(prev, delta) == pytest.approx(want, abs=1e-15)


def test_step_rtt_rejects_negative():
    with pytest.raises(InvalidParameterError):
        ch.step_rtt(-1.0, 0.1)


def test_shadowing_gain_values():
    assert ch.shadowing_gain(0.0, P) == pytest.approx(0.9738)
    assert ch.shadowing_gain(math.sqrt(3), P) == pytest.approx(0.9738 * 10 ** (0.1 * math.sqrt(3)))


def test_zero_correlation_gives_iid_uniform():
    params = ch.ChannelParams(x_corr=0.0)
    rng = np.random.default_rng(11)
    state = ch.ChannelState(rtt=0.1, x=1.5, z=1.0, k0=1.0, sigma=1.0, t=1)
    xs = np.empty(100_000)
    for i in range(xs.size):
        state = ch.step_shadowing(state, rng, params)
        xs[i] = state.x
    assert np.all(np.abs(xs) <= math.sqrt(3))
    assert abs(xs.mean()) < 0.02
    assert abs(xs.var() - 1.0) < 0.05


def test_sigma_example_and_unwarmed_error():
    st_ = ch.ChannelState(rtt=0.1, x=0.0, z=1.0, k0=100.0, sigma=math.nan, t=1)
    assert ch.sigma(st_) == pytest.approx(1000.0)
    with pytest.raises(ChannelNotWarmedError):
        ch.sigma(ch.ChannelState(rtt=0.0, x=0.0, z=1.0, k0=100.0, sigma=math.nan, t=1))


def test_data_rate_examples():
    assert ch.data_rate(100.0, 4.0) == pytest.approx(200.0)
    assert ch.data_rate(100.0, 0.0) == 0.0


def test_warm_up_requires_a_slot():
    with pytest.raises(InvalidParameterError):
        ch.warm_up(P, np.random.default_rng(0), 0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.0, 0.2), min_size=1, max_size=60))
def test_rtt_closure(delays):
    rtt = 0.0
    for d in delays:
        rtt = ch.step_rtt(rtt, d)
        assert 0.0 <= rtt <= 0.2


@given(st.floats(1e-4, 1.0))
def test_rtt_converges_geometrically(target):
    rtt = 0.0
    for t in range(1, 80):
        rtt = ch.step_rtt(rtt, target)
        assert abs(rtt - target) <= 0.75 ** t * target + 1e-15


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.floats(0.0, 0.99))
def test_state_bounds_and_sigma_positive(seed, rho):
    params = ch.ChannelParams(x_corr=rho)
    rng = np.random.default_rng(seed)
    state = ch.initial_state(params, rng)
    for _ in range(40):
        state = ch.advance(state, rng, params)
        assert abs(state.x) <= math.sqrt(3)
        assert state.sigma > 0


@given(st.floats(1.0, 1e5), st.floats(0.0, 100.0), st.floats(0.0, 100.0))
def test_data_rate_monotone_in_power(sig, p1, p2):
    lo, hi = sorted((p1, p2))
    assert ch.data_rate(sig, lo) <= ch.data_rate(sig, hi)


def test_trajectories_bitwise_deterministic():
    a = ch.warm_up(P, np.random.default_rng(99), 50)
    b = ch.warm_up(P, np.random.default_rng(99), 50)
    assert a == b
