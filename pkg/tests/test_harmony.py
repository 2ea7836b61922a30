import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import fedalloc.harmony as hs
from fedalloc import cost as cm
from fedalloc import oracle as orc
from fedalloc._core import compiled_available, load
from fedalloc.errors import InvalidParameterError, ObjectiveEvaluationError
from fedalloc.harmony import HarmonyMemory, HarmonyParams, harmony_search

P = HarmonyParams()
BOUNDS = (1e-4, 0.999)


def make(**kw):
    base = dict(d_size=7e6, b_cycles=40.0, c_payload=4500.0, rho=0.05, zeta=3.0, f_max=2.0,
                t_max=4.0, e_up_max=20.0, w_time=0.5, w_energy=0.5, sigma=1e4)
    base.update(kw)
    return cm.DeviceProfile(**base)


def test_bw_schedule_values():
    assert hs.bw_schedule(0, P) == pytest.approx(0.05)
    assert hs.bw_schedule(2500, P) == pytest.approx(0.0005)
    assert hs.bw_schedule(4999, P) == pytest.approx(0.0005)
    assert hs.bw_schedule(1250, P) == pytest.approx((0.05 + 0.0005) / 2)


def test_params_validation():
    with pytest.raises(InvalidParameterError):
        HarmonyParams(hms=1)
    with pytest.raises(InvalidParameterError):
        HarmonyParams(bw_min=0.1, bw_max=0.05)
    with pytest.raises(InvalidParameterError):
        HarmonyParams(penalty_delta=0.0)


def test_draw_rates_clipping_and_degenerate():
    draw = hs.draw_rates(np.random.default_rng(0), HarmonyParams(hmcr_mean=5.0, par_mean=-5.0))
    assert draw == (1.0, 0.0)
    fixed = HarmonyParams(hmcr_sd=0.0)
    assert all(hs.draw_rates(np.random.default_rng(s), fixed)[0] == 0.98 for s in range(20))


def test_draw_rates_mean():
    z = np.random.default_rng(1).standard_normal(100_000)
    hmcr, _ = hs._rates(z, z, P)
    assert abs(hmcr.mean() - 0.98) < 0.002
    assert hmcr.min() >= 0.9 and hmcr.max() <= 1.0


def test_improvise_branches():
    thetas = np.array([0.2, 0.5, 0.8])
    # random-selection branch: lo + u3 * (hi - lo)
    assert hs._improvise(thetas, 1, 1, 0.0, 0.0, [0.5, 0, 0, 0.25, 0], 0.05, (0.0, 1.0)) == 0.25
    # global-best branch
    assert hs._improvise(thetas, 2, 1, 1.0, 1.0, [0.5, 0.1, 0.1, 0.9, 0.5], 0.05, (0.0, 1.0)) == 0.8
    # zero bandwidth without pitch adjustment reproduces a slot
    got = hs._improvise(thetas, 0, 1, 1.0, 0.0, [0.5, 0.4, 0.7, 0.9, 0.5], 0.0, (0.0, 1.0))
    assert got in thetas.tolist()


def test_improvise_stays_in_bounds():
    hm = HarmonyMemory([0.0001, 0.999], [1.0, 2.0])
    rng = np.random.default_rng(3)
    for t in range(500):
        assert BOUNDS[0] <= hs.improvise(hm, t, rng, P, BOUNDS) <= BOUNDS[1]


def test_quadratic_minimum():
    res = harmony_search(lambda t: (t - 0.3) ** 2, (0.01, 0.99), P, np.random.default_rng(4))
    assert abs(res.theta - 0.3) < 1e-3


def test_constant_objective_flat_trace():
    res = harmony_search(lambda t: 1.0, (0.01, 0.99), P, np.random.default_rng(5))
    assert np.all(res.trace == 1.0)
    assert res.theta in res.memory.thetas


def test_non_finite_objective_raises():
    with pytest.raises(ObjectiveEvaluationError) as info:
        harmony_search(lambda t: math.inf if t > 0.5 else t, (0.01, 0.99), P, np.random.default_rng(6))
    assert info.value.theta > 0.5


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.05, 0.95))
def test_search_invariants(seed, centre):
    params = HarmonyParams(t_max_improv=300)

    def obj(t):
        return abs(t - centre) + 0.1 * math.sin(40 * t)

    stream = hs.draw_stream(np.random.default_rng(seed), params, BOUNDS)
    init_best = min(obj(t) for t in stream.init)
    res = hs._search_from_stream(obj, BOUNDS, params, stream)
    assert np.all(np.diff(res.trace) <= 0)
    assert res.value <= init_best
    assert np.all((res.memory.thetas >= BOUNDS[0]) & (res.memory.thetas <= BOUNDS[1]))


def test_memory_worst_never_increases():
    hm = HarmonyMemory([0.1, 0.2, 0.3], [3.0, 1.0, 2.0])
    rng = np.random.default_rng(7)
    last = hm.values[hm.worst_index]
    for _ in range(200):
        hm.offer(float(rng.random()), float(rng.random() * 4))
        assert hm.values[hm.worst_index] <= last
        last = hm.values[hm.worst_index]


def test_search_bitwise_reproducible():
    a = harmony_search(lambda t: (t - 0.4) ** 2, BOUNDS, P, np.random.default_rng(8))
    b = harmony_search(lambda t: (t - 0.4) ** 2, BOUNDS, P, np.random.default_rng(8))
    assert a.trace.tobytes() == b.trace.tobytes()


def test_penalized_objective_examples():
    devs = [make(t_max=100.0), make(d_size=9e6, t_max=100.0)]
    p, f = [1.0, 2.0], [1.0, 1.5]
    worst = max(float(cm.total_cost(d, pn, fn, 0.5)) for d, pn, fn in zip(devs, p, f))
    assert hs.penalized_objective(0.5, devs, p, f, P) == worst
    lat = float(cm.t_cmp(devs[0], 1.0, 0.5) + cm.t_up(devs[0], 1.0))
    v = 0.25
    tight = [make(t_max=lat - v), devs[1]]
    assert hs.penalized_objective(0.5, tight, p, f, P) == pytest.approx(worst + v / P.penalty_delta)
    assert hs.penalized_objective(1 - 1e-6, devs, p, f, P) > hs.penalized_objective(0.5, devs, p, f, P)
    with pytest.raises(InvalidParameterError):
        hs.penalized_objective(1.0, devs, p, f, P)


def test_kernel_objective_matches_cost_model():
    devs = [make(t_max=0.5), make(d_size=9e6, sigma=5e3)]
    p, f = np.array([1.0, 2.0]), np.array([1.0, 1.5])
    coef = hs.ThetaCoefficients.build(devs, p, f)
    for th in (0.01, 0.3, 0.7, 0.99):
        assert coef.value(th, P.penalty_delta) == pytest.approx(hs.penalized_objective(th, devs, p, f, P), rel=1e-12)


def test_theta_search_matches_dense_grid_on_three_devices():
    devs = [make(t_max=3.0), make(d_size=9e6, sigma=5e3, t_max=5.0), make(d_size=5e6, sigma=2e4)]
    p, f = np.array([1.0, 2.0, 0.5]), np.array([1.0, 1.5, 0.8])
    res = hs.theta_search(devs, p, f, P, np.random.default_rng(9), BOUNDS)
    spec = orc.GridSpec(theta=orc.Axis(*BOUNDS, 10_000))
    _, ref = orc.grid_search_theta(devs, p, f, spec, P)
    assert res.value == pytest.approx(ref, abs=1e-3)


@pytest.mark.skipif(not compiled_available(), reason="compiled extension not built")
def test_backends_bitwise_equal():
    devs = [make(t_max=0.5), make(d_size=9e6, sigma=5e3)]
    coef = hs.ThetaCoefficients.build(devs, np.array([1.0, 2.0]), np.array([1.0, 1.5]))
    stream = hs.draw_stream(np.random.default_rng(10), P, BOUNDS)
    a = hs._kernel_search(coef, P, stream, BOUNDS, load("python"))
    b = hs._kernel_search(coef, P, stream, BOUNDS, load("compiled"))
    assert a.trace.tobytes() == b.trace.tobytes() and a.theta == b.theta


def test_kernel_search_agrees_with_generic_search():
    devs = [make(t_max=0.5), make(d_size=9e6, sigma=5e3)]
    p, f = np.array([1.0, 2.0]), np.array([1.0, 1.5])
    coef = hs.ThetaCoefficients.build(devs, p, f)
    stream = hs.draw_stream(np.random.default_rng(11), P, BOUNDS)
    fused = hs._kernel_search(coef, P, stream, BOUNDS)
    generic = hs._search_from_stream(lambda t: coef.value(t, P.penalty_delta), BOUNDS, P, stream)
    assert fused.theta == generic.theta and fused.trace.tobytes() == generic.trace.tobytes()
