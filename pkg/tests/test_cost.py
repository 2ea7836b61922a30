import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fedalloc import cost as cm
from fedalloc.config import from_mapping
from fedalloc.errors import InvalidParameterError
from fedalloc.scenario import generate_scenario

INV_E = math.exp(-1.0)


def make(**kw):
    # 5e6 bytes * 40 cycles = 0.2 gigacycles
    base = dict(d_size=5e6, b_cycles=40.0, c_payload=500.0, rho=0.05, zeta=3.0, f_max=2.0,
                t_max=20.0, e_up_max=20.0, w_time=0.5, w_energy=0.5, sigma=100.0)
    base.update(kw)
    return cm.DeviceProfile(**base)


DEV = make()


def test_component_examples():
    assert cm.t_cmp(DEV, 2.0, INV_E) == pytest.approx(0.1)
    assert cm.e_cmp(DEV, 2.0, INV_E) == pytest.approx(0.04)
    assert cm.t_up(DEV, 4.0) == pytest.approx(2.5)
    assert cm.e_up(DEV, 4.0) == pytest.approx(10.0)
    assert cm.e_up(DEV, 0.0) == 0.0


def test_compute_terms_vanish_near_one():
    assert cm.t_cmp(DEV, 2.0, 1 - 1e-12) < 1e-12
    assert cm.e_cmp(DEV, 2.0, 1 - 1e-12) < 1e-12


def test_tiny_payload_uploads_instantly():
    assert cm.t_up(make(c_payload=1e-12), 4.0) < 1e-14


@pytest.mark.parametrize("theta, want", [(0.5, 2.0), (1e-12, 1.0), (0.9, 10.0)])
def test_round_count(theta, want):
    assert cm.round_count(theta) == pytest.approx(want)


def test_round_count_rejects_one():
    with pytest.raises(InvalidParameterError):
        cm.round_count(1.0)


def test_invalid_inputs():
    with pytest.raises(InvalidParameterError):
        cm.t_cmp(DEV, 0.0, 0.5)
    with pytest.raises(InvalidParameterError):
        cm.t_up(DEV, 0.0)
    with pytest.raises(InvalidParameterError):
        make(w_time=0.7, w_energy=0.7)
    with pytest.raises(InvalidParameterError):
        make(zeta=1.5)


def test_weight_extremes_and_composite():
    k = cm.round_count(INV_E)
    lat = make(w_time=1.0, w_energy=0.0)
    en = make(w_time=0.0, w_energy=1.0)
    assert cm.total_cost(lat, 4.0, 2.0, INV_E) == pytest.approx(k * (0.1 + 2.5))
    assert cm.total_cost(en, 4.0, 2.0, INV_E) == pytest.approx(k * (0.04 + 10.0))
    assert cm.total_cost(DEV, 4.0, 2.0, INV_E) == pytest.approx(k * 0.5 * (0.04 + 10 + 0.1 + 2.5))


def test_residual_examples():
    r = cm.feasibility_residuals(DEV, 1.0, 1.0, 0.5)
    assert all(x < 0 for x in r)
    assert cm.feasibility_residuals(DEV, 1.0, DEV.f_max, 0.5)[2] == 0.0
    assert cm.feasibility_residuals(DEV, DEV.p_cap, 1.0, 0.5)[1] == pytest.approx(0.0, abs=1e-12)


def test_cost_report_matches_scalar_functions():
    alloc = cm.Allocation([4.0, 1.0], [2.0, 1.0], INV_E)
    rep = cm.cost_report([DEV, DEV], alloc)
    assert rep.total_cost[0] == pytest.approx(cm.total_cost(DEV, 4.0, 2.0, INV_E))
    assert rep.worst_cost == pytest.approx(max(rep.total_cost))
    assert rep.total_energy[0] == pytest.approx(rep.rounds * (0.04 + 10.0))
    assert cm.is_feasible([DEV, DEV], alloc)
    assert not cm.is_feasible([make(t_max=0.5)], cm.Allocation([1.0], [1.0], 0.5))


def test_allocation_validation():
    with pytest.raises(InvalidParameterError):
        cm.Allocation([1.0], [1.0, 2.0], 0.5)
    with pytest.raises(InvalidParameterError):
        cm.Allocation([1.0], [1.0], 1.0)


def test_cost_blows_up_at_both_ends():
    for dev in generate_scenario(from_mapping({"seed": 0})):
        mid = cm.total_cost(dev, 1.0, 1.0, 0.5)
        assert cm.total_cost(dev, 1.0, 1.0, 1e-6) > mid
        assert cm.total_cost(dev, 1.0, 1.0, 1 - 1e-6) > mid


@given(st.floats(0.01, 0.99), st.floats(0.01, 100.0))
def test_convex_in_frequency(theta, p):
    f = np.linspace(0.05, DEV.f_max, 200)
    g = cm.total_cost(DEV, p, f, theta)
    assert np.all(np.diff(g, 2) > 0)


@given(st.floats(0.01, 0.99), st.floats(0.05, 2.0))
def test_convex_in_sqrt_power(theta, f):
    s = np.linspace(0.05, 20.0, 200)
    g = cm.total_cost(DEV, s * s, f, theta)
    assert np.all(np.diff(g, 2) > 0)


@given(st.floats(1e-6, 1e6))
def test_upload_energy_time_identity(p):
    assert cm.e_up(DEV, p) * cm.t_up(DEV, p) == pytest.approx((DEV.c_payload / DEV.sigma) ** 2, rel=1e-12)


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_residuals_monotone_in_power(p1, p2):
    lo, hi = sorted((p1, p2))
    r_lo = cm.feasibility_residuals(DEV, lo, 1.0, 0.5)
    r_hi = cm.feasibility_residuals(DEV, hi, 1.0, 0.5)
    assert r_hi[1] >= r_lo[1]
    assert r_hi[0] <= r_lo[0]
