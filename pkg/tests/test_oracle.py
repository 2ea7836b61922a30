import numpy as np
import pytest

from fedalloc import cost as cm
from fedalloc import oracle as orc
from fedalloc.dual import Multipliers, solve_f, solve_p
from fedalloc.errors import InfeasibleScenarioError, InvalidParameterError, OracleTooLargeError
from fedalloc.harmony import HarmonyParams


def make(**kw):
    base = dict(d_size=7e6, b_cycles=40.0, c_payload=4500.0, rho=0.05, zeta=3.0, f_max=2.0,
                t_max=4.0, e_up_max=20.0, w_time=0.5, w_energy=0.5, sigma=4500.0)
    base.update(kw)
    return cm.DeviceProfile(**base)


DEV = make()  # power cap 400 W
ONE = Multipliers(phi=1.0)


def test_axis_centers():
    assert orc.Axis(0.0, 1.0, 4).centers().tolist() == [0.125, 0.375, 0.625, 0.875]
    log = orc.Axis(1.0, 100.0, 2, log=True)
    assert log.centers() == pytest.approx([10 ** 0.5, 10 ** 1.5])
    assert log.width == pytest.approx(np.log(100) / 2)
    with pytest.raises(InvalidParameterError):
        orc.Axis(1.0, 1.0, 5)
    with pytest.raises(InvalidParameterError):
        orc.Axis(0.0, 1.0, 5, log=True)


def test_pf_grid_contains_analytic_minimizer():
    spec = orc.GridSpec(orc.Axis(0.0, 4.0, 200), orc.Axis(0.0, DEV.f_max, 200))
    p, f, _ = orc.grid_search_pf(DEV, ONE, 0.5, spec)
    assert abs(p - solve_p(DEV, ONE, 0.5)) <= spec.p.width
    assert abs(f - solve_f(DEV, ONE, 0.5)) <= spec.f.width


def test_pf_refinement_never_worse():
    spec = orc.GridSpec(orc.Axis(0.0, 4.0, 50), orc.Axis(0.0, DEV.f_max, 50))
    *_, coarse = orc.grid_search_pf(DEV, ONE, 0.5, spec)
    *_, fine = orc.grid_search_pf(DEV, ONE, 0.5, spec.refined())
    assert fine <= coarse


def test_theta_grid_contains_minimizer_and_refines():
    devs = [make(t_max=100.0)]
    spec = orc.GridSpec(theta=orc.Axis(1e-4, 0.999, 1000))
    th, val = orc.grid_search_theta(devs, [1.0], [1.0], spec, HarmonyParams())
    fine = np.linspace(1e-4, 0.999, 1_000_001)[1:-1]
    best = fine[np.argmin(orc.theta_objective(fine, devs, [1.0], [1.0], 1e-3))]
    assert abs(th - best) <= spec.theta.width
    _, val2 = orc.grid_search_theta(devs, [1.0], [1.0], spec.refined(), HarmonyParams())
    assert val2 <= val


def test_theta_objective_matches_scalar_cost():
    devs = [make(), make(d_size=9e6, t_max=0.2)]
    vals = orc.theta_objective([0.3, 0.6], devs, [1.0, 2.0], [1.0, 1.5], 1e-3)
    for th, v in zip((0.3, 0.6), vals):
        worst = max(cm.total_cost(d, p, f, th) for d, p, f in zip(devs, (1.0, 2.0), (1.0, 1.5)))
        excess = sum(max(0.0, cm.t_cmp(d, f, th) + cm.t_up(d, p) - d.t_max)
                     for d, p, f in zip(devs, (1.0, 2.0), (1.0, 1.5)))
        assert v == pytest.approx(worst + excess / 1e-3)


def test_full_grid_single_device_dominates_hand_point():
    spec = orc.device_grid(DEV, points=100, theta_points=100)
    alloc, val = orc.grid_search_full([DEV], spec)
    assert cm.is_feasible([DEV], alloc)
    assert val <= cm.total_cost(DEV, 1.0, 1.0, 0.5)
    assert val == pytest.approx(cm.total_cost(DEV, alloc.p[0], alloc.f[0], alloc.theta))


def test_full_grid_separable_reduction_matches_brute_force():
    devs = [make(), make(d_size=9e6, sigma=9000.0, t_max=2.0)]
    spec = orc.GridSpec(orc.Axis(0.0, 400.0, 6), orc.Axis(0.0, 2.0, 6), orc.Axis(0.05, 0.95, 6))
    P, F, T = spec.p.centers(), spec.f.centers(), spec.theta.centers()
    best = np.inf
    for th in T:
        for p1 in P:
            for f1 in F:
                for p2 in P:
                    for f2 in F:
                        alloc = cm.Allocation([p1, p2], [f1, f2], th)
                        if cm.is_feasible(devs, alloc, 0.0):
                            best = min(best, cm.cost_report(devs, alloc).worst_cost)
    _, val = orc.grid_search_full(devs, spec)
    assert val == pytest.approx(best, rel=1e-12)


def test_full_grid_limits():
    spec = orc.device_grid(DEV, points=10, theta_points=10)
    with pytest.raises(OracleTooLargeError):
        orc.grid_search_full([DEV] * 4, spec)
    with pytest.raises(InfeasibleScenarioError):
        orc.grid_search_full([make(t_max=0.001)], spec)


def test_oracle_deterministic():
    spec = orc.device_grid(DEV, points=60, theta_points=60)
    a = orc.grid_search_full([DEV, make(d_size=9e6)], spec)
    b = orc.grid_search_full([DEV, make(d_size=9e6)], spec)
    assert a[1] == b[1] and a[0].p.tolist() == b[0].p.tolist()
