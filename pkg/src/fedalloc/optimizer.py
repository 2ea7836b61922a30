"""Alternating optimization of (p, f) and theta, plus the random baselines."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import cost as cm
from .dual import DualState, solve_block
from .errors import (InfeasibleBaselineError, InfeasibleBlockError, InfeasibleScenarioError,
                     InvalidParameterError)
from .harmony import HarmonyParams, theta_search

METHODS = ("proposed", "random_pf", "random_theta", "random_all")


@dataclass(frozen=True)
class SolverConfig:
    theta0: float = 0.5
    theta_lo: float = 1e-4
    theta_hi: float = 0.999
    epsilon_factor: float = 1.0
    block_tol: float = 1e-6
    block_max_iter: int = 2000
    step_scale: float = 0.5
    outer_tol: float = 1e-3
    outer_max: int = 20
    reject_max: int = 10000
    feas_tol: float = 1e-6
    harmony: HarmonyParams = field(default_factory=HarmonyParams)

    def __post_init__(self):
        if not 0 < self.theta_lo <= self.theta0 <= self.theta_hi < 1:
            raise InvalidParameterError("need 0 < theta_lo <= theta0 <= theta_hi < 1")
        if self.outer_max < 1 or self.block_max_iter < 1 or self.reject_max < 1:
            raise InvalidParameterError("iteration budgets must be positive")

    @property
    def bounds(self) -> tuple[float, float]:
        return self.theta_lo, self.theta_hi

    @property
    def accuracy(self) -> cm.AccuracyConfig:
        return cm.AccuracyConfig(self.theta0, self.theta_lo, self.theta_hi, self.epsilon_factor)


@dataclass
class OptimizationResult:
    allocation: cm.Allocation
    objective: float
    trace: list[float]
    outer_iterations: int
    feasible: bool
    method_tag: str
    dual_iterations: list[int] = field(default_factory=list)
    report: cm.CostReport | None = None


def evaluate(devices, alloc: cm.Allocation, cfg: SolverConfig):
    """(worst-case total cost, feasibility, cost report) of an allocation."""
    rep = cm.cost_report(devices, alloc, cfg.accuracy)
    return rep.worst_cost, cm.is_feasible(devices, alloc, cfg.feas_tol), rep


def _result(devices, alloc, cfg, trace, outer, tag, dual_iters=()):
    obj, feas, rep = evaluate(devices, alloc, cfg)
    return OptimizationResult(alloc, obj, list(trace), outer, feas, tag, list(dual_iters), rep)


def optimize(devices, cfg: SolverConfig | None = None, rng: np.random.Generator | None = None) -> OptimizationResult:
    """Alternate the dual block solve (p, f | theta) with harmony search (theta | p, f).

    The incumbent is the best feasible allocation met so far; it changes only
    on strict improvement, so ``trace`` (incumbent objective after each outer
    iteration) is non-increasing. Stops once the relative improvement stays
    below ``outer_tol`` for two consecutive outer iterations.
    """
    cfg = cfg or SolverConfig()
    if not devices:
        raise InvalidParameterError("at least one device is required")
    rng = rng if rng is not None else np.random.default_rng(0)
    eps = cfg.epsilon_factor
    theta = cfg.theta0
    duals = DualState.zeros(len(devices), cfg.step_scale)
    best: tuple[float, cm.Allocation] | None = None
    trace: list[float] = []
    dual_iters: list[int] = []
    failures: list[str] = []
    calm = 0
    outer = 0

    def consider(alloc):
        nonlocal best
        obj, feas, _ = evaluate(devices, alloc, cfg)
        if feas and (best is None or obj < best[0]):
            best = (obj, alloc)

    for outer in range(1, cfg.outer_max + 1):
        try:
            block = solve_block(devices, theta, duals, cfg.block_tol, cfg.block_max_iter, eps, cfg.feas_tol)
            p, f = block.p_star, block.f_star
            duals = block.duals
            dual_iters.append(block.iterations)
            consider(cm.Allocation(p, f, theta))
        except InfeasibleBlockError as exc:
            failures.append(f"theta={theta:.6g}: {exc}")
            dual_iters.append(cfg.block_max_iter)
            p = np.maximum(exc.p, 1e-12)
            f = np.maximum(exc.f, 1e-12)
            duals = DualState.zeros(len(devices), cfg.step_scale)

        found = theta_search(devices, p, f, cfg.harmony, rng, cfg.bounds, eps)
        consider(cm.Allocation(p, f, found.theta))
        theta = found.theta

        if best is None:
            trace.append(math.inf)
            continue
        prev = trace[-1] if trace else math.inf
        trace.append(best[0])
        if math.isfinite(prev):
            rel = (prev - best[0]) / abs(prev) if prev != 0 else 0.0
            calm = calm + 1 if rel < cfg.outer_tol else 0
            if calm >= 2:
                break

    if best is None:
        raise InfeasibleScenarioError("block solver found no feasible allocation at any visited theta; "
                                      + "; ".join(failures[-3:]))
    return _result(devices, best[1], cfg, trace, outer, "proposed", dual_iters)


def _feasible_at(dev: cm.DeviceProfile, p: float, f: float, theta: float) -> bool:
    return float(cm.t_cmp(dev, f, theta) + cm.t_up(dev, p)) <= dev.t_max


def _draw_pf(devices, rng, theta_check: float, reject_max: int, what: str):
    """Uniform (p, f) per device inside the power and frequency boxes, latency-feasible at ``theta_check``."""
    p = np.empty(len(devices))
    f = np.empty(len(devices))
    for i, d in enumerate(devices):
        for _ in range(reject_max):
            pn = rng.uniform(0.0, d.p_cap)
            fn = rng.uniform(0.0, d.f_max)
            if pn > 0 and fn > 0 and _feasible_at(d, pn, fn, theta_check):
                p[i], f[i] = pn, fn
                break
        else:
            raise InfeasibleBaselineError(f"{what}: no feasible draw for device {i} in {reject_max} tries")
    return p, f


def baseline_random_pf(devices, cfg: SolverConfig | None = None, rng=None) -> OptimizationResult:
    """Random (p, f), feasible for at least the largest accuracy; theta by harmony search."""
    cfg = cfg or SolverConfig()
    rng = rng if rng is not None else np.random.default_rng(0)
    p, f = _draw_pf(devices, rng, cfg.theta_hi, cfg.reject_max, "random_pf")
    found = theta_search(devices, p, f, cfg.harmony, rng, cfg.bounds, cfg.epsilon_factor)
    alloc = cm.Allocation(p, f, found.theta)
    res = _result(devices, alloc, cfg, [], 1, "random_pf")
    res.trace = [res.objective]
    return res


def baseline_random_theta(devices, cfg: SolverConfig | None = None, rng=None) -> OptimizationResult:
    """Uniform theta; (p, f) from one block solve at that accuracy."""
    cfg = cfg or SolverConfig()
    rng = rng if rng is not None else np.random.default_rng(0)
    theta = float(rng.uniform(cfg.theta_lo, cfg.theta_hi))
    block = solve_block(devices, theta, DualState.zeros(len(devices), cfg.step_scale),
                        cfg.block_tol, cfg.block_max_iter, cfg.epsilon_factor, cfg.feas_tol)
    alloc = cm.Allocation(block.p_star, block.f_star, theta)
    res = _result(devices, alloc, cfg, [], 1, "random_theta", [block.iterations])
    res.trace = [res.objective]
    return res


def baseline_random_all(devices, cfg: SolverConfig | None = None, rng=None) -> OptimizationResult:
    """Uniform theta, then uniform latency-feasible (p, f); no optimization."""
    cfg = cfg or SolverConfig()
    rng = rng if rng is not None else np.random.default_rng(0)
    theta = float(rng.uniform(cfg.theta_lo, cfg.theta_hi))
    p, f = _draw_pf(devices, rng, theta, cfg.reject_max, "random_all")
    res = _result(devices, cm.Allocation(p, f, theta), cfg, [], 0, "random_all")
    res.trace = [res.objective]
    return res


RUNNERS = {
    "proposed": optimize,
    "random_pf": baseline_random_pf,
    "random_theta": baseline_random_theta,
    "random_all": baseline_random_all,
}
