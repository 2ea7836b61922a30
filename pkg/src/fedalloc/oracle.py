"""Brute-force grid references for the block solver, the accuracy search and the full problem.

Grids evaluate cell centers. Minima break ties toward the lexicographically
smallest grid index, so results do not depend on evaluation order. Nothing
here is used by the solvers themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import cost as cm
from .dual import Multipliers
from .errors import InfeasibleScenarioError, InvalidParameterError, OracleTooLargeError

MAX_FULL_DEVICES = 3


@dataclass(frozen=True)
class Axis:
    lo: float
    hi: float
    points: int
    log: bool = False

    def __post_init__(self):
        if not self.lo < self.hi:
            raise InvalidParameterError(f"axis needs lo < hi, got ({self.lo}, {self.hi})")
        if self.points < 2:
            raise InvalidParameterError("an axis needs at least two points")
        if self.log and self.lo <= 0:
            raise InvalidParameterError("a log axis needs lo > 0")

    def centers(self) -> np.ndarray:
        frac = (np.arange(self.points) + 0.5) / self.points
        if self.log:
            a, b = math.log(self.lo), math.log(self.hi)
            return np.exp(a + frac * (b - a))
        return self.lo + frac * (self.hi - self.lo)

    @property
    def width(self) -> float:
        """Cell width, in log units for a log axis."""
        if self.log:
            return (math.log(self.hi) - math.log(self.lo)) / self.points
        return (self.hi - self.lo) / self.points

    def refined(self, factor: int = 2) -> "Axis":
        return Axis(self.lo, self.hi, self.points * factor, self.log)


@dataclass(frozen=True)
class GridSpec:
    p: Axis | None = None
    f: Axis | None = None
    theta: Axis | None = None

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(*(a.refined(factor) if a is not None else None for a in (self.p, self.f, self.theta)))


def device_grid(dev: cm.DeviceProfile, points: int = 200, theta_points: int = 100,
                theta_bounds=(1e-4, 0.999)) -> GridSpec:
    """Grid covering a device's power and frequency boxes and the accuracy range."""
    return GridSpec(Axis(0.0, dev.p_cap, points), Axis(0.0, dev.f_max, points),
                    Axis(theta_bounds[0], theta_bounds[1], theta_points))


def _first_argmin(values: np.ndarray):
    flat = int(np.argmin(values))  # numpy returns the first minimum in C order
    return np.unravel_index(flat, values.shape), float(values.flat[flat])


def grid_search_pf(dev: cm.DeviceProfile, duals: Multipliers, theta: float, spec: GridSpec,
                   eps: float = 1.0):
    """Minimize one device's Lagrangian (with ``xi = 0``) over the (p, f) grid."""
    if spec.p is None or spec.f is None:
        raise InvalidParameterError("grid_search_pf needs p and f axes")
    P = spec.p.centers()[:, None]
    F = spec.f.centers()[None, :]
    k = eps / (1.0 - theta)
    g = k * cm.per_round_cost(dev, P, F, theta)
    latency = cm.t_cmp(dev, F, theta) + cm.t_up(dev, P)
    vals = (duals.phi * g + duals.lam * (latency - dev.t_max)
            + duals.beta * (P - dev.p_cap) + duals.mu * (F - dev.f_max))
    (i, j), v = _first_argmin(vals)
    return float(P[i, 0]), float(F[0, j]), v


def theta_objective(thetas, devices, p, f, penalty_delta: float, eps: float = 1.0) -> np.ndarray:
    """Penalized accuracy objective on an array of accuracies, through the cost model."""
    th = np.asarray(thetas, dtype=float)
    worst = np.full(th.shape, -np.inf)
    excess = np.zeros(th.shape)
    k = eps / (1.0 - th)
    for d, pn, fn in zip(devices, p, f):
        worst = np.maximum(worst, k * cm.per_round_cost(d, pn, fn, th))
        excess += np.maximum(0.0, cm.t_cmp(d, fn, th) + cm.t_up(d, pn) - d.t_max)
    return worst + excess / penalty_delta


def grid_search_theta(devices, p, f, spec: GridSpec, params, eps: float = 1.0):
    """Dense scan of the penalized accuracy objective; ``params`` supplies the penalty."""
    if spec.theta is None:
        raise InvalidParameterError("grid_search_theta needs a theta axis")
    th = spec.theta.centers()
    (i,), v = _first_argmin(theta_objective(th, devices, p, f, params.penalty_delta, eps))
    return float(th[i]), v


def _device_table(dev, P, F, th, eps):
    """Best feasible cost of one device for every accuracy, with its (p, f) cell."""
    # axes: theta, p, f
    T = th[:, None, None]
    cost = (eps / (1.0 - T)) * cm.per_round_cost(dev, P[None, :, None], F[None, None, :], T)
    latency = cm.t_cmp(dev, F[None, None, :], T) + cm.t_up(dev, P[None, :, None])
    ok = ((latency <= dev.t_max) & (cm.e_up(dev, P)[None, :, None] <= dev.e_up_max)
          & (F[None, None, :] <= dev.f_max))
    cost = np.where(ok, cost, np.inf)
    flat = cost.reshape(len(th), -1)
    idx = np.argmin(flat, axis=1)
    best = flat[np.arange(len(th)), idx]
    pi, fi = np.unravel_index(idx, (len(P), len(F)))
    return best, pi, fi


def grid_search_full(devices, spec: GridSpec, eps: float = 1.0):
    """Exhaustive minimum of the worst device cost over (theta, p, f) grid cells.

    For a fixed accuracy the devices decouple, so the product-grid minimum is
    the minimum over theta of the worst per-device best cell; this is exact
    on the grid, not an approximation.
    """
    n = len(devices)
    if n == 0:
        raise InvalidParameterError("at least one device is required")
    if n > MAX_FULL_DEVICES:
        raise OracleTooLargeError(f"full grid search supports at most {MAX_FULL_DEVICES} devices, got {n}")
    if spec.p is None or spec.f is None or spec.theta is None:
        raise InvalidParameterError("grid_search_full needs p, f and theta axes")
    P, F, th = spec.p.centers(), spec.f.centers(), spec.theta.centers()
    tables = [_device_table(d, P, F, th, eps) for d in devices]
    worst = np.max(np.stack([t[0] for t in tables]), axis=0)
    if not np.any(np.isfinite(worst)):
        raise InfeasibleScenarioError("no grid cell satisfies every device's constraints")
    k = int(np.argmin(worst))
    p = np.array([P[t[1][k]] for t in tables])
    f = np.array([F[t[2][k]] for t in tables])
    return cm.Allocation(p, f, float(th[k])), float(worst[k])
