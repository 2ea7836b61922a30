"""Fixed-accuracy block: transmit powers and CPU frequencies by Lagrangian duality.

For a fixed local accuracy the min-max problem is rewritten with an
epigraph variable ``xi`` and four multiplier families: latency (``lam``),
upload energy (``beta``), CPU cap (``mu``) and epigraph (``phi``). Each
device's Lagrangian separates into a problem in ``f`` and one in
``s = sqrt(p)``, both of the form ``a/x + b*x**(k-1) + c*x``, whose
stationarity condition is a cubic when ``k = 3``.

Eliminating ``xi`` forces ``sum(phi) = 1``, so the epigraph weights are
projected onto the probability simplex. The latency, energy and CPU
multipliers are kept per unit of epigraph weight: device ``n``'s primal
minimizer depends only on ``lam[n] / phi[n]`` and friends, and keeping the
ratio directly means that a device with zero weight still follows its own
cost, not an arbitrary point of a flat Lagrangian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import cost as cm
from ._core import kernels
from .errors import (DegenerateObjectiveError, InfeasibleBlockError, InvalidParameterError,
                     NumericalBracketError)

F_FLOOR = 1e-6
S_FLOOR = 1e-6
STEP_SCALE = 0.5
STEP_MAX = 1.0 - 1e-9


class Multipliers(tuple):
    """The four multipliers of one device: ``(lam, beta, mu, phi)``."""

    def __new__(cls, lam=0.0, beta=0.0, mu=0.0, phi=0.0):
        vals = (float(lam), float(beta), float(mu), float(phi))
        if min(vals) < 0:
            raise InvalidParameterError("multipliers must be non-negative")
        return super().__new__(cls, vals)

    lam = property(lambda self: self[0])
    beta = property(lambda self: self[1])
    mu = property(lambda self: self[2])
    phi = property(lambda self: self[3])


@dataclass
class DualState:
    lam: np.ndarray
    beta: np.ndarray
    mu: np.ndarray
    phi: np.ndarray
    step_iter: int = 0
    step_scale: float = STEP_SCALE

    def __post_init__(self):
        for name in ("lam", "beta", "mu", "phi"):
            arr = np.array(getattr(self, name), dtype=float)
            if np.any(arr < 0):
                raise InvalidParameterError(f"{name} must be non-negative")
            setattr(self, name, arr)

    @classmethod
    def zeros(cls, n: int, step_scale: float = STEP_SCALE) -> "DualState":
        z = np.zeros(n)
        return cls(z.copy(), z.copy(), z.copy(), z.copy(), 0, step_scale)

    def device(self, i: int) -> Multipliers:
        return Multipliers(self.lam[i], self.beta[i], self.mu[i], self.phi[i])

    def copy(self) -> "DualState":
        return DualState(self.lam.copy(), self.beta.copy(), self.mu.copy(), self.phi.copy(),
                         self.step_iter, self.step_scale)


@dataclass
class BlockSolution:
    p_star: np.ndarray
    f_star: np.ndarray
    xi_star: float
    duals: DualState
    iterations: int
    converged: bool
    dual_values: np.ndarray = field(repr=False)
    primal_values: np.ndarray = field(repr=False)


def step_size(t: int, step_scale: float) -> float:
    """Diminishing step ``step_scale / sqrt(t + 1)``, kept inside (0, 1)."""
    return min(step_scale / math.sqrt(t + 1.0), STEP_MAX)


def _weights(dev: cm.DeviceProfile, m: Multipliers, theta: float, eps: float):
    k = eps / (1.0 - theta)
    return m.phi * dev.w_time * k + m.lam, m.phi * dev.w_energy * k


def _resolve(x: float, what: str) -> float:
    if math.isnan(x):
        raise DegenerateObjectiveError(f"{what}: every cost coefficient is zero; perturb the multipliers")
    if x == kernels.BRACKET_FAIL:
        raise NumericalBracketError(f"{what}: stationarity derivative not evaluable on the bracket")
    return x


def lagrangian_value(dev: cm.DeviceProfile, p, f, xi, duals: Multipliers, theta: float,
                     n_devices: int = 1, eps: float = 1.0):
    """One device's share of the epigraph Lagrangian (the ``xi/N`` split reassembles the sum)."""
    p = np.asarray(p, dtype=float)
    f = np.asarray(f, dtype=float)
    if np.any(p <= 0) or np.any(f <= 0):
        raise InvalidParameterError("p and f must be positive")
    acc = cm.AccuracyConfig(theta=theta, theta_lo=theta, theta_hi=theta, epsilon_factor=eps)
    g = cm.total_cost(dev, p, f, theta, acc)
    latency = cm.t_cmp(dev, f, theta) + cm.t_up(dev, p)
    return (xi / n_devices + duals.phi * (g - xi) + duals.lam * (latency - dev.t_max)
            + duals.beta * (p - dev.p_cap) + duals.mu * (f - dev.f_max))


def solve_f(dev: cm.DeviceProfile, duals: Multipliers, theta: float, eps: float = 1.0,
            exact: bool = True) -> float:
    """Lagrangian-minimizing CPU frequency on ``[F_FLOOR, f_max]``.

    Minimizes ``a/f + b*f**(zeta-1) + mu*f``. For ``zeta = 3`` the stationarity
    cubic ``2b f^3 + mu f^2 - a = 0`` is solved in closed form; otherwise, or
    with ``exact=False``, by bisection on the increasing derivative.
    """
    cm._check_theta(theta)
    wt, we = _weights(dev, duals, theta, eps)
    tau = -math.log(theta) * dev.gigacycles
    x = kernels.argmin_inv_pow(wt * tau, we * dev.rho * tau, duals.mu, float(dev.zeta),
                               F_FLOOR, dev.f_max, exact)
    return _resolve(x, "solve_f")


def solve_p(dev: cm.DeviceProfile, duals: Multipliers, theta: float, eps: float = 1.0,
            exact: bool = True, cap: bool = True) -> float:
    """Lagrangian-minimizing transmit power.

    In ``s = sqrt(p)`` the problem is ``a/s + b*s + beta*s**2``, giving the
    cubic ``2 beta s^3 + b s^2 - a = 0``. With ``cap`` the result respects the
    upload-energy limit ``p <= (E_max sigma / C)**2``.
    """
    cm._check_theta(theta)
    wt, we = _weights(dev, duals, theta, eps)
    hi = math.sqrt(dev.p_cap) if cap else math.inf
    s = kernels.argmin_inv_pow(wt * dev.upload_scale, duals.beta, we * dev.upload_scale,
                               3.0, S_FLOOR, hi, exact)
    s = _resolve(s, "solve_p")
    if math.isinf(s):
        raise DegenerateObjectiveError("solve_p: no energy price and no cap, power is unbounded")
    return s * s


def xi_from_primal(devices, p, f, theta, eps: float = 1.0):
    """Worst device cost and the lowest index attaining it."""
    acc = cm.AccuracyConfig(theta=theta, theta_lo=theta, theta_hi=theta, epsilon_factor=eps)
    costs = np.array([cm.total_cost(d, pn, fn, theta, acc) for d, pn, fn in zip(devices, p, f)])
    idx = int(np.argmax(costs))
    return float(costs[idx]), idx


def subgradients(devices, p, f, xi, theta, eps: float = 1.0):
    acc = cm.AccuracyConfig(theta=theta, theta_lo=theta, theta_hi=theta, epsilon_factor=eps)
    g_lam = np.array([cm.t_cmp(d, fn, theta) + cm.t_up(d, pn) - d.t_max for d, pn, fn in zip(devices, p, f)])
    g_beta = np.array([pn - d.p_cap for d, pn in zip(devices, p)])
    g_mu = np.array([fn - d.f_max for d, fn in zip(devices, f)])
    g_phi = np.array([cm.total_cost(d, pn, fn, theta, acc) - xi for d, pn, fn in zip(devices, p, f)])
    return g_lam, g_beta, g_mu, g_phi


def project_simplex(v) -> np.ndarray:
    out = np.array(v, dtype=float)
    kernels.project_simplex(out)
    return out


def update_duals(duals: DualState, residuals, simplex_phi: bool = True) -> DualState:
    """Projected subgradient ascent on the dual; ``residuals = (g_lam, g_beta, g_mu, g_phi)``.

    With ``simplex_phi`` the epigraph weights are projected onto the simplex
    instead of the non-negative orthant.
    """
    g_lam, g_beta, g_mu, g_phi = (np.asarray(g, dtype=float) for g in residuals)
    step = step_size(duals.step_iter, duals.step_scale)
    phi = duals.phi + step * g_phi
    phi = project_simplex(phi) if simplex_phi else np.maximum(phi, 0.0)
    return DualState(np.maximum(duals.lam + step * g_lam, 0.0),
                     np.maximum(duals.beta + step * g_beta, 0.0),
                     np.maximum(duals.mu + step * g_mu, 0.0),
                     phi, duals.step_iter + 1, duals.step_scale)


def _arrays(devices, theta):
    tau = np.array([-math.log(theta) * d.gigacycles for d in devices])
    rho = np.array([d.rho for d in devices], dtype=float)
    zeta = np.array([d.zeta for d in devices], dtype=float)
    fmax = np.array([d.f_max for d in devices], dtype=float)
    tmax = np.array([d.t_max for d in devices], dtype=float)
    cu = np.array([d.upload_scale for d in devices])
    pcap = np.array([d.p_cap for d in devices])
    wt = np.array([d.w_time for d in devices], dtype=float)
    we = np.array([d.w_energy for d in devices], dtype=float)
    return tau, rho, zeta, fmax, tmax, cu, pcap, wt, we


RECOVER_DOUBLINGS = 200
RECOVER_BISECTIONS = 100


def _recover(dev: cm.DeviceProfile, lam0: float, theta: float, eps: float, exact: bool):
    """Latency-feasible minimizer for a device whose dual iterates never became feasible.

    Dual ascent raises the latency price from below, so its iterates can
    approach the latency boundary from the infeasible side and stop short of
    it. Latency is non-increasing in the price, so doubling then bisecting the
    price gives the feasible point closest to that boundary. Returns
    ``(p, f, lam)``, or ``None`` when even the box corner misses the budget.
    """
    def point(lam):
        m = Multipliers(lam, 0.0, 0.0, 1.0)
        p, f = solve_p(dev, m, theta, eps, exact), solve_f(dev, m, theta, eps, exact)
        return p, f, float(cm.t_cmp(dev, f, theta) + cm.t_up(dev, p)) <= dev.t_max

    if float(cm.t_cmp(dev, dev.f_max, theta) + cm.t_up(dev, dev.p_cap)) > dev.t_max:
        return None
    lo, hi = float(lam0), max(2.0 * float(lam0), 1.0)
    for _ in range(RECOVER_DOUBLINGS):
        p, f, ok = point(hi)
        if ok:
            break
        lo, hi = hi, 2.0 * hi
    else:
        return None
    for _ in range(RECOVER_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        mp, mf, ok = point(mid)
        if ok:
            hi, p, f = mid, mp, mf
        else:
            lo = mid
    return p, f, hi


def solve_block(devices, theta: float, duals0: DualState | None = None, tol: float = 1e-6,
                max_iter: int = 2000, eps: float = 1.0, feas_tol: float = 1e-6,
                exact: bool = True) -> BlockSolution:
    """Dual ascent for the powers and frequencies at fixed accuracy.

    Each iteration minimizes every device's Lagrangian, evaluates the
    constraint residuals and takes a projected step of size
    ``step_scale / sqrt(t + 1)``. It stops when no multiplier family moves by
    ``tol`` or more in max-norm, or after ``max_iter`` iterations.

    The block separates by device, so the best latency-feasible point is kept
    per device; a device with no feasible iterate goes through a price
    bisection before the block is declared infeasible. The returned ``xi_star`` is the worst of those per-device
    costs, recomputed through the cost model.
    """
    if not 0 < theta < 1:
        raise InvalidParameterError(f"theta must lie in (0, 1), got {theta!r}")
    if tol <= 0 or max_iter < 1:
        raise InvalidParameterError("need tol > 0 and max_iter >= 1")
    n = len(devices)
    if n == 0:
        raise InvalidParameterError("at least one device is required")
    duals = DualState.zeros(n) if duals0 is None else duals0.copy()
    if duals.lam.shape != (n,):
        raise InvalidParameterError("dual state size does not match the device count")

    arrs = _arrays(devices, theta)
    kf = eps / (1.0 - theta)
    best_p, best_f, best_cost = np.zeros(n), np.zeros(n), np.zeros(n)
    least_p, least_f, least_v = np.zeros(n), np.zeros(n), np.zeros(n)
    dual_tr, primal_tr = np.zeros(max_iter), np.zeros(max_iter)
    iters, converged, status = kernels.dual_ascent(
        *arrs, kf, duals.lam, duals.beta, duals.mu, duals.phi,
        duals.step_scale, tol, max_iter, feas_tol, F_FLOOR, S_FLOOR, exact,
        best_p, best_f, best_cost, least_p, least_f, least_v, dual_tr, primal_tr)
    if status == 1:
        raise DegenerateObjectiveError("a device sub-problem lost every cost coefficient")
    if status == 2:
        raise NumericalBracketError("stationarity bracket failed inside the dual loop")
    duals.step_iter += iters

    missing = [i for i in range(n) if not np.isfinite(best_cost[i])]
    bad = []
    for i in missing:
        got = _recover(devices[i], duals.lam[i], theta, eps, exact)
        if got is None:
            bad.append(i)
            continue
        best_p[i], best_f[i], duals.lam[i] = got
    if bad:
        raise InfeasibleBlockError(
            f"no latency-feasible point for devices {bad} at theta={theta:.6g}",
            p=least_p.copy(), f=least_f.copy(), violation=least_v.copy())

    xi, _ = xi_from_primal(devices, best_p, best_f, theta, eps)
    return BlockSolution(best_p, best_f, xi, duals, int(iters), bool(converged),
                         dual_tr[:iters].copy(), primal_tr[:iters].copy())


def dual_bound(devices, duals: DualState, theta: float, eps: float = 1.0) -> float:
    """Epigraph dual function at ``duals`` (weights projected onto the simplex).

    Computed through ``solve_f``/``solve_p`` and the cost model, independently
    of the fused loop. A lower bound on the block optimum for any
    non-negative multipliers.
    """
    phi = project_simplex(duals.phi)
    total = 0.0
    for i, d in enumerate(devices):
        m = Multipliers(duals.lam[i], duals.beta[i], duals.mu[i], 1.0)
        f = solve_f(d, m, theta, eps)
        p = solve_p(d, m, theta, eps)
        val = lagrangian_value(d, p, f, 0.0, m, theta, 1, eps)
        total += phi[i] * float(val)
    return total
