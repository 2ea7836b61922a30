"""Self-adaptive global-best harmony search over the shared local accuracy.

With powers and frequencies fixed, the accuracy ``theta`` is chosen to
minimize the worst round-scaled device cost plus a hinge penalty on every
latency excess. The search keeps a small memory of candidate accuracies.
Each improvisation either perturbs a remembered value by a shrinking
bandwidth, jumps to the best remembered value (pitch adjustment), or draws
a fresh value. A candidate replaces the worst memory slot only when it is
strictly better.

Random numbers are drawn up front, in a fixed layout: two normals per
improvisation for the memory-consideration and pitch-adjustment rates, then
five uniforms (memory test, slot pick, sign, step length, pitch test). The
generic search and the fused kernel consume the same arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import cost as cm
from ._core import kernels
from .errors import InvalidParameterError, ObjectiveEvaluationError

N_UNIFORMS = 5


@dataclass(frozen=True)
class HarmonyParams:
    hms: int = 5
    hmcr_mean: float = 0.98
    hmcr_sd: float = 0.01
    par_mean: float = 0.9
    par_sd: float = 0.05
    bw_min: float = 0.0005
    bw_max: float = 0.05
    t_max_improv: int = 5000
    penalty_delta: float = 1e-3
    hmcr_clip: tuple = (0.9, 1.0)
    par_clip: tuple = (0.0, 1.0)

    def __post_init__(self):
        if self.hms < 2:
            raise InvalidParameterError("harmony memory needs at least two slots")
        if not 0 < self.bw_min <= self.bw_max:
            raise InvalidParameterError("need 0 < bw_min <= bw_max")
        if self.t_max_improv < 1:
            raise InvalidParameterError("at least one improvisation is required")
        if not self.penalty_delta > 0:
            raise InvalidParameterError("penalty_delta must be positive")
        if self.hmcr_sd < 0 or self.par_sd < 0:
            raise InvalidParameterError("standard deviations must be non-negative")


@dataclass
class HarmonyMemory:
    thetas: np.ndarray
    values: np.ndarray
    best_index: int = field(init=False)
    worst_index: int = field(init=False)

    def __post_init__(self):
        self.thetas = np.asarray(self.thetas, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.refresh()

    def refresh(self):
        # first index wins ties, for both extremes
        self.best_index = int(np.argmin(self.values))
        self.worst_index = int(np.argmax(self.values))

    @property
    def best(self) -> tuple[float, float]:
        return float(self.thetas[self.best_index]), float(self.values[self.best_index])

    def offer(self, theta: float, value: float) -> bool:
        if value < self.values[self.worst_index]:
            self.thetas[self.worst_index] = theta
            self.values[self.worst_index] = value
            self.refresh()
            return True
        return False


@dataclass
class SearchResult:
    theta: float
    value: float
    trace: np.ndarray
    memory: HarmonyMemory


@dataclass
class ImprovisationStream:
    init: np.ndarray      # (hms,) initial uniform slots
    hmcr: np.ndarray      # (T,)
    par: np.ndarray       # (T,)
    uniforms: np.ndarray  # (T * 5,)


def bw_schedule(t, params: HarmonyParams) -> float:
    """Bandwidth: linear decay from ``bw_max`` to ``bw_min`` over the first half, then flat."""
    T = params.t_max_improv
    if t < T / 2.0:
        return params.bw_max - (params.bw_max - params.bw_min) / T * 2.0 * t
    return params.bw_min


def _rates(z_hmcr, z_par, params: HarmonyParams):
    hmcr = np.clip(params.hmcr_mean + params.hmcr_sd * np.asarray(z_hmcr), *params.hmcr_clip)
    par = np.clip(params.par_mean + params.par_sd * np.asarray(z_par), *params.par_clip)
    return hmcr, par


def draw_rates(rng: np.random.Generator, params: HarmonyParams | None = None) -> tuple[float, float]:
    params = params or HarmonyParams()
    z = rng.standard_normal(2)
    hmcr, par = _rates(z[0], z[1], params)
    return float(hmcr), float(par)


def draw_stream(rng: np.random.Generator, params: HarmonyParams, bounds) -> ImprovisationStream:
    lo, hi = bounds
    T = params.t_max_improv
    init = rng.uniform(lo, hi, params.hms)
    z = rng.standard_normal((T, 2))
    hmcr, par = _rates(z[:, 0], z[:, 1], params)
    uni = rng.random(T * N_UNIFORMS)
    return ImprovisationStream(np.ascontiguousarray(init), np.ascontiguousarray(hmcr),
                               np.ascontiguousarray(par), uni)


def _improvise(thetas, best_index, t, hmcr, par, u, bw, bounds) -> float:
    lo, hi = bounds
    hms = len(thetas)
    if u[0] < hmcr:
        h = min(int(u[1] * hms), hms - 1)
        if u[2] < 0.5:
            cand = thetas[h] + u[3] * bw
        else:
            cand = thetas[h] - u[3] * bw
        if u[4] < par:
            cand = thetas[best_index]
    else:
        cand = lo + u[3] * (hi - lo)
    return float(min(max(cand, lo), hi))


def improvise(hm: HarmonyMemory, t: int, rng: np.random.Generator, params: HarmonyParams,
              bounds) -> float:
    """One candidate accuracy from the memory, drawing this step's variates from ``rng``."""
    hmcr, par = draw_rates(rng, params)
    u = rng.random(N_UNIFORMS)
    return _improvise(hm.thetas, hm.best_index, t, hmcr, par, u, bw_schedule(t, params), bounds)


def _finite(objective, theta):
    val = float(objective(theta))
    if not math.isfinite(val):
        raise ObjectiveEvaluationError(theta, val)
    return val


def harmony_search(objective, bounds, params: HarmonyParams, rng: np.random.Generator) -> SearchResult:
    """Minimize a scalar ``objective`` over ``bounds = (lo, hi)``.

    Returns the best memory slot and the best value after each
    improvisation (non-increasing).
    """
    lo, hi = bounds
    if not lo < hi:
        raise InvalidParameterError("bounds must satisfy lo < hi")
    stream = draw_stream(rng, params, bounds)
    return _search_from_stream(objective, bounds, params, stream)


def _search_from_stream(objective, bounds, params, stream: ImprovisationStream) -> SearchResult:
    thetas = stream.init.astype(float).tolist()
    mem = HarmonyMemory(np.array(thetas), np.array([_finite(objective, th) for th in thetas]))
    T = params.t_max_improv
    trace = np.empty(T)
    uni = stream.uniforms
    for t in range(T):
        tt = t + 1
        u = uni[N_UNIFORMS * t:N_UNIFORMS * (t + 1)]
        cand = _improvise(mem.thetas, mem.best_index, tt, stream.hmcr[t], stream.par[t], u,
                          bw_schedule(tt, params), bounds)
        mem.offer(cand, _finite(objective, cand))
        trace[t] = mem.values[mem.best_index]
    th, val = mem.best
    return SearchResult(th, val, trace, mem)


# -- penalized accuracy objective -------------------------------------------

@dataclass(frozen=True)
class ThetaCoefficients:
    """Per-device coefficients of the accuracy objective at fixed (p, f).

    cost_n(theta) = eps/(1-theta) * (log(1/theta) * A_n + B_n)
    latency excess_n(theta) = log(1/theta) * L_n + U_n
    """
    A: np.ndarray
    B: np.ndarray
    L: np.ndarray
    U: np.ndarray
    eps: float = 1.0

    @classmethod
    def build(cls, devices, p, f, eps: float = 1.0) -> "ThetaCoefficients":
        A, B, L, U = [], [], [], []
        for d, pn, fn in zip(devices, p, f):
            g = d.gigacycles
            s = math.sqrt(pn)
            A.append(d.w_time * g / fn + d.w_energy * d.rho * g * fn ** (d.zeta - 1.0))
            B.append(d.w_time * d.upload_scale / s + d.w_energy * d.upload_scale * s)
            L.append(g / fn)
            U.append(d.upload_scale / s - d.t_max)
        arr = lambda x: np.ascontiguousarray(x, dtype=float)
        return cls(arr(A), arr(B), arr(L), arr(U), float(eps))

    def value(self, theta: float, penalty_delta: float) -> float:
        return kernels.penalized_value(float(theta), self.A, self.B, self.L, self.U,
                                       self.eps, 1.0 / penalty_delta)


def penalized_objective(theta, devices, p, f, params: HarmonyParams, eps: float = 1.0) -> float:
    """Worst device cost at ``theta`` plus ``1/delta`` times the summed latency excess."""
    if not 0 < theta < 1:
        raise InvalidParameterError(f"theta must lie in (0, 1), got {theta!r}")
    acc = cm.AccuracyConfig(theta=theta, theta_lo=theta, theta_hi=theta, epsilon_factor=eps)
    worst = -math.inf
    excess = 0.0
    for d, pn, fn in zip(devices, p, f):
        worst = max(worst, float(cm.total_cost(d, pn, fn, theta, acc)))
        excess += max(0.0, float(cm.t_cmp(d, fn, theta) + cm.t_up(d, pn) - d.t_max))
    return worst + excess / params.penalty_delta


def theta_search(devices, p, f, params: HarmonyParams, rng: np.random.Generator, bounds,
                 eps: float = 1.0) -> SearchResult:
    """Harmony search on the penalized accuracy objective, run by the fused kernel."""
    lo, hi = bounds
    if not 0 < lo < hi < 1:
        raise InvalidParameterError("accuracy bounds must satisfy 0 < lo < hi < 1")
    coef = ThetaCoefficients.build(devices, p, f, eps)
    stream = draw_stream(rng, params, bounds)
    return _kernel_search(coef, params, stream, bounds)


def _kernel_search(coef: ThetaCoefficients, params, stream, bounds, backend=None) -> SearchResult:
    k = backend or kernels
    lo, hi = bounds
    hms, T = params.hms, params.t_max_improv
    slots, values, trace = np.empty(hms), np.empty(hms), np.empty(T)
    status, bad = k.harmony_penalized(coef.A, coef.B, coef.L, coef.U, coef.eps,
                                      1.0 / params.penalty_delta, float(lo), float(hi),
                                      params.bw_min, params.bw_max, T, stream.init,
                                      stream.hmcr, stream.par, stream.uniforms,
                                      slots, values, trace)
    if status:
        raise ObjectiveEvaluationError(bad, math.nan)
    mem = HarmonyMemory(slots, values)
    th, val = mem.best
    return SearchResult(th, val, trace, mem)
