"""Per-device latency, energy and cost functions.

Units: cycles are counted in gigacycles and CPU frequency in GHz, so
``d_size * b_cycles / 1e9 / f`` is in seconds. Payloads and connection
coefficients share the byte as data unit.

All functions accept scalars or numpy arrays for the decision variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError


@dataclass(frozen=True)
class DeviceProfile:
    d_size: float        # bytes
    b_cycles: float      # cycles per byte
    c_payload: float     # bytes uploaded per round
    rho: float
    zeta: float
    f_max: float         # GHz
    t_max: float         # s, per-round latency budget
    e_up_max: float      # J, per-round upload energy budget
    w_time: float
    w_energy: float
    sigma: float         # bytes/s per sqrt(W)

    def __post_init__(self):
        for name in ("d_size", "b_cycles", "c_payload", "rho", "f_max", "t_max", "e_up_max", "sigma"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not self.zeta >= 2:
            raise InvalidParameterError(f"zeta must be >= 2, got {self.zeta!r}")
        if not (0 <= self.w_time <= 1 and 0 <= self.w_energy <= 1):
            raise InvalidParameterError("tradeoff weights must lie in [0, 1]")
        if abs(self.w_time + self.w_energy - 1.0) > 1e-12:
            raise InvalidParameterError("w_time + w_energy must equal 1")

    @property
    def gigacycles(self) -> float:
        return self.d_size * self.b_cycles * 1e-9

    @property
    def upload_scale(self) -> float:
        """``C/sigma``: upload time at 1 W, and upload energy per sqrt(W)."""
        return self.c_payload / self.sigma

    @property
    def p_cap(self) -> float:
        """Largest power that keeps the upload energy within budget."""
        return (self.e_up_max * self.sigma / self.c_payload) ** 2


@dataclass(frozen=True)
class AccuracyConfig:
    theta: float = 0.5
    theta_lo: float = 1e-4
    theta_hi: float = 0.999
    epsilon_factor: float = 1.0

    def __post_init__(self):
        if not 0 < self.theta_lo <= self.theta <= self.theta_hi < 1:
            raise InvalidParameterError("need 0 < theta_lo <= theta <= theta_hi < 1")
        if not self.epsilon_factor > 0:
            raise InvalidParameterError("epsilon_factor must be positive")


@dataclass
class Allocation:
    p: np.ndarray
    f: np.ndarray
    theta: float

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        self.f = np.asarray(self.f, dtype=float)
        if self.p.shape != self.f.shape:
            raise InvalidParameterError("p and f must have one entry per device")
        if np.any(self.p < 0) or np.any(self.f < 0):
            raise InvalidParameterError("p and f must be non-negative")
        if not 0 < self.theta < 1:
            raise InvalidParameterError(f"theta must lie in (0, 1), got {self.theta!r}")


@dataclass
class CostReport:
    t_cmp: np.ndarray
    t_up: np.ndarray
    e_cmp: np.ndarray
    e_up: np.ndarray
    per_round_cost: np.ndarray
    total_cost: np.ndarray
    rounds: float
    worst_cost: float = field(init=False)

    def __post_init__(self):
        self.worst_cost = float(np.max(self.total_cost))

    @property
    def total_energy(self) -> np.ndarray:
        """Energy spent by each device over the whole training run."""
        return self.rounds * (self.e_cmp + self.e_up)

    @property
    def total_latency(self) -> np.ndarray:
        return self.rounds * (self.t_cmp + self.t_up)


def _check_theta(theta):
    if np.any(np.asarray(theta) <= 0) or np.any(np.asarray(theta) >= 1):
        raise InvalidParameterError(f"theta must lie in (0, 1), got {theta!r}")


def _log_inv(theta):
    return -np.log(theta)


def t_cmp(dev: DeviceProfile, f, theta):
    _check_theta(theta)
    if np.any(np.asarray(f) <= 0):
        raise InvalidParameterError("CPU frequency must be positive")
    return _log_inv(theta) * dev.gigacycles / f


def e_cmp(dev: DeviceProfile, f, theta):
    _check_theta(theta)
    if np.any(np.asarray(f) <= 0):
        raise InvalidParameterError("CPU frequency must be positive")
    return _log_inv(theta) * dev.rho * dev.gigacycles * np.power(f, dev.zeta - 1.0)


def t_up(dev: DeviceProfile, p):
    if np.any(np.asarray(p) <= 0):
        raise InvalidParameterError("transmit power must be positive for a finite upload time")
    return dev.c_payload / (dev.sigma * np.sqrt(p))


def e_up(dev: DeviceProfile, p):
    if np.any(np.asarray(p) < 0):
        raise InvalidParameterError("transmit power must be non-negative")
    return dev.c_payload * np.sqrt(p) / dev.sigma


def round_count(theta, cfg: AccuracyConfig | None = None):
    if np.any(np.asarray(theta) >= 1):
        raise InvalidParameterError("theta must be below 1")
    eps = 1.0 if cfg is None else cfg.epsilon_factor
    return eps / (1.0 - theta)


def per_round_cost(dev: DeviceProfile, p, f, theta):
    energy = e_cmp(dev, f, theta) + e_up(dev, p)
    latency = t_cmp(dev, f, theta) + t_up(dev, p)
    return dev.w_energy * energy + dev.w_time * latency


def total_cost(dev: DeviceProfile, p, f, theta, cfg: AccuracyConfig | None = None):
    """Round-scaled weighted cost of one device."""
    return round_count(theta, cfg) * per_round_cost(dev, p, f, theta)


def feasibility_residuals(dev: DeviceProfile, p, f, theta):
    """(latency - t_max, upload energy - budget, f - f_max); feasible iff all <= 0."""
    latency = t_cmp(dev, f, theta) + t_up(dev, p)
    return latency - dev.t_max, e_up(dev, p) - dev.e_up_max, f - dev.f_max


def cost_report(devices, alloc: Allocation, cfg: AccuracyConfig | None = None) -> CostReport:
    th = alloc.theta
    tc = np.array([t_cmp(d, fn, th) for d, fn in zip(devices, alloc.f)])
    tu = np.array([t_up(d, pn) for d, pn in zip(devices, alloc.p)])
    ec = np.array([e_cmp(d, fn, th) for d, fn in zip(devices, alloc.f)])
    eu = np.array([e_up(d, pn) for d, pn in zip(devices, alloc.p)])
    wt = np.array([d.w_time for d in devices])
    we = np.array([d.w_energy for d in devices])
    per_round = we * (ec + eu) + wt * (tc + tu)
    k = float(round_count(th, cfg))
    return CostReport(tc, tu, ec, eu, per_round, k * per_round, k)


def is_feasible(devices, alloc: Allocation, rel_tol: float = 1e-6) -> bool:
    """Constraint check with slack ``rel_tol * (1 + budget)`` per constraint."""
    for dev, pn, fn in zip(devices, alloc.p, alloc.f):
        if pn <= 0 or fn <= 0:
            return False
        r_lat, r_e, r_f = feasibility_residuals(dev, pn, fn, alloc.theta)
        if r_lat > rel_tol * (1 + dev.t_max) or r_e > rel_tol * (1 + dev.e_up_max) or r_f > rel_tol * (1 + dev.f_max):
            return False
    return True
