"""Wireless TCP/IP link model.

Each device owns a small state machine: an exponentially smoothed round-trip
time driven by uniform IP-layer packet delays, and a log-distributed
shadowing gain driven by a clamped AR(1) sequence. Together with the
steady-state throughput constant they give the connection coefficient
``sigma`` such that the upload rate is ``sigma * sqrt(p)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ChannelNotWarmedError, InvalidParameterError

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class ChannelParams:
    mss: float = 1460.0
    loss_a: float = 90.2514
    loss_b: float = 3.4998
    loss_c: float = 1.0942
    b_acked: float = 2.0
    a0: float = 0.9738
    delta_ip_max: float = 0.2
    x_corr: float = 0.9

    def __post_init__(self):
        for name in ("mss", "loss_a", "loss_b", "loss_c", "b_acked", "a0", "delta_ip_max"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not 0.0 <= self.x_corr < 1.0:
            raise InvalidParameterError(f"x_corr must lie in [0, 1), got {self.x_corr!r}")


@dataclass(frozen=True)
class ChannelState:
    rtt: float
    x: float
    z: float
    k0: float
    sigma: float
    t: int = 0


def k0_constant(params: ChannelParams) -> float:
    """Steady-state TCP throughput constant.

    The incomplete-gamma factor at shape 1 reduces to ``exp(-C*B)``.
    """
    a, b, c = params.loss_a, params.loss_b, params.loss_c
    if min(a, b, c, params.b_acked, params.mss) <= 0:
        raise InvalidParameterError("throughput constants must be positive")
    gamma_tail = math.exp(-c * b)
    num = math.sqrt(3.0 / (2.0 * params.b_acked)) * params.mss
    return num / math.sqrt(c + (a / (c * b * b)) * gamma_tail)


def sample_delta_ip(rng: np.random.Generator, params: ChannelParams) -> float:
    return float(rng.uniform(0.0, params.delta_ip_max))


def step_rtt(prev_rtt: float, delta_ip: float) -> float:
    if prev_rtt < 0 or delta_ip < 0:
        raise InvalidParameterError("RTT and packet delay must be non-negative")
    return 0.75 * prev_rtt + 0.25 * delta_ip


def shadowing_gain(x: float, params: ChannelParams) -> float:
    return params.a0 * 10.0 ** (0.1 * x)


def step_shadowing(state: ChannelState, rng: np.random.Generator, params: ChannelParams) -> ChannelState:
    u = float(rng.uniform(-SQRT3, SQRT3))
    rho = params.x_corr
    x = rho * state.x + math.sqrt(1.0 - rho * rho) * u
    x = min(max(x, -SQRT3), SQRT3)
    return replace(state, x=x, z=shadowing_gain(x, params))


def sigma(state: ChannelState) -> float:
    if state.t < 1 or not state.rtt > 0:
        raise ChannelNotWarmedError(f"sigma undefined at t={state.t} with rtt={state.rtt}")
    return state.k0 * math.sqrt(state.z) / state.rtt


def data_rate(sigma_n, p):
    return sigma_n * np.sqrt(p)


def initial_state(params: ChannelParams, rng: np.random.Generator) -> ChannelState:
    """Slot-0 state: RTT(0) = 0 and a stationary draw of the shadowing driver."""
    x0 = float(rng.uniform(-SQRT3, SQRT3))
    return ChannelState(rtt=0.0, x=x0, z=shadowing_gain(x0, params),
                        k0=k0_constant(params), sigma=math.nan, t=0)


def advance(state: ChannelState, rng: np.random.Generator, params: ChannelParams) -> ChannelState:
    """One time slot: packet delay first, then the shadowing innovation."""
    rtt = step_rtt(state.rtt, sample_delta_ip(rng, params))
    nxt = step_shadowing(replace(state, rtt=rtt, t=state.t + 1), rng, params)
    return replace(nxt, sigma=sigma(nxt))


def warm_up(params: ChannelParams, rng: np.random.Generator, slots: int) -> ChannelState:
    if slots < 1:
        raise InvalidParameterError("at least one burn-in slot is required before sigma exists")
    state = initial_state(params, rng)
    for _ in range(slots):
        state = advance(state, rng, params)
    return state
