"""Seeded device populations with frozen connection coefficients."""

from __future__ import annotations

from dataclasses import replace

from . import channel as ch
from .config import ScenarioConfig
from .cost import DeviceProfile
from .rng import stream


def device_count(config: ScenarioConfig) -> int:
    if config.n_devices is not None:
        return config.n_devices
    draw = int(stream(config.seed, "arrivals").poisson(config.arrival_rate))
    return max(1, draw)


def generate_scenario(config: ScenarioConfig) -> list[DeviceProfile]:
    """Devices for ``config.seed``.

    Dataset sizes and channel trajectories come from per-device streams, so
    device ``i`` is the same whatever the population size.
    """
    devices = []
    lo, hi = config.dataset_range
    for i in range(device_count(config)):
        d_size = float(stream(config.seed, "dataset", i).uniform(lo, hi))
        state = ch.warm_up(config.channel, stream(config.seed, "channel", i), config.burn_in)
        devices.append(DeviceProfile(
            d_size=d_size, b_cycles=config.b_cycles, c_payload=config.c_payload,
            rho=config.rho, zeta=config.zeta, f_max=config.f_max, t_max=config.t_max,
            e_up_max=config.e_up_max, w_time=config.w_time, w_energy=config.w_energy,
            sigma=state.sigma))
    return devices


def scale_datasets(devices, multiplier: float) -> list[DeviceProfile]:
    return [replace(d, d_size=d.d_size * multiplier) for d in devices]

