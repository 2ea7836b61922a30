"""Scenario configuration: a flat YAML mapping, validated and defaulted.

Every key is optional except ``seed``. Unknown keys are rejected. Defaults
reproduce the reference simulation setting: 10 devices, datasets of 5-10 MB,
40 cycles/byte, 4.5 KB payloads, 4 s latency budget, 2 GHz CPUs, 20 J
upload budget, equal latency/energy weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

import yaml

from .channel import ChannelParams
from .errors import ConfigError, FedAllocError
from .harmony import HarmonyParams
from .optimizer import METHODS, SolverConfig

# rho = 1e-24 with raw cycles and Hz, re-expressed for gigacycles and GHz
RAW_RHO = 1e-24 * 1e9 * 1e18
POWER_PRESETS = {"normalized": 0.05, "raw": RAW_RHO}

DEFAULT_SWEEP = (1.0, 1.2, 1.4, 1.6, 1.8, 2.0)


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int
    n_devices: int | None = 10
    arrival_rate: float | None = None
    coverage_radius_m: float = 150.0
    fl_area_m: float = 100.0
    dataset_range: tuple[float, float] = (5e6, 10e6)
    b_cycles: float = 40.0
    c_payload: float = 4500.0
    power_preset: str = "normalized"
    rho: float = 0.05
    zeta: float = 3.0
    t_max: float = 4.0
    f_max: float = 2.0
    e_up_max: float = 20.0
    w_time: float = 0.5
    w_energy: float = 0.5
    channel: ChannelParams = field(default_factory=ChannelParams)
    burn_in: int = 20
    solver: SolverConfig = field(default_factory=SolverConfig)
    methods: tuple[str, ...] = METHODS
    sweep_multipliers: tuple[float, ...] = DEFAULT_SWEEP

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return replace(self, seed=seed)


_CHANNEL_KEYS = {f.name for f in fields(ChannelParams)}
_HARMONY_KEYS = {f.name for f in fields(HarmonyParams)} - {"hmcr_clip", "par_clip"}
_SOLVER_KEYS = {f.name for f in fields(SolverConfig)} - {"harmony"}
_TOP_KEYS = {f.name for f in fields(ScenarioConfig)} - {"channel", "solver"}
KNOWN_KEYS = _CHANNEL_KEYS | _HARMONY_KEYS | _SOLVER_KEYS | _TOP_KEYS


def _num(key, value, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    if kind is int:
        if float(value) != int(value):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def from_mapping(raw: dict) -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a key-value mapping")
    unknown = sorted(set(raw) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(unknown)}")
    if "seed" not in raw or raw["seed"] is None:
        raise ConfigError("seed: missing (a seed is mandatory)")
    seed = _num("seed", raw["seed"], int)
    if not 0 <= seed < 2 ** 64:
        raise ConfigError("seed: must be a non-negative 64-bit integer")

    top = {"seed": seed}
    int_keys = {"n_devices", "burn_in"}
    for key in _TOP_KEYS - {"seed", "dataset_range", "methods", "sweep_multipliers", "power_preset"}:
        if key in raw and raw[key] is not None:
            top[key] = _num(key, raw[key], int if key in int_keys else float)

    if "arrival_rate" in raw and raw["arrival_rate"] is not None and "n_devices" not in raw:
        top["n_devices"] = None
    n_dev = top.get("n_devices", 10)
    if n_dev is not None and n_dev < 1:
        raise ConfigError("n_devices: must be at least 1")
    if n_dev is None and not top.get("arrival_rate", 0) > 0:
        raise ConfigError("arrival_rate: must be positive when n_devices is unset")

    if "dataset_range" in raw:
        rng_ = raw["dataset_range"]
        if not isinstance(rng_, (list, tuple)) or len(rng_) != 2:
            raise ConfigError("dataset_range: expected [low, high]")
        lo, hi = (_num("dataset_range", v) for v in rng_)
        if not 0 < lo < hi:
            raise ConfigError("dataset_range: need 0 < low < high")
        top["dataset_range"] = (lo, hi)

    preset = raw.get("power_preset", "normalized")
    if preset not in POWER_PRESETS:
        raise ConfigError(f"power_preset: expected one of {sorted(POWER_PRESETS)}, got {preset!r}")
    top["power_preset"] = preset
    if "rho" not in raw:
        top["rho"] = POWER_PRESETS[preset]

    if "methods" in raw:
        methods = raw["methods"]
        if isinstance(methods, str):
            methods = [m.strip() for m in methods.split(",") if m.strip()]
        bad = [m for m in methods if m not in METHODS]
        if bad or not methods:
            raise ConfigError(f"methods: unknown method(s) {bad}; choose from {list(METHODS)}")
        top["methods"] = tuple(methods)

    if "sweep_multipliers" in raw:
        sweep = raw["sweep_multipliers"]
        if not isinstance(sweep, (list, tuple)) or not sweep:
            raise ConfigError("sweep_multipliers: expected a non-empty list")
        top["sweep_multipliers"] = tuple(_num("sweep_multipliers", v) for v in sweep)

    wt, we = raw.get("w_time"), raw.get("w_energy")
    if wt is not None and we is None:
        top["w_energy"] = 1.0 - top["w_time"]
    elif we is not None and wt is None:
        top["w_time"] = 1.0 - top["w_energy"]
    w_t, w_e = top.get("w_time", 0.5), top.get("w_energy", 0.5)
    if not (0 <= w_t <= 1 and 0 <= w_e <= 1) or abs(w_t + w_e - 1.0) > 1e-9:
        raise ConfigError(f"w_time/w_energy: must lie in [0, 1] and sum to 1 (got {w_t}, {w_e})")

    for key in ("b_cycles", "c_payload", "rho", "t_max", "f_max", "e_up_max",
                "coverage_radius_m", "fl_area_m"):
        if key in top and not top[key] > 0:
            raise ConfigError(f"{key}: must be positive")
    if top.get("zeta", 3.0) < 2:
        raise ConfigError("zeta: must be at least 2")
    if top.get("burn_in", 20) < 1:
        raise ConfigError("burn_in: must be at least 1")

    try:
        channel = ChannelParams(**{k: _num(k, raw[k]) for k in _CHANNEL_KEYS if k in raw})
        harmony = HarmonyParams(**{k: _num(k, raw[k], int if k in ("hms", "t_max_improv") else float)
                                   for k in _HARMONY_KEYS if k in raw})
        solver = SolverConfig(harmony=harmony, **{
            k: _num(k, raw[k], int if k in ("block_max_iter", "outer_max", "reject_max") else float)
            for k in _SOLVER_KEYS if k in raw})
    except ConfigError:
        raise
    except FedAllocError as exc:
        raise ConfigError(str(exc)) from exc
    return ScenarioConfig(channel=channel, solver=solver, **top)


def load_config(path) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if raw is None:
        raw = {}
    return from_mapping(raw)
