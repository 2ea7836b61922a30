"""Benchmark suite: run every method on seeded scenarios and write plot-ready CSVs.

Output files (all rows sorted by seed, then method or multiplier):

``convergence.csv``
    ``seed, outer_iter, proposed, random_pf, random_theta, random_all``:
    incumbent objective after each outer iteration. Shorter traces are carried
    forward at their final value; cells are empty where a method was not run
    or failed.
``comparison.csv``
    ``seed, proposed, random_pf, random_theta, random_all, status``: final
    objectives; ``status`` is ``ok`` or ``infeasible:`` followed by the
    failing methods.
``energy_sweep.csv``
    ``seed, multiplier, mean_total_energy, objective, status``: the proposed
    method re-run with every dataset scaled by ``multiplier``; energy is the
    per-device total over all rounds, averaged over devices.
``records.json``
    One record per (seed, method) including allocations and wall time. Only
    this file carries timings, so the CSVs are byte-identical across reruns.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .config import ScenarioConfig
from .errors import FedAllocError
from .optimizer import METHODS, RUNNERS
from .rng import stream
from .scenario import generate_scenario, scale_datasets

CONVERGENCE_HEADER = ("seed", "outer_iter") + METHODS
COMPARISON_HEADER = ("seed",) + METHODS + ("status",)
SWEEP_HEADER = ("seed", "multiplier", "mean_total_energy", "objective", "status")


@dataclass
class RunRecord:
    method_tag: str
    seed: int
    objective: float | None
    theta: float | None
    p: list = field(default_factory=list)
    f: list = field(default_factory=list)
    total_energy: float | None = None
    total_latency: float | None = None
    trace: list = field(default_factory=list)
    feasible: bool = False
    status: str = "ok"
    wall_time: float = 0.0


@dataclass
class SweepPoint:
    seed: int
    multiplier: float
    mean_total_energy: float | None
    objective: float | None
    status: str = "ok"


def _run_method(method, devices, config: ScenarioConfig, seed: int) -> RunRecord:
    t0 = time.perf_counter()
    try:
        res = RUNNERS[method](devices, config.solver, stream(seed, method))
    except FedAllocError as exc:
        return RunRecord(method, seed, None, None, status=f"infeasible: {exc}",
                         wall_time=time.perf_counter() - t0)
    rep = res.report
    return RunRecord(method, seed, res.objective, res.allocation.theta,
                     res.allocation.p.tolist(), res.allocation.f.tolist(),
                     float(np.sum(rep.total_energy)), float(np.sum(rep.total_latency)),
                     list(res.trace), bool(res.feasible), "ok" if res.feasible else "infeasible: final point",
                     time.perf_counter() - t0)


def _sweep(devices, config: ScenarioConfig, seed: int) -> list[SweepPoint]:
    out = []
    for mult in config.sweep_multipliers:
        try:
            res = RUNNERS["proposed"](scale_datasets(devices, mult), config.solver, stream(seed, "proposed"))
            out.append(SweepPoint(seed, mult, float(np.mean(res.report.total_energy)), res.objective))
        except FedAllocError as exc:
            out.append(SweepPoint(seed, mult, None, None, f"infeasible: {exc}"))
    return out


def run_seed(config: ScenarioConfig, seed: int, sweep: bool = True):
    """All selected methods, and optionally the dataset sweep, for one seed."""
    cfg = config.with_seed(seed)
    devices = generate_scenario(cfg)
    records = [_run_method(m, devices, cfg, seed) for m in METHODS if m in cfg.methods]
    points = _sweep(devices, cfg, seed) if sweep and "proposed" in cfg.methods else []
    return records, points


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return ""
    return repr(float(x))


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_outputs(out_dir, records: list[RunRecord], points: list[SweepPoint]) -> None:
    os.makedirs(out_dir, exist_ok=True)
    by_seed: dict[int, dict[str, RunRecord]] = {}
    for r in records:
        by_seed.setdefault(r.seed, {})[r.method_tag] = r

    conv, comp = [], []
    for seed in sorted(by_seed):
        runs = by_seed[seed]
        length = max((len(r.trace) for r in runs.values()), default=0)
        for it in range(length):
            row = [seed, it + 1]
            for m in METHODS:
                r = runs.get(m)
                row.append(_fmt(r.trace[min(it, len(r.trace) - 1)]) if r and r.trace else "")
            conv.append(row)
        failed = [m for m in METHODS if m in runs and runs[m].status != "ok"]
        status = "ok" if not failed else "infeasible:" + ";".join(failed)
        comp.append([seed] + [_fmt(runs[m].objective) if m in runs and runs[m].status == "ok" else ""
                              for m in METHODS] + [status])

    sweep = [[pt.seed, _fmt(pt.multiplier), _fmt(pt.mean_total_energy), _fmt(pt.objective),
              "ok" if pt.status == "ok" else "infeasible"]
             for pt in sorted(points, key=lambda q: (q.seed, q.multiplier))]

    _write_csv(os.path.join(out_dir, "convergence.csv"), CONVERGENCE_HEADER, conv)
    _write_csv(os.path.join(out_dir, "comparison.csv"), COMPARISON_HEADER, comp)
    _write_csv(os.path.join(out_dir, "energy_sweep.csv"), SWEEP_HEADER, sweep)
    ordered = sorted(records, key=lambda r: (r.seed, METHODS.index(r.method_tag)))
    with open(os.path.join(out_dir, "records.json"), "w", encoding="utf-8") as fh:
        json.dump([asdict(r) for r in ordered], fh, indent=1, sort_keys=True)
        fh.write("\n")


def run_suite(config: ScenarioConfig, out_dir, n_seeds: int = 1, jobs: int = 1, sweep: bool = True):
    """Seeds ``config.seed .. config.seed + n_seeds - 1``; returns (records, sweep points)."""
    if n_seeds < 1:
        raise ValueError("n_seeds must be at least 1")
    seeds = [config.seed + i for i in range(n_seeds)]
    if jobs > 1 and n_seeds > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_seed, [config] * n_seeds, seeds, [sweep] * n_seeds))
    else:
        results = [run_seed(config, s, sweep) for s in seeds]
    records = [r for rs, _ in results for r in rs]
    points = [p for _, ps in results for p in ps]
    write_outputs(out_dir, records, points)
    return records, points


# -- report -------------------------------------------------------------------

def load_records(in_dir) -> list[RunRecord]:
    with open(os.path.join(in_dir, "records.json"), "r", encoding="utf-8") as fh:
        return [RunRecord(**r) for r in json.load(fh)]


def win_rate(records: list[RunRecord]) -> tuple[int, int]:
    """(wins, seeds): the proposed method wins a seed when its objective is at most
    every completed baseline objective on that seed."""
    by_seed: dict[int, dict[str, RunRecord]] = {}
    for r in records:
        by_seed.setdefault(r.seed, {})[r.method_tag] = r
    wins = total = 0
    for runs in by_seed.values():
        prop = runs.get("proposed")
        if prop is None:
            continue
        total += 1
        if prop.status != "ok":
            continue
        others = [r.objective for m, r in runs.items() if m != "proposed" and r.status == "ok"]
        wins += all(prop.objective <= o for o in others)
    return wins, total


def format_report(records: list[RunRecord]) -> str:
    lines = [f"runs: {len(records)}"]
    lines.append(f"{'method':<14}{'runs':>6}{'feasible':>10}{'mean':>14}{'min':>14}{'max':>14}")
    warnings = []
    for m in METHODS:
        rs = [r for r in records if r.method_tag == m]
        if not rs:
            continue
        vals = [r.objective for r in rs if r.status == "ok"]
        if vals:
            stats = f"{np.mean(vals):>14.6g}{min(vals):>14.6g}{max(vals):>14.6g}"
        else:
            stats = f"{'-':>14}{'-':>14}{'-':>14}"
            warnings.append(f"warning: every {m} run was infeasible")
        lines.append(f"{m:<14}{len(rs):>6}{len(vals):>10}{stats}")
    wins, total = win_rate(records)
    rate = 100.0 * wins / total if total else 0.0
    lines.append(f"proposed win rate: {rate:.1f}% ({wins}/{total} seeds)")
    lines.extend(warnings)
    return "\n".join(lines)
