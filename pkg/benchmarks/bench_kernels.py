"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each kernel runs on identical inputs under both backends; the script also
confirms the outputs are bitwise equal.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from fedalloc import generate_scenario
from fedalloc._core import compiled_available, load
from fedalloc.config import from_mapping
from fedalloc.dual import F_FLOOR, S_FLOOR, DualState, _arrays
from fedalloc.harmony import HarmonyParams, ThetaCoefficients, _kernel_search, draw_stream
from fedalloc.rng import stream


def _best(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_cubic(k, repeat):
    rng = np.random.default_rng(0)
    trip = [tuple(x) for x in 10 ** rng.uniform(-4, 4, (20_000, 3))]
    return _best(lambda: [k.cubic_root(a, b, m) for a, b, m in trip], repeat)


def bench_dual(k, repeat, devices, theta=0.3, iters=2000):
    arrs = _arrays(devices, theta)
    n = len(devices)

    def run():
        d = DualState.zeros(n)
        bufs = [np.zeros(n) for _ in range(6)] + [np.zeros(iters), np.zeros(iters)]
        # tol = 0 forces the full iteration budget
        res = k.dual_ascent(*arrs, 1.0 / (1.0 - theta), d.lam, d.beta, d.mu, d.phi, d.step_scale,
                            0.0, iters, 1e-6, F_FLOOR, S_FLOOR, True, *bufs)
        return res, bufs[0].tobytes(), bufs[6].tobytes()
    return _best(run, repeat)


def bench_harmony(k, repeat, devices):
    params = HarmonyParams()
    p = np.ones(len(devices))
    f = np.full(len(devices), 1.5)
    coef = ThetaCoefficients.build(devices, p, f)
    st = draw_stream(stream(0, "bench"), params, (1e-4, 0.999))
    return _best(lambda: _kernel_search(coef, params, st, (1e-4, 0.999), k).trace.tobytes(), repeat)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    backends = {"python": load("python")}
    if compiled_available():
        backends["compiled"] = load("compiled")
    else:
        print("compiled extension not built; timing the Python fallback only")
    devices = generate_scenario(from_mapping({"seed": 0}))
    cases = {
        "cubic_root x20000": lambda k: bench_cubic(k, args.repeat),
        "dual_ascent 10 devices x2000 iters": lambda k: bench_dual(k, args.repeat, devices),
        "harmony 5000 improvisations": lambda k: bench_harmony(k, args.repeat, devices),
    }
    print(f"{'kernel':<38}" + "".join(f"{name:>14}" for name in backends) + f"{'speedup':>10}{'equal':>8}")
    for label, case in cases.items():
        results = {name: case(k) for name, k in backends.items()}
        row = f"{label:<38}" + "".join(f"{results[n][0] * 1e3:>12.2f}ms" for n in backends)
        if len(results) == 2:
            speed = results["python"][0] / results["compiled"][0]
            same = results["python"][1] == results["compiled"][1]
            row += f"{speed:>9.1f}x{str(same):>8}"
        print(row)


if __name__ == "__main__":
    main()
