"""Compare the compiled kernel against the pure-Python fallback.

Times tape evaluation and full flow integrations on representative
generators.  Run as: python3 benchmarks/bench_backends.py
"""
import math
import time

import numpy as np

from holoflow import gallery
from holoflow.kernel import BACKEND, get_backend


def _time(fn, repeat=5):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_backend(backend, gen, zs, times):
    k = get_backend(backend)
    tape = gen.g_tape
    tape_p = gen.gp_tape

    def eval_many():
        k.eval_tape_many(tape.code, tape.consts, zs)

    def flow():
        k.integrate(tape.code, tape.consts, tape_p.code, tape_p.consts,
                    0.3 + 0.1j, times, 1e-10, 1e-14, 1e-15)

    return _time(eval_many), _time(flow)


def main():
    backends = ["python"]
    try:
        get_backend("compiled")
        backends.append("compiled")
    except ImportError:
        print("compiled kernel unavailable; timing the fallback only")

    rng = np.random.default_rng(3)
    zs = 0.9 * np.sqrt(rng.uniform(0, 1, 20000)) * np.exp(2j * math.pi * rng.uniform(0, 1, 20000))
    times = np.linspace(0.0, 5.0, 65)

    rows = []
    for name in ("parabolic", "contact_alpha", "loglinear"):
        gen = gallery(name, {"alpha": 0.5} if name == "contact_alpha" else {})
        for backend in backends:
            t_eval, t_flow = bench_backend(backend, gen, zs, times)
            rows.append((name, backend, t_eval, t_flow))

    print(f"active backend at import: {BACKEND}\n")
    print(f"{'generator':<14} {'backend':<9} {'20k evals':>12} {'flow to t=5':>12}")
    for name, backend, t_eval, t_flow in rows:
        print(f"{name:<14} {backend:<9} {t_eval * 1e3:>10.2f}ms {t_flow * 1e3:>10.2f}ms")
    if len(backends) == 2:
        for name in ("parabolic", "contact_alpha", "loglinear"):
            py = next(r for r in rows if r[0] == name and r[1] == "python")
            cc = next(r for r in rows if r[0] == name and r[1] == "compiled")
            print(f"{name}: compiled speedup x{py[2] / cc[2]:.1f} (eval), "
                  f"x{py[3] / cc[3]:.1f} (flow)")


if __name__ == "__main__":
    main()
