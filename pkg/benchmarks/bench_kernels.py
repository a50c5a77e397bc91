"""Time the compiled and numpy replicate kernels on the same inputs.

    python3 benchmarks/bench_kernels.py [--N 500] [--repeat 3]

Prints one line per (kernel, n, m) with the best-of-``repeat`` time for each
backend, the speed-up, and the largest relative difference between them.
"""
import argparse
import time

import numpy as np

from empcp import engine, kernels
from empcp.model import validate_sample
from empcp.sphere import discretize


def best_time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=500, help="replicates per call")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--sizes", default="50,100,200")
    args = ap.parse_args()

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled backend not built; timing the numpy kernels only")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<8}{'n':>5}{'m':>4}" + "".join(f"{b + ' s':>12}" for b in backends)
          + f"{'speed-up':>10}{'max rel diff':>14}")
    for n in (int(v) for v in args.sizes.split(",")):
        x = rng.normal(size=(n, 2))
        xi = rng.normal(size=(args.N, n))
        u = rng.random((args.N, n))
        for m in (1, 8):
            t = engine.build_projection_table(validate_sample(x), discretize(2, m))
            for name in ("check", "hat", "sim"):
                if name == "sim" and m != 1:
                    continue
                times, outs = [], []
                for b in backends:
                    fn = getattr(kernels.get_backend(b), f"{name}_profiles")
                    call = (lambda fn=fn: fn(u)) if name == "sim" else \
                        (lambda fn=fn: fn(t.indicators, t.counts, xi))
                    secs, out = best_time(call, args.repeat)
                    times.append(secs)
                    outs.append(out)
                diff = 0.0
                if len(outs) == 2:
                    for a, b in zip(outs[0], outs[1]):
                        diff = max(diff, float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300))))
                speed = times[-1] / times[0] if len(times) == 2 else 1.0
                print(f"{name:<8}{n:>5}{m:>4}" + "".join(f"{s:>12.4f}" for s in times)
                      + f"{speed:>9.1f}x{diff:>14.1e}")


if __name__ == "__main__":
    main()
