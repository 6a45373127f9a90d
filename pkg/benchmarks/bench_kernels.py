"""Time the compiled and pure-Python matching kernels side by side.

    python benchmarks/bench_kernels.py [--sizes 6,10,14,16] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from calibmatch import _backend


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="6,10,12,14,16")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    mods = _backend.available()
    names = [m.NAME for m in mods]
    print(f"selected backend: {_backend.BACKEND}")
    print(f"{'kernel':<8}{'n':>4}" + "".join(f"{n + ' [ms]':>16}" for n in names) + f"{'speedup':>10}")
    rng = np.random.default_rng(0)
    for n in (int(s) for s in args.sizes.split(",")):
        w = rng.random(n * (n - 1) // 2)
        for kernel in ("max_weight_matching", "greedy_matching"):
            results = [getattr(m, kernel)(n, w) for m in mods]
            assert all(r == results[0] for r in results), f"{kernel} backends disagree at n={n}"
            times = []
            for m in mods:
                fn = getattr(m, kernel)
                reps = 1 if (m.NAME == "python" and n >= 14 and kernel == "max_weight_matching") else 20
                t = min(timeit.repeat(lambda: fn(n, w), number=reps, repeat=args.repeat)) / reps
                times.append(t * 1e3)
            speed = f"{times[0] / times[-1]:>9.1f}x" if len(times) > 1 else f"{'-':>10}"
            label = "dp" if kernel == "max_weight_matching" else "greedy"
            print(f"{label:<8}{n:>4}" + "".join(f"{t:>16.4f}" for t in times) + speed)


if __name__ == "__main__":
    main()
