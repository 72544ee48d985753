"""Compare the compiled and pure-Python grid kernels.

    python3 benchmarks/bench_kernels.py [--number N] [--episodes N]

Kernel timings call both implementations directly on the same inputs. The
end-to-end timing generates levels and plays episodes in a subprocess per
backend (``GRAVERAVE_PURE=1`` forces the Python path).
"""

from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import timeit

from graverave import _pykernels

try:
    from graverave import _ckernels
except ImportError:
    _ckernels = None

W = H = 15
END_TO_END = """
import time
from graverave import kernels
from graverave.levelgen import generate, random_params
from graverave.metrics import play_episode
from graverave.rng import SplitMix64
rng = SplitMix64(1)
t = time.perf_counter()
for k in range({n}):
    play_episode(generate(random_params(rng)), ("r01", "r02", "r03", "r04")[k % 4])
print(kernels.BACKEND, (time.perf_counter() - t) / {n})
"""


def inputs(seed: int = 0):
    rng = random.Random(seed)
    grid = bytes(1 if rng.random() < 0.3 else 0 for _ in range(W * H))
    mask = bytes(t == 0 for t in grid)
    costs = bytes(0 if t else rng.choice((1, 1, 1, 4)) for t in grid)
    return grid, mask, costs


def kernel_cases(impl, grid, mask, costs):
    return {
        "refine (3 runs, depth 2)": lambda: impl.refine(grid, W, H, 3, 4, 2, 1),
        "is_connected": lambda: impl.is_connected(grid, W, H, 1),
        "bfs_distances": lambda: impl.bfs_distances(mask, W, H, 112),
        "weighted_distances": lambda: impl.weighted_distances(costs, W, H, 112),
    }


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--number", type=int, default=2000, help="calls per kernel timing")
    ap.add_argument("--episodes", type=int, default=200, help="episodes per end-to-end timing")
    args = ap.parse_args(argv)

    grid, mask, costs = inputs()
    impls = {"python": _pykernels}
    if _ckernels is not None:
        impls["cython"] = _ckernels
    else:
        print("compiled extension not built; timing the Python kernels only")

    print(f"{'kernel':<26}" + "".join(f"{name + ' (us)':>14}" for name in impls) + f"{'speed-up':>10}")
    for label in kernel_cases(_pykernels, grid, mask, costs):
        times = {}
        for name, impl in impls.items():
            fn = kernel_cases(impl, grid, mask, costs)[label]
            times[name] = min(timeit.repeat(fn, number=args.number, repeat=3)) / args.number * 1e6
        ratio = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{label:<26}" + "".join(f"{t:>14.1f}" for t in times.values()) + f"{ratio:>9.1f}x")

    print(f"\nend to end: generate + play, mean over {args.episodes} episodes")
    for pure in ("1", "0"):
        env = dict(os.environ, GRAVERAVE_PURE=pure)
        out = subprocess.run([sys.executable, "-c", END_TO_END.format(n=args.episodes)],
                             env=env, capture_output=True, text=True, check=True).stdout.split()
        print(f"  {out[0]:<8} {float(out[1]) * 1e3:8.2f} ms/episode")
    return 0


if __name__ == "__main__":
    sys.exit(main())
