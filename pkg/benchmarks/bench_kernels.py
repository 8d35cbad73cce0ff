"""Compare the compiled and pure-Python relaxation kernels on generated instances.

    python benchmarks/bench_kernels.py [--lengths 2 4 6] [--repeat 20]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from worksworld import kernels
from worksworld.benchgen import gen_complex
from worksworld.grounding import ground, prune
from worksworld.heuristics import RelaxedTask


def bench(task: RelaxedTask, state, repeat: int) -> tuple[float, tuple]:
    start = time.perf_counter()
    for _ in range(repeat):
        out = task.explore(state)
    return (time.perf_counter() - start) / repeat, out


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--lengths", type=int, nargs="+", default=[2, 4, 6])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    backends = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])
    print(f"{'instance':<20} {'ops':>8} " + " ".join(f"{b + '_ms':>10}" for b in backends) + "  equal")
    for n in args.lengths:
        problem = prune(ground(gen_complex(n, seed=args.seed))).problem
        results = {}
        for b in backends:
            task = RelaxedTask(problem, b)
            results[b] = bench(task, problem.init, args.repeat)
        ref = results["python"][1]
        equal = all(np.array_equal(np.asarray(r[1][0]), np.asarray(ref[0])) for r in results.values())
        times = " ".join(f"{results[b][0] * 1e3:>10.3f}" for b in backends)
        print(f"{problem.instance.name:<20} {task.n_ops:>8} {times}  {equal}")


if __name__ == "__main__":
    main()
