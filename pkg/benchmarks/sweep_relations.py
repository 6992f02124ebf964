"""Full relation sweep: every rank <= 3, every r, three values of gamma^2.

    python benchmarks/sweep_relations.py [--max-n 3] [--mode-window 3] [--degree 2]

Prints one line per parameter set (cases, failures, seconds).  This is the
run behind the relation acceptance check; on one core the r >= 2 sets take
many minutes each, so the test suite only runs the sets that fit its budget.
"""

import argparse
import sys
import time
from fractions import Fraction

from wakimoto_fock.algebra import Params
from wakimoto_fock.kernels import IMPLEMENTATION
from wakimoto_fock.relations import run_suite


def sweep_params(max_n):
    for n in range(1, max_n + 1):
        lam = tuple(Fraction(k, 3) for k in range(1, n + 1))
        for r in range(n + 1):
            for g in (Fraction(9, 4), Fraction(0), Fraction(r + 1)):
                yield Params(n, r, g, lam)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-n", type=int, default=3)
    ap.add_argument("--mode-window", type=int, default=3)
    ap.add_argument("--degree", type=int, default=2)
    args = ap.parse_args(argv)

    print(f"engine: {IMPLEMENTATION}")
    start = time.perf_counter()
    bad = 0
    for p in sweep_params(args.max_n):
        t = time.perf_counter()
        rep = run_suite(p, args.mode_window, args.degree)
        bad += rep.failed
        ids = [c.id for c in rep.failures()[:3]]
        print(f"n={p.n} r={p.r} gamma2={p.gamma2}: {rep.passed} passed, {rep.failed} failed, "
              f"{time.perf_counter() - t:.1f}s {ids if ids else ''}".rstrip(), flush=True)
    print(f"total {time.perf_counter() - start:.0f}s")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
