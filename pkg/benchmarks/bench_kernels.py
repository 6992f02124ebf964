"""Compiled vs pure-Python current engine on the hot checks.

    python benchmarks/bench_kernels.py [--repeat 3]

Both engines must produce identical reports; the script exits 1 otherwise.
"""

import argparse
import sys
import time
from fractions import Fraction

from wakimoto_fock.algebra import Params
from wakimoto_fock.kernels import CompiledCurrentEngine
from wakimoto_fock.oscillator import ccr_check
from wakimoto_fock.relations import (
    RelationEngine,
    check_commutators,
    check_serre_all,
    relation_expectations,
    serre_triples,
    window_vectors,
)


def _ccr(p, compiled):
    return ccr_check(p, 3, window_vectors(p.n, 3, 2), compiled=compiled)


def _commutators(p, compiled):
    engine = RelationEngine(p, compiled=compiled)
    return check_commutators(relation_expectations(p, 2), window_vectors(p.n, 2, 2), p, engine=engine)


def _serre(p, compiled):
    engine = RelationEngine(p, compiled=compiled)
    return check_serre_all(serre_triples(p.n, 1), window_vectors(p.n, 2, 2), p, engine=engine)


CASES = [
    ("ccr n=2 r=1 window 3", Params(2, 1, Fraction(9, 4), (1, 2)), _ccr),
    ("commutators n=2 r=1 window 2", Params(2, 1, Fraction(9, 4), (1, 2)), _commutators),
    ("commutators n=3 r=2 window 2", Params(3, 2, Fraction(3), (1, 0, 2)), _commutators),
    ("serre n=2 r=2 window 1", Params(2, 2, Fraction(0), (1, 2)), _serre),
]


def best_of(fn, repeat):
    best, result = None, None
    for _ in range(repeat):
        t = time.perf_counter()
        result = fn()
        dt = time.perf_counter() - t
        best = dt if best is None else min(best, dt)
    return best, result


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if CompiledCurrentEngine is None:
        print("compiled extension not built; nothing to compare", file=sys.stderr)
        return 1

    print(f"{'case':34} {'pure':>9} {'compiled':>9} {'speedup':>8}")
    mismatch = False
    for name, p, fn in CASES:
        t_py, rep_py = best_of(lambda: fn(p, False), args.repeat)
        t_c, rep_c = best_of(lambda: fn(p, True), args.repeat)
        same = rep_py.as_dict() == rep_c.as_dict()
        mismatch |= not same
        print(f"{name:34} {t_py:8.3f}s {t_c:8.3f}s {t_py / t_c:7.1f}x" + ("" if same else "  MISMATCH"))
    return 1 if mismatch else 0


if __name__ == "__main__":
    sys.exit(main())
