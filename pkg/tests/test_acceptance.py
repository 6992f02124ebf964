"""Acceptance criteria, one test per criterion (plus companions where a criterion fails).

Each test appends one ``PASS``/``FAIL`` line to the acceptance summary printed
at the end of the run.  Criteria that cannot pass as stated are marked
``xfail(strict=True, raises=CriterionFailed)``: a correctness error of any
other kind still fails the suite, and an unexpected pass is reported too.
"""

import random
import time
from fractions import Fraction

import pytest

from conftest import ACCEPTANCE
from wakimoto_fock.algebra import FockPoly, Params
from wakimoto_fock.oscillator import NormalWord, apply_normal_word, build_b_matrix, ccr_check, det_b
from wakimoto_fock.relations import (
    check_f_root_bracket,
    check_highest_weight,
    check_window_stability,
    run_suite,
    window_monomials,
    window_vectors,
)
from wakimoto_fock.sl2 import (
    BernardFelder,
    FirstFreeField,
    JakobsenKac,
    SecondFreeField,
    Sl2Gen,
    second_vs_engine,
    singular_space_kernel,
    singularity_check,
    sl2_relation_check,
    sl2_test_vectors,
    v0_act,
    wilson_vector,
)
from wakimoto_fock.linalg import span_contains
from wakimoto_fock.structure import character_compare, generation_check


class CriterionFailed(AssertionError):
    pass


def record(cid, ok, detail=""):
    line = f"{'PASS' if ok else 'FAIL'} {cid}" + (f": {detail}" if detail else "")
    ACCEPTANCE.append(line)
    print(line)
    return ok


def verdict(cid, ok, detail=""):
    record(cid, ok, detail)
    if not ok:
        raise CriterionFailed(f"{cid}: {detail}")


def lam(n):
    return tuple(Fraction(k, 3) for k in range(1, n + 1))


def gamma_values(r):
    rng = random.Random(1000 + r)
    vals = [Fraction(0), Fraction(r + 1)]
    while len(vals) < 20:
        q = Fraction(rng.randint(-40, 40), rng.randint(1, 9))
        if q not in vals:
            vals.append(q)
    return vals


# --------------------------------------------------------------------------
# 1. determinant formula


def _det_sweep():
    mismatches, locus = [], []
    for n in range(1, 6):
        for r in range(n + 1):
            for g in gamma_values(r):
                closed, elim = det_b(Params(n, r, g))
                if closed != elim:
                    mismatches.append((n, r, g))
                if (elim == 0) != (g in (0, r + 1)):
                    locus.append((n, r, g))
    return mismatches, locus


@pytest.mark.xfail(strict=True, raises=CriterionFailed, reason="gamma2=0 at r=0 and gamma2=r+1 at r=n are not degenerate")
def test_c1_determinant():
    t = time.perf_counter()
    mismatches, locus = _det_sweep()
    dt = time.perf_counter() - t
    assert not mismatches, mismatches[:3]
    detail = f"closed == eliminated on 300 matrices in {dt:.2f}s; "
    detail += f"{len(locus)} exceptions to the locus {{0, r+1}}: {[(n, r, str(g)) for n, r, g in locus]}"
    verdict("C1 determinant formula and degeneracy locus", not locus and dt < 1, detail)


def test_c1_qualified_locus():
    mismatches, locus = _det_sweep()
    expected = sorted(
        [(n, 0, Fraction(0)) for n in range(1, 6)] + [(n, n, Fraction(n + 1)) for n in range(1, 6)]
    )
    ok = not mismatches and sorted(locus) == expected
    record("C1' degeneracy locus with the 0^0 = 1 edge cases (r=0, gamma2=0 and r=n, gamma2=n+1)", ok)
    assert ok


# --------------------------------------------------------------------------
# 2. B example


def test_c2_b_example():
    B = build_b_matrix(Params(2, 1, 0))
    ok = B == ((0, 0), (0, -3))
    verdict("C2 B matrix example n=2 r=1 gamma2=0", ok, str([[str(q) for q in row] for row in B]))


# --------------------------------------------------------------------------
# 3. oscillator CCR


def test_c3_ccr():
    t = time.perf_counter()
    cases = failed = 0
    for n in (1, 2, 3):
        ts = window_vectors(n, 4, 2)
        for r in range(n + 1):
            rep = ccr_check(Params(n, r, Fraction(9, 4), lam(n)), 4, ts)
            cases += len(rep.cases)
            failed += rep.failed
    dt = time.perf_counter() - t
    ok = failed == 0 and dt < 30
    verdict("C3 oscillator CCR |mode|<=4 degree<=2 n<=3", ok, f"{cases} label pairs, {failed} failed, {dt:.1f}s")


# --------------------------------------------------------------------------
# 4. defining relations


C4_BUDGET = 180.0
# rough single-core seconds per parameter set, used to run the cheap sets first
C4_COST = {(1, 0): 0.1, (1, 1): 0.1, (2, 0): 2, (2, 1): 5, (3, 0): 30, (3, 1): 35, (2, 2): 150,
           (3, 2): 800, (3, 3): 1500}


def c4_params():
    out = []
    for n in (1, 2, 3):
        for r in range(n + 1):
            for g in (Fraction(9, 4), Fraction(0), Fraction(r + 1)):
                out.append(Params(n, r, g, lam(n)))
    return sorted(out, key=lambda p: C4_COST[(p.n, p.r)])


@pytest.mark.xfail(strict=True, raises=CriterionFailed, reason="the full sweep takes far longer than 3 minutes")
def test_c4_relations():
    start = time.perf_counter()
    done, cases = [], 0
    todo = c4_params()
    for p in todo:
        if time.perf_counter() - start + C4_COST[(p.n, p.r)] > C4_BUDGET:
            break
        rep = run_suite(p, 3, 2)
        # completed parameter sets must be exact
        assert rep.ok, (p, [c.id for c in rep.failures()[:3]])
        done.append(p)
        cases += len(rep.cases)
    dt = time.perf_counter() - start
    skipped = [(p.n, p.r, str(p.gamma2)) for p in todo[len(done):]]
    detail = f"{len(done)}/{len(todo)} parameter sets exact ({cases} cases) in {dt:.0f}s; over budget: {skipped}"
    verdict("C4 relations R1-R6 n<=3 all r, 3 gamma2 values, in < 3 min", len(done) == len(todo), detail)


# --------------------------------------------------------------------------
# 5. highest weight


def _hw(borel):
    failures = []
    for n in (1, 2, 3):
        for r in range(n + 1):
            p = Params(n, r, Fraction(9, 4), lam(n))
            rep = check_highest_weight(p, 4, borel=borel)
            failures += [(n, r, c.id) for c in rep.failures()]
    return failures


@pytest.mark.xfail(strict=True, raises=CriterionFailed, reason="E_{i,0} (i <= r) does not kill the vacuum")
def test_c5_highest_weight():
    failures = _hw("inducing")
    verdict("C5 highest weight (inducing Borel) n<=3 window 4", not failures,
            f"{len(failures)} failures, e.g. {failures[:4]}")


def test_c5_realized_borel():
    failures = _hw("realized")
    record("C5' highest weight (Borel with n-_r at mode 0, n+_r at modes >= 1) n<=3 window 4", not failures)
    assert not failures


# --------------------------------------------------------------------------
# 6. root-bracket identity


def test_c6_root_bracket():
    failed = total = 0
    for n in (2, 3):
        vecs = window_vectors(n, 2, 2)
        for r in range(n + 1):
            p = Params(n, r, Fraction(9, 4), lam(n))
            for i in range(2, n + 1):
                for j in range(1, i):
                    for M in range(-2, 3):
                        rep = check_f_root_bracket(i, j, M, vecs, p)
                        failed += rep.failed
                        total += len(rep.cases)
    verdict("C6 root-bracket identity n<=3 |M|<=2", failed == 0, f"{total} cases, {failed} failed")


# --------------------------------------------------------------------------
# 7. character / generator bijection


def _census(borel):
    bad = []
    for n in (1, 2, 3):
        for r in range(n + 1):
            for w in range(1, 5):
                rep = character_compare(Params(n, r), w, w, borel=borel)
                if not rep.ok:
                    bad.append((n, r, w))
    return bad


@pytest.mark.xfail(strict=True, raises=CriterionFailed, reason="mode-0 root directions of the r-part differ")
def test_c7_character():
    bad = _census("inducing")
    verdict("C7 complement census = Fock census n<=3 windows<=4", not bad, f"{len(bad)} of 36 differ, e.g. {bad[:4]}")


def test_c7_realized_borel():
    bad = _census("realized")
    record("C7' census with the Borel that kills the vacuum, n<=3 windows<=4", not bad)
    assert not bad


# --------------------------------------------------------------------------
# 8. generation


def test_c8_generation():
    t = time.perf_counter()
    reached = failed = 0
    for n, r in ((2, 0), (2, 1), (3, 1)):
        rep = generation_check(Params(n, r, Fraction(9, 4), lam(n)), 3, 2)
        reached += rep.passed
        failed += rep.failed
    dt = time.perf_counter() - t
    verdict("C8 generation witnesses (2,0),(2,1),(3,1) degree<=2", failed == 0 and dt < 60,
            f"{reached} monomials reached, {failed} failed, {dt:.1f}s")


# --------------------------------------------------------------------------
# 9. Wilson vectors


def _shift_tuples(r):
    if r == 0:
        return [()]
    return [t + (s,) for t in _shift_tuples(r - 1) for s in range(-2, 3)]


def _wilson_checks(e_window, kernel_windows):
    problems = []
    h_failures = 0
    for r in (1, 2, 3):
        for s in _shift_tuples(r):
            v = wilson_vector(r, s)
            if len(set(s)) < r:
                if v:
                    problems.append(("vanishing", s))
                continue
            if any(v0_act(("e", i), v) for i in range(-e_window, e_window + 1)):
                problems.append(("e", s))
            for a in range(r):
                for b in range(a + 1, r):
                    t = list(s)
                    t[a], t[b] = t[b], t[a]
                    if wilson_vector(r, t) != {k: -c for k, c in v.items()}:
                        problems.append(("antisymmetry", s))
            if r >= 2 and not singularity_check(v, min(e_window, 4))[1]:
                h_failures += 1
    for w in kernel_windows:
        for N in range(-2 * w, 2 * w + 1):
            kernel = singular_space_kernel((2, N), w)
            span = [u for u in (wilson_vector(2, (a, N - 1 - a)) for a in range(-w - 2, w + 3)) if u]
            if not span_contains(span, kernel):
                problems.append(("kernel", w, N))
    return problems, h_failures


def test_c9_wilson():
    problems, h_failures = _wilson_checks(6, (2, 3, 4))
    note = f"INFO C9 h_j-annihilation of Wilson vectors, r>=2: {h_failures} vectors with h_j v != 0 (not required)"
    ACCEPTANCE.append(note)
    print(note)
    verdict("C9 Wilson vectors: e-singularity |i|<=6, antisymmetry, vanishing, r=2 kernels", not problems,
            f"{len(problems)} problems {problems[:3]}")


# --------------------------------------------------------------------------
# 10. sl(2) realizations


SL2_REALIZATIONS = [FirstFreeField(), JakobsenKac({0: 5}), BernardFelder(2, 1), SecondFreeField(1)]


def _sl2(window, gen_window=None):
    bad = []
    for real in SL2_REALIZATIONS:
        rep = sl2_relation_check(real, gen_window or window, sl2_test_vectors(window, 2, real.has_y))
        if not rep.ok:
            bad.append((real.name, rep.failures()[0].id))
    if not second_vs_engine(1, gen_window or window, sl2_test_vectors(window, 2, True)).ok:
        bad.append(("second-vs-engine",))
    return bad


def test_c10_sl2_realizations():
    bad = _sl2(2)
    jk_h0 = JakobsenKac({0: 5}).apply(Sl2Gen("h", 0), FockPoly.vacuum())
    if jk_h0 != FockPoly.vacuum() * -5:
        bad.append(("jk h0",))
    verdict("C10 sl2 realizations (first c=0, JK c=0, BF c=K, second c=K) and engine cross-check", not bad, str(bad))


# --------------------------------------------------------------------------
# 11. window stability


def test_c11_window_doubling():
    bad = []
    # internal summation boxes doubled for every current (criteria 4-6, 8)
    for n in (1, 2, 3):
        monos = window_monomials(n, 3, 1) + window_monomials(n, 3, 2)[:: 12]
        for r in range(n + 1):
            p = Params(n, r, Fraction(9, 4), lam(n))
            if not check_window_stability(p, 3, monos, widen="double").ok:
                bad.append(("currents", n, r))
    # normal-ordered words of the oscillator examples (criterion 3)
    p11 = Params(1, 1)
    w = NormalWord((("a", 1, 1), ("a*", 1, 1)))
    for m in range(-4, 5):
        for v in window_vectors(1, 2, 2):
            if apply_normal_word(w, m, v, p11) != apply_normal_word(w, m, v, p11, widen="double"):
                bad.append(("word", m))
                break
    # windowed checks repeated at twice the window (criteria 7, 9, 10)
    for n in (1, 2, 3):
        for r in range(n + 1):
            if not character_compare(Params(n, r), 8, 4, borel="realized").ok:
                bad.append(("census", n, r))
    problems, _ = _wilson_checks(12, (8,))
    if problems:
        bad.append(("wilson", problems[:2]))
    if _sl2(2, gen_window=4):
        bad.append(("sl2",))
    verdict("C11 doubling internal windows changes no output", not bad, str(bad))
