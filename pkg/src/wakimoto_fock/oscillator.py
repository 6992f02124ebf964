"""Heisenberg oscillators a, a*, b acting on the Fock space.

Mode operators are realized as multiplications and derivations:

* ``a[i,j,m]`` is ``d/dx[i,j,m]`` when ``j <= r`` and ``m >= 0``, otherwise
  multiplication by ``x[i,j,m]``;
* ``a*[i,j,m]`` is multiplication by ``x[i,j,-m]`` when ``j <= r`` and
  ``m <= 0``, otherwise ``-d/dx[i,j,-m]``;
* ``b[i,0]`` is the scalar ``lambda_i``, ``b[i,-m]`` (``m > 0``) multiplies
  by ``y[i,m]`` and ``b[i,m]`` acts as ``m * sum_j B[i][j] d/dy[j,m]``.

The Fock variable ``y[i,m]`` stands for the abstract generator of the
b-oscillator space, so the pairing matrix ``B`` enters only through the
annihilation side and no square roots are ever needed.

A normal-ordered word places every multiplication to the left of every
derivation.  Its mode-``m`` coefficient is a sum over mode splittings; the
fast evaluator enumerates only the splittings that can act nonzero on the
given monomial.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import lcm
from typing import NamedTuple, Sequence

from .algebra import (
    FockPoly,
    Params,
    X,
    Y,
    cartan,
    decode_var,
    format_poly,
    to_rational,
)
from .engine import PlanEngine, TestSet, _first_failure, _witness
from .kernels import add_scaled, add_term, eval_combo, mono_diff, mono_times_vars
from .report import Report

__all__ = [
    "Osc",
    "NormalWord",
    "build_b_matrix",
    "b_matrix_entrywise",
    "b_matrix_blockform",
    "bareiss_det",
    "det_b",
    "det_b_closed",
    "classify",
    "apply_oscillator",
    "apply_normal_word",
    "OscContext",
    "oscillator_context",
    "ccr_expected",
    "ccr_check",
    "window_labels",
    "integer_scale",
    "oscillator_engine",
]

CREATION = "creation"
ANNIHILATION = "annihilation"
SCALAR = "scalar"


class Osc(NamedTuple):
    """One mode operator: ``kind`` is ``"a"``, ``"a*"`` or ``"b"`` (``j`` is 0 for b)."""

    kind: str
    i: int
    j: int
    m: int

    def __str__(self):
        if self.kind == "b":
            return f"b[{self.i},{self.m}]"
        return f"{self.kind}[{self.i},{self.j},{self.m}]"


# --------------------------------------------------------------------------
# The pairing matrix B and its determinant


def b_matrix_entrywise(params: Params) -> tuple:
    n, r, g = params.n, params.r, params.gamma2
    rows = []
    for i in range(1, n + 1):
        row = []
        for j in range(1, n + 1):
            shift = g
            if i > r and j > r:
                shift -= r + 1
            if i == r + 1 and j == r + 1:
                shift += Fraction(r, 2)
            row.append(cartan(i, j) * shift)
        rows.append(tuple(row))
    return tuple(rows)


def b_matrix_blockform(params: Params) -> tuple:
    """``gamma2*A_n - (r+1)*diag(0, A_{n-r}) + r*E_{r+1,r+1}``."""
    n, r, g = params.n, params.r, params.gamma2
    rows = []
    for i in range(1, n + 1):
        row = []
        for j in range(1, n + 1):
            v = g * cartan(i, j)
            if i > r and j > r:
                v -= (r + 1) * cartan(i - r, j - r)
            if i == j == r + 1:
                v += r
            row.append(Fraction(v))
        rows.append(tuple(row))
    return tuple(rows)


@lru_cache(maxsize=256)
def build_b_matrix(params: Params) -> tuple:
    entry = b_matrix_entrywise(params)
    block = b_matrix_blockform(params)
    if entry != block:
        raise AssertionError(f"B matrix forms disagree for {params}: {entry} vs {block}")
    return entry


def bareiss_det(matrix: Sequence[Sequence]) -> Fraction:
    """Exact determinant by fraction-free elimination (entries scaled to integers first)."""
    rows = [[to_rational(v) for v in row] for row in matrix]
    size = len(rows)
    if size == 0:
        return Fraction(1)
    den = 1
    for row in rows:
        for v in row:
            den = den * v.denominator // _gcd(den, v.denominator)
    a = [[int(v * den) for v in row] for row in rows]
    sign = 1
    prev = 1
    for k in range(size - 1):
        if a[k][k] == 0:
            swap = next((s for s in range(k + 1, size) if a[s][k] != 0), None)
            if swap is None:
                return Fraction(0)
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        pivot = a[k][k]
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                a[i][j] = (a[i][j] * pivot - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = pivot
    return Fraction(sign * a[-1][-1], den**size)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def det_b_closed(params: Params) -> Fraction:
    n, r, g = params.n, params.r, params.gamma2
    # 0**0 == 1 covers the r == 0, gamma2 == 0 convention
    return (n + 1) * g**r * (g - r - 1) ** (n - r)


def det_b(params: Params) -> tuple[Fraction, Fraction]:
    """``(closed form, elimination)`` determinants of the B matrix."""
    return Fraction(det_b_closed(params)), bareiss_det(build_b_matrix(params))


# --------------------------------------------------------------------------
# Single mode operators


def classify(op: Osc, r: int) -> str:
    if op.kind == "a":
        return ANNIHILATION if (op.j <= r and op.m >= 0) else CREATION
    if op.kind == "a*":
        return ANNIHILATION if (op.j > r or op.m > 0) else CREATION
    if op.kind == "b":
        if op.m == 0:
            return SCALAR
        return ANNIHILATION if op.m > 0 else CREATION
    raise ValueError(f"unknown oscillator kind {op.kind!r}")


def _check_osc(op: Osc, n: int):
    if op.kind in ("a", "a*"):
        if not 1 <= op.i <= op.j <= n:
            raise IndexError(f"{op} out of bounds for n={n}")
    elif op.kind == "b":
        if not 1 <= op.i <= n:
            raise IndexError(f"{op} out of bounds for n={n}")
    else:
        raise ValueError(f"unknown oscillator kind {op.kind!r}")


class OscContext:
    """Per-parameter data for fast mode-operator evaluation.

    ``scale`` multiplies every rational constant coming from ``lambda`` and the
    B matrix; the word evaluator multiplies whole words by ``scale`` so that
    integer-valued arithmetic can be used when ``scale`` clears denominators.
    """

    def __init__(self, params: Params):
        self.params = params
        self.n = params.n
        self.r = params.r
        self.B = build_b_matrix(params)
        self.lam = params.lam
        # b[i,m>0] pairs with y[k,m] for k in brow[i]
        self.brow = {
            i: tuple((k, self.B[i - 1][k - 1]) for k in range(1, self.n + 1) if self.B[i - 1][k - 1])
            for i in range(1, self.n + 1)
        }

    # elementary action on raw dict polynomials ---------------------------
    def elementary(self, op: Osc):
        """``("mul", code)``, ``("der", [(code, scale), ...])`` or ``("scalar", value)``."""
        kind, i, j, m = op
        r = self.r
        if kind == "a":
            if j <= r and m >= 0:
                return ("der", ((X(i, j, m), 1),))
            return ("mul", X(i, j, m))
        if kind == "a*":
            if j <= r and m <= 0:
                return ("mul", X(i, j, -m))
            return ("der", ((X(i, j, -m), -1),))
        if m == 0:
            return ("scalar", self.lam[i - 1])
        if m < 0:
            return ("mul", Y(i, -m))
        return ("der", tuple((Y(k, m), m * bik) for k, bik in self.brow[i]))

    def apply_raw(self, op: Osc, poly: dict) -> dict:
        how, data = self.elementary(op)
        if how == "mul":
            return {mono_times_vars(mo, (data,)): c for mo, c in poly.items()}
        if how == "scalar":
            return {mo: c * data for mo, c in poly.items()} if data else {}
        acc: dict = {}
        for mo, c in poly.items():
            for code, s in data:
                k, rest = mono_diff(mo, code)
                if k:
                    add_term(acc, rest, c * k * s)
        return acc


@lru_cache(maxsize=256)
def oscillator_context(params: Params) -> OscContext:
    return OscContext(params)


def apply_oscillator(op: Osc, v: FockPoly, params: Params) -> FockPoly:
    _check_osc(op, params.n)
    return FockPoly._wrap(oscillator_context(params).apply_raw(op, v.terms))


# --------------------------------------------------------------------------
# Normal-ordered words


@dataclass(frozen=True)
class NormalWord:
    """Normal-ordered product of oscillator fields ``a``, ``a*`` and ``b``.

    ``factors`` holds ``(kind, i, j)`` triples without modes.  With the field
    conventions ``a(z), b(z) ~ z^{-m-1}`` and ``a*(z) ~ z^{-m}``, the mode-``m``
    coefficient of the word sums over factor modes adding up to
    ``m + 1 - (number of a and b factors)``.  ``derivative`` marks the single
    factor word ``d/dz a*(z)``, whose mode-``m`` coefficient is ``-m a*[m]``.
    """

    factors: tuple
    scalar: Fraction = Fraction(1)
    derivative: bool = False

    def mode_sum(self, m: int) -> int:
        if self.derivative:
            return m
        alpha = sum(1 for f in self.factors if f[0] != "a*")
        return m + 1 - alpha

    def mode_factor(self, m: int):
        return -m if self.derivative else 1

    def __str__(self):
        inner = " ".join(
            f"{k}{i}" if k == "b" else f"{k}{i}{j}" for k, i, j in self.factors
        )
        text = f"d({inner})" if self.derivative else f":{inner}:"
        return text if self.scalar == 1 else f"{self.scalar}*{text}"


def _mul_bound(kind: str, j: int, r: int):
    """Upper bound on modes where the factor multiplies; None means unbounded; False means never."""
    if kind == "a":
        return -1 if j <= r else None
    if kind == "a*":
        return 0 if j <= r else False
    return -1  # b


def _der_modes(ctx: OscContext, kind: str, i: int, j: int, present: dict) -> list:
    """Modes at which the factor differentiates a variable present in the monomial."""
    r = ctx.r
    out = []
    if kind == "a":
        if j <= r:
            for (ki, kj), modes in present.get("x", {}).items():
                if (ki, kj) == (i, j):
                    out.extend(m for m in modes if m >= 0)
    elif kind == "a*":
        modes = present.get("x", {}).get((i, j), ())
        out.extend(-m for m in modes if (j > r or m < 0))
    else:
        ymodes = present.get("y", {})
        found = set()
        for k, _ in ctx.brow[i]:
            found.update(ymodes.get(k, ()))
        out.extend(sorted(found))
    return sorted(set(out))


def _present(mono: tuple) -> dict:
    xs: dict = {}
    ys: dict = {}
    for code in set(mono):
        v = decode_var(code)
        if v.kind == "x":
            xs.setdefault((v.i, v.j), set()).add(v.m)
        else:
            ys.setdefault(v.i, set()).add(v.m)
    return {"x": xs, "y": ys}


def _compositions(total: int, bounds: list):
    """All tuples p with p[t] <= bounds[t] and sum(p) == total (bounds all finite)."""
    k = len(bounds)
    if k == 0:
        if total == 0:
            yield ()
        return
    if k == 1:
        if total <= bounds[0]:
            yield (total,)
        return
    rest_max = sum(bounds[1:])
    lo = total - rest_max
    for p in range(lo, bounds[0] + 1):
        for tail in _compositions(total - p, bounds[1:]):
            yield (p,) + tail


def _apply_ops(ctx: OscContext, ops: list, mono: tuple, coef) -> dict:
    """Apply mode operators right-to-left (last element first) to ``coef * mono``."""
    poly = {mono: coef}
    for op in reversed(ops):
        poly = ctx.apply_raw(op, poly)
        if not poly:
            return poly
    return poly


_BIG = 1 << 40


def _num(q):
    q = Fraction(q)
    return q.numerator if q.denominator == 1 else q


def _der_table(ctx: OscContext, kind: str, i: int, j: int, scale=1) -> dict:
    """Slot table of the factor acting as a derivation (see ``eval_combo``)."""
    r = ctx.r
    if kind == "a":
        if j > r:
            return {}
        return {X(i, j, 0) >> 36: (1, 0, _BIG, 1, False)}
    if kind == "a*":
        qmax = _BIG if j > r else -1
        return {X(i, j, 0) >> 36: (-1, -_BIG, qmax, -1, False)}
    return {Y(k, 1) >> 36: (1, 1, _BIG, _num(bik * scale), True) for k, bik in ctx.brow[i]}


def _mul_spec(kind: str, i: int, j: int, r: int):
    bound = _mul_bound(kind, j, r)
    if bound is False:
        return None
    if kind == "a":
        return (bound, X(i, j, 0), 1)
    if kind == "a*":
        return (bound, X(i, j, 0), -1)
    return (bound, Y(i, 1) - 1, -1)


@lru_cache(maxsize=4096)
def compile_word(params: Params, factors: tuple, scale=1) -> tuple:
    """Role-resolved combos ``(ders, muls, const)`` of ``scale`` times a normal-ordered word.

    Each factor is either a derivation, a multiplication or (``b`` at mode 0)
    the scalar ``lambda_i``; the mode ranges of the roles are disjoint, so the
    word is the sum over role assignments.  ``scale`` is absorbed into the
    b-factor constants when there is one, which keeps integer-scaled words
    integral.
    """
    ctx = oscillator_context(params)
    r = ctx.r
    options = []
    for kind, i, j in factors:
        o = []
        table = _der_table(ctx, kind, i, j, scale)
        if table:
            o.append(("der", table))
        spec = _mul_spec(kind, i, j, r)
        if spec is not None:
            o.append(("mul", spec))
        if kind == "b" and ctx.lam[i - 1]:
            o.append(("scalar", _num(ctx.lam[i - 1] * scale)))
        options.append(o)
    combos = []
    for choice in product(*options):
        ders = tuple(d for how, d in choice if how == "der")
        muls = tuple(d for how, d in choice if how == "mul")
        # a b factor acting as derivation or scalar already carries ``scale``
        absorbed = any(f[0] == "b" and how != "mul" for f, (how, _) in zip(factors, choice))
        const = 1 if absorbed else _num(scale)
        for how, d in choice:
            if how == "scalar":
                const = const * d
        if any(m[0] is None for m in muls) and len(muls) > 1:
            raise AssertionError(f"unbounded multiplication range in word {factors}")
        combos.append((ders, muls, const))
    return tuple(combos)


class WordEvaluator:
    """Evaluates normal-ordered words at a mode on single monomials."""

    def __init__(self, ctx: OscContext):
        self.ctx = ctx

    def roles(self, factors: tuple):
        """Per-factor role options; validates that multiplication ranges stay finite."""
        r = self.ctx.r
        opts = []
        for kind, i, j in factors:
            o = ["der"]
            if _mul_bound(kind, j, r) is not False:
                o.append("mul")
            if kind == "b":
                o.append("scalar")
            opts.append(o)
        return opts

    def splittings(self, factors: tuple, total: int, mono: tuple):
        """Yield factor mode tuples that can contribute on ``mono``."""
        ctx = self.ctx
        r = ctx.r
        present = _present(mono)
        der_opts = [_der_modes(ctx, k, i, j, present) for k, i, j in factors]
        bounds = [_mul_bound(k, j, r) for k, i, j in factors]
        for roles in product(*self.roles(factors)):
            fixed = {}
            free = []
            ok = True
            for t, role in enumerate(roles):
                if role == "der":
                    if not der_opts[t]:
                        ok = False
                        break
                elif role == "scalar":
                    fixed[t] = (0,)
                else:
                    free.append(t)
            if not ok:
                continue
            der_idx = [t for t, role in enumerate(roles) if role == "der"]
            for der_modes in product(*(der_opts[t] for t in der_idx)):
                rem = total - sum(der_modes)
                unbounded = [t for t in free if bounds[t] is None]
                if unbounded and len(free) > 1:
                    raise AssertionError(
                        f"unbounded multiplication range in word {factors}"
                    )
                if unbounded:
                    combos = [(rem,)]
                else:
                    combos = _compositions(rem, [bounds[t] for t in free])
                for combo in combos:
                    modes = [0] * len(factors)
                    for t, p in zip(der_idx, der_modes):
                        modes[t] = p
                    for t in fixed:
                        modes[t] = 0
                    for t, p in zip(free, combo):
                        modes[t] = p
                    yield tuple(modes), roles

    def evaluate(self, factors: tuple, total: int, mono: tuple, coef=1) -> dict:
        """Fast evaluation through the compiled role combos."""
        acc: dict = {}
        for ders, muls, const in compile_word(self.ctx.params, factors):
            eval_combo(ders, muls, total, mono, coef * const, acc)
        return acc

    def evaluate_splittings(self, factors: tuple, total: int, mono: tuple, coef=1) -> dict:
        """Sum over contributing splittings of the normal-ordered composite on ``coef*mono``."""
        ctx = self.ctx
        r = ctx.r
        acc: dict = {}
        for modes, roles in self.splittings(factors, total, mono):
            ops = [Osc(k, i, j, p) for (k, i, j), p in zip(factors, modes)]
            # the role guess must agree with the operator's own classification
            if any(_role_of(op, r) != role for op, role in zip(ops, roles)):
                continue
            ordered = [op for op in ops if classify(op, r) == CREATION]
            ordered += [op for op in ops if classify(op, r) == SCALAR]
            ordered += [op for op in ops if classify(op, r) == ANNIHILATION]
            add_scaled(acc, _apply_ops(ctx, ordered, mono, coef), 1)
        return acc

    def evaluate_box(self, factors: tuple, total: int, mono: tuple, lo: int, hi: int, coef=1) -> dict:
        """Reference evaluation: every splitting with all factor modes in ``[lo, hi]``."""
        ctx = self.ctx
        r = ctx.r
        acc: dict = {}
        k = len(factors)
        for head in product(range(lo, hi + 1), repeat=k - 1):
            last = total - sum(head)
            if not lo <= last <= hi:
                continue
            modes = head + (last,)
            ops = [Osc(kind, i, j, p) for (kind, i, j), p in zip(factors, modes)]
            ordered = [op for op in ops if classify(op, r) == CREATION]
            ordered += [op for op in ops if classify(op, r) == SCALAR]
            ordered += [op for op in ops if classify(op, r) == ANNIHILATION]
            add_scaled(acc, _apply_ops(ctx, ordered, mono, coef), 1)
        return acc

    def widened_box(self, factors: tuple, total: int, mono: tuple, widen) -> tuple:
        """Active box padded by ``widen`` on both sides; ``"double"`` doubles its width."""
        lo, hi = self.active_box(factors, total, mono)
        pad = (hi - lo + 2) // 2 if widen == "double" else widen
        return lo - pad, hi + pad

    def active_box(self, factors: tuple, total: int, mono: tuple) -> tuple:
        """Smallest ``[lo, hi]`` containing every contributing factor mode (and 0, total)."""
        lo = min(0, total)
        hi = max(0, total)
        for modes, _ in self.splittings(factors, total, mono):
            lo = min(lo, *modes)
            hi = max(hi, *modes)
        return lo, hi


def _role_of(op: Osc, r: int) -> str:
    c = classify(op, r)
    return {CREATION: "mul", ANNIHILATION: "der", SCALAR: "scalar"}[c]


@lru_cache(maxsize=256)
def word_evaluator(params: Params) -> WordEvaluator:
    return WordEvaluator(oscillator_context(params))


def apply_normal_word(
    word: NormalWord, target_mode: int, v: FockPoly, params: Params, widen: int | str | None = None
) -> FockPoly:
    """Mode ``target_mode`` coefficient of ``word`` applied to ``v``.

    With ``widen`` set, every splitting inside the derived active box enlarged
    by ``widen`` on both sides (``"double"``: to twice its width) is summed
    explicitly, which must not change the result.
    """
    for f in word.factors:
        _check_osc(Osc(f[0], f[1], f[2], 0), params.n)
    if word.derivative and (len(word.factors) != 1 or word.factors[0][0] != "a*"):
        raise ValueError("derivative words must be a single a* factor")
    if len(word.factors) > 3:
        raise ValueError("words longer than three oscillator factors are not supported")
    ev = word_evaluator(params)
    total = word.mode_sum(target_mode)
    scal = word.scalar * word.mode_factor(target_mode)
    acc: dict = {}
    if not scal:
        return FockPoly.zero()
    for mono, c in v.terms.items():
        if widen is None:
            part = ev.evaluate(word.factors, total, mono, c)
        else:
            lo, hi = ev.widened_box(word.factors, total, mono, widen)
            part = ev.evaluate_box(word.factors, total, mono, lo, hi, c)
        add_scaled(acc, part, scal)
    return FockPoly._wrap(acc)


# --------------------------------------------------------------------------
# Canonical commutation relations


def window_labels(n: int, window: int) -> list[Osc]:
    out = []
    for m in range(-window, window + 1):
        for i in range(1, n + 1):
            for j in range(i, n + 1):
                out.append(Osc("a", i, j, m))
                out.append(Osc("a*", i, j, m))
            out.append(Osc("b", i, 0, m))
    return sorted(out)


def ccr_expected(p: Osc, q: Osc, params: Params) -> Fraction:
    """Scalar value of ``[p, q]``."""
    if p.m + q.m != 0:
        return Fraction(0)
    if p.kind == "a" and q.kind == "a*" and (p.i, p.j) == (q.i, q.j):
        return Fraction(1)
    if p.kind == "a*" and q.kind == "a" and (p.i, p.j) == (q.i, q.j):
        return Fraction(-1)
    if p.kind == "b" and q.kind == "b":
        return p.m * build_b_matrix(params)[p.i - 1][q.i - 1]
    return Fraction(0)


def integer_scale(params: Params) -> int:
    """Least common denominator of ``gamma2``, ``lambda`` and ``1/2``.

    Scaling every operator by it makes all coefficients of the action integral.
    """
    d = lcm(2, params.gamma2.denominator)
    for v in params.lam:
        d = lcm(d, v.denominator)
    return d


def oscillator_engine(params: Params, compiled: bool = True) -> tuple[PlanEngine, int]:
    """Plan engine with one single-factor plan per oscillator, scaled by ``integer_scale``.

    Plan names are ``(kind, i, j)``; the engine mode is the oscillator mode.
    """
    D = integer_scale(params)
    plans = {}
    for i in range(1, params.n + 1):
        for j in range(i, params.n + 1):
            for kind in ("a", "a*"):
                plans[(kind, i, j)] = [(0, False, compile_word(params, ((kind, i, j),), D))]
        plans[("b", i, 0)] = [(0, False, compile_word(params, (("b", i, 0),), D))]
    return PlanEngine(plans, compiled=compiled), D


def ccr_check(
    params: Params,
    mode_window: int,
    test_set: Sequence,
    suite: str = "ccr",
    compiled: bool = True,
) -> Report:
    """Check ``[p, q] = expected`` on every test vector for all window label pairs."""
    engine, D = oscillator_engine(params, compiled=compiled)
    labels = window_labels(params.n, mode_window)
    report = Report(suite, params)
    ts = test_set if isinstance(test_set, TestSet) else TestSet(test_set)
    pairs = [(p, q) for a_idx, p in enumerate(labels) for q in labels[a_idx:]]
    checks = [
        (((p.kind, p.i, p.j), p.m), ((q.kind, q.i, q.j), q.m), [], _num(ccr_expected(p, q, params) * D * D))
        for p, q in pairs
    ]
    if ts.monos is not None:
        firsts = engine.bracket_table(checks, ts.monos)
    else:
        firsts = [
            _first_failure(ts, None, lambda mono: engine.bracket_residual(x, y, rhs, c, mono))
            for x, y, rhs, c in checks
        ]
    for (p, q), idx in zip(pairs, firsts):
        report.add(f"[{p},{q}]", idx < 0, _witness(ts.vecs[idx]) if idx >= 0 else None)
    return report
