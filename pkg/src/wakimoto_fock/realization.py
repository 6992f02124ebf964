"""The intermediate Wakimoto realization of affine sl(n+1) on the Fock space.

Each current ``E_i(z)``, ``F_i(z)``, ``H_i(z)`` is a fixed combination of
normal-ordered oscillator words; its mode ``m`` acts on a polynomial through
:class:`~wakimoto_fock.oscillator.WordEvaluator`.  The central element acts by
the level ``gamma2 - (r + 1)``.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

from .algebra import FockPoly, Params, Weight, root_offset
from .engine import PlanEngine
from .kernels import add_scaled
from .oscillator import NormalWord, WordEvaluator, compile_word, integer_scale, oscillator_context

__all__ = [
    "Current",
    "E",
    "F",
    "H",
    "C",
    "current_plan",
    "apply_current",
    "vacuum_eigenvalues",
    "current_weight",
    "Realization",
    "realization",
    "integer_scale",
]


class Current(NamedTuple):
    kind: str  # "E", "F", "H" or "C"
    i: int = 0
    m: int = 0

    def __str__(self):
        return "c" if self.kind == "C" else f"{self.kind}[{self.i},{self.m}]"


def E(i, m):
    return Current("E", i, m)


def F(i, m):
    return Current("F", i, m)


def H(i, m):
    return Current("H", i, m)


C = Current("C")


def _w(*factors, scalar=1, derivative=False):
    return NormalWord(tuple(factors), Fraction(scalar), derivative)


def _plan_F(i, n):
    words = [_w(("a", i, i))]
    words += [_w(("a", i, j), ("a*", i + 1, j)) for j in range(i + 1, n + 1)]
    return tuple(words)


def _plan_H(i, n):
    words = [_w(("a", i, i), ("a*", i, i), scalar=2)]
    for j in range(1, i):
        words.append(_w(("a", j, i), ("a*", j, i)))
        words.append(_w(("a", j, i - 1), ("a*", j, i - 1), scalar=-1))
    for j in range(i + 1, n + 1):
        words.append(_w(("a", i, j), ("a*", i, j)))
        words.append(_w(("a", i + 1, j), ("a*", i + 1, j), scalar=-1))
    words.append(_w(("b", i, 0)))
    return tuple(words)


def _plan_E(i, params):
    n, r = params.n, params.r
    words = []
    for k in range(1, i):
        words.append(_w(("a*", i, i), ("a", k, i - 1), ("a*", k, i - 1)))
    for k in range(1, i + 1):
        words.append(_w(("a*", i, i), ("a", k, i), ("a*", k, i), scalar=-1))
    for k in range(i + 1, n + 1):
        words.append(_w(("a", i + 1, k), ("a*", i, k)))
    for k in range(1, i):
        words.append(_w(("a", k, i - 1), ("a*", k, i), scalar=-1))
    words.append(_w(("a*", i, i), ("b", i, 0), scalar=-1))
    shift = (r + 1 if i > r else i + 1) - params.gamma2
    if shift:
        words.append(_w(("a*", i, i), scalar=-shift, derivative=True))
    return tuple(words)


@lru_cache(maxsize=1024)
def current_plan(label: Current, params: Params) -> tuple:
    """Word list transcribing the realization formula for ``label`` (modes excluded)."""
    if label.kind == "C":
        return ()
    if not 1 <= label.i <= params.n:
        raise IndexError(f"{label} out of bounds for n={params.n}")
    if label.kind == "F":
        return _plan_F(label.i, params.n)
    if label.kind == "H":
        return _plan_H(label.i, params.n)
    if label.kind == "E":
        return _plan_E(label.i, params)
    raise ValueError(f"unknown current kind {label.kind!r}")


def current_weight(label: Current, n: int) -> Weight:
    if label.kind == "E":
        return Weight(root_offset(label.i, label.i, n, 1), label.m)
    if label.kind == "F":
        return Weight(root_offset(label.i, label.i, n, -1), label.m)
    return Weight((0,) * n, label.m if label.kind == "H" else 0)


class Realization:
    """Cached mode action of the realized currents for one parameter set.

    With ``scale`` given, every current acts as ``scale * rho(X_m)``.  Choosing
    ``scale`` as a common denominator of ``gamma2``, ``lambda`` and ``1/2``
    keeps all coefficients integral.
    """

    def __init__(self, params: Params, scale=1, compiled: bool = True):
        self.params = params
        self.scale = scale
        self.ctx = oscillator_context(params)
        self.evaluator = WordEvaluator(self.ctx)
        self.level = params.level
        self._words = {
            (kind, i): current_plan(Current(kind, i, 0), params)
            for kind in "EFH"
            for i in range(1, params.n + 1)
        }
        self.engine = PlanEngine(
            {name: [self._engine_word(w) for w in words] for name, words in self._words.items()},
            compiled=compiled,
        )

    def _coef(self, q):
        v = Fraction(q) * self.scale
        return v.numerator if v.denominator == 1 else v

    def _engine_word(self, w: NormalWord):
        offset = w.mode_sum(0)
        return (offset, w.derivative, compile_word(self.params, w.factors, self._coef(w.scalar)))

    def words(self, label: Current) -> tuple:
        return self._words[(label.kind, label.i)]

    def apply_mono(self, label: Current, mono: tuple) -> dict:
        """``scale * rho(label)`` applied to one monomial (memoized by the engine)."""
        if label.kind == "C":
            c = self._coef(self.level)
            return {mono: c} if c else {}
        return self.engine.apply((label.kind, label.i), label.m, mono)

    def apply_raw(self, label: Current, poly: dict) -> dict:
        acc: dict = {}
        for mono, c in poly.items():
            part = self.apply_mono(label, mono)
            if part:
                add_scaled(acc, part, c)
        return acc

    def apply(self, label: Current, v: FockPoly) -> FockPoly:
        """``rho(label) v`` (the scale is divided back out)."""
        raw = self.apply_raw(label, v.terms)
        if self.scale != 1:
            s = self.scale
            raw = {mono: _num(Fraction(c) / s) for mono, c in raw.items()}
        return FockPoly._wrap(raw)

    def apply_widened(self, label: Current, v: FockPoly, widen) -> FockPoly:
        """``rho(label) v`` with every internal mode sum taken over the active box widened by ``widen``.

        ``widen="double"`` pads the box to twice its width.
        """
        if label.kind == "C":
            return v * self.level
        acc: dict = {}
        ev = self.evaluator
        m = label.m
        for mono, c in v.terms.items():
            for word in self.words(label):
                k = word.scalar * word.mode_factor(m)
                if not k:
                    continue
                total = word.mode_sum(m)
                lo, hi = ev.widened_box(word.factors, total, mono, widen)
                part = ev.evaluate_box(word.factors, total, mono, lo, hi, c)
                add_scaled(acc, part, k)
        return FockPoly._wrap(acc)

    def clear_cache(self):
        self.engine.clear()


def _num(q):
    return q.numerator if q.denominator == 1 else q


@lru_cache(maxsize=64)
def realization(params: Params) -> Realization:
    return Realization(params, scale=integer_scale(params))


def _check_label(label: Current, params: Params):
    if label.kind != "C" and not 1 <= label.i <= params.n:
        raise IndexError(f"{label} out of bounds for n={params.n}")


def apply_current(label: Current, v: FockPoly, params: Params) -> FockPoly:
    _check_label(label, params)
    return realization(params).apply(label, v)


def vacuum_eigenvalues(params: Params) -> tuple[tuple, Fraction]:
    """``(lambda_1..lambda_n, level)``, each asserted by acting on the vacuum."""
    vac = FockPoly.vacuum()
    rz = realization(params)
    for i in range(1, params.n + 1):
        got = rz.apply(H(i, 0), vac)
        if got != vac * params.lam[i - 1]:
            raise AssertionError(f"H[{i},0] vacuum = {got}, expected {params.lam[i - 1]}")
    got = rz.apply(C, vac)
    if got != vac * params.level:
        raise AssertionError(f"c vacuum = {got}, expected {params.level}")
    return tuple(params.lam), params.level
