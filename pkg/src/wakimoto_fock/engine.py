"""Named plans on top of :class:`~wakimoto_fock.kernels.CurrentEngine`.

Plans are registered under arbitrary hashable names (``("E", 2)`` for a
current, ``("a*", 1, 2)`` for an oscillator).  The compiled engine is used
when available and every coefficient is an integer; a coefficient overflow
during a call reruns that call on the pure-Python engine, which is exact for
arbitrary rationals.
"""

from __future__ import annotations

from typing import Iterable

from .algebra import FockPoly, format_poly
from .kernels import CompiledCurrentEngine, PyCurrentEngine, add_scaled

__all__ = ["PlanEngine", "TestSet"]


class PlanEngine:
    def __init__(self, plans: dict, compiled: bool = True):
        self._names = {}
        self._py = PyCurrentEngine()
        self._fast = None
        for name, words in plans.items():
            self._names[name] = self._py.add_plan(words)
        if compiled and CompiledCurrentEngine is not None:
            fast = CompiledCurrentEngine()
            try:
                for name, words in plans.items():
                    fast.add_plan(words)
                self._fast = fast
            except (TypeError, OverflowError):
                self._fast = None

    @property
    def implementation(self) -> str:
        return "compiled" if self._fast is not None else "python"

    def label(self, name, m) -> tuple:
        return (self._names[name], m)

    def _call(self, method, *args):
        if self._fast is not None:
            try:
                return getattr(self._fast, method)(*args)
            except OverflowError:
                pass
        return getattr(self._py, method)(*args)

    def apply(self, name, m, mono) -> dict:
        return self._call("apply", self._names[name], m, mono)

    def bracket_fails(self, x, y, rhs, central, monos) -> int:
        """``x``, ``y`` and the rhs labels are ``(name, mode)`` pairs."""
        lx, ly = self.label(*x), self.label(*y)
        lr = [(self.label(*lab), c) for lab, c in rhs]
        return self._call("bracket_fails", lx, ly, lr, central, monos)

    def bracket_table(self, checks, monos) -> list:
        """``bracket_fails`` for many ``(x, y, rhs, central)`` checks in one pass."""
        lab = [
            (self.label(*x), self.label(*y), [(self.label(*l), c) for l, c in rhs], central)
            for x, y, rhs, central in checks
        ]
        return self._call("bracket_table", lab, monos)

    def engel_fails(self, x1, x2, y, monos) -> int:
        return self._call("engel_fails", self.label(*x1), self.label(*x2), self.label(*y), monos)

    def bracket_residual(self, x, y, rhs, central, mono) -> dict:
        lr = [(self.label(*lab), c) for lab, c in rhs]
        return self._py.bracket_residual(self.label(*x), self.label(*y), lr, central, mono)

    def engel_residual(self, x1, x2, y, mono) -> dict:
        return self._py.engel(self.label(*x1), self.label(*x2), self.label(*y), mono)

    def clear(self):
        self._py.clear()
        if self._fast is not None:
            self._fast.clear()

    def clear_commutators(self):
        self._py.clear_commutators()
        if self._fast is not None:
            self._fast.clear_commutators()


def _as_poly(v) -> dict:
    if isinstance(v, FockPoly):
        return v.terms
    if isinstance(v, dict):
        return v
    return {tuple(v): 1}


def _plain_monomials(vecs: list):
    """The monomials when every vector is a bare monomial, else None."""
    out = []
    for v in vecs:
        if len(v) != 1:
            return None
        (mono, c), = v.items()
        if c != 1:
            return None
        out.append(mono)
    return out


class TestSet:
    """Test vectors prepared once: raw dict polynomials plus the bare-monomial fast path."""

    def __init__(self, vectors: Iterable):
        self.vecs = [_as_poly(v) for v in vectors]
        self.monos = _plain_monomials(self.vecs)

    def __len__(self):
        return len(self.vecs)


def _prepare(test_set) -> TestSet:
    return test_set if isinstance(test_set, TestSet) else TestSet(test_set)


def _witness(poly: dict) -> str:
    return format_poly(FockPoly._wrap(dict(poly)))


def _first_failure(ts: TestSet, fast, residual) -> int:
    """Index of the first vector with nonzero residual; ``fast`` handles bare monomials."""
    if ts.monos is not None:
        return fast(ts.monos)
    for idx, vec in enumerate(ts.vecs):
        acc: dict = {}
        for mono, c in vec.items():
            add_scaled(acc, residual(mono), c)
        if acc:
            return idx
    return -1
