"""Exact sparse row reduction over the rationals.

Vectors are dicts mapping sortable keys to Fractions (zero entries absent).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

__all__ = ["Echelon", "relations", "span_contains"]


def _axpy(acc: dict, v: dict, c) -> None:
    for k, x in v.items():
        y = acc.get(k, 0) + c * x
        if y:
            acc[k] = y
        else:
            acc.pop(k, None)


class Echelon:
    """Incrementally built echelon basis; pivots are the smallest keys."""

    def __init__(self):
        self.rows: dict = {}  # pivot -> row with row[pivot] == 1
        self.tags: dict = {}  # pivot -> combination of inserted vectors

    def __len__(self):
        return len(self.rows)

    def reduce(self, v: dict, tag: dict | None = None) -> tuple[dict, dict]:
        """Remainder of ``v`` modulo the basis (and the matching tag combination)."""
        v = {k: Fraction(x) for k, x in v.items() if x}
        tag = dict(tag or {})
        while True:
            hits = [k for k in v if k in self.rows]
            if not hits:
                return v, tag
            p = min(hits)
            c = v[p]
            _axpy(v, self.rows[p], -c)
            _axpy(tag, self.tags[p], -c)

    def add(self, v: dict, tag: dict | None = None) -> dict | None:
        """Insert ``v``; returns None if independent, else the tag relation it closes."""
        rem, tag = self.reduce(v, tag)
        if not rem:
            return tag
        p = min(rem)
        c = rem[p]
        row = {k: x / c for k, x in rem.items()}
        rtag = {k: x / c for k, x in tag.items()}
        # keep the basis fully reduced on pivots
        for q, other in self.rows.items():
            d = other.get(p)
            if d:
                _axpy(other, row, -d)
                _axpy(self.tags[q], rtag, -d)
        self.rows[p] = row
        self.tags[p] = rtag
        return None

    def contains(self, v: dict) -> bool:
        return not self.reduce(v)[0]


def relations(vectors: Sequence[dict]) -> list[dict]:
    """Basis of linear relations ``{k: c_k}`` with ``sum c_k vectors[k] = 0``."""
    ech = Echelon()
    out = []
    for k, v in enumerate(vectors):
        rel = ech.add(v, {k: Fraction(1)})
        if rel is not None:
            out.append(rel)
    return out


def span_contains(basis: Iterable[dict], vectors: Iterable[dict]) -> bool:
    ech = Echelon()
    for b in basis:
        ech.add(b)
    return all(ech.contains(v) for v in vectors)
