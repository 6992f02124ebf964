"""Structure at desk scale: generator census, constructive generation, submodule probe.

The Verma type module is free over the complement of the Borel subalgebra, so
its character is determined by the weights of the complement generators; the
Fock space is a polynomial ring, so its character is determined by the
weights of its variables.  Both censuses are computed on a mode window.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from math import comb
from itertools import product
from typing import NamedTuple

from .algebra import (
    FockPoly,
    Params,
    Weight,
    X,
    Y,
    decode_var,
    format_monomial,
    format_poly,
    iter_monomials,
    monomial,
    root_offset,
    weight_of,
    var_weight,
)
from .linalg import Echelon
from .realization import Current, E, F, H, realization
from .relations import _iterated_f
from .report import Report

__all__ = [
    "ComplementGenerator",
    "complement_generators",
    "complement_census",
    "fock_variables",
    "fock_variable_census",
    "monomial_census",
    "character_compare",
    "WitnessProgram",
    "generation_witness",
    "generation_check",
    "in_wa",
    "submodule_probe",
]

BORELS = ("inducing", "realized")


class ComplementGenerator(NamedTuple):
    kind: str  # NegRootFull, PosRootNeg, NegRootNonpos, CartanNeg (and the realized variants)
    i: int
    j: int
    m: int

    def weight(self, n: int) -> Weight:
        if self.kind == "CartanNeg":
            return Weight((0,) * n, self.m)
        sign = 1 if self.kind.startswith("Pos") else -1
        return Weight(root_offset(self.i, self.j, n, sign), self.m)


def complement_generators(params: Params, mode_window: int, borel: str = "inducing") -> list:
    """Loop generators spanning a complement of the Borel subalgebra, ``|m| <= mode_window``.

    ``borel="inducing"`` complements ``L(n+(r)) + n+_r[t] + (n-_r + H) t[t]``.
    ``borel="realized"`` swaps the finite part at mode 0, complementing
    ``L(n+(r)) + n-_r[t] + (n+_r + H) t[t]``, which is the subalgebra that
    actually kills the Fock vacuum.
    """
    if borel not in BORELS:
        raise ValueError(f"borel must be one of {BORELS}")
    n, r = params.n, params.r
    w = mode_window
    out = []
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            for m in range(-w, w + 1):
                if j > r:
                    out.append(ComplementGenerator("NegRootFull", i, j, m))
                elif borel == "inducing":
                    if m < 0:
                        out.append(ComplementGenerator("PosRootNeg", i, j, m))
                    if m <= 0:
                        out.append(ComplementGenerator("NegRootNonpos", i, j, m))
                else:
                    if m <= 0:
                        out.append(ComplementGenerator("PosRootNonpos", i, j, m))
                    if m < 0:
                        out.append(ComplementGenerator("NegRootNeg", i, j, m))
        for m in range(-w, 0):
            out.append(ComplementGenerator("CartanNeg", i, 0, m))
    return out


def complement_census(params: Params, mode_window: int, borel: str = "inducing") -> Counter:
    return Counter(g.weight(params.n) for g in complement_generators(params, mode_window, borel))


def fock_variables(params: Params, mode_window: int) -> list:
    n, w = params.n, mode_window
    vs = [X(i, j, m) for i in range(1, n + 1) for j in range(i, n + 1) for m in range(-w, w + 1)]
    vs += [Y(i, m) for i in range(1, n + 1) for m in range(1, w + 1)]
    return vs


def fock_variable_census(params: Params, mode_window: int) -> Counter:
    return Counter(var_weight(v, params) for v in fock_variables(params, mode_window))


def monomial_census(census: Counter, n: int, degree_bound: int, delta_bound: int) -> Counter:
    """Weights of monomials of degree <= degree_bound in generators with the given weight multiset.

    Only monomials with ``|delta| <= delta_bound`` are counted; generators of
    equal weight are interchangeable, so each weight class contributes a
    binomial factor.
    """
    zero = Weight((0,) * n, 0)
    states = Counter({(0, zero): 1})
    for wt, mult in sorted(census.items()):
        nxt: Counter = Counter()
        for (deg, acc), cnt in states.items():
            for k in range(degree_bound - deg + 1):
                shifted = acc
                for _ in range(k):
                    shifted = shifted + wt
                nxt[(deg + k, shifted)] += cnt * comb(mult + k - 1, k)
        states = nxt
    out: Counter = Counter()
    for (deg, wt), cnt in states.items():
        if abs(wt.delta) <= delta_bound:
            out[wt] += cnt
    return out


def _census_diff(a: Counter, b: Counter, limit: int = 5) -> str:
    diffs = [wt for wt in sorted(set(a) | set(b)) if a[wt] != b[wt]]
    parts = [f"{wt.root},{wt.delta}: {a[wt]} vs {b[wt]}" for wt in diffs[:limit]]
    if len(diffs) > limit:
        parts.append(f"... {len(diffs) - limit} more weights differ")
    return "; ".join(parts)


def character_compare(
    params: Params, mode_window: int, delta_bound: int, borel: str = "inducing", report: Report | None = None
) -> Report:
    """Generator-level census equality, then monomial counts per weight.

    Monomial counts are taken up to degree ``delta_bound`` and ``|delta| <= delta_bound``
    (the degree cap keeps every count finite when mode-0 generators exist).
    """
    report = report if report is not None else Report("character", params)
    comp = complement_census(params, mode_window, borel)
    fock = fock_variable_census(params, mode_window)
    report.add(f"generators(window={mode_window},borel={borel})", comp == fock, _census_diff(comp, fock))
    mc = monomial_census(comp, params.n, delta_bound, delta_bound)
    mf = monomial_census(fock, params.n, delta_bound, delta_bound)
    report.add(f"monomials(degree<={delta_bound},|delta|<={delta_bound})", mc == mf, _census_diff(mc, mf))
    return report


# --------------------------------------------------------------------------
# Constructive generation


def in_wa(mono: tuple, params: Params) -> bool:
    """Whether every variable of ``mono`` belongs to the r-part (x with j <= r, y with i <= r)."""
    r = params.r
    for code in mono:
        v = decode_var(code)
        if (v.kind == "x" and v.j > r) or (v.kind == "y" and v.i > r):
            return False
    return True


def _in_cr_x(poly: FockPoly, params: Params) -> bool:
    # correction terms may carry any y variable but only x variables with j <= r
    r = params.r
    for mono in poly.terms:
        for code in mono:
            v = decode_var(code)
            if v.kind == "x" and v.j > r:
                return False
    return True


@dataclass
class WitnessProgram:
    """Instructions building ``target`` from an element ``start`` of the r-part."""

    target: tuple
    start: FockPoly
    steps: list = field(default_factory=list)

    def execute(self, params: Params) -> FockPoly:
        rz = realization(params)
        v = self.start
        for step in self.steps:
            op = step[0]
            if op == "current":
                v = rz.apply(step[1], v)
            elif op == "f-bracket":
                _, i, j, mode = step
                modes = (mode,) + (0,) * (i - j)
                v = _iterated_f(i, j, modes, v, params)
            elif op == "subtract":
                v = v - step[1]
            else:
                raise ValueError(f"unknown instruction {op!r}")
        return v

    def instructions(self) -> list:
        out = [f"start {format_poly(self.start)}"]
        for step in self.steps:
            if step[0] == "current":
                out.append(f"apply {step[1]}")
            elif step[0] == "f-bracket":
                _, i, j, mode = step
                out.append(f"apply [F{i}..F{j}]@{mode}")
            else:
                out.append(f"subtract {format_poly(step[1])}")
        return out

    def __str__(self):
        return "; ".join(self.instructions())


def _sort_key(code: int):
    v = decode_var(code)
    return (v.i, v.j, v.m)


def generation_witness(target: tuple, params: Params) -> WitnessProgram:
    """Self-verified program producing the monomial ``target`` from its r-part.

    Variables outside the r-part are created one at a time: ``y[i,m]`` with
    ``i > r`` by ``H_{i,-m}`` minus its correction inside ``C_r[x] (x) C[y]``,
    then ``x[a,b,m]`` with ``b > r`` by ``F_{b,m}`` (``a = b``) or by the
    iterated bracket ``[F_b, ..., F_a]`` at mode ``m``, in increasing order of
    ``a`` so that no derivative term of the creating operator can fire.
    """
    target = tuple(sorted(target))
    n, r = params.n, params.r
    for code in target:
        weight_of((code,), params)  # bounds check
    rz = realization(params)
    base = tuple(c for c in target if in_wa((c,), params))
    rest = [c for c in target if not in_wa((c,), params)]
    ys = sorted((c for c in rest if decode_var(c).kind == "y"), key=_sort_key)
    xs = sorted((c for c in rest if decode_var(c).kind == "x"), key=_sort_key)
    prog = WitnessProgram(target, FockPoly({base: 1}))
    cur = base
    v = prog.start
    for code in ys:
        var = decode_var(code)
        label = H(var.i, -var.m)
        nxt = monomial(*cur, code)
        got = rz.apply(label, v)
        corr = got - FockPoly({nxt: 1})
        if not _in_cr_x(corr, params):
            raise AssertionError(f"correction for {label} leaves C_r[x]: {corr}")
        prog.steps.append(("current", label))
        if corr:
            prog.steps.append(("subtract", corr))
        cur, v = nxt, FockPoly({nxt: 1})
    for code in xs:
        var = decode_var(code)
        if var.i == var.j:
            step = ("current", F(var.j, var.m))
            got = rz.apply(step[1], v)
        else:
            step = ("f-bracket", var.j, var.i, var.m)
            got = _iterated_f(var.j, var.i, (var.m,) + (0,) * (var.j - var.i), v, params)
        nxt = monomial(*cur, code)
        if got != FockPoly({nxt: 1}):
            raise AssertionError(f"step {step} on {format_monomial(cur)} gave {got}")
        prog.steps.append(step)
        cur, v = nxt, got
    result = prog.execute(params)
    if result != FockPoly({target: 1}):
        raise AssertionError(f"witness for {format_monomial(target)} executed to {result}")
    return prog


def generation_check(params: Params, mode_window: int, degree_bound: int, report: Report | None = None) -> Report:
    report = report if report is not None else Report("generation", params)
    vs = fock_variables(params, mode_window)
    for mono in iter_monomials(vs, degree_bound):
        name = format_monomial(mono)
        try:
            prog = generation_witness(mono, params)
        except AssertionError as exc:
            report.add(f"reach {name}", False, str(exc))
            continue
        report.add(f"reach {name} in {len(prog.steps)} steps", True)
    return report


# --------------------------------------------------------------------------
# Submodule probe


def _current_alphabet(params: Params, mode_window: int) -> list:
    out = []
    for kind in ("E", "F", "H"):
        for i in range(1, params.n + 1):
            for m in range(-mode_window, mode_window + 1):
                out.append(Current(kind, i, m))
    return out


def _grade(mono: tuple, params: Params) -> int:
    return abs(weight_of(mono, params).delta)


def submodule_probe(
    v: FockPoly,
    params: Params,
    grade_bound: int,
    length_bound: int,
    mode_window: int = 2,
    report: Report | None = None,
):
    """Look for a nonzero vector of ``U(g) v`` inside the r-part ``C_r[x] (x) C_r[y]``.

    Words of up to ``length_bound`` currents (modes in the window) are applied
    to ``v``; a generated vector is kept only while every one of its terms has
    ``|delta| <= grade_bound``.  A linear combination of kept vectors with no
    component outside the r-part is returned; when none exists the verdict is
    inconclusive, never negative.  Returns ``(vector or None, report)``.
    """
    if not v:
        raise ValueError("submodule_probe needs a nonzero vector")
    report = report if report is not None else Report("submodule-probe", params)
    rz = realization(params)
    alphabet = _current_alphabet(params, mode_window)

    def keep(w: FockPoly) -> bool:
        return bool(w) and all(_grade(m, params) <= grade_bound for m in w.terms)

    found = None
    layer = [v] if keep(v) else []
    generated = list(layer)
    seen = {v}
    for _ in range(length_bound):
        nxt = []
        for w in layer:
            for label in alphabet:
                u = rz.apply(label, w)
                if keep(u) and u not in seen:
                    seen.add(u)
                    nxt.append(u)
        generated.extend(nxt)
        layer = nxt
    # split every vector into outside / inside parts; a relation among the
    # outside parts gives a vector supported inside the r-part
    ech = Echelon()
    for k, w in enumerate(generated):
        outside = {m: c for m, c in w.terms.items() if not in_wa(m, params)}
        rel = ech.add(outside, {k: 1})
        if rel is None:
            continue
        cand = FockPoly.zero()
        for idx, c in rel.items():
            cand = cand + generated[idx] * c
        if cand:
            found = cand
            break
    if found is not None:
        ok = all(in_wa(m, params) for m in found.terms)
        report.add(f"probe {format_poly(v)}: found {format_poly(found)}", ok, None if ok else "outside r-part")
    else:
        report.add(
            f"probe {format_poly(v)}: {len(generated)} vectors, no r-part vector",
            True,
            None,
            inconclusive=True,
        )
    return found, report
