"""The sl(2) laboratory.

* ``V(0)``: the imaginary Verma module with trivial highest weight modulo the
  submodule generated by ``h_i |0>``, ``i < 0``.  It is spanned by commuting
  products of ``f_s``; ``e_j`` and ``h_j`` act by commuting through to the
  vacuum.  This is the oracle for Wilson's vectors.
* Four explicit realizations on ``C[x_m] (x) C[y_m]``, written directly as
  differential operators (independent of the general Wakimoto engine).

sl(2) Fock variables reuse the general codes: ``x_m`` is ``x[1,1,m]`` and
``y_m`` is ``y[1,m]``.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement, permutations
from typing import Mapping, NamedTuple, Sequence

from .algebra import (
    FockPoly,
    Params,
    ParseError,
    X,
    Y,
    decode_var,
    format_poly,
    format_terms,
    iter_monomials,
    parse_terms,
    to_rational,
)
from .kernels import add_scaled, add_term, mono_diff, mono_times_var, mono_times_vars
from .linalg import Echelon, relations
from .report import Report

__all__ = [
    "v0_act",
    "wilson_vector",
    "singularity_check",
    "singular_space_kernel",
    "parse_vpoly",
    "format_vpoly",
    "Sl2Gen",
    "Sl2Realization",
    "FirstFreeField",
    "JakobsenKac",
    "BernardFelder",
    "SecondFreeField",
    "sl2_realization_apply",
    "sl2_relation_check",
    "sl2_test_vectors",
    "sl2_x",
    "sl2_y",
    "parse_sl2_poly",
    "format_sl2_poly",
    "second_vs_engine",
]


# --------------------------------------------------------------------------
# V(0)


def _vadd(acc: dict, mono: tuple, c) -> None:
    add_term(acc, mono, Fraction(c))


def _h_on(j: int, mono: tuple, coef, acc: dict) -> None:
    """``h_j f_S |0> = -2 sum_l f_{S with s_l -> s_l + j} |0>`` (accumulated into ``acc``)."""
    for l, s in enumerate(mono):
        if l > 0 and mono[l - 1] == s:
            continue
        k = mono.count(s)
        rest = list(mono[:l] + mono[l + k:]) + [s] * (k - 1) + [s + j]
        _vadd(acc, tuple(sorted(rest)), -2 * k * coef)


def v0_act(gen, v: Mapping) -> dict:
    """Action of ``gen = (letter, j)`` (letter in e, h, f) on a V(0) vector ``{sorted tuple: coef}``."""
    letter, j = gen
    acc: dict = {}
    for mono, c in v.items():
        if letter == "f":
            _vadd(acc, tuple(sorted(mono + (j,))), c)
        elif letter == "h":
            _h_on(j, mono, c, acc)
        elif letter == "e":
            # e_j f_{s_1}...f_{s_k}|0> = sum_l f_{s_<l} h_{j+s_l} f_{s_>l}|0>  (c = 0, e_j|0> = 0)
            for l, s in enumerate(mono):
                part: dict = {}
                _h_on(j + s, mono[l + 1:], c, part)
                pre = mono[:l]
                for m2, c2 in part.items():
                    _vadd(acc, tuple(sorted(pre + m2)), c2)
        else:
            raise ValueError(f"unknown generator {letter!r}")
    return acc


def _sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        k = start
        while not seen[k]:
            seen[k] = True
            k = perm[k]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def wilson_vector(r: int, s: Sequence[int]) -> dict:
    """Alternating sum of ``f_{s_0+sigma(0)} ... f_{s_{r-1}+sigma(r-1)}|0>`` over Sym(r)."""
    if r < 1:
        raise ValueError("r must be positive")
    if len(s) != r:
        raise ValueError(f"need {r} shifts, got {len(s)}")
    acc: dict = {}
    for perm in permutations(range(r)):
        mono = tuple(sorted(s[k] + perm[k] for k in range(r)))
        _vadd(acc, mono, _sign(perm))
    return acc


def singularity_check(v: Mapping, mode_window: int):
    """``(e_annihilated, h_annihilated, witnesses)`` for ``|i| <= w`` (e) and ``1 <= j <= w`` (h)."""
    if not v:
        raise ValueError("singularity check needs a nonzero vector")
    witnesses = []
    e_ok = True
    for i in range(-mode_window, mode_window + 1):
        got = v0_act(("e", i), v)
        if got:
            e_ok = False
            witnesses.append(f"e[{i}] v = {format_vpoly(got)}")
    h_ok = True
    for j in range(1, mode_window + 1):
        got = v0_act(("h", j), v)
        if got:
            h_ok = False
            witnesses.append(f"h[{j}] v = {format_vpoly(got)}")
    return e_ok, h_ok, witnesses


def graded_basis(r: int, total: int, mode_window: int) -> list:
    """Multisets of ``r`` indices in ``[-w, w]`` with sum ``total``."""
    w = mode_window
    return [c for c in combinations_with_replacement(range(-w, w + 1), r) if sum(c) == total]


def singular_space_kernel(grade: tuple, mode_window: int) -> list:
    """Basis of the e-kernel on the graded piece ``(r, N)`` within the window.

    For every ``|i| <= w`` only the rows (output monomials) whose indices all
    lie in the window are imposed.
    """
    r, total = grade
    w = mode_window
    basis = graded_basis(r, total, w)
    cols = []
    for mono in basis:
        col = {}
        for i in range(-w, w + 1):
            for out, c in v0_act(("e", i), {mono: 1}).items():
                if all(-w <= s <= w for s in out):
                    col[(i, out)] = c
        cols.append(col)
    out = []
    for rel in relations(cols):
        vec = {basis[k]: c for k, c in rel.items() if c}
        if vec:
            out.append(vec)
    return out


def parse_vpoly(text: str) -> dict:
    def factor(letter, args, pos):
        if letter != "f" or len(args) != 1:
            raise ParseError(f"expected f[s], got {letter}{args}", pos)
        return (args[0],)

    return parse_terms(text, factor)


def _format_fmono(mono: tuple) -> str:
    if not mono:
        return "1"
    parts = []
    for s in sorted(set(mono)):
        e = mono.count(s)
        parts.append(f"f[{s}]" if e == 1 else f"f[{s}]^{e}")
    return "*".join(parts)


def format_vpoly(v: Mapping) -> str:
    return format_terms(dict(v), _format_fmono)


# --------------------------------------------------------------------------
# Realizations on C[x_m] (x) C[y_m]


def sl2_x(m: int) -> int:
    return X(1, 1, m)


def sl2_y(m: int) -> int:
    return Y(1, m)


def parse_sl2_poly(text: str) -> FockPoly:
    def factor(letter, args, pos):
        if len(args) != 1 or letter not in "xy":
            raise ParseError(f"expected x[m] or y[m], got {letter}{args}", pos)
        if letter == "y" and args[0] < 1:
            raise IndexError(f"y[{args[0]}] needs a positive mode (position {pos})")
        return (sl2_x(args[0]),) if letter == "x" else (sl2_y(args[0]),)

    return FockPoly._wrap(parse_terms(text, factor))


def format_sl2_poly(p: FockPoly) -> str:
    return format_poly(p, x_style="sl2")


class Sl2Gen(NamedTuple):
    letter: str  # e, h, f or c
    m: int = 0

    def __str__(self):
        return "c" if self.letter == "c" else f"{self.letter}[{self.m}]"


def _modes(mono: tuple, kind: str) -> list:
    """Distinct modes of the x (or y) variables in ``mono`` with their exponents."""
    out: list = []
    prev = None
    for code in mono:
        if code == prev:
            out[-1][1] += 1
            continue
        prev = code
        v = decode_var(code)
        if v.kind == kind:
            out.append([v.m, 1])
        else:
            prev = None
    return [(m, k) for m, k in out]


def _dx(mono: tuple, m: int):
    return mono_diff(mono, sl2_x(m))


def _dy(mono: tuple, m: int):
    return mono_diff(mono, sl2_y(m))


class Sl2Realization:
    """Base class: subclasses define ``e``, ``h``, ``f`` on a single monomial."""

    name = "sl2"
    has_y = False

    @property
    def central(self) -> Fraction:
        return Fraction(0)

    def vacuum_h0(self) -> Fraction:
        return Fraction(0)

    def act_mono(self, gen: Sl2Gen, mono: tuple, coef, acc: dict) -> None:
        if gen.letter == "c":
            if self.central:
                add_term(acc, mono, coef * self.central)
            return
        getattr(self, "_" + gen.letter)(gen.m, mono, coef, acc)

    def apply(self, gen: Sl2Gen, v: FockPoly) -> FockPoly:
        acc: dict = {}
        for mono, c in v.terms.items():
            self.act_mono(gen, mono, c, acc)
        return FockPoly._wrap(acc)

    # shared pieces of the imaginary-Verma type formulas
    def _f(self, n, mono, coef, acc):
        add_term(acc, mono_times_var(mono, sl2_x(n)), coef)

    def _h_x(self, n, mono, coef, acc):
        # -2 sum_m x_{n+m} d/dx_m
        for m, k in _modes(mono, "x"):
            _, rest = _dx(mono, m)
            add_term(acc, mono_times_var(rest, sl2_x(n + m)), -2 * k * coef)

    def _e_xx(self, n, mono, coef, acc):
        # -sum_{m,k} x_{n+m+k} d/dx_m d/dx_k (ordered pairs)
        for m, km in _modes(mono, "x"):
            _, rest = _dx(mono, m)
            for k, kk in _modes(rest, "x"):
                _, rest2 = _dx(rest, k)
                add_term(acc, mono_times_var(rest2, sl2_x(n + m + k)), -km * kk * coef)


class FirstFreeField(Sl2Realization):
    """``f_n = x_n``, ``h_n = -2 sum x_{n+m} d_m``, ``e_n = -sum x_{n+m+k} d_m d_k``; ``c = 0``."""

    name = "first"

    def _h(self, n, mono, coef, acc):
        self._h_x(n, mono, coef, acc)

    def _e(self, n, mono, coef, acc):
        self._e_xx(n, mono, coef, acc)


class JakobsenKac(FirstFreeField):
    """First free field realization shifted by a scalar sequence ``lambda_m``."""

    name = "jk"

    def __init__(self, lam: Mapping[int, object] | None = None):
        self.lam = {int(m): to_rational(v) for m, v in (lam or {}).items() if v}

    def vacuum_h0(self) -> Fraction:
        return -self.lam.get(0, Fraction(0))

    def _h(self, n, mono, coef, acc):
        self._h_x(n, mono, coef, acc)
        l = self.lam.get(n)
        if l:
            add_term(acc, mono, -l * coef)

    def _e(self, n, mono, coef, acc):
        self._e_xx(n, mono, coef, acc)
        for m, k in _modes(mono, "x"):
            l = self.lam.get(n + m)
            if l:
                _, rest = _dx(mono, m)
                add_term(acc, rest, -l * k * coef)


class BernardFelder(Sl2Realization):
    """Imaginary Verma module with central charge ``K`` and ``h_0`` eigenvalue ``J``."""

    name = "bf"
    has_y = True

    def __init__(self, K=0, J=0):
        self.K = to_rational(K)
        self.J = to_rational(J)

    @property
    def central(self) -> Fraction:
        return self.K

    def vacuum_h0(self) -> Fraction:
        return self.J

    def _h(self, n, mono, coef, acc):
        self._h_x(n, mono, coef, acc)
        if n < 0:
            add_term(acc, mono_times_var(mono, sl2_y(-n)), coef)
        elif n > 0:
            k, rest = _dy(mono, n)
            if k:
                add_term(acc, rest, 2 * n * self.K * k * coef)
        elif self.J:
            add_term(acc, mono, self.J * coef)

    def _e(self, n, mono, coef, acc):
        K, J = self.K, self.J
        self._e_xx(n, mono, coef, acc)
        for q, kq in _modes(mono, "x"):
            _, rest = _dx(mono, q)
            # sum_{k>0} y_k d/dx_{-k-n}: the derivative hits x_q with k = -q - n
            k = -q - n
            if k > 0:
                add_term(acc, mono_times_var(rest, sl2_y(k)), kq * coef)
            # (K n + J) d/dx_{-n}
            if q == -n and (K * n + J):
                add_term(acc, rest, (K * n + J) * kq * coef)
        # 2K sum_{m>0} m d/dy_m d/dx_{m-n}
        if K:
            for m, km in _modes(mono, "y"):
                _, rest = _dy(mono, m)
                kx, rest2 = _dx(rest, m - n)
                if kx:
                    add_term(acc, rest2, 2 * K * m * km * kx * coef)


class SecondFreeField(Sl2Realization):
    """Wakimoto's normal-ordered realization at level ``K``.

    ``a_n`` is ``x_n`` for ``n < 0`` and ``d/dx_n`` otherwise; ``a*_n`` is
    ``x_{-n}`` for ``n <= 0`` and ``-d/dx_{-n}`` otherwise; ``b_m`` is
    ``y_{-m}`` for ``m < 0`` and ``2(K+2) m d/dy_m`` for ``m >= 0``.
    """

    name = "second"
    has_y = True

    def __init__(self, K=0):
        self.K = to_rational(K)
        self.kappa = 2 * (self.K + 2)

    @property
    def central(self) -> Fraction:
        return self.K

    # modewise normal-ordered word: derivation factors act first, then the
    # multiplications; each factor is "a", "a*" or "b" with its z-exponent
    def _word(self, factors: Sequence[str], total: int, mono: tuple, coef, acc: dict) -> None:
        self._step(factors, 0, total, mono, coef, [], acc)

    def _step(self, factors, t, rem, mono, coef, muls, acc):
        if t == len(factors):
            self._emit(muls, rem, mono, coef, acc)
            return
        kind = factors[t]
        # derivation role
        if kind == "a":
            for q, k in _modes(mono, "x"):
                if q >= 0:
                    _, rest = _dx(mono, q)
                    self._step(factors, t + 1, rem - q, rest, coef * k, muls, acc)
        elif kind == "a*":
            for s, k in _modes(mono, "x"):
                if s < 0:  # a*_p = -d/dx_{-p} with p = -s > 0
                    _, rest = _dx(mono, s)
                    self._step(factors, t + 1, rem + s, rest, -coef * k, muls, acc)
        else:
            for m, k in _modes(mono, "y"):
                _, rest = _dy(mono, m)
                self._step(factors, t + 1, rem - m, rest, coef * self.kappa * m * k, muls, acc)
        # multiplication role: a_q (q <= -1), a*_p (p <= 0), b_q (q <= -1)
        self._step(factors, t + 1, rem, mono, coef, muls + [kind], acc)

    def _emit(self, muls, rem, mono, coef, acc):
        bounds = [0 if k == "a*" else -1 for k in muls]
        if not muls:
            if rem == 0:
                add_term(acc, mono, coef)
            return

        def rec(idx, left, chosen):
            if idx == len(muls) - 1:
                if left <= bounds[idx]:
                    yield chosen + [left]
                return
            lo = left - sum(bounds[idx + 1:])
            for p in range(lo, bounds[idx] + 1):
                yield from rec(idx + 1, left - p, chosen + [p])

        for modes in rec(0, rem, []):
            codes = []
            for kind, p in zip(muls, modes):
                if kind == "a":
                    codes.append(sl2_x(p))
                elif kind == "a*":
                    codes.append(sl2_x(-p))
                else:
                    codes.append(sl2_y(-p))
            add_term(acc, mono_times_vars(mono, codes), coef)

    def _e(self, n, mono, coef, acc):
        self._word(("a",), n, mono, coef, acc)

    def _h(self, n, mono, coef, acc):
        # -2 :a* a: + b ; factor modes p + q = n
        self._word(("a*", "a"), n, mono, -2 * coef, acc)
        self._word(("b",), n, mono, coef, acc)

    def _f(self, n, mono, coef, acc):
        # -:a* a* a: + K d(a*) + :a* b: ; d/dz a*(z) has coefficient -n a*_n
        self._word(("a*", "a*", "a"), n, mono, -coef, acc)
        if self.K and n:
            self._word(("a*",), n, mono, -n * self.K * coef, acc)
        self._word(("a*", "b"), n, mono, coef, acc)


def make_realization(kind: str, K=0, J=0, lam=None) -> Sl2Realization:
    if kind == "first":
        return FirstFreeField()
    if kind == "jk":
        return JakobsenKac(lam)
    if kind == "bf":
        return BernardFelder(K, J)
    if kind == "second":
        return SecondFreeField(K)
    raise ValueError(f"unknown sl2 realization {kind!r}")


def sl2_realization_apply(kind, gen, v: FockPoly) -> FockPoly:
    """``kind`` is an :class:`Sl2Realization` (or its name), ``gen`` an :class:`Sl2Gen` or ``(letter, m)``."""
    real = make_realization(kind) if isinstance(kind, str) else kind
    gen = gen if isinstance(gen, Sl2Gen) else Sl2Gen(*gen)
    if gen.letter not in "ehfc":
        raise ValueError(f"unsupported generator {gen}")
    if not real.has_y:
        for mono in v.terms:
            if any(decode_var(c).kind == "y" for c in mono):
                raise ValueError(f"{real.name} realization has no y variables")
    return real.apply(gen, v)


def sl2_test_vectors(mode_window: int, degree_bound: int, with_y: bool) -> list:
    vs = [sl2_x(m) for m in range(-mode_window, mode_window + 1)]
    if with_y:
        vs += [sl2_y(m) for m in range(1, mode_window + 1)]
    return [FockPoly({mono: 1}) for mono in iter_monomials(vs, degree_bound)]


def _expected_bracket(a: Sl2Gen, b: Sl2Gen, c) -> tuple[list, Fraction]:
    """``[a, b]`` as (list of (generator, coefficient), central scalar)."""
    m, p = a.m, b.m
    delta = m + p == 0
    pair = a.letter + b.letter
    if pair == "hh":
        return [], Fraction(2 * m) * c if delta else Fraction(0)
    if pair == "he":
        return [(Sl2Gen("e", m + p), 2)], Fraction(0)
    if pair == "hf":
        return [(Sl2Gen("f", m + p), -2)], Fraction(0)
    if pair == "ef":
        return [(Sl2Gen("h", m + p), 1)], Fraction(m) * c if delta else Fraction(0)
    if pair in ("ee", "ff"):
        return [], Fraction(0)
    raise ValueError(pair)


def sl2_relation_check(real: Sl2Realization, mode_window: int, test_set: Sequence[FockPoly]) -> Report:
    report = Report(f"sl2-{real.name}", None)
    c = real.central
    vac = FockPoly.vacuum()
    got = real.apply(Sl2Gen("c"), vac)
    report.add(f"c|0>={c}|0>", got == vac * c, format_sl2_poly(got))
    got = real.apply(Sl2Gen("h", 0), vac)
    want = real.vacuum_h0()
    report.add(f"h[0]|0>={want}|0>", got == vac * want, format_sl2_poly(got))
    modes = range(-mode_window, mode_window + 1)
    pairs = [("h", "h"), ("h", "e"), ("h", "f"), ("e", "f"), ("e", "e"), ("f", "f")]
    for la, lb in pairs:
        for m in modes:
            for p in modes:
                a, b = Sl2Gen(la, m), Sl2Gen(lb, p)
                rhs, central = _expected_bracket(a, b, c)
                witness = None
                for v in test_set:
                    lhs = real.apply(a, real.apply(b, v)) - real.apply(b, real.apply(a, v))
                    want = v * central
                    for g, k in rhs:
                        want = want + real.apply(g, v) * k
                    if lhs != want:
                        witness = format_sl2_poly(v)
                        break
                report.add(f"[{a},{b}]", witness is None, witness)
    return report


def _flip_y(v: FockPoly) -> FockPoly:
    # y_m of the sl2 realization is -y[1,m] of the general engine
    out = {}
    for mono, c in v.terms.items():
        k = sum(1 for code in mono if decode_var(code).kind == "y")
        out[mono] = -c if k % 2 else c
    return FockPoly._wrap(out)


def second_vs_engine(K, mode_window: int, test_set: Sequence[FockPoly]) -> Report:
    """Compare :class:`SecondFreeField` with the general realization at ``n = r = 1``.

    Renaming: ``e_m = F_{1,m}``, ``f_m = E_{1,m}``, ``h_m = -H_{1,m}``, ``y_m = -y[1,m]``,
    with ``gamma2 = K + 2`` and ``lambda_1 = 0``.
    """
    from .realization import Current, realization

    K = to_rational(K)
    params = Params(1, 1, K + 2, (Fraction(0),))
    rz = realization(params)
    real = SecondFreeField(K)
    report = Report("sl2-second-vs-engine", params)
    names = {"e": ("F", 1), "f": ("E", 1), "h": ("H", -1)}
    for letter in "ehf":
        kind, sign = names[letter]
        for m in range(-mode_window, mode_window + 1):
            witness = None
            for v in test_set:
                ours = real.apply(Sl2Gen(letter, m), v)
                theirs = _flip_y(rz.apply(Current(kind, 1, m), _flip_y(v))) * sign
                if ours != theirs:
                    witness = format_sl2_poly(v)
                    break
            report.add(f"{letter}[{m}] vs {kind}[1,{m}]", witness is None, witness)
    return report
