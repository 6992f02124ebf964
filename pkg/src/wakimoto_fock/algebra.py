"""Exact rational substrate: parameters, Fock variables, monomials, polynomials, weights.

Every scalar is a :class:`fractions.Fraction` (plain ``int`` is accepted
wherever a rational is expected).  The Fock space is the polynomial ring in
the variables ``x[i,j,m]`` (``1 <= i <= j <= n``, ``m`` any integer) and
``y[i,m]`` (``1 <= i <= n``, ``m >= 1``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

from .kernels import add_scaled, add_term, mono_mul, poly_mul

__all__ = [
    "Params",
    "VarId",
    "Weight",
    "FockPoly",
    "ParseError",
    "X",
    "Y",
    "var_code",
    "decode_var",
    "monomial",
    "monomial_factors",
    "weight_of",
    "var_weight",
    "parse_poly",
    "format_poly",
    "format_monomial",
    "to_rational",
    "format_rational",
    "cartan",
    "root_offset",
]

# Variable codes: sortable ints, X before Y, then (i, j, m) lexicographically.
_MOFF = 1 << 31
_KIND_Y = 1 << 52


def to_rational(value) -> Fraction:
    """Coerce ints, Fractions and ``'p/q'`` strings to a Fraction (never floats)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not re.fullmatch(r"[+-]?\d+(/\d+)?", text):
            raise ValueError(f"not a rational literal: {value!r}")
        q = Fraction(text)
        return q
    raise TypeError(f"cannot use {type(value).__name__} as an exact rational")


def format_rational(q) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def cartan(i: int, j: int) -> int:
    """Entry ``(alpha_i | alpha_j)`` of the sl(n+1) Cartan matrix."""
    if i == j:
        return 2
    if abs(i - j) == 1:
        return -1
    return 0


@dataclass(frozen=True)
class Params:
    """Rank ``n`` (algebra is affine sl(n+1)), split index ``r``, ``gamma2`` and ``lam``."""

    n: int
    r: int
    gamma2: Fraction = Fraction(0)
    lam: tuple = ()

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not isinstance(self.r, int) or not 0 <= self.r <= self.n:
            raise ValueError(f"need 0 <= r <= n, got r={self.r!r}, n={self.n}")
        object.__setattr__(self, "gamma2", to_rational(self.gamma2))
        lam = tuple(to_rational(v) for v in self.lam) if self.lam else (Fraction(0),) * self.n
        if len(lam) != self.n:
            raise ValueError(f"lambda must have n={self.n} entries, got {len(lam)}")
        object.__setattr__(self, "lam", lam)

    @property
    def level(self) -> Fraction:
        """Central charge value ``gamma2 - (r + 1)``."""
        return self.gamma2 - (self.r + 1)

    def replace(self, **changes) -> "Params":
        fields = {"n": self.n, "r": self.r, "gamma2": self.gamma2, "lam": self.lam}
        fields.update(changes)
        return Params(**fields)

    def as_json(self) -> dict:
        return {
            "n": self.n,
            "r": self.r,
            "gamma2": format_rational(self.gamma2),
            "lambda": [format_rational(v) for v in self.lam],
        }


class VarId(NamedTuple):
    kind: str  # "x" or "y"
    i: int
    j: int  # 0 for y variables
    m: int


def _check_x(i, j, m, n):
    if n is not None and not (1 <= i <= j <= n):
        raise IndexError(f"x[{i},{j},{m}] out of bounds for n={n}")
    if n is None and not (1 <= i <= j):
        raise IndexError(f"x[{i},{j},{m}]: need 1 <= i <= j")


def X(i: int, j: int, m: int, n: int | None = None) -> int:
    """Code of ``x[i,j,m]``."""
    _check_x(i, j, m, n)
    return (i << 44) | (j << 36) | (m + _MOFF)


def Y(i: int, m: int, n: int | None = None) -> int:
    """Code of ``y[i,m]`` (``m >= 1``)."""
    if m < 1 or i < 1 or (n is not None and i > n):
        raise IndexError(f"y[{i},{m}] out of bounds" + (f" for n={n}" if n is not None else ""))
    return _KIND_Y | (i << 44) | (m + _MOFF)


@lru_cache(maxsize=None)
def decode_var(code: int) -> VarId:
    m = (code & ((1 << 36) - 1)) - _MOFF
    i = (code >> 44) & 0xFF
    j = (code >> 36) & 0xFF
    if code & _KIND_Y:
        return VarId("y", i, 0, m)
    return VarId("x", i, j, m)


def var_code(v: VarId) -> int:
    if v.kind == "x":
        return X(v.i, v.j, v.m)
    return Y(v.i, v.m)


def monomial(*factors) -> tuple:
    """Build a monomial from ``(code, exponent)`` pairs or bare codes."""
    out = []
    for f in factors:
        if isinstance(f, tuple):
            code, e = f
            out.extend([code] * e)
        else:
            out.append(f)
    out.sort()
    return tuple(out)


def monomial_factors(mono: tuple) -> list[tuple[VarId, int]]:
    """The ordered ``(variable, exponent)`` map of a monomial."""
    out: list[tuple[VarId, int]] = []
    prev = None
    for code in mono:
        if code == prev:
            v, e = out[-1]
            out[-1] = (v, e + 1)
        else:
            out.append((decode_var(code), 1))
            prev = code
    return out


class Weight(NamedTuple):
    root: tuple  # coefficients k_i of sum k_i alpha_i
    delta: int

    def __add__(self, other):  # type: ignore[override]
        return Weight(tuple(a + b for a, b in zip(self.root, other.root)), self.delta + other.delta)

    def __sub__(self, other):
        return Weight(tuple(a - b for a, b in zip(self.root, other.root)), self.delta - other.delta)

    @classmethod
    def zero(cls, n: int) -> "Weight":
        return cls((0,) * n, 0)


def root_offset(i: int, j: int, n: int, sign: int = 1) -> tuple:
    """Coefficient vector of ``sign * (alpha_i + ... + alpha_j)``."""
    return tuple(sign if i <= k <= j else 0 for k in range(1, n + 1))


@lru_cache(maxsize=None)
def _var_weight(code: int, n: int, r: int) -> Weight:
    v = decode_var(code)
    if v.kind == "y":
        if not 1 <= v.i <= n:
            raise IndexError(f"y[{v.i},{v.m}] out of bounds for n={n}")
        return Weight((0,) * n, -v.m)
    if not 1 <= v.i <= v.j <= n:
        raise IndexError(f"x[{v.i},{v.j},{v.m}] out of bounds for n={n}")
    if v.j <= r and v.m >= 0:
        return Weight(root_offset(v.i, v.j, n, +1), -v.m)
    return Weight(root_offset(v.i, v.j, n, -1), v.m)


def var_weight(code: int, params: Params) -> Weight:
    return _var_weight(code, params.n, params.r)


def weight_of(mono: tuple, params: Params) -> Weight:
    n, r = params.n, params.r
    root = [0] * n
    delta = 0
    for code in mono:
        w = _var_weight(code, n, r)
        delta += w.delta
        for k, c in enumerate(w.root):
            root[k] += c
    return Weight(tuple(root), delta)


class FockPoly:
    """Exact sparse polynomial in the Fock variables; immutable by convention."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        if terms is None:
            terms = {}
        elif not isinstance(terms, dict):
            terms = dict(terms)
        self.terms = {m: c for m, c in terms.items() if c}

    @classmethod
    def _wrap(cls, terms: dict) -> "FockPoly":
        p = cls.__new__(cls)
        p.terms = terms
        return p

    @classmethod
    def vacuum(cls) -> "FockPoly":
        return cls._wrap({(): Fraction(1)})

    @classmethod
    def zero(cls) -> "FockPoly":
        return cls._wrap({})

    @classmethod
    def from_monomial(cls, mono: tuple, coef=1) -> "FockPoly":
        return cls({tuple(sorted(mono)): to_rational(coef)})

    @classmethod
    def var(cls, code: int) -> "FockPoly":
        return cls._wrap({(code,): Fraction(1)})

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(sorted(self.terms.items()))

    def __eq__(self, other):
        if isinstance(other, FockPoly):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == ({(): other} if other else {})
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def _coerce(self, other) -> dict:
        if isinstance(other, FockPoly):
            return other.terms
        if isinstance(other, (int, Fraction)):
            return {(): to_rational(other)} if other else {}
        raise TypeError(f"cannot combine FockPoly with {type(other).__name__}")

    def __add__(self, other):
        acc = dict(self.terms)
        add_scaled(acc, self._coerce(other), 1)
        return FockPoly._wrap(acc)

    __radd__ = __add__

    def __neg__(self):
        return FockPoly._wrap({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        acc = dict(self.terms)
        add_scaled(acc, self._coerce(other), -1)
        return FockPoly._wrap(acc)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return FockPoly.zero()
            return FockPoly._wrap({m: c * other for m, c in self.terms.items()})
        return FockPoly._wrap(poly_mul(self.terms, self._coerce(other)))

    __rmul__ = __mul__

    def coefficient(self, mono: tuple) -> Fraction:
        return self.terms.get(tuple(sorted(mono)), Fraction(0))

    def monomials(self) -> list:
        return sorted(self.terms)

    def degree(self) -> int:
        return max((len(m) for m in self.terms), default=-1)

    def variables(self) -> set:
        return {c for m in self.terms for c in m}

    def __repr__(self):
        return f"FockPoly({format_poly(self)!r})"

    def __str__(self):
        return format_poly(self)


def format_monomial(mono: tuple, x_style: str = "full") -> str:
    if not mono:
        return "1"
    parts = []
    for v, e in monomial_factors(mono):
        if v.kind == "x":
            s = f"x[{v.m}]" if x_style == "sl2" else f"x[{v.i},{v.j},{v.m}]"
        else:
            s = f"y[{v.m}]" if x_style == "sl2" else f"y[{v.i},{v.m}]"
        parts.append(s if e == 1 else f"{s}^{e}")
    return "*".join(parts)


def format_terms(terms: dict, fmt_mono) -> str:
    if not terms:
        return "0"
    out = []
    for mono in sorted(terms):
        c = Fraction(terms[mono])
        body = fmt_mono(mono)
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if mono == () or not body or body == "1":
            text = format_rational(a)
        elif a == 1:
            text = body
        else:
            text = f"{format_rational(a)}*{body}"
        out.append((sign, text))
    first_sign, first = out[0]
    s = ("-" if first_sign == "-" else "") + first
    for sign, text in out[1:]:
        s += f" {sign} {text}"
    return s


def format_poly(p: FockPoly, x_style: str = "full") -> str:
    return format_terms(p.terms, lambda m: format_monomial(m, x_style))


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<var>[xyf])\s*\[(?P<args>[^\]]*)\]|(?P<op>[-+*/^]))"
)


def _tokenize(text: str):
    pos = 0
    tokens = []
    end = len(text.rstrip())
    while pos < end:
        mt = _TOKEN.match(text, pos)
        if not mt or mt.end() == pos:
            raise ParseError(f"unexpected character {text[pos:pos + 1]!r}", pos)
        start = mt.start() + (len(mt.group(0)) - len(mt.group(0).lstrip()))
        if mt.group("num") is not None:
            tokens.append(("num", int(mt.group("num")), start))
        elif mt.group("var") is not None:
            try:
                args = [int(a) for a in mt.group("args").split(",")]
            except ValueError:
                raise ParseError("malformed variable indices", start) from None
            tokens.append(("var", (mt.group("var"), args), start))
        else:
            tokens.append(("op", mt.group("op"), start))
        pos = mt.end()
    tokens.append(("end", None, len(text)))
    return tokens


def parse_terms(text: str, make_factor) -> dict:
    """Parse the shared term grammar; ``make_factor(letter, args, pos)`` returns a monomial."""
    tokens = _tokenize(text)
    k = 0

    def peek():
        return tokens[k]

    acc: dict = {}
    sign = 1
    first = True
    while True:
        kind, val, pos = peek()
        if kind == "op" and val in "+-":
            sign = -1 if val == "-" else 1
            k += 1
        elif not first:
            raise ParseError("expected '+' or '-'", pos)
        first = False
        # term
        kind, val, pos = peek()
        coef = Fraction(1)
        mono: tuple = ()
        have_coef = False
        if kind == "num":
            k += 1
            num = val
            den = 1
            if peek()[0] == "op" and peek()[1] == "/":
                k += 1
                kd, vd, pd = peek()
                if kd != "num" or vd == 0:
                    raise ParseError("expected positive integer denominator", pd)
                den = vd
                k += 1
            coef = Fraction(num, den)
            have_coef = True
        elif kind != "var":
            raise ParseError("expected coefficient or factor", pos)
        while True:
            kind, val, pos = peek()
            if have_coef or mono:
                if not (kind == "op" and val == "*"):
                    break
                k += 1
                kind, val, pos = peek()
            if kind != "var":
                raise ParseError("expected factor", pos)
            k += 1
            letter, args = val
            fmono = make_factor(letter, args, pos)
            e = 1
            if peek()[0] == "op" and peek()[1] == "^":
                k += 1
                ke, ve, pe = peek()
                if ke != "num" or ve == 0:
                    raise ParseError("expected positive integer exponent", pe)
                e = ve
                k += 1
            mono = mono_mul(mono, tuple(sorted(fmono * e)))
        add_term(acc, mono, sign * coef)
        if peek()[0] == "end":
            break
    return acc


def parse_poly(text: str, params: Params | None = None) -> FockPoly:
    """Parse ``3/2*x[1,2,-4]^2*y[1,1] - 1``; bounds are checked against ``params.n``."""
    n = params.n if params is not None else None

    def factor(letter, args, pos):
        try:
            if letter == "x" and len(args) == 3:
                return (X(args[0], args[1], args[2], n),)
            if letter == "y" and len(args) == 2:
                return (Y(args[0], args[1], n),)
        except IndexError as exc:
            raise IndexError(f"{exc} (position {pos})") from None
        raise ParseError(f"bad factor {letter}{args}", pos)

    return FockPoly._wrap(parse_terms(text, factor))


def iter_monomials(variables: Sequence[int], max_degree: int) -> Iterable[tuple]:
    """All monomials of total degree ``<= max_degree`` in the given variable codes."""
    from itertools import combinations_with_replacement

    vs = sorted(set(variables))
    for d in range(max_degree + 1):
        for combo in combinations_with_replacement(vs, d):
            yield combo
