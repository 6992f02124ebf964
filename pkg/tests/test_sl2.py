from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from wakimoto_fock.algebra import FockPoly, ParseError
from wakimoto_fock.kernels import add_term, mono_diff
from wakimoto_fock.linalg import span_contains
from wakimoto_fock.sl2 import (
    BernardFelder,
    FirstFreeField,
    JakobsenKac,
    SecondFreeField,
    Sl2Gen,
    format_sl2_poly,
    format_vpoly,
    graded_basis,
    parse_sl2_poly,
    parse_vpoly,
    second_vs_engine,
    singular_space_kernel,
    singularity_check,
    sl2_realization_apply,
    sl2_relation_check,
    sl2_test_vectors,
    sl2_x,
    v0_act,
    wilson_vector,
)

VAC = FockPoly.vacuum()
V = parse_vpoly
S = parse_sl2_poly


def ref_act(letter, j, mono):
    """Oracle for V(0) by word rewriting, sharing no code with ``v0_act``.

    A word ``[X_m, f_s, ...]`` stands for the product applied to the vacuum.
    ``X f_s -> f_s X + [X, f_s]`` until only f's remain; ``e``, ``h`` kill the vacuum.
    """
    out = {}
    stack = [([(letter, j)] + [("f", s) for s in mono], 1)]
    while stack:
        word, c = stack.pop()
        idx = next((k for k, (op, _) in enumerate(word) if op != "f"), None)
        if idx is None:
            key = tuple(sorted(m for _, m in word))
            out[key] = out.get(key, 0) + c
            if not out[key]:
                del out[key]
            continue
        if idx == len(word) - 1:
            continue
        (op, m), (_, s) = word[idx], word[idx + 1]
        pre, post = word[:idx], word[idx + 2:]
        stack.append((pre + [("f", s), (op, m)] + post, c))
        if op == "h":
            stack.append((pre + [("f", m + s)] + post, -2 * c))
        else:
            stack.append((pre + [("h", m + s)] + post, c))
    return out


class TestV0:
    def test_examples(self):
        assert v0_act(("e", 1), V("f[0]")) == {}
        assert v0_act(("h", 2), V("f[1]")) == V("-2*f[3]")
        assert v0_act(("e", 1), V("f[0]*f[-1]")) == V("-2*f[0]")

    def test_f_is_multiplication(self):
        assert v0_act(("f", 2), V("f[0] + 3*f[2]")) == V("f[0]*f[2] + 3*f[2]^2")

    def test_unknown_generator(self):
        with pytest.raises(ValueError):
            v0_act(("g", 0), V("f[0]"))


class TestWilson:
    def test_examples(self):
        assert wilson_vector(1, (5,)) == V("f[5]")
        assert wilson_vector(2, (0, 2)) == V("f[0]*f[3] - f[1]*f[2]")
        assert wilson_vector(2, (0, 0)) == {}

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            wilson_vector(0, ())
        with pytest.raises(ValueError):
            wilson_vector(2, (1,))

    def test_singularity_examples(self):
        v = wilson_vector(2, (0, 2))
        e_ok, h_ok, wit = singularity_check(v, 4)
        assert e_ok and not h_ok
        assert "h[1] v = -2*f[0]*f[4] + 2*f[2]^2" in wit
        assert singularity_check(V("f[0]"), 4)[0]
        with pytest.raises(ValueError):
            singularity_check({}, 2)

    @given(st.integers(1, 3), st.data())
    @settings(max_examples=80)
    def test_e_singular(self, r, data):
        s = data.draw(st.lists(st.integers(-2, 2), min_size=r, max_size=r))
        v = wilson_vector(r, s)
        for i in range(-6, 7):
            assert v0_act(("e", i), v) == {}

    @given(st.integers(2, 3), st.data())
    @settings(max_examples=60)
    def test_antisymmetry(self, r, data):
        s = data.draw(st.lists(st.integers(-2, 2), min_size=r, max_size=r))
        a, b = data.draw(st.sampled_from([(x, y) for x in range(r) for y in range(x + 1, r)]))
        t = list(s)
        t[a], t[b] = t[b], t[a]
        neg = {k: -c for k, c in wilson_vector(r, s).items()}
        if s[a] == s[b]:
            assert wilson_vector(r, s) == {}
        else:
            assert wilson_vector(r, t) == neg

    @given(st.lists(st.integers(-2, 2), min_size=1, max_size=3), st.integers(-3, 3))
    @settings(max_examples=60)
    def test_v0_against_reference(self, mono, j):
        mono = tuple(sorted(mono))
        for letter in ("e", "h"):
            assert v0_act((letter, j), {mono: 1}) == ref_act(letter, j, mono)


def kernel_by_sympy(r, N, w):
    basis = graded_basis(r, N, w)
    rows = {}
    for k, mono in enumerate(basis):
        for i in range(-w, w + 1):
            for out, c in v0_act(("e", i), {mono: 1}).items():
                if all(-w <= s <= w for s in out):
                    rows.setdefault((i, out), [0] * len(basis))[k] = sympy.Rational(c.numerator, c.denominator)
    if not rows:
        return len(basis)
    return len(basis) - sympy.Matrix(list(rows.values())).rank()


class TestKernel:
    def test_rank_one_is_everything(self):
        for N in range(-3, 4):
            assert singular_space_kernel((1, N), 3) == [{(N,): 1}]

    def test_contains_wilson(self):
        kernel = singular_space_kernel((2, 3), 4)
        assert span_contains(kernel, [wilson_vector(2, (0, 2))])

    def test_no_zero_vectors(self):
        for N in (-2, 0, 2):
            assert all(v for v in singular_space_kernel((2, N), 3))

    @pytest.mark.parametrize("r,N,w", [(2, 3, 4), (2, 0, 3), (2, -1, 4), (3, 3, 3), (3, 0, 2)])
    def test_dimension_matches_sympy(self, r, N, w):
        assert len(singular_space_kernel((r, N), w)) == kernel_by_sympy(r, N, w)

    @pytest.mark.parametrize("w", [2, 3, 4])
    def test_r2_kernels_in_wilson_span(self, w):
        for N in range(-2 * w, 2 * w + 1):
            kernel = singular_space_kernel((2, N), w)
            span = [wilson_vector(2, (a, N - 1 - a)) for a in range(-w - 2, w + 3)]
            span = [v for v in span if v]
            assert span_contains(span, kernel), N


class TestFormats:
    def test_vpoly_round_trip(self):
        v = wilson_vector(3, (0, 1, 3))
        assert parse_vpoly(format_vpoly(v)) == v
        assert format_vpoly({(2, 2): Fraction(-1, 2)}) == "-1/2*f[2]^2"

    def test_vpoly_rejects_other_letters(self):
        with pytest.raises(ParseError):
            parse_vpoly("x[1]")

    def test_sl2_poly(self):
        p = S("x[1]*x[-1] + 2*y[3]")
        assert format_sl2_poly(p) == format_sl2_poly(S(format_sl2_poly(p)))
        with pytest.raises(IndexError):
            S("y[0]")


class TestRealizations:
    def test_first_examples(self):
        first = FirstFreeField()
        assert first.apply(Sl2Gen("f", 3), VAC) == S("x[3]")
        assert first.apply(Sl2Gen("e", 0), S("x[1]*x[-1]")) == S("-2*x[0]")

    def test_bernard_felder_vacuum(self):
        bf = BernardFelder(2, 1)
        for n in range(-3, 4):
            assert not bf.apply(Sl2Gen("e", n), VAC)
        assert bf.apply(Sl2Gen("h", 0), VAC) == VAC
        for n in range(1, 4):
            e = bf.apply(Sl2Gen("e", n), bf.apply(Sl2Gen("f", -n), VAC))
            assert e == VAC * (1 + 2 * n)

    def test_jakobsen_kac_vacuum(self):
        jk = JakobsenKac({0: 5})
        assert jk.apply(Sl2Gen("h", 0), VAC) == VAC * -5

    def test_apply_guards(self):
        with pytest.raises(ValueError):
            sl2_realization_apply("first", ("e", 0), S("y[1]"))
        with pytest.raises(ValueError):
            sl2_realization_apply("first", ("g", 0), VAC)
        with pytest.raises(ValueError):
            sl2_realization_apply("other", ("e", 0), VAC)
        assert sl2_realization_apply("bf", ("h", -1), VAC) == S("y[1]")

    @pytest.mark.parametrize(
        "real",
        [FirstFreeField(), JakobsenKac({0: 5}), JakobsenKac({-1: 2, 0: Fraction(1, 3), 2: -1}),
         BernardFelder(2, 1), BernardFelder(Fraction(-1, 2), 3), SecondFreeField(1), SecondFreeField(Fraction(3, 2)), SecondFreeField(-2)],
        ids=lambda r: r.name,
    )
    def test_relation_suite(self, real):
        report = sl2_relation_check(real, 2, sl2_test_vectors(2, 2, real.has_y))
        assert report.ok, report.failures()[:3]

    @pytest.mark.parametrize("K", [0, 1, Fraction(-3, 2), 5])
    def test_second_matches_engine(self, K):
        assert second_vs_engine(K, 2, sl2_test_vectors(2, 2, True)).ok

    def test_derivative_f_is_not_a_representation(self):
        # with f_n = d/dx_n next to these e_n and h_n, [e, f] = h breaks
        class DerivativeF(FirstFreeField):
            def _f(self, n, mono, coef, acc):
                k, rest = mono_diff(mono, sl2_x(n))
                if k:
                    add_term(acc, rest, k * coef)

        report = sl2_relation_check(DerivativeF(), 1, sl2_test_vectors(1, 2, False))
        assert any(c.id.startswith("[e[") for c in report.failures())
