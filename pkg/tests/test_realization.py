from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wakimoto_fock.algebra import FockPoly, Params, cartan, parse_poly, weight_of
from wakimoto_fock.kernels import CompiledCurrentEngine
from wakimoto_fock.oscillator import apply_normal_word
from wakimoto_fock.realization import (
    C,
    Current,
    E,
    F,
    H,
    Realization,
    apply_current,
    current_plan,
    current_weight,
    realization,
    vacuum_eigenvalues,
)

from strategies import monomials, params, polys

VAC = FockPoly.vacuum()


def P(text, p=None):
    return parse_poly(text, p)


def factors(plan):
    return [(w.factors, w.scalar, w.derivative) for w in plan]


def via_words(label, v, p):
    """Oracle: sum the plan's normal-ordered words one by one."""
    out = FockPoly.zero()
    for w in current_plan(label, p):
        out = out + apply_normal_word(w, label.m, v, p)
    return out


class TestPlans:
    def test_F_words(self):
        plan = current_plan(F(1, 0), Params(2, 1))
        assert [w.factors for w in plan] == [(("a", 1, 1),), (("a", 1, 2), ("a*", 2, 2))]

    def test_C_is_scalar(self):
        p = Params(2, 1, 5)
        assert current_plan(C, p) == ()
        assert apply_current(C, P("x[1,2,3]"), p) == P("3*x[1,2,3]")

    def test_H_words(self):
        plan = current_plan(H(2, 0), Params(2, 1))
        assert factors(plan) == [
            ((("a", 2, 2), ("a*", 2, 2)), 2, False),
            ((("a", 1, 2), ("a*", 1, 2)), 1, False),
            ((("a", 1, 1), ("a*", 1, 1)), -1, False),
            ((("b", 2, 0),), 1, False),
        ]

    def test_E_derivative_coefficient(self):
        for p in (Params(2, 1, Fraction(9, 4)), Params(3, 2, 1)):
            for i in range(1, p.n + 1):
                der = [w for w in current_plan(E(i, 0), p) if w.derivative]
                shift = (p.r + 1 if i > p.r else i + 1) - p.gamma2
                assert [w.scalar for w in der] == ([-shift] if shift else [])

    def test_bad_index(self):
        with pytest.raises(IndexError):
            current_plan(F(3, 0), Params(2, 1))
        with pytest.raises(IndexError):
            apply_current(E(0, 1), VAC, Params(2, 1))


class TestApplyCurrent:
    def test_F1_on_vacuum(self):
        assert apply_current(F(1, -1), VAC, Params(2, 1)) == P("x[1,1,-1]")

    @pytest.mark.parametrize("m", [-4, -1, 0, 2, 7])
    def test_F2_on_vacuum(self, m):
        assert apply_current(F(2, m), VAC, Params(2, 1)) == P(f"x[2,2,{m}]")

    def test_H1_zero_mode(self):
        p = Params(1, 1, 3, (Fraction(5, 2),))
        v = P("x[1,1,-1]")
        assert apply_current(H(1, 0), v, p) == v * (Fraction(5, 2) - 2)

    def test_H2_creates_y(self):
        p = Params(2, 1, Fraction(9, 4), (1, 2))
        assert apply_current(H(2, -1), VAC, p) == P("y[2,1] - x[1,1,-1]*x[1,1,0]")

    def test_vacuum_annihilators(self):
        p = Params(2, 1, Fraction(9, 4), (1, 2))
        assert not apply_current(E(2, -5), VAC, p)
        assert not apply_current(F(1, 1), VAC, p)
        # a[1,1,0] is an annihilator for r = 1, so F[1,0] kills the vacuum too,
        # while E[1,0] picks up -lambda_1 from its b-term
        assert not apply_current(F(1, 0), VAC, p)
        assert apply_current(E(1, 0), VAC, p) == P("-x[1,1,0]")

    @given(params(max_n=3), st.sampled_from("EFH"), st.integers(-3, 3), st.data())
    @settings(max_examples=40)
    def test_engine_matches_word_sum(self, p, kind, m, data):
        i = data.draw(st.integers(1, p.n))
        v = data.draw(polys(p.n, max_terms=3, max_degree=2))
        label = Current(kind, i, m)
        assert apply_current(label, v, p) == via_words(label, v, p)

    @given(params(max_n=3), st.sampled_from("EFH"), st.integers(-3, 3), st.data())
    @settings(max_examples=40)
    def test_window_stability(self, p, kind, m, data):
        i = data.draw(st.integers(1, p.n))
        v = data.draw(polys(p.n, max_terms=3, max_degree=2))
        label = Current(kind, i, m)
        assert realization(p).apply_widened(label, v, 5) == apply_current(label, v, p)


class TestVacuum:
    def test_examples(self):
        assert vacuum_eigenvalues(Params(1, 1, 4, (3,))) == ((3,), 2)
        assert vacuum_eigenvalues(Params(2, 0, 0, (0, 0))) == ((0, 0), -1)
        assert vacuum_eigenvalues(Params(2, 2, 3, (1, 1))) == ((1, 1), 0)

    @given(params(max_n=3))
    @settings(max_examples=25)
    def test_any_params(self, p):
        hs, c = vacuum_eigenvalues(p)
        assert hs == p.lam and c == p.gamma2 - p.r - 1


class TestHomogeneity:
    @given(params(max_n=3), st.sampled_from("EFH"), st.integers(-3, 3), st.data())
    @settings(max_examples=60)
    def test_weight_shift(self, p, kind, m, data):
        i = data.draw(st.integers(1, p.n))
        mono = data.draw(monomials(p.n, max_degree=2))
        label = Current(kind, i, m)
        want = weight_of(mono, p) + current_weight(label, p.n)
        for w in apply_current(label, FockPoly({mono: 1}), p).terms:
            assert weight_of(w, p) == want

    @given(params(max_n=3), st.data())
    @settings(max_examples=40)
    def test_H0_eigenvalue_law(self, p, data):
        i = data.draw(st.integers(1, p.n))
        mono = data.draw(monomials(p.n, max_degree=3))
        k = weight_of(mono, p).root
        expected = p.lam[i - 1] + sum(k[j] * cartan(i, j + 1) for j in range(p.n))
        v = FockPoly({mono: 1})
        assert apply_current(H(i, 0), v, p) == v * expected

    @given(params(max_n=3), st.data())
    @settings(max_examples=20)
    def test_level(self, p, data):
        v = data.draw(polys(p.n, max_terms=3))
        assert apply_current(C, v, p) == v * p.level


@pytest.mark.skipif(CompiledCurrentEngine is None, reason="compiled engine not built")
class TestCompiledEngine:
    @given(params(max_n=3), st.sampled_from("EFH"), st.integers(-3, 3), st.data())
    @settings(max_examples=40)
    def test_matches_pure(self, p, kind, m, data):
        i = data.draw(st.integers(1, p.n))
        mono = data.draw(monomials(p.n, max_degree=3))
        fast = Realization(p, scale=2 * p.gamma2.denominator * _lam_den(p), compiled=True)
        slow = Realization(p, scale=fast.scale, compiled=False)
        assert fast.engine.implementation == "compiled"
        assert slow.engine.implementation == "python"
        v = FockPoly({mono: 1})
        label = Current(kind, i, m)
        assert fast.apply(label, v) == slow.apply(label, v)


def _lam_den(p):
    d = 1
    for q in p.lam:
        d *= q.denominator
    return d
