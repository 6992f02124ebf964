from collections import Counter
from fractions import Fraction
from itertools import combinations_with_replacement

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wakimoto_fock.algebra import FockPoly, Params, Weight, X, Y, monomial, parse_poly
from wakimoto_fock.realization import F, H, apply_current, current_weight
from wakimoto_fock.structure import (
    WitnessProgram,
    character_compare,
    complement_census,
    complement_generators,
    fock_variable_census,
    generation_check,
    generation_witness,
    in_wa,
    monomial_census,
    submodule_probe,
)

VAC = FockPoly.vacuum()


def W(root, delta):
    return Weight(tuple(root), delta)


class TestCensus:
    def test_imaginary_rank_one(self):
        want = Counter({W([-1], -1): 1, W([-1], 0): 1, W([-1], 1): 1, W([0], -1): 1})
        p = Params(1, 0)
        assert complement_census(p, 1) == want
        assert fock_variable_census(p, 1) == want

    def test_inducing_borel_rank_one_split(self):
        p = Params(1, 1)
        assert complement_census(p, 1) == Counter(
            {W([-1], 0): 1, W([-1], -1): 1, W([1], -1): 1, W([0], -1): 1}
        )
        # the Fock side carries +alpha at mode 0 where the inducing complement has -alpha
        fock = fock_variable_census(p, 1)
        assert fock == Counter({W([1], 0): 1, W([-1], -1): 1, W([1], -1): 1, W([0], -1): 1})
        assert complement_census(p, 1, borel="realized") == fock

    def test_classical_directions(self):
        assert complement_census(Params(2, 2), 0) == Counter(
            {W([-1, 0], 0): 1, W([0, -1], 0): 1, W([-1, -1], 0): 1}
        )

    def test_unknown_borel(self):
        with pytest.raises(ValueError):
            complement_generators(Params(1, 0), 1, borel="nope")

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_realized_bijection(self, n):
        for r in range(n + 1):
            for w in range(5):
                p = Params(n, r)
                assert complement_census(p, w, "realized") == fock_variable_census(p, w)

    def test_inducing_bijection_only_at_r0(self):
        for n in (1, 2, 3):
            assert complement_census(Params(n, 0), 3) == fock_variable_census(Params(n, 0), 3)
            for r in range(1, n + 1):
                assert complement_census(Params(n, r), 3) != fock_variable_census(Params(n, r), 3)

    def test_fock_weights_match_current_action(self):
        # oracle: read the weight of x[2,2,m] off F_{2,m} acting on the vacuum
        p = Params(2, 1)
        for m in range(-2, 3):
            v = apply_current(F(2, m), VAC, p)
            assert v == FockPoly.var(X(2, 2, m))
            assert fock_variable_census(p, 2)[current_weight(F(2, m), 2)] >= 1

    @given(
        st.lists(st.tuples(st.integers(-1, 1), st.integers(-2, 2)), min_size=1, max_size=5),
        st.integers(0, 3),
        st.integers(0, 3),
    )
    @settings(max_examples=60)
    def test_monomial_census_against_enumeration(self, gens, degree, delta):
        census = Counter(W([a], d) for a, d in gens)
        brute = Counter()
        for k in range(degree + 1):
            for combo in combinations_with_replacement(range(len(gens)), k):
                root = sum(gens[c][0] for c in combo)
                dd = sum(gens[c][1] for c in combo)
                if abs(dd) <= delta:
                    brute[W([root], dd)] += 1
        assert monomial_census(census, 1, degree, delta) == brute


class TestCharacter:
    @pytest.mark.parametrize("n,r,w", [(1, 0, 3), (2, 0, 3), (3, 0, 2)])
    def test_imaginary_pass(self, n, r, w):
        assert character_compare(Params(n, r), w, w).ok

    @pytest.mark.parametrize("n,r,w", [(1, 1, 1), (2, 1, 3), (3, 2, 2)])
    def test_split_cases(self, n, r, w):
        p = Params(n, r)
        inducing = character_compare(p, w, w)
        assert not inducing.ok
        assert "vs" in inducing.failures()[0].witness
        assert character_compare(p, w, w, borel="realized").ok


class TestGeneration:
    def test_single_F(self):
        p = Params(2, 1)
        prog = generation_witness((X(2, 2, 5),), p)
        assert prog.steps == [("current", F(2, 5))]
        assert prog.start == VAC

    def test_y_with_correction(self):
        p = Params(2, 1)
        prog = generation_witness((Y(2, 1),), p)
        assert prog.steps[0] == ("current", H(2, -1))
        assert prog.steps[1][0] == "subtract"
        assert prog.steps[1][1] == parse_poly("-x[1,1,-1]*x[1,1,0]")
        assert prog.execute(p) == FockPoly.var(Y(2, 1))

    def test_root_bracket_step(self):
        p = Params(2, 1)
        prog = generation_witness((X(1, 2, -1),), p)
        assert prog.steps == [("f-bracket", 2, 1, -1)]
        assert prog.instructions() == ["start 1", "apply [F2..F1]@-1"]

    def test_r_part_needs_no_steps(self):
        p = Params(2, 1)
        mono = monomial(X(1, 1, 0), Y(1, 2))
        prog = generation_witness(mono, p)
        assert prog.steps == [] and prog.execute(p) == FockPoly({mono: 1})

    def test_bad_instruction(self):
        prog = WitnessProgram((), VAC, [("jump",)])
        with pytest.raises(ValueError):
            prog.execute(Params(1, 0))

    def test_out_of_bounds(self):
        with pytest.raises(IndexError):
            generation_witness((X(1, 3, 0),), Params(2, 1))

    @pytest.mark.parametrize(
        "n,r,w,deg", [(2, 1, 2, 1), (2, 0, 2, 2), (3, 1, 1, 1), (1, 0, 2, 2), (3, 3, 1, 1)]
    )
    def test_check(self, n, r, w, deg):
        report = generation_check(Params(n, r, Fraction(9, 4), tuple(range(n))), w, deg)
        assert report.ok and report.passed > 0

    def test_mixed_monomial(self):
        p = Params(3, 1, 1, (1, 0, 2))
        mono = monomial(X(1, 3, 0), X(2, 2, -1), Y(3, 2), X(1, 1, 1))
        assert generation_witness(mono, p).execute(p) == FockPoly({mono: 1})


class TestProbe:
    def test_vacuum(self):
        found, report = submodule_probe(VAC, Params(2, 1), 2, 1)
        assert found == VAC and report.ok

    def test_outside_vector(self):
        p = Params(2, 1, Fraction(9, 4), (1, 2))
        found, report = submodule_probe(FockPoly.var(X(2, 2, 0)), p, 2, 2, mode_window=1)
        if found is None:
            assert report.inconclusive == 1
        else:
            assert found and all(in_wa(m, p) for m in found.terms)
        assert report.ok

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            submodule_probe(FockPoly.zero(), Params(2, 1), 2, 1)
