import math
from fractions import Fraction

import pytest
from scipy import stats as sps

from conftest import load
from polyurn import analytics as A
from polyurn.analytics import LimitMoments, Mode, ResourceGuard
from polyurn.model import SpecError, UrnSpec
from polyurn.oracle import (
    difference_moments,
    exact_distribution,
    exact_step_law,
    law_moment,
    moment_state,
    reachability_scan,
    reachable_states,
    sample_law,
)


class TestSampleLaw:
    def test_hypergeometric(self, large):
        law = sample_law(large, 3, 3)
        assert law == {0: Fraction(1, 5), 1: Fraction(3, 5), 2: Fraction(1, 5)}
        for k, p in law.items():
            assert float(p) == pytest.approx(sps.hypergeom(6, 3, 2).pmf(k))

    def test_binomial(self):
        s = load("large_R")
        law = sample_law(s, 2, 5)
        for k, p in law.items():
            assert float(p) == pytest.approx(sps.binom(2, 2 / 7).pmf(k))


class TestExactDistribution:
    def test_classical_uniform(self, classical):
        d = exact_distribution(classical, 2)
        assert d.support == {1: Fraction(1, 3), 2: Fraction(1, 3), 3: Fraction(1, 3)}

    def test_classical_uniform_any_depth(self, classical):
        for n in range(1, 9):
            d = exact_distribution(classical, n)
            assert d.support == {w: Fraction(1, n + 1) for w in range(1, n + 2)}

    def test_point_mass(self, large):
        assert exact_distribution(large, 0).support == {3: 1}

    def test_one_step_model_R(self):
        d = exact_distribution(load("large_R"), 1)
        assert d.support == {4: Fraction(1, 4), 6: Fraction(1, 2), 8: Fraction(1, 4)}

    @pytest.mark.parametrize("name", ["large", "large_R", "small", "triangular", "triangular_R", "critical"])
    def test_mass_and_lattice(self, name):
        s = load(name)
        for n in range(7):
            d = exact_distribution(s, n)
            assert d.total() == 1
            for W in d.support:
                assert 0 <= W <= s.T0 + s.sigma * n
                assert (W - s.W0 - n * s.a_m) % s.h == 0

    def test_guards(self, large):
        with pytest.raises(ResourceGuard):
            exact_distribution(large, 13)
        with pytest.raises(ResourceGuard):
            exact_distribution(UrnSpec(4, 8, 3, 1, 4, 4, "M"), 2)
        with pytest.raises(SpecError):
            exact_distribution(UrnSpec(1, 1, -2, 0, 3, 1, "R"), 2)

    def test_models_share_means_not_variances(self):
        M, R = load("large"), load("large_R")
        for n in range(1, 7):
            dM, dR = exact_distribution(M, n), exact_distribution(R, n)
            assert dM.mean() == dR.mean()
            assert dM.variance() != dR.variance()


class TestStepLaw:
    def test_classical_symmetric(self, classical):
        law = exact_step_law(classical, 1, 0)
        assert sorted(law.values()) == [Fraction(1, 2)] * 2
        x = sorted(law)
        assert x[0] == -x[1] != 0

    def test_atoms_follow_yhat_form(self, large):
        g0, g1 = A.g(large, 0, "exact"), A.g(large, 1, "exact")
        e0, e1 = A.mean_white(large, 0, "exact"), A.mean_white(large, 1, "exact")
        Y = g0 * (3 - e0)
        Yhat = (1 / g0 - 1 / g1) * Y + e0 - e1 + large.a_m
        expect = {g1 * (Yhat + k * large.h) for k in range(3)}
        assert set(exact_step_law(large, 3, 0)) == expect

    @pytest.mark.parametrize("name", ["large", "large_R", "triangular", "classical"])
    def test_mean_zero_and_second_moment(self, name):
        s = load(name)
        for n in range(5):
            for W in reachable_states(s, n):
                law = exact_step_law(s, W, n)
                assert sum(law.values()) == 1
                assert law_moment(law, 1) == 0
                assert law_moment(law, 2) == A.conditional_moments(s, W, n)[1]

    def test_unreachable(self, large):
        with pytest.raises(SpecError):
            exact_step_law(large, 5, 1)


class TestReachability:
    def test_nonnegative_rows(self, large):
        assert reachability_scan(large, 10)

    def test_divisibility_failure(self):
        s = UrnSpec(1, 1, -2, 0, 3, 1, "R")
        assert not reachability_scan(s, 2)

    def test_divisibility_success(self):
        assert reachability_scan(load("negative_corner_R"), 10)

    def test_depth_guard(self, large):
        with pytest.raises(ResourceGuard):
            reachability_scan(large, 11)


class TestMomentRecursion:
    @pytest.mark.parametrize("name", ["large", "large_R", "small", "triangular", "classical"])
    def test_matches_enumeration(self, name):
        s = load(name)
        for n in range(7):
            d = exact_distribution(s, n)
            st = moment_state(s, n, 4, Mode.EXACT)
            assert st.mean == d.mean()
            for j in range(5):
                assert st.central[j] == d.moment(j, d.mean())

    @pytest.mark.parametrize("name", ["large", "triangular_R", "classical"])
    def test_difference_moments_match_step_laws(self, name):
        s = load(name)
        for n in range(5):
            d = exact_distribution(s, n)
            e2 = sum(p * law_moment(exact_step_law(s, W, n), 2) for W, p in d.support.items())
            e4 = sum(p * law_moment(exact_step_law(s, W, n), 4) for W, p in d.support.items())
            assert difference_moments(s, n, Mode.EXACT) == (e2, e4)

    def test_float_path(self, large):
        exact = difference_moments(large, 60, Mode.EXACT)
        approx = difference_moments(large, 60, Mode.FLOAT)
        for a, b in zip(exact, approx):
            assert b == pytest.approx(float(a), rel=1e-11)


class TestFourthMoments:
    """Leading coefficients at n = 1000 from the exact moment recursion.

    Finite-n corrections are O(1/n) for large index and Lambda = 1, and
    O(n^(Lambda - 1)) for triangular Lambda < 1.
    """

    def ratios(self, s, lm=None):
        n = 1000
        e2, e4 = difference_moments(s, n)
        p2, p4 = A.moment_exponents(s)
        lc = A.limit_constants(s, lm)
        return e2 * n**p2 / A.second_moment_leading(s, lm), e4 * n**p4 / lc.m4_leading

    @pytest.mark.parametrize("name", ["large", "large_R"])
    def test_large_index(self, name):
        r2, r4 = self.ratios(load(name))
        assert r2 == pytest.approx(1, abs=0.01) and r4 == pytest.approx(1, abs=0.015)

    def test_triangular(self, triangular):
        r2, r4 = self.ratios(triangular)
        assert r2 == pytest.approx(1, abs=0.07) and r4 == pytest.approx(1, abs=0.07)

    def test_classical(self, classical):
        uniform = LimitMoments(tuple(2**j / (j + 1) for j in range(1, 5)))
        r2, r4 = self.ratios(classical, uniform)
        assert r2 == pytest.approx(1, abs=0.01) and r4 == pytest.approx(1, abs=0.02)

    def test_triangular_fourth_needs_lambda_power(self, triangular):
        # the leading coefficient carries Lambda^4 (sigma Lambda / m = a_(m-1))
        lc = A.limit_constants(triangular)
        Q, a = lc.Q, triangular.a_m_minus_1
        assert lc.m4_leading == pytest.approx(a**4 * triangular.m * Q**3 * triangular.W0 / triangular.sigma)


def test_limit_moment_estimate_classical(classical):
    from polyurn.oracle import limit_moment_estimate

    lm = limit_moment_estimate(classical, 4000)
    for j, mom in enumerate(lm.moments, start=1):
        assert mom == pytest.approx(2**j / (j + 1), rel=2e-3)
    assert math.isclose(lm.moments[0], 1.0, rel_tol=1e-12)
