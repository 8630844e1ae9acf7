import json

import numpy as np
import pytest
from scipy import stats as sps

from conftest import load
from polyurn import stats as S
from polyurn.model import SpecError


class TestKolmogorovSmirnov:
    def test_quantile_grid_is_close(self):
        n = 2000
        x = sps.norm.ppf((np.arange(n) + 0.5) / n)
        assert S.ks_normal(x) <= 0.5 / n + 1e-12

    def test_matches_scipy(self):
        x = np.random.default_rng(0).normal(0.1, 1.2, 500)
        assert S.ks_normal(x) == pytest.approx(sps.kstest(x, "norm").statistic, abs=1e-12)

    def test_constant_samples(self):
        assert S.ks_normal(np.zeros(200)) >= 0.5

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            S.ks_normal(np.zeros(99))

    def test_threshold(self):
        assert S.ks_threshold(10_000) == pytest.approx(1.63 / 100 + 0.01)


class TestCLT:
    def test_large_index_passes(self, large):
        r = S.verify_clt(large, 500, 5000, 2000, seed=1)
        assert r.passed, r.to_dict()

    def test_alpha_doubled_fails(self, large):
        r = S.verify_clt(large, 500, 5000, 2000, seed=1, constant_factor=2.0)
        assert not r.passed

    def test_small_index_passes(self, small):
        r = S.verify_clt(small, 2000, None, 2000, seed=2)
        assert r.passed, r.to_dict()

    def test_gamma1_halved_fails(self, small):
        assert not S.verify_clt(small, 2000, None, 2000, seed=2, constant_factor=0.5).passed

    def test_triangular_derived_scale(self, triangular):
        r = S.verify_clt(triangular, 500, 5000, 4000, seed=3)
        assert r.passed and r.meta["scale_kind"] == "derived"

    def test_triangular_stated_beta_is_off(self, triangular):
        r = S.verify_clt(triangular, 500, 5000, 4000, seed=3, scale_kind="stated")
        assert not r.passed and r.meta["sample_var"] > 1.5

    def test_proxy_horizon_guard(self, large):
        with pytest.raises(SpecError):
            S.verify_clt(large, 500, 4000, 200, seed=1)

    def test_reproducible(self, large):
        a = S.verify_clt(large, 200, 2000, 500, seed=7).to_dict()
        b = S.verify_clt(large, 200, 2000, 500, seed=7, threads=1).to_dict()
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


class TestMixing:
    def test_independent_pairing_passes(self, classical):
        r = S.verify_mixing(classical, 500, 5000, 4000, seed=4)
        assert r.passed, r.meta
        assert {"correlation", "correlation_proxy_eta"} <= set(r.meta)

    def test_comonotone_pairing_fails(self, classical):
        assert not S.verify_mixing(classical, 500, 5000, 4000, seed=4, pairing="comonotone").passed

    def test_needs_triangular(self, large):
        with pytest.raises(SpecError):
            S.verify_mixing(large, 100, 1000, 200, seed=1)

    def test_eta_floor(self):
        eta, floored = S.eta_hat(load("triangular"), S.Regime.TRIANGULAR, np.array([0.0] + [1.0] * 999))
        assert np.isfinite(eta).all() and floored == 1


class TestLIL:
    def test_dyadic(self):
        assert S.dyadic_checkpoints(64, 1000) == [64, 128, 256, 512, 1000]

    def test_horizon_guard(self, large):
        with pytest.raises(SpecError):
            S.verify_lil(large, 64, 10**4, 10, seed=1)

    def test_report_shape(self, classical):
        r = S.verify_lil(classical, 64, 10**5, 20, seed=1)
        assert r.direction == ">=" and 0 <= r.statistic <= 1
        assert r.meta["checkpoints"][0] == 64 and r.meta["checkpoints"][-1] == 10**5
        assert "sign_symmetry_ks" in r.meta


class TestLimitLaw:
    def test_tail_fit_recovers_gaussian_shape(self):
        x = np.random.default_rng(1).normal(size=200_000)
        fit = S.tail_fit(x, 2.0)
        assert fit["slope"] < 0 and fit["r2"] > 0.99

    def test_tails_large(self, large):
        r = S.verify_tails(large, 2000, 100_000, seed=6)
        assert r.passed and r.meta["fit_kind"] == "quadratic"

    def test_tails_classical_support(self, classical):
        r = S.verify_tails(classical, 2000, 100_000, seed=6)
        assert r.passed and r.meta["support_ok"]

    def test_tails_need_replicas(self, large):
        with pytest.raises(SpecError):
            S.verify_tails(large, 100, 1000, seed=1)

    def test_density_classical_flat(self, classical):
        r = S.verify_density(classical, 2000, 100_000, 40, seed=7)
        assert r.passed
        assert r.meta["max_height"] < 0.5 * 1.15 and r.meta["min_height"] > 0.5 * 0.85

    def test_density_flags_small_start(self):
        r = S.verify_density(load("triangular_w1"), 2000, 100_000, 40, seed=7)
        assert r.passed and "flag" in r.meta

    def test_density_bins_guard(self, classical):
        with pytest.raises(SpecError):
            S.verify_density(classical, 100, 100_000, 400, seed=1)


class TestMoments:
    def test_large(self, large):
        r = S.verify_moments(large, 200, 20_000, seed=5)
        assert r.passed, r.meta

    def test_exact_ratios(self, large):
        r2, r4 = S.exact_moment_ratios(large, 1000)
        assert abs(r2 - 1) < 0.01 and abs(r4 - 1) < 0.02

    def test_report_serializes(self, triangular):
        r = S.verify_moments(triangular, 100, 2000, seed=5)
        json.dumps(r.to_dict())
