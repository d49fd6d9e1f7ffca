import io

import numpy as np
import pytest
from scipy.stats import norm

from hks.core import TwoSamples
from hks.distributions import DistributionSpec, parse_spec
from hks.oracles import (
    brute_force_statistic,
    grid_bound,
    population_ipm,
    population_ipm_detail,
    witness_function,
)
from hks.streams import stream

N01 = DistributionSpec.normal()


class TestBruteForce:
    def test_singletons(self, singleton):
        grid = np.linspace(-3, 3, 10**6)
        v = brute_force_statistic(singleton, 2, grid)
        assert abs(v - 1.5) <= grid_bound(singleton, 2, 6 / (10**6 - 1))
        assert brute_force_statistic(singleton, 2, [0.0]) == 1.5

    def test_equal(self):
        s = TwoSamples([1.0, -2.0], [-2.0, 1.0])
        assert brute_force_statistic(s, 3, np.linspace(-5, 5, 101)) == 0.0

    def test_minus_side_used(self):
        s = TwoSamples([-1.0], [-2.0])
        assert brute_force_statistic(s, 2, [0.0]) == pytest.approx(1.5)
        assert brute_force_statistic(s, 0, [-1.5]) == 1.0

    def test_empty_grid(self, singleton):
        with pytest.raises(ValueError):
            brute_force_statistic(singleton, 1, [])


class TestPopulationIpm:
    def test_k0_mean_shift(self):
        assert population_ipm(N01, DistributionSpec.normal(0.2, 1), 0) == pytest.approx(2 * norm.cdf(0.1) - 1, abs=1e-6)

    @pytest.mark.parametrize("k", [0, 1, 2, 3])
    @pytest.mark.parametrize(
        "spec", ["normal:0.3,2", "uniform:-1,2", "t:5", "piecewise:0,1,2/1,3", "mixture:0.97*normal:0,1+0.03*uniform:2.5,3.5"]
    )
    def test_identity(self, spec, k):
        d = parse_spec(spec)
        assert population_ipm(d, d, k, form="split") <= 1e-8
        assert population_ipm(d, d, k) <= 1e-8

    @pytest.mark.parametrize("k", [0, 1, 2])
    @pytest.mark.parametrize("q", ["normal:0,1.2", "normal:0.2,1", "t:3"])
    def test_positive_for_distinct(self, q, k):
        assert population_ipm(N01, parse_spec(q), k, form="split") > 1e-3

    def test_k0_equals_cdf_gap(self):
        q = parse_spec("t:3")
        t = np.linspace(-10, 10, 200001)
        direct = np.max(np.abs(N01.cdf(t) - q.cdf(t)))
        assert population_ipm(N01, q, 0) == pytest.approx(direct, abs=1e-6)

    def test_k1_matched_means_monte_carlo(self):
        # |E(X-t)_+ - E(Y-t)_+| maximized over a t-grid with 10^7 draws each
        q = DistributionSpec.normal(0, 1.2)
        v = population_ipm(N01, q, 1)
        rng = stream(0, "ipm-mc")
        X = np.sort(rng.standard_normal(10**7))
        Y = np.sort(1.2 * rng.standard_normal(10**7))
        ts = np.linspace(-3, 3, 61)

        def tail_mean(S, t):
            cs = np.concatenate([[0.0], np.cumsum(S[::-1])])[::-1]
            j = np.searchsorted(S, t, side="right")
            return (cs[j] - (S.size - j) * t) / S.size

        mc = np.max(np.abs(tail_mean(X, ts) - tail_mean(Y, ts)))
        assert v == pytest.approx(mc, abs=2e-3)
        assert v == pytest.approx(0.2 / np.sqrt(2 * np.pi), abs=1e-6)

    def test_explicit_requires_precondition(self):
        with pytest.raises(ValueError, match="moment 2"):
            population_ipm(N01, DistributionSpec.normal(0, 1.2), 2)
        with pytest.raises(ValueError, match="moment 1"):
            population_ipm(N01, DistributionSpec.normal(0.2, 1), 1)

    def test_nonnegative_support_regime(self):
        p, q = DistributionSpec.uniform(0, 1), DistributionSpec.uniform(0, 2)
        # E X^2 / 2 differs by (4/3 - 1/3)/2 = 0.5 at t = 0, the largest gap
        assert population_ipm(p, q, 2) == pytest.approx(0.5, abs=1e-6)
        assert population_ipm(p, q, 2, form="split") == pytest.approx(0.5, abs=1e-6)

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_forms_agree_on_matched_moments(self, k):
        # symmetric pair with equal variance: raw moments 1 to 3 agree
        p = DistributionSpec.uniform(-np.sqrt(3), np.sqrt(3))
        assert population_ipm(N01, p, k) == pytest.approx(population_ipm(N01, p, k, form="split"), abs=1e-7)

    def test_split_hand_value(self):
        # E X_+^2/2: 1/4 for N(0,1), 1.44/4 for N(0,1.44)
        r = population_ipm_detail(N01, DistributionSpec.normal(0, 1.2), 2, form="split")
        assert r.value == pytest.approx(0.11, abs=1e-6) and r.t == 0.0

    def test_bad_form(self):
        with pytest.raises(ValueError):
            population_ipm(N01, N01, 1, form="nope")


class TestWitness:
    def test_singleton(self, singleton):
        w = witness_function(singleton, 2)
        assert (w.t_star, w.side, w.sign, w.zero_gap) == (0.0, "plus", -1, False)
        pos = w.grid > 0
        expect = -(w.grid[pos] ** 2) / np.max(w.grid[pos] ** 2)
        np.testing.assert_allclose(w.values[pos], expect)
        assert np.all(w.values[~pos] == 0)
        assert np.max(np.abs(w.values)) == 1.0

    def test_zero_gap(self):
        w = witness_function(TwoSamples([1.0, 2.0], [2.0, 1.0]), 3)
        assert w.zero_gap and w.t_star == 0.0 and w.side == "plus"

    def test_step(self):
        w = witness_function(TwoSamples([0.0, 1.0], [2.0, 3.0]), 0)
        assert set(np.unique(np.abs(w.values))) <= {0.0, 1.0}

    def test_csv(self, singleton):
        buf = io.StringIO()
        witness_function(singleton, 1, grid_points=4).write_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0].startswith("# t_star=") and "side=plus" in lines[0]
        assert lines[1] == "t,value" and len(lines) == 6
