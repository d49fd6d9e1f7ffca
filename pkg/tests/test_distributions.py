import numpy as np
import pytest
from scipy import integrate

from hks.distributions import DistributionSpec, cdf, parse_spec, sample
from hks.experiments import local_density_specs


class TestParse:
    @pytest.mark.parametrize(
        "text, family",
        [("normal:0,1", "normal"), ("uniform:-sqrt(3),sqrt(3)", "uniform"), ("t:3", "student_t"),
         ("piecewise:0,1,2/1,3", "piecewise"), ("mixture:0.5*normal:0,1+0.5*uniform:0,1", "mixture")],
    )
    def test_families(self, text, family):
        assert parse_spec(text).family == family

    def test_sqrt(self):
        assert parse_spec("uniform:-sqrt(3),sqrt(3)").params == pytest.approx((-np.sqrt(3), np.sqrt(3)))

    @pytest.mark.parametrize("text", ["foo:1", "normal", "normal:0,-1", "uniform:1,0", "t:0", "mixture:0.3*normal:0,1", "normal:a,b"])
    def test_rejects(self, text):
        with pytest.raises(ValueError):
            parse_spec(text)

    @pytest.mark.parametrize("text", ["normal:0,1.2", "t:3", "mixture:0.97*normal:0,1+0.03*uniform:2.5,3.5"])
    def test_round_trip(self, text):
        s = parse_spec(text)
        assert parse_spec(s.to_string()) == s


class TestCdf:
    def test_values(self):
        assert cdf(DistributionSpec.normal(), 0.0) == 0.5
        assert cdf(DistributionSpec.uniform(0, 1), 0.25) == 0.25
        assert cdf(DistributionSpec.student_t(3), 0.0) == 0.5

    def test_piecewise(self):
        d = DistributionSpec.piecewise([0, 1, 2], [1, 3])
        assert d.cdf(1.0) == pytest.approx(0.25)
        assert d.ppf(0.25) == pytest.approx(1.0)
        assert d.pdf(1.5) == pytest.approx(0.75)


@pytest.mark.parametrize(
    "spec",
    [DistributionSpec.normal(0.3, 1.2), DistributionSpec.uniform(-1, 2), DistributionSpec.student_t(7),
     DistributionSpec.piecewise([0, 0.5, 1], [1, 3]), *local_density_specs()["tail"], *local_density_specs()["piecewise"]],
)
def test_mass_and_moments(spec):
    assert spec.total_mass() == pytest.approx(1.0, abs=1e-8)
    lo, hi = spec.support
    lo, hi = max(lo, -60), min(hi, 60)
    for j in (1, 2, 3):
        num = integrate.quad(lambda v: v**j * spec.pdf(v), lo, hi, limit=400, points=[0, 0.5, 2.5, 3.5] if hi > 3.5 else None)[0]
        assert spec.moment(j) == pytest.approx(num, rel=1e-6, abs=1e-8)


class TestSample:
    def test_normal_moments(self):
        v = sample(DistributionSpec.normal(), 10**6, 0)
        assert abs(v.mean()) < 0.01 and abs(v.var() - 1) < 0.01

    def test_uniform_mean(self):
        assert abs(sample(DistributionSpec.uniform(0, 1), 10**6, 1).mean() - 0.5) < 0.002

    def test_t_median(self):
        assert abs(np.median(sample(DistributionSpec.student_t(3), 10**6, 2))) < 0.005

    def test_variance_convention(self):
        v = sample(parse_spec("normal:0,1.2"), 10**6, 3)
        assert abs(v.var() - 1.44) < 0.01

    def test_deterministic(self):
        d = parse_spec("mixture:0.5*normal:0,1+0.5*t:3")
        assert np.array_equal(sample(d, 100, 7), sample(d, 100, 7))

    def test_n_positive(self):
        with pytest.raises(ValueError):
            sample(DistributionSpec.normal(), 0, 1)
