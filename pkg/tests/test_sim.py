from dataclasses import replace

import numpy as np
import pytest
from scipy import integrate

from memkit.data import AlignedPanel, DistKind, ObservationSeries, UniParams
from memkit.diagnostics import acf
from memkit.dists import calibrate, pdf
from memkit.errors import InvalidSpec
from memkit.mem import xi_filter
from memkit.sim import (
    Constant,
    DgpSpec,
    PiecewiseLinear,
    Sinusoid,
    replication_seeds,
    simulate,
    tau_path,
)
from memkit.vmem import vxi_filter

P = UniParams(0.705, 0.10, 0.15)


class TestTauPath:
    @pytest.mark.parametrize("profile", [Constant(), Sinusoid(0.3), Sinusoid(0.5, 2.0, 1.0), PiecewiseLinear(((0, 1), (0.5, 2), (1, 0.5)))])
    def test_mean_one(self, profile):
        assert tau_path(profile, 1234).mean() == pytest.approx(1.0, abs=1e-14)

    def test_sinusoid_shape(self):
        tau = tau_path(Sinusoid(0.3, 1.0), 1000)
        ref = 1 + 0.3 * np.cos(2 * np.pi * np.arange(1000) / 1000)
        np.testing.assert_allclose(tau, ref / ref.mean(), rtol=1e-14)

    @pytest.mark.parametrize("profile", [Sinusoid(1.0), Sinusoid(-0.1), PiecewiseLinear(((0, 1), (1, 0)))])
    def test_invalid(self, profile):
        with pytest.raises(InvalidSpec):
            tau_path(profile, 100)


class TestSimulateUnivariate:
    def test_deterministic(self, gamma015):
        spec = DgpSpec(P, 15.0, Sinusoid(0.3), gamma015, seed=7)
        a, b = simulate(spec, 500), simulate(spec, 500)
        assert a.data.values.tobytes() == b.data.values.tobytes()
        assert a.data.returns.tobytes() == b.data.returns.tobytes()

    def test_seed_matters(self, gamma015):
        a = simulate(DgpSpec(P, 15.0, error=gamma015, seed=1), 200)
        b = simulate(DgpSpec(P, 15.0, error=gamma015, seed=2), 200)
        assert not np.array_equal(a.data.values, b.data.values)

    def test_degenerate_noise(self):
        sim = simulate(DgpSpec(P, 15.0, Sinusoid(0.3), calibrate("gamma", 1e-8), seed=3), 2000)
        ratio = sim.data.values / (15.0 * sim.tau * sim.xi)
        assert np.max(np.abs(ratio - 1)) < 1e-3

    def test_residual_recovery(self, uni_sim_tau):
        s = uni_sim_tau
        eps = s.data.values / (s.mu * s.tau * s.xi)
        np.testing.assert_allclose(eps, s.eps, rtol=1e-12, atol=0)

    def test_filter_reproduces_true_xi(self, uni_sim_tau):
        s = uni_sim_tau
        st = xi_filter(P, s.data.values / (s.mu * s.tau), s.neg)
        np.testing.assert_allclose(st.xi, s.xi, rtol=1e-10)

    def test_indicator_from_returns(self, uni_sim):
        np.testing.assert_array_equal(uni_sim.data.neg_indicator, uni_sim.neg)
        assert abs(uni_sim.neg.mean() - 0.5) < 0.05

    def test_whiteness_without_dynamics(self, gamma015):
        flat = UniParams(0.5, 0.0, 0.0)
        sim = simulate(DgpSpec(flat, 10.0, error=gamma015, seed=4), 4000)
        np.testing.assert_array_equal(sim.xi, 1.0)
        np.testing.assert_allclose(sim.data.values, 10.0 * sim.eps, rtol=1e-15)
        r = acf(sim.data.values, 20)
        assert np.sum(np.abs(r.acf[1:]) > r.band) <= 3

    def test_returns_are_daily_scale(self, uni_sim):
        assert isinstance(uni_sim.data, ObservationSeries)
        assert np.all(np.abs(uni_sim.data.returns) < 0.5)

    @pytest.mark.parametrize(
        "kw",
        [
            {"neg_prob": 1.5},
            {"mu": -1.0},
            {"error": None},
        ],
    )
    def test_invalid_spec(self, gamma015, kw):
        spec = replace(DgpSpec(P, 15.0, error=gamma015, seed=1), **kw)
        with pytest.raises(InvalidSpec):
            simulate(spec, 500)

    def test_too_short(self, gamma015):
        with pytest.raises(InvalidSpec):
            simulate(DgpSpec(P, 15.0, error=gamma015), 99)


def _central_moment4(spec):
    f = lambda x: (x - 1) ** 4 * pdf(spec, x)
    return integrate.quad(f, 0, np.inf, limit=400, epsabs=1e-12)[0]


@pytest.mark.slow
@pytest.mark.parametrize("kind", list(DistKind))
def test_error_moments_large_sample(kind):
    spec = calibrate(kind, 0.15)
    sim = simulate(DgpSpec(UniParams(0.5, 0.0, 0.0), 1.0, error=spec, seed=11), 1_000_000)
    eps = sim.eps
    assert abs(eps.mean() - 1) < 0.005
    se_var = np.sqrt((_central_moment4(spec) - 0.15**2) / eps.size)
    assert abs(eps.var() - 0.15) < 3 * se_var


class TestSimulateVector:
    def test_panel(self, vec_sim):
        assert isinstance(vec_sim.data, AlignedPanel)
        assert vec_sim.data.X.shape == (3000, 2)
        assert vec_sim.data.labels == ("sim1", "sim2")

    def test_residual_recovery(self, vec_sim_tau):
        s = vec_sim_tau
        E = s.data.X / (s.tau[:, None] * s.mu[None, :] * s.xi)
        np.testing.assert_allclose(E, s.eps, rtol=1e-12, atol=0)

    def test_filter_reproduces_true_xi(self, vec_sim_tau, vec_spec):
        s = vec_sim_tau
        st = vxi_filter(vec_spec.params, s.data.X / (s.tau[:, None] * s.mu[None, :]), s.neg)
        np.testing.assert_allclose(st.Xi, s.xi, rtol=1e-10)

    def test_copula_dependence(self, vec_sim):
        rho = np.corrcoef(vec_sim.eps.T)[0, 1]
        assert 0.4 < rho < 0.6
        np.testing.assert_allclose(vec_sim.eps.mean(axis=0), 1.0, atol=0.03)

    def test_independent_without_dependence(self, vec_spec):
        sim = simulate(replace(vec_spec, dependence=None), 3000)
        assert abs(np.corrcoef(sim.eps.T)[0, 1]) < 0.06

    def test_bad_dependence(self, vec_spec):
        with pytest.raises(InvalidSpec):
            simulate(replace(vec_spec, dependence=np.array([[1.0, 2.0], [2.0, 1.0]])), 200)
        with pytest.raises(InvalidSpec):
            simulate(replace(vec_spec, dependence=np.eye(3)), 200)

    def test_per_series_errors(self, vec_spec):
        spec = replace(vec_spec, error=[calibrate("gamma", 0.1), calibrate("lognormal", 0.3)])
        sim = simulate(spec, 20000)
        assert sim.eps[:, 0].var() == pytest.approx(0.1, rel=0.1)
        assert sim.eps[:, 1].var() == pytest.approx(0.3, rel=0.1)

    def test_wrong_error_count(self, vec_spec):
        with pytest.raises(InvalidSpec):
            simulate(replace(vec_spec, error=[calibrate("gamma", 0.1)] * 3), 200)


class TestSeeds:
    def test_distinct_and_reproducible(self):
        a = replication_seeds(20240101, 50)
        assert a == replication_seeds(20240101, 50)
        assert len(set(a)) == 50
        assert replication_seeds(20240101, 10) == a[:10]
