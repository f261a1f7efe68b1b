import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from memkit.data import (
    AlignedPanel,
    DistKind,
    DistSpec,
    FitResult,
    ObservationSeries,
    UniParams,
    VecParams,
    unpack_vec,
    validate_panel,
    vec_param_index,
    vec_param_names,
)
from memkit.errors import (
    EmptyIntersection,
    MismatchedReturns,
    NegativeValue,
    StationarityError,
    TooFewObservations,
)
from memkit.mem import fit_mem


def _series(start, n, label="s", seed=0, returns=True):
    rng = np.random.default_rng(seed)
    dates = np.busday_offset(np.datetime64(start, "D"), np.arange(n), roll="forward")
    r = rng.standard_normal(n) if returns else np.full(n, np.nan)
    return ObservationSeries(dates, rng.gamma(5.0, 3.0, n), r, label)


class TestObservationSeries:
    def test_arrays_are_read_only(self):
        s = _series("2020-01-01", 60)
        with pytest.raises(ValueError):
            s.values[0] = 1.0

    def test_negative_value_rejected(self):
        s = _series("2020-01-01", 60)
        v = s.values.copy()
        v[3] = -0.1
        with pytest.raises(NegativeValue):
            ObservationSeries(s.dates, v, s.returns, "bad")

    def test_dates_must_increase(self):
        s = _series("2020-01-01", 60)
        d = s.dates.copy()
        d[[4, 5]] = d[[5, 4]]
        with pytest.raises(ValueError):
            ObservationSeries(d, s.values, s.returns, "bad")

    def test_length_mismatch(self):
        s = _series("2020-01-01", 60)
        with pytest.raises(MismatchedReturns):
            ObservationSeries(s.dates, s.values, s.returns[:-1], "bad")

    def test_neg_indicator(self):
        s = _series("2020-01-01", 60)
        np.testing.assert_array_equal(s.neg_indicator, (s.returns < 0).astype(float))

    def test_round_trip(self):
        s = _series("2020-01-01", 60)
        back = ObservationSeries.from_dict(json.loads(json.dumps(s.to_dict())))
        np.testing.assert_array_equal(back.dates, s.dates)
        np.testing.assert_array_equal(back.values, s.values)
        np.testing.assert_array_equal(back.returns, s.returns)
        assert back.label == s.label


class TestValidatePanel:
    def test_identical_dates_keep_length(self):
        a = _series("2020-01-01", 80, "a", 1)
        b = ObservationSeries(a.dates, a.values * 2, a.returns, "b")
        p = validate_panel([a, b])
        assert p.T == 80 and p.K == 2
        np.testing.assert_array_equal(p.X[:, 1], 2 * a.values)

    def test_intersection_starts_at_later_series(self):
        a = _series("2000-01-03", 400, "a", 1)
        b = _series("2000-06-01", 200, "b", 2, returns=False)
        p = validate_panel([a, b])
        assert p.dates[0] == b.dates[0]
        assert p.T == len(np.intersect1d(a.dates, b.dates))

    def test_returns_from_first_series(self):
        a = _series("2020-01-01", 80, "a", 1)
        b = _series("2020-01-01", 80, "b", 2, returns=False)
        np.testing.assert_array_equal(validate_panel([a, b]).returns, a.returns)

    def test_too_small_intersection(self):
        a = _series("2000-01-03", 100, "a", 1)
        b = _series("2000-04-20", 100, "b", 2)
        with pytest.raises(EmptyIntersection):
            validate_panel([a, b])

    def test_conflicting_signs(self):
        a = _series("2020-01-01", 80, "a", 1)
        b = ObservationSeries(a.dates, a.values, -a.returns, "b")
        with pytest.raises(MismatchedReturns):
            validate_panel([a, b])

    def test_first_series_needs_returns(self):
        a = _series("2020-01-01", 80, "a", 1, returns=False)
        b = _series("2020-01-01", 80, "b", 2)
        with pytest.raises(MismatchedReturns):
            validate_panel([a, b])

    def test_short_series(self):
        with pytest.raises(TooFewObservations):
            validate_panel([_series("2020-01-01", 30)])

    def test_empty(self):
        with pytest.raises(EmptyIntersection):
            validate_panel([])

    def test_panel_round_trip(self):
        a = _series("2020-01-01", 80, "a", 1)
        b = _series("2020-01-01", 80, "b", 2, returns=False)
        p = validate_panel([a, b])
        q = AlignedPanel.from_dict(json.loads(json.dumps(p.to_dict())))
        np.testing.assert_array_equal(q.X, p.X)
        np.testing.assert_array_equal(q.dates, p.dates)
        assert q.labels == p.labels


class TestUniParams:
    def test_persistence(self):
        p = UniParams(0.705, 0.10, 0.15)
        assert p.beta1_star == pytest.approx(0.88, abs=1e-15)
        assert p.intercept == pytest.approx(0.12, abs=1e-15)

    @pytest.mark.parametrize("theta", [(0.9, 0.1, 0.1), (1.0, 0.0, 0.0), (-0.5, 0.1, 0.0), (np.nan, 0.1, 0.1)])
    def test_rejects_nonstationary(self, theta):
        with pytest.raises(StationarityError):
            UniParams(*theta)

    @given(
        st.floats(0.0, 0.7),
        st.floats(0.0, 0.2),
        st.floats(0.0, 0.2),
    )
    def test_dict_round_trip_is_exact(self, b, a, g):
        p = UniParams(b, a, g)
        q = UniParams.from_dict(json.loads(json.dumps(p.to_dict())))
        assert q == p


class TestVecParams:
    def test_layout(self):
        K = 3
        names = vec_param_names(K)
        assert len(names) == K * (K + 2)
        assert names[vec_param_index(K, "alpha", 2, 3)] == "alpha[2,3]"
        assert names[vec_param_index(K, "gamma", 3)] == "gamma[3,3]"
        assert names[vec_param_index(K, "beta", 2)] == "beta[2,2]"

    def test_vector_round_trip(self):
        b = np.diag([0.6, 0.5])
        A = np.array([[0.1, 0.05], [0.02, 0.2]])
        g = np.diag([0.1, 0.05])
        p = VecParams(b, A, g)
        q = VecParams.from_vector(p.to_vector(), 2)
        for m1, m2 in zip((p.beta1, p.alpha1, p.gamma1), (q.beta1, q.alpha1, q.gamma1)):
            np.testing.assert_array_equal(m1, m2)
        bb, AA, gg = unpack_vec(p.to_vector(), 2)
        np.testing.assert_array_equal(bb, [0.6, 0.5])
        np.testing.assert_array_equal(AA, A)
        np.testing.assert_array_equal(gg, [0.1, 0.05])

    def test_rejects_offdiagonal_beta(self):
        b = np.array([[0.5, 0.1], [0.0, 0.5]])
        with pytest.raises(StationarityError):
            VecParams(b, np.eye(2) * 0.1, np.zeros((2, 2)))

    def test_rejects_explosive(self):
        A = np.array([[0.1, 0.5], [0.5, 0.1]])
        with pytest.raises(StationarityError):
            VecParams(np.eye(2) * 0.6, A, np.zeros((2, 2)))

    def test_spectral_radius_with_complex_eigenvalues(self):
        # beta* = [[0.6, 0.3], [-0.3, 0.6]] has eigenvalues 0.6 +- 0.3i
        A = np.array([[0.1, 0.3], [-0.3, 0.1]])
        p = VecParams(np.eye(2) * 0.5, A, np.zeros((2, 2)))
        assert p.spectral_radius == pytest.approx(np.hypot(0.6, 0.3), rel=1e-12)

    def test_dict_round_trip(self):
        p = VecParams(np.diag([0.6, 0.5]), np.array([[0.1, 0.05], [0.02, 0.2]]), np.diag([0.1, 0.05]))
        q = VecParams.from_dict(json.loads(json.dumps(p.to_dict())))
        np.testing.assert_array_equal(q.to_vector(), p.to_vector())


class TestDistSpec:
    def test_round_trip(self):
        s = DistSpec(DistKind.GAMMA, (4.0, 4.0), 0.25)
        assert DistSpec.from_dict(json.loads(json.dumps(s.to_dict()))) == s

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            DistSpec("gamma", (0.0, 1.0), 1.0)


class TestFitResult:
    def test_json_round_trip_bit_exact(self, uni_sim):
        x = uni_sim.data.values / uni_sim.data.values.mean()
        fit = fit_mem(x, uni_sim.data.neg_indicator)
        back = FitResult.from_json(fit.to_json())
        np.testing.assert_array_equal(back.theta, fit.theta)
        np.testing.assert_array_equal(back.avar, fit.avar)
        np.testing.assert_array_equal(back.xi, fit.xi)
        np.testing.assert_array_equal(back.residuals, fit.residuals)
        assert back.sigma2 == fit.sigma2
        assert back.kind == fit.kind

    def test_cov_is_avar_over_t(self, uni_sim):
        x = uni_sim.data.values / uni_sim.data.values.mean()
        fit = fit_mem(x, uni_sim.data.neg_indicator)
        np.testing.assert_allclose(fit.cov * fit.nobs, fit.avar, rtol=1e-15)
        assert np.all(fit.stderr > 0)
