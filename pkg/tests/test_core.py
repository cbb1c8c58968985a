import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.base import clone

from garchorder.core import (
    AsymmetricInnovationError,
    DivergenceError,
    GarchParams,
    GarchSimulator,
    InitialStateSpec,
    InnovationSpec,
    avgarch_m1,
    closed_form_variance,
    compose_g,
    garch11_m1,
    garch11_m2,
    logreturn_sums,
    quadratic_m2,
    recursion_from_label,
    simulate_paths,
)

TWO_POINT = InnovationSpec("discrete", support=((-1.0, 0.5), (1.0, 0.5)))


def iterate_variance(params, s2, eps_sq):
    for e in eps_sq:
        s2 = params.alpha0 + params.alpha1 * s2 * e + params.beta1 * s2
    return s2


class TestGarchParams:
    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            GarchParams(0.0, 0.1, 0.1)
        with pytest.raises(ValueError):
            GarchParams(0.1, -0.1, 0.1)

    def test_stationarity_guard(self):
        with pytest.raises(ValueError, match="stationarity"):
            GarchParams(0.1, 0.6, 0.5)
        p = GarchParams(0.1, 0.6, 0.5, unchecked=True)
        assert not p.stationary

    def test_unchecked_allows_zero_weights(self):
        p = GarchParams(0.3, 0.0, 0.0, unchecked=True)
        assert p.stationary


class TestInnovationSpec:
    def test_asymmetric_discrete_rejected(self):
        with pytest.raises(AsymmetricInnovationError):
            InnovationSpec("discrete", support=((-1.0, 0.3), (1.0, 0.7)))

    def test_probabilities_must_sum_to_one(self):
        with pytest.raises(ValueError):
            InnovationSpec("discrete", support=((-1.0, 0.5), (1.0, 0.4)))

    def test_student_df_floor(self):
        with pytest.raises(ValueError):
            InnovationSpec("student_t", df=4)

    @pytest.mark.parametrize("spec", [
        InnovationSpec(normalized=True),
        InnovationSpec("student_t", df=5, normalized=True),
        InnovationSpec("laplace", normalized=True),
        InnovationSpec("discrete", support=((-2.0, 0.25), (0.0, 0.5), (2.0, 0.25)), normalized=True),
    ])
    def test_normalized_unit_variance(self, spec):
        assert spec.moment(1) == pytest.approx(0.0, abs=1e-15)
        assert spec.moment(2) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("spec, beta2", [
        (InnovationSpec(), 3.0),
        (InnovationSpec("student_t", df=5, normalized=True), 9.0),
        (InnovationSpec("laplace", scale=2.0), 6.0),
        (TWO_POINT, 1.0),
    ])
    def test_exact_kurtosis(self, spec, beta2):
        assert spec.kurtosis() == pytest.approx(beta2, rel=1e-12)

    def test_ppf_matches_cdf(self):
        u = np.linspace(0.01, 0.99, 21)
        for spec in (InnovationSpec("student_t", df=7, normalized=True), InnovationSpec("laplace")):
            assert np.allclose(spec.cdf(spec.ppf(u)), u, atol=1e-10)

    def test_dict_round_trip(self):
        spec = InnovationSpec("student_t", df=5.0, normalized=True)
        assert InnovationSpec.from_dict(spec.to_dict()) == spec
        with pytest.raises(ValueError, match="unknown"):
            InnovationSpec.from_dict({"family": "gaussian", "sigma": 2})


class TestRecursions:
    @pytest.mark.parametrize("rec", [
        garch11_m1(GarchParams(0.1, 0.3, 0.5)),
        garch11_m2(GarchParams(0.1, 0.3, 0.5)),
        avgarch_m1(0.1, 0.3, 0.5),
        quadratic_m2(0.1, 0.2, 0.3, 0.1),
    ])
    def test_increasing_and_componentwise_convex(self, rec):
        rec.check()

    def test_check_rejects_concave_map(self):
        from garchorder.core import RecursionMap
        rec = RecursionMap("M1", lambda u, s: np.sqrt(u + s + 1.0), "concave")
        with pytest.raises(ValueError):
            rec.check()

    def test_m1_and_m2_forms_agree(self):
        p = GarchParams(0.1, 0.3, 0.5)
        m1, m2 = garch11_m1(p), garch11_m2(p)
        u, s = 1.7, 0.8
        assert m1(u, s) ** 2 == pytest.approx(m2(u * u, s * s), rel=1e-14)

    def test_label_builder(self):
        rec = recursion_from_label("avgarch_m1", {"omega": 0.1, "a": 0.3, "b": 0.5})
        assert rec.kind == "M1"
        with pytest.raises(ValueError, match="unknown recursion"):
            recursion_from_label("egarch", {})


class TestClosedForm:
    def test_one_step(self):
        p = GarchParams(0.1, 0.3, 0.5)
        assert closed_form_variance(p, 2.0, [0.7]) == pytest.approx(0.1 + 0.3 * 2.0 * 0.7 + 0.5 * 2.0)

    def test_two_steps_by_hand(self):
        assert closed_form_variance(GarchParams(0.1, 0.3, 0.5), 1.0, [1.0, 1.0]) == pytest.approx(0.82, rel=1e-15)

    def test_empty_sequence(self):
        with pytest.raises(ValueError):
            closed_form_variance(GarchParams(0.1, 0.3, 0.5), 1.0, [])

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0.01, 2.0), st.floats(0.0, 0.5), st.floats(0.0, 0.49), st.floats(0.01, 5.0),
           st.lists(st.floats(0.0, 9.0), min_size=1, max_size=60))
    def test_matches_iteration(self, a0, a1, b1, s2, eps_sq):
        p = GarchParams(a0, a1, b1, unchecked=True)
        expected = iterate_variance(p, s2, eps_sq)
        assert closed_form_variance(p, s2, eps_sq) == pytest.approx(expected, rel=1e-12)

    def test_compose_g_matches_closed_form(self):
        p = GarchParams(0.2, 0.25, 0.6)
        eps_sq = [0.3, 2.0, 0.1, 1.4]
        assert compose_g(garch11_m2(p), 1.5, eps_sq) == pytest.approx(
            closed_form_variance(p, 1.5, eps_sq), rel=1e-13)


class TestSimulation:
    def test_two_point_hand_values(self):
        rec = garch11_m2(GarchParams(0.1, 0.3, 0.5))
        batch = simulate_paths(rec, TWO_POINT, InitialStateSpec("constant", 1.0), 3, 50, seed=7)
        assert np.allclose(batch.sigma[:, 0] ** 2, 1.0)
        assert np.allclose(batch.sigma[:, 1] ** 2, 0.9, rtol=1e-15)
        assert np.allclose(batch.sigma[:, 2] ** 2, 0.82, rtol=1e-15)
        assert np.array_equal(batch.x, batch.sigma * batch.eps)

    def test_fixed_point_without_feedback(self):
        p = GarchParams(0.3, 0.0, 0.0, unchecked=True)
        batch = simulate_paths(garch11_m2(p), InnovationSpec(), InitialStateSpec("constant", 0.3),
                               5, 100, seed=1)
        # the variance state is exactly alpha0; sigma is its square root
        assert np.all(batch.sigma == math.sqrt(0.3))

    def test_same_seed_bit_identical_and_worker_independent(self):
        rec = garch11_m2(GarchParams(0.2, 0.2, 0.2))
        init = InitialStateSpec("half_gaussian", 1.0)
        a = simulate_paths(rec, InnovationSpec(), init, 20, 9000, seed=11, n_jobs=1)
        b = simulate_paths(rec, InnovationSpec(), init, 20, 9000, seed=11, n_jobs=3)
        assert np.array_equal(a.x, b.x) and np.array_equal(a.sigma, b.sigma)
        c = simulate_paths(rec, InnovationSpec(), init, 20, 9000, seed=12)
        assert not np.array_equal(a.x, c.x)

    def test_path_prefix_stable(self):
        rec = garch11_m2(GarchParams(0.2, 0.2, 0.2))
        init = InitialStateSpec("half_gaussian", 1.0)
        small = simulate_paths(rec, InnovationSpec(), init, 10, 100, seed=3)
        large = simulate_paths(rec, InnovationSpec(), init, 10, 5000, seed=3)
        assert np.array_equal(small.x, large.x[:100])

    def test_common_random_numbers(self):
        rec = garch11_m2(GarchParams(0.2, 0.2, 0.2))
        init = InitialStateSpec("constant", 1.0)
        a = simulate_paths(rec, InnovationSpec(), init, 5, 200, seed=5)
        b = simulate_paths(rec, InnovationSpec(scale=2.0), init, 5, 200, seed=5)
        assert np.allclose(b.eps, 2.0 * a.eps, rtol=1e-15)

    def test_divergence_reports_path_and_step(self):
        p = GarchParams(1.0, 50.0, 50.0, unchecked=True)
        with pytest.raises(DivergenceError) as info:
            simulate_paths(garch11_m2(p), InnovationSpec(), InitialStateSpec("constant", 1.0),
                           400, 10, seed=2)
        assert info.value.step > 0 and 0 <= info.value.path < 10

    def test_symmetric_sums_centred(self):
        sums = GarchSimulator(n_steps=50, n_paths=100_000, random_state=42, n_jobs=4).sample_sums()
        se = sums.std(ddof=1) / math.sqrt(sums.size)
        assert abs(sums.mean()) < 4 * se

    def test_csv_rows(self, tmp_path):
        batch = GarchSimulator(n_steps=4, n_paths=3, random_state=0).simulate()
        path = tmp_path / "paths.csv"
        batch.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "path_id,S_n,sigma_n" and len(lines) == 4
        assert float(lines[1].split(",")[1]) == logreturn_sums(batch)[0]


class TestSimulatorEstimator:
    def test_params_round_trip(self):
        sim = GarchSimulator(alpha1=0.3, random_state=4)
        twin = clone(sim).set_params(beta1=0.4)
        assert twin.get_params()["alpha1"] == 0.3 and twin.beta1 == 0.4

    def test_seed_required(self):
        with pytest.raises(ValueError, match="random_state"):
            GarchSimulator(n_paths=10).simulate()

    def test_m1_and_m2_coordinates_agree(self):
        kw = dict(n_steps=8, n_paths=50, random_state=9, init=InitialStateSpec("constant", 1.0))
        m2 = GarchSimulator(coordinates="M2", **kw).simulate()
        m1 = GarchSimulator(coordinates="M1", **kw).simulate()
        assert np.allclose(m1.x, m2.x, rtol=1e-12)
