import numpy as np
import pytest

from numerics.exceptions import ConfigurationError
from numerics.random_streams import Purpose, RngStream
from problems.aggregate import (
    delta_inf,
    global_gradient,
    global_infimum,
    global_value,
    quadratic_global_minimizer,
)
from problems.estimation import (
    estimate_global_infimum,
    estimate_noise_bound,
    estimate_smoothness,
    finite_difference_gradient,
)
from problems.logistic import LogisticProblem
from problems.mlp import MlpProblem
from problems.quadratic import QuadraticProblem, make_heterogeneous_quadratics


def shifted_square(center: float) -> QuadraticProblem:
    """1/2 (x - center)^2 in one dimension."""
    return QuadraticProblem(A=np.eye(1), b=np.array([center]), c=0.5 * center ** 2)


def relative_error(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-12)


@pytest.fixture
def small_logistic(blobs):
    return LogisticProblem(blobs.features, blobs.labels, blobs.n_classes, batch_size=16, ridge=1e-2)


@pytest.fixture
def small_mlp(blobs):
    return MlpProblem(blobs.features, blobs.labels, blobs.n_classes, hidden=5, batch_size=16, ridge=1e-2)


class TestQuadratic:
    def test_gradient_of_half_square(self):
        p = QuadraticProblem(A=np.eye(2), b=np.zeros(2))
        np.testing.assert_array_equal(p.full_gradient(np.array([2.0, -1.0])), [2.0, -1.0])

    def test_gradient_vanishes_at_minimizer(self, quadratics):
        for p in quadratics:
            assert np.linalg.norm(p.full_gradient(p.minimizer())) <= 1e-12

    def test_noiseless_stochastic_gradient_is_exact(self, noiseless_quadratics):
        p = noiseless_quadratics[0]
        x = np.linspace(-1, 1, p.dimension)
        np.testing.assert_array_equal(p.stochastic_gradient(x, RngStream(1)), p.full_gradient(x))

    def test_stochastic_gradient_is_unbiased(self):
        d, draws, sigma = 3, 100_000, 1.0
        p = QuadraticProblem(A=np.diag([1.0, 2.0, 3.0]), b=np.ones(d), noise_bound=sigma ** 2)
        x = np.array([0.5, -0.5, 1.0])
        gen = RngStream(5, purpose=Purpose.GRADIENT).generator()
        mean = np.mean([p.stochastic_gradient(x, gen) for _ in range(draws)], axis=0)
        assert np.all(np.abs(mean - p.full_gradient(x)) <= 3 * sigma / np.sqrt(draws))

    def test_variance_certificate(self, quadratics):
        samples = 2000
        p = quadratics[0]
        points = [np.zeros(p.dimension), np.ones(p.dimension)]
        estimate = estimate_noise_bound(p, points, samples, RngStream(3, purpose=Purpose.ESTIMATE))
        assert estimate <= p.noise_bound * (1 + 5 / np.sqrt(samples))

    def test_smoothness_certificate(self, quadratics):
        gen = np.random.default_rng(0)
        for p in quadratics[:3]:
            for _ in range(1000):
                x, y = gen.standard_normal((2, p.dimension))
                gap = np.linalg.norm(p.full_gradient(x) - p.full_gradient(y))
                assert gap <= p.smoothness * np.linalg.norm(x - y) + 1e-9

    def test_lower_bound_certificate(self, quadratics):
        gen = np.random.default_rng(1)
        for p in quadratics[:3]:
            for _ in range(1000):
                assert p.value(3 * gen.standard_normal(p.dimension)) >= p.lower_bound - 1e-12

    def test_exact_prox_solves_regularized_problem(self, noiseless_quadratics):
        p, gamma = noiseless_quadratics[0], 0.7
        x = np.ones(p.dimension)
        y = p.exact_prox(x, gamma)
        np.testing.assert_allclose(p.full_gradient(y) + (y - x) / gamma, 0.0, atol=1e-10)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ConfigurationError, match="symmetric"):
            QuadraticProblem(A=np.array([[1.0, 2.0], [0.0, 1.0]]), b=np.zeros(2))
        with pytest.raises(ConfigurationError, match="semidefinite"):
            QuadraticProblem(A=-np.eye(2), b=np.zeros(2))
        with pytest.raises(ConfigurationError, match="unbounded"):
            QuadraticProblem(A=np.diag([1.0, 0.0]), b=np.array([0.0, 1.0]))
        with pytest.raises(ConfigurationError, match="Dimension mismatch"):
            QuadraticProblem(A=np.eye(2), b=np.zeros(2)).full_gradient(np.zeros(3))


class TestHeterogeneousQuadratics:
    def test_smoothness_is_spectrum_max(self, quadratics):
        assert all(p.smoothness == pytest.approx(1.0) for p in quadratics)

    def test_seed_fixes_instance(self):
        a = make_heterogeneous_quadratics(3, 4, seed=9)
        b = make_heterogeneous_quadratics(3, 4, seed=9)
        for p, q in zip(a, b):
            np.testing.assert_array_equal(p.A, q.A)
            np.testing.assert_array_equal(p.b, q.b)

    def test_zero_radius_is_homogeneous(self):
        objectives = make_heterogeneous_quadratics(5, 6, radius=0.0, seed=2)
        assert delta_inf(objectives) == pytest.approx(0.0, abs=1e-12)

    def test_all_problems_reported(self):
        with pytest.raises(ConfigurationError) as info:
            make_heterogeneous_quadratics(0, 0, spectrum_min=2.0, spectrum_max=1.0, sigma_sq=-1)
        assert len(info.value.problems) == 4


class TestAggregate:
    def test_delta_inf_of_opposite_shifts(self):
        objectives = [shifted_square(1.0), shifted_square(-1.0)]
        assert global_infimum(objectives) == pytest.approx(0.5)
        assert delta_inf(objectives) == pytest.approx(0.5)

    def test_delta_inf_zero_for_identical_and_single_workers(self, quadratics):
        assert delta_inf([quadratics[0]] * 4) == pytest.approx(0.0, abs=1e-12)
        assert delta_inf(quadratics[:1]) == pytest.approx(0.0, abs=1e-12)

    def test_delta_inf_rejects_inconsistent_infimum(self):
        with pytest.raises(ConfigurationError, match="Inconsistent"):
            delta_inf([shifted_square(1.0), shifted_square(-1.0)], f_inf=-1.0)

    def test_global_minimizer_is_stationary(self, quadratics):
        x_star = quadratic_global_minimizer(quadratics)
        assert np.linalg.norm(global_gradient(quadratics, x_star)) <= 1e-10
        assert global_value(quadratics, x_star) == pytest.approx(global_infimum(quadratics))

    def test_infimum_needs_quadratics(self, small_logistic):
        with pytest.raises(ConfigurationError):
            global_infimum([small_logistic])

    def test_estimated_infimum_is_close_for_quadratics(self, noiseless_quadratics):
        x0 = np.ones(noiseless_quadratics[0].dimension)
        estimate = estimate_global_infimum(noiseless_quadratics, x0, steps=3000)
        assert estimate >= global_infimum(noiseless_quadratics) - 1e-12
        assert estimate == pytest.approx(global_infimum(noiseless_quadratics), abs=1e-6)


class TestClassification:
    def test_logistic_gradient_matches_finite_differences(self, small_logistic):
        gen = np.random.default_rng(4)
        for _ in range(20):
            x = 0.5 * gen.standard_normal(small_logistic.dimension)
            fd = finite_difference_gradient(small_logistic.value, x)
            assert relative_error(small_logistic.full_gradient(x), fd) <= 1e-5

    def test_mlp_gradient_matches_finite_differences(self, small_mlp):
        assert small_mlp.dimension <= 200
        gen = np.random.default_rng(5)
        for _ in range(20):
            x = small_mlp.initial_point(gen) + 0.1 * gen.standard_normal(small_mlp.dimension)
            fd = finite_difference_gradient(small_mlp.value, x)
            assert relative_error(small_mlp.full_gradient(x), fd) <= 1e-5

    def test_full_batch_minibatch_is_exact(self, blobs):
        p = LogisticProblem(blobs.features, blobs.labels, blobs.n_classes, batch_size=len(blobs))
        x = np.full(p.dimension, 0.01)
        np.testing.assert_array_equal(p.stochastic_gradient(x, RngStream(2)), p.full_gradient(x))

    def test_minibatch_gradient_is_unbiased(self, small_logistic):
        x = np.full(small_logistic.dimension, 0.05)
        gen = RngStream(8, purpose=Purpose.MINIBATCH).generator()
        mean = np.mean([small_logistic.stochastic_gradient(x, gen) for _ in range(4000)], axis=0)
        np.testing.assert_allclose(mean, small_logistic.full_gradient(x), atol=0.05)

    def test_logistic_smoothness_certificate(self, small_logistic):
        gen = np.random.default_rng(6)
        for _ in range(1000):
            x, y = gen.standard_normal((2, small_logistic.dimension))
            gap = np.linalg.norm(small_logistic.full_gradient(x) - small_logistic.full_gradient(y))
            assert gap <= small_logistic.smoothness * np.linalg.norm(x - y) + 1e-9

    def test_loss_at_zero_is_log_classes(self, small_logistic):
        x0 = small_logistic.initial_point()
        assert small_logistic.value(x0) == pytest.approx(np.log(small_logistic.n_classes))
        assert small_logistic.value(x0) >= small_logistic.lower_bound

    def test_accuracy_bounds(self, small_logistic, blobs):
        acc = small_logistic.accuracy(np.zeros(small_logistic.dimension), blobs.features, blobs.labels)
        assert 0.0 <= acc <= 1.0
        assert np.isnan(small_logistic.accuracy(np.zeros(small_logistic.dimension),
                                                blobs.features[:0], blobs.labels[:0]))

    def test_clones_keep_original(self, small_mlp):
        noisy = small_mlp.with_noise_bound(2.0).with_smoothness(7.0)
        assert (noisy.noise_bound, noisy.smoothness) == (2.0, 7.0)
        assert (small_mlp.noise_bound, small_mlp.smoothness) == (0.0, 1.0)
        with pytest.raises(ConfigurationError):
            small_mlp.with_noise_bound(-1.0)

    def test_estimated_mlp_smoothness_is_positive(self, small_mlp):
        x0 = small_mlp.initial_point(np.random.default_rng(0))
        assert estimate_smoothness(small_mlp, x0, 1.0, 8, RngStream(0, purpose=Purpose.ESTIMATE)) > 0

    def test_rejects_bad_data(self, blobs):
        with pytest.raises(ConfigurationError):
            LogisticProblem(blobs.features, blobs.labels[:-1], blobs.n_classes)
        with pytest.raises(ConfigurationError):
            LogisticProblem(blobs.features, blobs.labels, n_classes=2)
        with pytest.raises(ConfigurationError):
            MlpProblem(blobs.features, blobs.labels, blobs.n_classes, hidden=0)
