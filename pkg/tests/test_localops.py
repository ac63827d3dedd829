import numpy as np
import pytest

from localops.operators import (
    GradientSteps,
    Proximal,
    apply_gradient_steps,
    apply_local,
    apply_prox,
    clamp_step,
    gradient_displacement,
    local_displacement,
    local_steps,
    prox_inner_step,
    step_scale,
    stream_purpose,
)
from numerics.exceptions import ConfigurationError, DivergenceError
from numerics.random_streams import Purpose, RngStream
from problems.quadratic import QuadraticProblem

STREAM = RngStream(3, worker=1, round=2)


class TestGradientSteps:
    def test_two_steps_on_half_square(self, half_square):
        y = apply_gradient_steps(half_square, np.array([1.0]), 0.1, 2, STREAM)
        assert y[0] == pytest.approx(0.81, abs=1e-15)

    def test_single_step_is_bit_exact(self, noiseless_quadratics):
        p = noiseless_quadratics[0]
        x = np.linspace(-2, 2, p.dimension)
        expected = x - 0.3 * p.full_gradient(x)
        np.testing.assert_array_equal(apply_gradient_steps(p, x, 0.3, 1, STREAM), expected)

    def test_fresh_sample_per_step(self, quadratics):
        p = quadratics[0]
        trace = []
        apply_gradient_steps(p, np.zeros(p.dimension), 0.1, 3, STREAM, trace)
        assert len(trace) == 3
        assert np.linalg.norm(trace[0] - p.full_gradient(np.zeros(p.dimension))) > 0
        assert not np.array_equal(trace[1] - trace[0], np.zeros(p.dimension))

    def test_same_stream_same_result(self, quadratics):
        p = quadratics[0]
        x = np.ones(p.dimension)
        np.testing.assert_array_equal(apply_gradient_steps(p, x, 0.1, 4, STREAM),
                                      apply_gradient_steps(p, x, 0.1, 4, STREAM))

    def test_input_not_modified(self, quadratics):
        x = np.ones(quadratics[0].dimension)
        apply_gradient_steps(quadratics[0], x, 0.1, 3, STREAM)
        np.testing.assert_array_equal(x, 1.0)

    def test_divergence_raises(self, half_square):
        with pytest.raises(DivergenceError):
            gradient_displacement(half_square, np.array([1.0]), 1e300, 5, STREAM)

    def test_rejects_bad_arguments(self, half_square):
        with pytest.raises(ConfigurationError):
            apply_gradient_steps(half_square, np.array([1.0]), 0.0, 1, STREAM)
        with pytest.raises(ConfigurationError):
            GradientSteps(0)


class TestProx:
    def test_half_square_prox(self, half_square):
        y = apply_prox(half_square, np.array([2.0]), 1.0, Proximal(inner_iters=200), STREAM)
        assert y[0] == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("gamma", [1.0, 0.1, 2.0])
    def test_matches_closed_form(self, noiseless_quadratics, gamma):
        p = noiseless_quadratics[2]
        x = np.linspace(-1, 1, p.dimension)
        y = apply_prox(p, x, gamma, Proximal(inner_lr=0.1, inner_iters=500), STREAM)
        assert np.linalg.norm(y - p.exact_prox(x, gamma)) <= 1e-6

    def test_fixed_point_residual(self, noiseless_quadratics):
        p, gamma = noiseless_quadratics[1], 0.5
        x = np.full(p.dimension, 0.3)
        y = apply_prox(p, x, gamma, Proximal(inner_iters=500), STREAM)
        assert np.linalg.norm(y - (x - gamma * p.full_gradient(y))) <= 1e-6

    def test_noisy_prox_holds_sample_fixed(self, quadratics):
        p, gamma = quadratics[0], 0.5
        x = np.zeros(p.dimension)
        y = apply_prox(p, x, gamma, Proximal(inner_iters=1000, tolerance=1e-12), STREAM)
        sample = p.draw_sample(STREAM.generator())
        np.testing.assert_allclose(y, p.exact_prox(x, gamma, sample), atol=1e-9)

    def test_non_expansive(self, noiseless_quadratics):
        p, gamma = noiseless_quadratics[0], 0.8
        spec = Proximal(inner_iters=500)
        gen = np.random.default_rng(0)
        for _ in range(20):
            x, z = gen.standard_normal((2, p.dimension))
            gap = np.linalg.norm(apply_prox(p, x, gamma, spec, STREAM) - apply_prox(p, z, gamma, spec, STREAM))
            assert gap <= np.linalg.norm(x - z) + 1e-6

    def test_small_parameter_barely_moves(self, noiseless_quadratics):
        p, gamma = noiseless_quadratics[0], 1e-8
        x = np.ones(p.dimension)
        y = apply_prox(p, x, gamma, Proximal(), STREAM)
        assert np.linalg.norm(y - x) <= 2 * gamma * np.linalg.norm(p.full_gradient(x))

    def test_tolerance_stops_early(self, half_square):
        trace = []
        y = apply_prox(half_square, np.array([2.0]), 1.0, Proximal(inner_iters=10_000, tolerance=1e-3), STREAM, trace)
        assert abs(y[0] - 1.0) < 1e-2
        assert trace[0][0] == pytest.approx(2.0 - y[0])

    def test_invalid_settings_reported_together(self):
        with pytest.raises(ConfigurationError) as info:
            Proximal(inner_lr=0.0, inner_iters=0, tolerance=-1.0)
        assert len(info.value.problems) == 3


class TestDispatch:
    def test_displacement_matches_operator(self, quadratics):
        p = quadratics[1]
        x = np.ones(p.dimension)
        for spec in (GradientSteps(3), Proximal(inner_iters=20)):
            np.testing.assert_allclose(local_displacement(spec, p, x, 0.1, STREAM),
                                       apply_local(spec, p, x, 0.1, STREAM) - x, atol=1e-15)

    def test_steps_and_purposes(self):
        assert local_steps(GradientSteps(30)) == 30
        assert local_steps(Proximal()) == 1
        assert stream_purpose(GradientSteps()) is Purpose.GRADIENT
        assert stream_purpose(Proximal()) is Purpose.PROX
        with pytest.raises(TypeError):
            local_steps("prox")

    def test_clamp_step(self):
        assert clamp_step(0.5, 0.4) == (0.4, True)
        assert clamp_step(0.3, 0.4) == (0.3, False)

    def test_step_scale(self):
        assert step_scale(GradientSteps(30), rescale_by_T=True) == 1
        assert step_scale(GradientSteps(30), rescale_by_T=False) == 30
        assert step_scale(Proximal(), rescale_by_T=False) == 1

    def test_prox_inner_step(self):
        assert prox_inner_step(Proximal(inner_lr=1.0), smoothness=1.0, gamma=1.0) == (0.5, True)
        assert prox_inner_step(Proximal(inner_lr=0.1), smoothness=1.0, gamma=1.0) == (0.1, False)


def test_exact_prox_of_one_dimensional_quadratic():
    p = QuadraticProblem(A=np.eye(1), b=np.zeros(1))
    assert p.exact_prox(np.array([2.0]), 1.0)[0] == pytest.approx(1.0)
