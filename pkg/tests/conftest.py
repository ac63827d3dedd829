"""
Shared fixtures.
"""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from data_ingestion.synthetic import synth_blobs
from federated.engine import SimulationSetup
from localops.operators import GradientSteps
from numerics.random_streams import Purpose, RngStream
from problems.aggregate import global_infimum
from problems.quadratic import QuadraticProblem, make_heterogeneous_quadratics
from schedules.step_sizes import FixedSchedule

settings.register_profile("fedbound", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("fedbound")


@pytest.fixture
def quadratics():
    """Ten heterogeneous 20-dimensional quadratics with gradient noise."""
    return make_heterogeneous_quadratics(10, 20, spectrum_min=0.1, spectrum_max=1.0,
                                         radius=1.0, sigma_sq=0.1, seed=3)


@pytest.fixture
def noiseless_quadratics():
    return make_heterogeneous_quadratics(10, 20, spectrum_min=0.1, spectrum_max=1.0,
                                         radius=1.0, sigma_sq=0.0, seed=3)


@pytest.fixture
def half_square():
    """f(x) = x^2 / 2 in one dimension."""
    return QuadraticProblem(A=np.eye(1), b=np.zeros(1))


@pytest.fixture
def blobs():
    return synth_blobs(RngStream(11, purpose=Purpose.DATASET), n_classes=10, per_class=40, d=6, spread=1.0)


@pytest.fixture
def make_setup():
    """Factory for a quadratic ``SimulationSetup`` with overridable fields."""

    def factory(objectives, **overrides):
        rounds = overrides.pop("rounds", 20)
        fields = dict(
            objectives=objectives,
            local=GradientSteps(3),
            schedule=FixedSchedule(0.2, rounds),
            rounds=rounds,
            x0=np.ones(objectives[0].dimension),
            seed=7,
            f_inf=global_infimum(objectives),
        )
        fields.update(overrides)
        return SimulationSetup(**fields)

    return factory
