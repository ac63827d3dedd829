import math
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from hypothesis import given
from hypothesis import strategies as st

from federated.engine import run_full_precision
from federated.records import RunRecord
from localops.operators import GradientSteps
from numerics.exceptions import ConfigurationError, ContractViolationError, DegenerateConstantsError
from numerics.random_streams import RngStream
from problems.aggregate import delta_inf, global_smoothness
from schedules.step_sizes import DiminishingSchedule, FixedSchedule, StepDecaySchedule
from theory.bounds import (
    StepDecayParams,
    diminishing_step_bound,
    fixed_step_bound,
    growth_factor_holds,
    iteration_complexity,
    square_sum_holds,
    step_decay_bound,
    theorem_bound,
)
from theory.constants import BoundConstants, algorithm_constants, lyapunov_error_weight
from theory.recursion import (
    SCHEDULE_KINDS,
    random_recursion_instance,
    recursion_oracle,
    soundness_sweep,
    step_sum_sweep,
)
from theory.verification import verify_run

ORACLE = Path(__file__).parent / "data" / "algorithm_constants_oracle.csv"

UNIT = BoundConstants(0.0, 0.5, 0.0)
TYPICAL = BoundConstants(1.0, 0.5, 1.0)


class TestBounds:
    def test_fixed_without_growth_or_noise(self):
        assert fixed_step_bound(1.0, UNIT, 1.0, 100) == pytest.approx(0.2)

    def test_fixed_with_all_terms(self):
        bc = BoundConstants(1.0, 0.5, 1.0)
        assert fixed_step_bound(1.0, bc, 1.0, 10_000) == pytest.approx((2 * math.e + 2) / 100)
        assert fixed_step_bound(1.0, bc, 1.0, 10_000) == pytest.approx(0.074366, abs=1e-6)

    def test_diminishing_at_one_round(self):
        assert diminishing_step_bound(1.0, BoundConstants(0.0, 1.0, 0.0), 1.0, 0.75, 1) == pytest.approx(1.0)

    def test_diminishing_decays_as_power(self):
        bc = BoundConstants(0.5, 0.5, 0.2)
        ratio = diminishing_step_bound(1.0, bc, 0.5, 0.75, 1) / diminishing_step_bound(1.0, bc, 0.5, 0.75, 2**16)
        assert ratio == pytest.approx(16.0)

    def test_step_decay_example(self):
        bound = step_decay_bound(1.0, BoundConstants(1.0, 0.5, 3.0), StepDecayParams(1.0, 2.0, 1.0), 4)
        assert bound == pytest.approx(1 + 4 * math.e**2)
        assert bound == pytest.approx(30.556, abs=1e-3)

    def test_step_decay_needs_positive_b1(self):
        with pytest.raises(DegenerateConstantsError):
            step_decay_bound(1.0, UNIT, StepDecayParams(1.0, 2.0, 1.0), 16)

    def test_step_decay_needs_a_full_cycle(self):
        with pytest.raises(ConfigurationError):
            step_decay_bound(1.0, TYPICAL, StepDecayParams(1.0, 2.0, 1.0), 3)

    def test_step_decay_needs_R_above_V0(self):
        with pytest.raises(ConfigurationError, match="below V0"):
            step_decay_bound(2.0, TYPICAL, StepDecayParams(1.0, 2.0, 1.0), 16)
        with pytest.raises(ConfigurationError):
            theorem_bound(TYPICAL, StepDecaySchedule(1.0, 2.0, 4), 1.0, 16)

    @pytest.mark.parametrize(
        "schedule",
        [FixedSchedule(0.5, 1), DiminishingSchedule(0.5, 0.7), StepDecaySchedule(0.5, 2.0, 1)],
        ids=["fixed", "diminishing", "step_decay"],
    )
    def test_bounds_shrink_with_horizon(self, schedule):
        bounds = [theorem_bound(TYPICAL, schedule, 1.0, K, R=2.0) for K in (16, 32, 64, 128, 256, 512)]
        assert all(b < a for a, b in zip(bounds, bounds[1:]))

    def test_invalid_inputs(self):
        with pytest.raises(ConfigurationError):
            fixed_step_bound(-1.0, UNIT, 1.0, 10)
        with pytest.raises(ConfigurationError):
            fixed_step_bound(1.0, UNIT, 1.0, 0)
        with pytest.raises(ConfigurationError):
            diminishing_step_bound(1.0, UNIT, 1.0, 0.5, 10)
        with pytest.raises(ConfigurationError):
            BoundConstants(0.0, 0.0, 0.0)


class TestIterationComplexity:
    def test_fixed_examples(self):
        assert iteration_complexity(UNIT, 1.0, 0.2, FixedSchedule(1.0, 1)) == 100
        assert iteration_complexity(UNIT, 1.0, 0.1, FixedSchedule(1.0, 1)) == 400

    def test_diminishing_reaches_epsilon(self):
        schedule = DiminishingSchedule(0.5, 0.75)
        K = iteration_complexity(TYPICAL, 1.0, 0.5, schedule)
        assert diminishing_step_bound(1.0, TYPICAL, 0.5, 0.75, K) <= 0.5 * (1 + 1e-9)
        assert diminishing_step_bound(1.0, TYPICAL, 0.5, 0.75, K - 1) > 0.5

    def test_step_decay_is_smallest_horizon(self):
        schedule = StepDecaySchedule(0.5, 2.0, 1)
        K = iteration_complexity(TYPICAL, 1.0, 0.5, schedule, R=2.0)
        assert theorem_bound(TYPICAL, schedule, 1.0, K, R=2.0) <= 0.5
        assert theorem_bound(TYPICAL, schedule, 1.0, K - 1, R=2.0) > 0.5

    def test_unreachable_epsilon(self):
        with pytest.raises(ConfigurationError):
            iteration_complexity(TYPICAL, 1.0, 1e-9, StepDecaySchedule(0.5, 2.0, 1), R=2.0, max_rounds=1000)
        with pytest.raises(ConfigurationError):
            iteration_complexity(UNIT, 1.0, 0.0, FixedSchedule(1.0, 1))


class TestConstants:
    @pytest.mark.parametrize("row", pd.read_csv(ORACLE).to_dict("records"), ids=lambda row: row["algorithm"])
    def test_matches_reference_values(self, row):
        bc = algorithm_constants(row["algorithm"], row["L"], int(row["T"]), row["sigma_sq"], row["delta"],
                                 row["contraction"])
        for name in ("b1", "b2", "b3", "step_cap"):
            assert getattr(bc, name) == pytest.approx(row[name], rel=1e-9)
        assert bc.provenance == row["algorithm"]

    def test_fedprox_example(self):
        bc = algorithm_constants("FedProx", L=1.0)
        assert bc.b1 == pytest.approx(math.sqrt(6))
        assert bc.b2 == 0.5
        assert bc.step_cap == pytest.approx(1 / math.sqrt(6))

    def test_fedavg_with_one_step_matches_fedprox(self):
        fedavg = algorithm_constants("FedAvg", 2.0, T=1, sigma_sq=0.3, delta=0.1)
        fedprox = algorithm_constants("FedProx", 2.0, sigma_sq=0.3, delta=0.1)
        assert (fedavg.b1, fedavg.b2, fedavg.step_cap) == (fedprox.b1, fedprox.b2, fedprox.step_cap)
        assert fedavg.b3 == pytest.approx(fedprox.b3)

    @pytest.mark.parametrize("algorithm", ["EF-FedAvg", "EF-FedProx"])
    def test_lossless_error_feedback(self, algorithm):
        bc = algorithm_constants(algorithm, 1.0, contraction=1.0)
        assert bc.b1 == pytest.approx(3.0)
        assert bc.step_cap == pytest.approx(1 / 6)
        assert bc.b2 == 0.25

    def test_rejects_bad_inputs(self):
        with pytest.raises(ConfigurationError) as info:
            algorithm_constants("EF-FedAvg", L=0.0, T=0, sigma_sq=-1.0, delta=-1.0, contraction=0.0)
        assert len(info.value.problems) == 5
        with pytest.raises(ConfigurationError):
            algorithm_constants("SCAFFOLD", 1.0)

    @given(
        L=st.floats(0.01, 100.0),
        T=st.integers(1, 100),
        sigma_sq=st.floats(0.0, 10.0),
        delta=st.floats(0.0, 10.0),
        contraction=st.floats(1e-4, 1.0),
    )
    def test_constants_are_well_formed(self, L, T, sigma_sq, delta, contraction):
        for algorithm in ("FedAvg", "FedProx", "EF-FedAvg", "EF-FedProx"):
            bc = algorithm_constants(algorithm, L, T, sigma_sq, delta, contraction)
            assert bc.b1 > 0 and bc.b2 > 0 and bc.b3 >= 0
            assert 0 < bc.step_cap < math.inf

    def test_lyapunov_weights(self):
        assert lyapunov_error_weight("FedAvg", 1.0, 0.1, 1.0, 4) == 0.0
        assert lyapunov_error_weight("EF-FedProx", 1.0, 0.1, 0.5, 3) == pytest.approx(0.2)


class TestRecursion:
    def test_oracle_example(self):
        V = recursion_oracle(1.0, BoundConstants(0.0, 1.0, 0.0), [0.1] * 5, [1.0] * 5)
        np.testing.assert_allclose(V, [1.0, 0.9, 0.8, 0.7, 0.6, 0.5])

    def test_oracle_rejects_bad_inputs(self):
        bc = BoundConstants(0.0, 1.0, 0.0)
        with pytest.raises(ContractViolationError):
            recursion_oracle(1.0, bc, [0.1], [20.0])
        with pytest.raises(ConfigurationError):
            recursion_oracle(1.0, bc, [0.1, 0.1], [1.0])
        with pytest.raises(ConfigurationError):
            recursion_oracle(1.0, bc, [0.0], [1.0])

    @pytest.mark.parametrize("kind", SCHEDULE_KINDS)
    def test_random_instances_obey_bound(self, kind):
        result = soundness_sweep(200, kind, seed=1)
        assert result.violations == 0
        assert 0 < result.worst_ratio < 1

    def test_instances_are_reproducible(self):
        first = random_recursion_instance(RngStream(4), "diminishing")
        second = random_recursion_instance(RngStream(4), "diminishing")
        np.testing.assert_array_equal(first.V, second.V)
        assert first.bound == second.bound
        assert np.all(first.V >= 0)

    def test_unknown_kind(self):
        with pytest.raises(ConfigurationError):
            soundness_sweep(1, "cosine")

    def test_step_sum_estimates(self):
        assert step_sum_sweep(10_000, seed=2) == {"growth_factor": 0, "square_sum": 0}

    @given(st.floats(0.0, 50.0), st.floats(1e-3, 5.0), st.integers(1, 10**6))
    def test_growth_factor(self, a, c, K):
        assert growth_factor_holds(a, c, K)

    @given(st.floats(1e-3, 5.0), st.floats(0.51, 0.99), st.integers(1, 5000))
    def test_square_sum(self, c, nu, K):
        assert square_sum_holds(c, nu, K)


def fake_record(seed, W, V, violations=0, scale=1.0):
    return RunRecord(seed=seed, algorithm="FedAvg", step_cap=1.0, grad_norms_sq=list(W), lyapunov=list(V),
                     cap_violations=violations, step_scale=scale)


class TestVerification:
    def test_out_of_regime_has_no_bound(self):
        verdict = verify_run([fake_record(0, [1.0, 1.0, 1.0], [1.0, 1.0, 1.0], violations=2)],
                             UNIT, FixedSchedule(1.0, 2))
        assert not verdict.in_regime
        assert verdict.bound is None and verdict.margin is None
        assert not verdict.violated

    def test_zero_gradients(self):
        verdict = verify_run([fake_record(s, [0.0] * 5, [0.0] * 5) for s in range(3)], TYPICAL, FixedSchedule(1.0, 4))
        assert verdict.measured_min_W == 0.0
        assert verdict.in_regime and not verdict.violated
        assert verdict.seeds == [0, 1, 2]

    def test_flags_a_violation(self):
        records = [fake_record(s, [5.0] * 5, [0.01] * 5) for s in range(2)]
        verdict = verify_run(records, UNIT, FixedSchedule(1.0, 4))
        assert verdict.bound == pytest.approx(0.01)
        assert verdict.violated
        assert verdict.margin < 0

    def test_final_state_is_not_a_candidate(self):
        verdict = verify_run([fake_record(0, [3.0, 2.0, 0.0], [1.0, 1.0, 1.0])], UNIT, FixedSchedule(1.0, 2))
        assert verdict.measured_min_W == 2.0

    def test_step_decay_estimates_R(self):
        records = [fake_record(0, [0.1] * 17, np.linspace(1.0, 0.5, 17))]
        verdict = verify_run(records, TYPICAL, StepDecaySchedule(0.5, 2.0, 4))
        assert any("R estimated" in note for note in verdict.notes)
        explicit = verify_run(records, TYPICAL, StepDecaySchedule(0.5, 2.0, 4), R=1.1)
        assert explicit.bound == pytest.approx(verdict.bound)

    def test_step_decay_period_note(self):
        records = [fake_record(0, [0.1] * 17, [1.0] * 17)]
        off = verify_run(records, TYPICAL, StepDecaySchedule(0.5, 2.0, 4), R=2.0)
        assert any("assumes period 8" in note for note in off.notes)
        matched = verify_run(records, TYPICAL, StepDecaySchedule(0.5, 2.0, 8), R=2.0)
        assert not any("assumes period" in note for note in matched.notes)

    def test_bound_uses_the_unrescaled_step(self):
        records = [fake_record(0, [0.1] * 5, [1.0] * 5, scale=4.0)]
        verdict = verify_run(records, UNIT, FixedSchedule(0.25, 4))
        assert verdict.bound == pytest.approx(fixed_step_bound(1.0, UNIT, 1.0, 4))
        assert any("not rescaled" in note for note in verdict.notes)

    def test_unrescaled_local_steps_above_the_cap(self, half_square, make_setup):
        setup = make_setup([half_square], local=GradientSteps(30), schedule=FixedSchedule(0.4, 1), rounds=1,
                           rescale_by_T=False)
        record = run_full_precision(setup)
        assert record.step_scale == 30
        assert record.cap_violations == 1
        verdict = verify_run([record], algorithm_constants("FedAvg", 1.0, 30), FixedSchedule(0.4, 1))
        assert not verdict.in_regime
        assert verdict.bound is None

    def test_mismatched_records(self):
        with pytest.raises(ConfigurationError):
            verify_run([fake_record(0, [1.0] * 3, [1.0] * 3), fake_record(1, [1.0] * 4, [1.0] * 4)],
                       UNIT, FixedSchedule(1.0, 2))
        with pytest.raises(ConfigurationError):
            verify_run([], UNIT, FixedSchedule(1.0, 2))
        with pytest.raises(ConfigurationError):
            verify_run([fake_record(0, [1.0] * 3, [1.0] * 3), fake_record(1, [1.0] * 3, [1.0] * 3, scale=2.0)],
                       UNIT, FixedSchedule(1.0, 2))

    def test_simulated_runs_respect_their_bound(self, quadratics, make_setup):
        records = [run_full_precision(make_setup(quadratics, seed=s)) for s in range(3)]
        sigma_sq = max(q.noise_bound for q in quadratics)
        bc = algorithm_constants("FedAvg", global_smoothness(quadratics), 3, sigma_sq, delta_inf(quadratics))
        verdict = verify_run(records, bc, FixedSchedule(0.2, 20))
        assert verdict.in_regime
        assert not verdict.violated
        assert verdict.margin > 0
