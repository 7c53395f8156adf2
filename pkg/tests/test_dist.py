from fractions import Fraction

import numpy as np
import pytest

from distdlog.bits import BitString, circ_dist
from distdlog.dist import (
    DistPlan,
    PlanError,
    analytic_joint_distribution,
    branch_event_mass,
    brute_force_correct_oracle,
    compare_step7_state,
    correct,
    correct_with_flag,
    decode_joint_index,
    make_plan,
    node_phase,
    node_window_mass,
    plan_for_order,
    run_distributed_quantum,
    solve_distributed,
    statevector_joint_distribution,
)
from distdlog.numtheory import mod_pow
from distdlog.resources import per_node_qubits_from_widths


def bs(text):
    return BitString.from_string(text)


class TestPlan:
    def test_acceptance_plan_values(self, acceptance_plan):
        plan = acceptance_plan
        assert plan.l == (1, 2, 5)
        assert plan.t == (8, 8)
        assert plan.measured == (4, 4)
        assert plan.total_width == 5
        assert per_node_qubits_from_widths(plan.t, 4) == 20

    def test_too_many_nodes(self, instance):
        with pytest.raises(PlanError, match="infeasible"):
            make_plan(instance, k=3, h=2, epsilon="0.25", epsilon_prime="0.2")

    def test_overlap_out_of_range(self, instance):
        with pytest.raises(PlanError, match="h must be"):
            make_plan(instance, k=2, h=3, epsilon="0.25", epsilon_prime="0.2")
        with pytest.raises(PlanError, match="h must be"):
            make_plan(instance, k=2, h=1, epsilon="0.25", epsilon_prime="0.2")

    def test_budget_ordering(self, instance):
        with pytest.raises(PlanError, match="epsilon"):
            make_plan(instance, k=2, h=2, epsilon="0.2", epsilon_prime="0.25")

    def test_defaults(self, instance):
        plan = make_plan(instance, k=2, epsilon="0.25")
        assert plan.epsilon_prime == Fraction(1, 8)
        assert plan.h == 2  # min(3, floor(5/2))

    def test_three_nodes_feasible_for_larger_order(self):
        plan = plan_for_order(11, k=3, h=2, epsilon="0.25", epsilon_prime="0.2")
        assert plan.l == (1, 2, 4, 6)
        assert plan.measured == (4, 5, 3)
        assert all(m <= t for m, t in zip(plan.measured, plan.t))

    def test_json_round_trip(self, acceptance_plan):
        payload = acceptance_plan.to_json_dict()
        assert payload["l"] == [1, 2, 5]
        assert payload["total_width"] == 5


class TestCorrect:
    def test_worked_example(self, acceptance_plan):
        out, fallback = correct_with_flag([bs("0101"), bs("1110")], acceptance_plan)
        assert str(out) == "01110"
        assert not fallback
        w = bs("01101")
        assert circ_dist(out, w) == 1
        assert circ_dist(bs("1110"), w.slice(2, 5)) == 1

    def test_exact_windows_reassemble(self, acceptance_plan):
        plan = acceptance_plan
        for wv in range(1 << plan.total_width):
            w = BitString(plan.total_width, wv)
            parts = [
                w.slice(plan.l[0], plan.l[1] + plan.h),
                w.slice(plan.l[1], plan.l[2]),
            ]
            assert correct(parts, plan) == w

    def test_single_node_degenerate(self):
        plan = DistPlan(
            r=5, k=1, h=2, epsilon=Fraction(1, 4), epsilon_prime=Fraction(1, 5),
            l=(1, 5), t=(8,), measured=(5,), total_width=5,
        )
        m = bs("10110")
        assert correct([m], plan) == m

    def test_width_validation(self, acceptance_plan):
        with pytest.raises(PlanError):
            correct([bs("0101")], acceptance_plan)
        with pytest.raises(PlanError):
            correct([bs("01011"), bs("1110")], acceptance_plan)

    def test_fallback_flag_fires_outside_window(self, acceptance_plan):
        fired = False
        for va in range(16):
            for vb in range(16):
                _, fallback = correct_with_flag(
                    [BitString(4, va), BitString(4, vb)], acceptance_plan
                )
                fired = fired or fallback
        assert fired  # some pairs admit no exact small shift


class TestCorrectOracle:
    def test_zero_perturbations(self, acceptance_plan):
        w = bs("11010")
        assert brute_force_correct_oracle(w, [0, 0], acceptance_plan) == w

    def test_worked_perturbations(self, acceptance_plan):
        w = bs("01101")
        out = brute_force_correct_oracle(w, [-1, 1], acceptance_plan)
        assert str(out) == "01110"

    def test_randomized_small_batch(self, acceptance_plan):
        rng = np.random.default_rng(17)
        for _ in range(500):
            w = BitString(5, int(rng.integers(32)))
            perturbations = [int(rng.integers(-1, 2)), int(rng.integers(-1, 2))]
            brute_force_correct_oracle(w, perturbations, acceptance_plan)

    def test_rejects_oversized_perturbation(self, acceptance_plan):
        with pytest.raises(ValueError):
            brute_force_correct_oracle(bs("01101"), [5, 0], acceptance_plan)
        with pytest.raises(ValueError):
            brute_force_correct_oracle(bs("01101"), [0, 2], acceptance_plan)


class TestNodePhases:
    def test_tail_phases(self, instance, acceptance_plan):
        # node 1 sees s/r itself; node 2 sees frac(2^(l_2 - 1) s / r)
        assert node_phase(instance, acceptance_plan, 0, 2, "a") == Fraction(2, 5)
        assert node_phase(instance, acceptance_plan, 1, 2, "a") == Fraction(4, 5)
        # family b carries the exponent: g = 2, so s = 1 gives 2/5
        assert node_phase(instance, acceptance_plan, 0, 1, "b") == Fraction(2, 5)

    def test_window_masses_meet_budget(self, instance, acceptance_plan):
        bound = 1.0 - float(acceptance_plan.epsilon_prime)
        for s in range(instance.r):
            assert branch_event_mass(instance, acceptance_plan, s) >= bound

    def test_window_masses_analytic_only_plan(self):
        """Three-node plan checked purely in closed form (no simulation)."""
        from distdlog.numtheory import validate_instance

        instance = validate_instance(23, 2, 8)  # r = 11
        plan = make_plan(instance, k=3, h=2, epsilon="0.25", epsilon_prime="0.2")
        bound = 1.0 - float(plan.epsilon_prime)
        for s in range(instance.r):
            assert branch_event_mass(instance, plan, s) >= bound

    def test_zero_branch_mass_is_one(self, instance, acceptance_plan):
        assert branch_event_mass(instance, acceptance_plan, 0) == pytest.approx(1.0)
        for j in range(acceptance_plan.k):
            assert node_window_mass(instance, acceptance_plan, j, 0, "a") == pytest.approx(1.0)


class TestQuantumStage:
    def test_sequential_run_shapes(self, instance, acceptance_plan):
        rng = np.random.default_rng(5)
        result = run_distributed_quantum(instance, acceptance_plan, rng)
        assert len(result.nodes) == 2
        for (m_a, m_b), width in zip(result.nodes, acceptance_plan.measured):
            assert m_a.width == width and m_b.width == width
        assert result.comm_qubits == (acceptance_plan.k - 1) * instance.L

    def test_handoff_accounting_neutral(self, instance, acceptance_plan):
        a = run_distributed_quantum(
            instance, acceptance_plan, np.random.default_rng(9), account_comm=True
        )
        b = run_distributed_quantum(
            instance, acceptance_plan, np.random.default_rng(9), account_comm=False
        )
        assert a.nodes == b.nodes
        assert b.comm_qubits == 0 and a.comm_qubits == 4

    def test_analytic_zero_branch_zero_strings(self, instance, acceptance_plan):
        class ZeroRng:
            def integers(self, *a, **k):
                return 0

            def random(self):
                return 0.0

        result = run_distributed_quantum(instance, acceptance_plan, ZeroRng(), mode="analytic")
        assert result.latent_s == 0
        assert all(ma.value == 0 and mb.value == 0 for ma, mb in result.nodes)

    def test_joint_laws_agree(self, instance, acceptance_plan):
        sv = statevector_joint_distribution(instance, acceptance_plan)
        an = analytic_joint_distribution(instance, acceptance_plan)
        assert sv.shape == an.shape == (1 << 16,)
        assert 0.5 * np.abs(sv - an).sum() < 1e-9

    def test_joint_laws_agree_three_nodes(self, instance):
        """Exercises the middle-node step of the conditional chain. The plan
        widths are hand-picked small; the law equality holds for any widths
        since both sides describe the same sequential protocol."""
        plan = DistPlan(
            r=5, k=3, h=2, epsilon=Fraction(1, 2), epsilon_prime=Fraction(1, 4),
            l=(1, 2, 3, 5), t=(4, 4, 4), measured=(2, 2, 3), total_width=5,
        )
        sv = statevector_joint_distribution(instance, plan)
        an = analytic_joint_distribution(instance, plan)
        assert sv.shape == an.shape == (1 << 14,)
        assert 0.5 * np.abs(sv - an).sum() < 1e-9

    def test_sequential_sampling_consistent(self, small_instance, small_plan):
        """Honest per-trial sequential runs land in the exact joint law
        (checked on a folded marginal to keep the sample size sane)."""
        joint = statevector_joint_distribution(small_instance, small_plan)
        m1 = small_plan.measured[0]
        rest = joint.reshape(1 << m1, -1).sum(axis=1)
        counts = np.zeros(1 << m1)
        runs = 150
        for i in range(runs):
            rng = np.random.default_rng((31, i))
            result = run_distributed_quantum(small_instance, small_plan, rng)
            counts[result.nodes[0][0].value] += 1
        assert 0.5 * np.abs(counts / runs - rest).sum() < 0.25

    def test_decode_round_trip(self, acceptance_plan):
        rng = np.random.default_rng(2)
        for _ in range(50):
            flat = int(rng.integers(1 << 16))
            nodes = decode_joint_index(flat, acceptance_plan)
            rebuilt = 0
            for m_a, m_b in nodes:
                rebuilt = (rebuilt << m_a.width) | m_a.value
                rebuilt = (rebuilt << m_b.width) | m_b.value
            assert rebuilt == flat


class TestStepSevenState:
    def test_node_register_marginal_is_branch_average(self, instance, acceptance_plan):
        """The first node's counting-register law equals the branch average
        of the closed-form distributions; the work register is never measured."""
        from distdlog import statevec
        from distdlog.dist import _simulate_node
        from distdlog.phase import phase_outcome_distribution

        work = np.zeros(1 << instance.L, dtype=np.complex128)
        work[1] = 1.0
        state = _simulate_node(instance, acceptance_plan, 0, work)
        got = statevec.marginal_distribution(state, "a", acceptance_plan.t[0])
        want = sum(
            phase_outcome_distribution(
                node_phase(instance, acceptance_plan, 0, s, "a"), acceptance_plan.t[0]
            )
            for s in range(instance.r)
        ) / instance.r
        assert 0.5 * np.abs(got - want).sum() < 1e-9

    def test_factorised_form_certified(self, instance, acceptance_plan):
        report = compare_step7_state(instance, acceptance_plan)
        assert report.max_amplitude_deviation <= 1e-9
        assert report.factorization_residual <= 1e-12
        assert report.basis_residual <= 1e-12
        assert len(report.per_branch_deviation) == instance.r


class TestSolveDistributed:
    def test_success_verifies(self, instance, acceptance_plan):
        record = solve_distributed(
            instance, acceptance_plan, np.random.default_rng(21), max_retries=20
        )
        assert record.success
        assert record.g_hat == instance.hidden_g
        assert mod_pow(instance.a, record.g_hat, instance.N) == instance.b
        assert record.m_a.width == acceptance_plan.total_width
        assert record.comm_qubits == 4
        assert record.resources.qubits_per_node_alg4 == 20

    def test_fresh_runs_and_reuse_agree_in_law(self, small_instance, small_plan):
        wins_reuse = sum(
            solve_distributed(
                small_instance, small_plan, np.random.default_rng((3, i)), max_retries=1
            ).success
            for i in range(200)
        )
        wins_fresh = sum(
            solve_distributed(
                small_instance,
                small_plan,
                np.random.default_rng((3, i)),
                max_retries=1,
                reuse_state=False,
            ).success
            for i in range(200)
        )
        assert abs(wins_reuse - wins_fresh) < 50

    def test_analytic_mode(self, instance, acceptance_plan):
        record = solve_distributed(
            instance,
            acceptance_plan,
            np.random.default_rng(8),
            mode="analytic",
            max_retries=20,
        )
        assert record.success
        assert record.latent_s is not None
        assert record.node_measurements is not None

    def test_budget_fallback_runs_nodes_per_attempt(self):
        """When the cached joint law is too large to build, the solver falls
        back to honest per-attempt sequential runs."""
        from distdlog.numtheory import validate_instance
        from distdlog.statevec import QubitBudgetError

        instance = validate_instance(23, 2, 8)  # r = 11, L = 5
        plan = make_plan(instance, k=3, h=2, epsilon="0.6", epsilon_prime="0.5")
        assert max(plan.t) == 8
        with pytest.raises(QubitBudgetError):
            statevector_joint_distribution(instance, plan)
        record = solve_distributed(
            instance, plan, np.random.default_rng(13), max_retries=2
        )
        assert record.m_a.width == plan.total_width
        assert all(
            ma.width == width
            for (ma, _), width in zip(record.node_measurements, plan.measured)
        )

    def test_record_serialises(self, instance, acceptance_plan):
        import json

        record = solve_distributed(
            instance, acceptance_plan, np.random.default_rng(4), max_retries=5
        )
        payload = record.to_json_dict()
        assert len(payload["node_measurements"]) == 2
        json.dumps(payload)
