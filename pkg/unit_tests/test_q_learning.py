# unit_tests/test_q_learning.py
"""
Unit Tests for Q-Learning & QLD
===============================
Run with: python -m pytest unit_tests/test_q_learning.py -v
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))


def test_matching_q_values_reproduce_strategy():
    print("\n" + "=" * 60)
    print("TEST 1: Boltzmann policy")
    print("=" * 60)

    from agents.q_learning import QState, boltzmann_policy
    from games.network_game import ExplorationRates, JointStrategy

    x = JointStrategy((np.array([0.2, 0.3, 0.5]), np.array([0.9, 0.1])))
    rates = ExplorationRates((0.4, 3.0))
    policy = boltzmann_policy(QState.matching(x, rates), rates)
    np.testing.assert_allclose(policy.flat(), x.flat(), atol=1e-12)
    print("✅ Q = T ln x maps back to x")


def test_boltzmann_extreme_gap_stays_interior():
    from agents.q_learning import QState, boltzmann_policy
    from games.network_game import ExplorationRates

    x = boltzmann_policy(QState(([1000.0, 0.0],)), ExplorationRates((1.0,)))
    assert x[0][1] > 0.0 and x[0][0] < 1.0
    assert x[0].sum() == pytest.approx(1.0)
    assert x[0][1] == pytest.approx(1e-12, rel=1e-6)


def test_boltzmann_is_shift_invariant():
    from agents.q_learning import QState, boltzmann_policy
    from games.network_game import ExplorationRates

    rates = ExplorationRates((0.5,))
    a = boltzmann_policy(QState(([1.0, 2.0, 3.0],)), rates)
    b = boltzmann_policy(QState(([101.0, 102.0, 103.0],)), rates)
    np.testing.assert_allclose(a.flat(), b.flat(), atol=1e-15)


def test_q_state_rejects_bad_input():
    from agents.q_learning import QState
    from games.errors import DomainError
    from games.network_game import ExplorationRates, JointStrategy

    with pytest.raises(DomainError):
        QState(([np.nan, 1.0],))
    with pytest.raises(DomainError):
        QState.matching(JointStrategy((np.array([1.0, 0.0]),)), ExplorationRates((1.0,)))


def test_single_step_matches_batch_runner(random_ring, rng):
    print("\n" + "=" * 60)
    print("TEST 2: Discrete update")
    print("=" * 60)

    from agents.q_learning import QState, boltzmann_policy, q_learning_step, run_q_learning_batch
    from games.network_game import ExplorationRates, JointStrategy

    rates = ExplorationRates((0.5, 1.0, 2.0))
    layout = random_ring.layout
    x0 = layout.clamp(layout.sample_dirichlet(rng), 1e-3)
    q = QState.matching(JointStrategy.from_flat(x0, random_ring.action_counts), rates)
    for _ in range(5):
        q = q_learning_step(random_ring, q, rates, 0.1)
    _, states = run_q_learning_batch(random_ring, rates, x0[None, :], alpha=0.1, iterations=5)
    assert states.shape == (6, 1, layout.dimension)
    np.testing.assert_allclose(boltzmann_policy(q, rates).flat(), states[-1, 0], atol=1e-10)
    print("✅ q_learning_step and the batch runner agree over 5 updates")


def test_zero_learning_step_keeps_q(random_ring):
    from agents.q_learning import QState, q_learning_step
    from games.network_game import ExplorationRates

    q = QState.from_flat(np.arange(9, dtype=float), random_ring.action_counts)
    after = q_learning_step(random_ring, q, ExplorationRates.uniform(1.0, 3), 0.0)
    np.testing.assert_array_equal(after.flat(), q.flat())


def test_learning_step_bounds(random_ring):
    from agents.q_learning import QState, q_learning_step
    from games.errors import DomainError
    from games.network_game import ExplorationRates

    q = QState.zeros(random_ring.action_counts)
    with pytest.raises(DomainError):
        q_learning_step(random_ring, q, ExplorationRates.uniform(1.0, 3), 1.5)
    with pytest.raises(DomainError):
        q_learning_step(random_ring, q, ExplorationRates.uniform(1.0, 2), 0.1)


def test_full_learning_step_is_best_response_logit(two_agent_identity):
    """α = 1 replaces Q by the current rewards."""
    from agents.q_learning import QState, q_learning_step
    from games.network_game import ExplorationRates

    q = QState(([0.0, np.log(3.0)], [0.0, 0.0]))
    after = q_learning_step(two_agent_identity, q, ExplorationRates((1.0, 1.0)), 1.0)
    np.testing.assert_allclose(after[0], [0.5, 0.5])
    np.testing.assert_allclose(after[1], [0.25, 0.75])


def test_convergence_check():
    print("\n" + "=" * 60)
    print("TEST 3: Windowed convergence statistic")
    print("=" * 60)

    from agents.q_learning import convergence_check, relative_range
    from games.errors import DomainError
    from games.network_game import JointStrategy

    flat = np.tile([0.25, 0.75], (10, 1))
    verdict = convergence_check(flat, tolerance=1e-5)
    assert verdict.converged and verdict.statistic == 0.0

    moving = np.array([[0.5, 0.5], [0.4, 0.6]])
    verdict = convergence_check(moving, tolerance=1e-5)
    assert not verdict.converged
    assert verdict.statistic == pytest.approx(0.2)

    np.testing.assert_array_equal(relative_range(np.zeros((3, 2))), [0.0, 0.0])

    strategies = [JointStrategy.uniform((2, 3))] * 4
    assert convergence_check(strategies).converged

    batch = np.stack([flat, flat + np.array([[0.0, 0.0]] * 9 + [[0.1, -0.1]])], axis=1)
    assert not convergence_check(batch).converged

    with pytest.raises(DomainError):
        convergence_check(np.empty((0, 2)))
    with pytest.raises(DomainError):
        convergence_check(flat, tolerance=0.0)
    print("✅ statistic, zero max, batches and errors")


def test_batch_runner_keeps_last_states(random_ring, rng):
    from agents.q_learning import run_q_learning_batch
    from games.network_game import ExplorationRates

    x0 = random_ring.layout.sample_dirichlet(rng, size=4)
    times, states = run_q_learning_batch(
        random_ring, ExplorationRates.uniform(1.0, 3), x0, alpha=0.05, iterations=100, stride=5, keep_last=3,
    )
    np.testing.assert_array_equal(times, [90, 95, 100])
    assert states.shape == (3, 4, random_ring.dimension)
    np.testing.assert_allclose(random_ring.layout.segment_sum(states), 1.0)


def test_simulation_record(shapley_ring):
    print("\n" + "=" * 60)
    print("TEST 4: Trajectory records")
    print("=" * 60)

    from agents.q_learning import simulate_q_learning
    from games.network_game import ExplorationRates, JointStrategy

    x0 = JointStrategy(tuple(np.array([0.6, 0.3, 0.1]) for _ in range(5)))
    record = simulate_q_learning(shapley_ring, ExplorationRates.uniform(2.5, 5), x0,
                                 iterations=400, stride=2, window=50)
    assert len(record) == 201 and record.mode == "discrete"
    assert record.time_points[-1] == 400
    assert record.first_action_series().shape == (201, 5)
    frame = record.to_frame()
    assert list(frame.columns) == ["t", "agent", "action", "prob"]
    assert len(frame) == 201 * 15
    np.testing.assert_allclose(frame.groupby(["t", "agent"])["prob"].sum(), 1.0)
    np.testing.assert_allclose(record.strategy(0).flat(), x0.flat(), atol=1e-12)
    print(f"✅ {len(record)} records, statistic {record.per_component_relative_range:.3e}")


def test_qld_field_is_tangent(random_ring, rng):
    from agents.q_learning import qld_vector_field
    from games.errors import DomainError
    from games.network_game import ExplorationRates

    rates = ExplorationRates((0.3, 0.9, 1.7))
    for _ in range(10):
        x = random_ring.layout.clamp(random_ring.layout.sample_dirichlet(rng), 1e-6)
        field = qld_vector_field(random_ring, rates, x)
        np.testing.assert_allclose(random_ring.layout.segment_sum(field), 0.0, atol=1e-12)
    with pytest.raises(DomainError):
        qld_vector_field(random_ring, rates, np.array([1.0, 0.0, 0.0] + [1 / 3] * 6))


def test_qld_vanishes_at_uniform_for_rps():
    from agents.q_learning import qld_vector_field
    from games.catalog import make_rps
    from games.network_game import ExplorationRates, JointStrategy

    game = make_rps({"kind": "ring", "n": 4})
    field = qld_vector_field(game, ExplorationRates.uniform(0.3, 4), JointStrategy.uniform(game.action_counts))
    np.testing.assert_allclose(field, 0.0, atol=1e-14)


def test_single_and_batched_integration_agree(random_ring, rng):
    from agents.q_learning import integrate_qld, integrate_qld_batch
    from games.network_game import ExplorationRates, JointStrategy

    rates = ExplorationRates.uniform(0.8, 3)
    x0 = random_ring.layout.clamp(random_ring.layout.sample_dirichlet(rng, size=3), 1e-3)
    times, batch = integrate_qld_batch(random_ring, rates, x0, dt=0.05, steps=200, stride=10)
    assert batch.shape == (21, 3, random_ring.dimension)
    assert times[-1] == pytest.approx(10.0)
    record = integrate_qld(random_ring, rates, JointStrategy.from_flat(x0[1], random_ring.action_counts),
                           dt=0.05, steps=200, stride=10, window=5)
    assert record.mode == "ode"
    np.testing.assert_allclose(record.states, batch[:, 1, :], atol=1e-10)


def test_discrete_update_tracks_qld_clock(random_ring, rng):
    """With uniform α and T, one iteration advances QLD time by α / T."""
    print("\n" + "=" * 60)
    print("TEST 5: Discrete vs continuous time")
    print("=" * 60)

    from agents.q_learning import integrate_qld_batch, run_q_learning_batch
    from games.network_game import ExplorationRates

    rates = ExplorationRates.uniform(1.0, 3)
    x0 = random_ring.layout.clamp(random_ring.layout.sample_dirichlet(rng), 0.05)[None, :]
    _, discrete = run_q_learning_batch(random_ring, rates, x0, alpha=0.0005, iterations=2000, keep_last=1)
    _, continuous = integrate_qld_batch(random_ring, rates, x0, dt=0.01, steps=100, keep_last=1)
    gap = np.max(np.abs(discrete[-1] - continuous[-1]))
    print(f"   sup gap at QLD time 1: {gap:.2e}")
    assert gap < 5e-3
    print("✅ discrete run follows the QLD flow")


def test_rps_qld_converges_to_uniform():
    from agents.q_learning import integrate_qld
    from games.catalog import make_rps
    from games.network_game import ExplorationRates, JointStrategy

    game = make_rps({"kind": "ring", "n": 3})
    x0 = JointStrategy(tuple(np.array(p) for p in ([0.7, 0.2, 0.1], [0.1, 0.1, 0.8], [0.3, 0.4, 0.3])))
    record = integrate_qld(game, ExplorationRates.uniform(0.5, 3), x0, dt=0.1, steps=3000, window=500)
    assert record.converged
    np.testing.assert_allclose(record.final_strategy.flat(), 1.0 / 3.0, atol=1e-6)


def test_integration_argument_errors(random_ring):
    from agents.q_learning import integrate_qld_batch
    from games.errors import DomainError
    from games.network_game import ExplorationRates

    x0 = random_ring.layout.uniform_point()[None, :]
    rates = ExplorationRates.uniform(1.0, 3)
    with pytest.raises(DomainError):
        integrate_qld_batch(random_ring, rates, x0, dt=0.0)
    with pytest.raises(DomainError):
        integrate_qld_batch(random_ring, rates, x0, stride=0)
    with pytest.raises(DomainError):
        integrate_qld_batch(random_ring, rates, np.zeros((1, random_ring.dimension)))


def test_policy_and_update_worked_examples():
    from agents.q_learning import QState, boltzmann_policy, q_learning_step
    from games.network_game import ExplorationRates, NetworkGame

    one = ExplorationRates((1.0,))
    np.testing.assert_allclose(boltzmann_policy(QState(([0.0, 0.0],)), one)[0], [0.5, 0.5])
    np.testing.assert_allclose(boltzmann_policy(QState(([np.log(2.0), 0.0],)), one)[0], [2 / 3, 1 / 3])

    # Zero payoffs: Q(τ) = (1 - α)^τ Q(0)
    silent = NetworkGame(1, (2,), [], name="silent")
    q = QState(([1.0, -2.0],))
    for _ in range(10):
        q = q_learning_step(silent, q, one, 0.1)
    np.testing.assert_allclose(q.flat(), 0.9 ** 10 * np.array([1.0, -2.0]), rtol=1e-12)


def test_qld_hand_expansion():
    from agents.q_learning import qld_vector_field
    from games.network_game import ExplorationRates, NetworkGame

    silent = NetworkGame(1, (2,), [], name="silent")
    field = qld_vector_field(silent, ExplorationRates((1.0,)), np.array([0.9, 0.1]))
    assert field[0] == pytest.approx(0.9 * 0.1 * np.log(1.0 / 9.0), rel=1e-12)
    assert field[1] == pytest.approx(-field[0], rel=1e-12)
    np.testing.assert_allclose(qld_vector_field(silent, ExplorationRates((1.0,)), np.array([0.5, 0.5])), 0.0)


def test_integration_stays_at_qre(shapley_ring):
    from agents.q_learning import integrate_qld
    from agents.qre_solver import solve_qre
    from games.network_game import ExplorationRates

    rates = ExplorationRates.uniform(2.5, 5)
    qre = solve_qre(shapley_ring, rates).strategy
    record = integrate_qld(shapley_ring, rates, qre, dt=0.01, steps=1000, window=100)
    assert np.max(np.abs(record.states - qre.flat())) < 1e-6


def test_oscillating_component_statistic():
    from agents.q_learning import convergence_check

    states = np.array([[0.2, 0.8], [0.8, 0.2]] * 5)
    verdict = convergence_check(states, tolerance=1e-5)
    assert not verdict.converged and verdict.statistic == pytest.approx(0.75)

    decay = 0.5 + 0.3 * np.exp(-0.05 * np.arange(5000))
    late = np.column_stack([decay, 1.0 - decay])[-500:]
    assert convergence_check(late, tolerance=1e-5).converged
