# unit_tests/test_game_core.py
"""
Unit Tests for the Network Game Model
=====================================
Run with: python -m pytest unit_tests/test_game_core.py -v
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))


def _brute_force_payoff(game, k, x):
    total = 0.0
    for l, matrix in game.incidence[k]:
        for i in range(matrix.shape[0]):
            for j in range(matrix.shape[1]):
                total += x[k][i] * matrix[i, j] * x[l][j]
    return total


def test_validate_well_formed_game(two_agent_identity):
    print("\n" + "=" * 60)
    print("TEST 1: Well-formed game validates clean")
    print("=" * 60)

    from games.network_game import validate_game

    report = validate_game(two_agent_identity)
    print(f"   violations: {report}")
    assert report == [], "2x2/2x2 edge should validate"
    print("✅ Empty report")


def test_validate_shape_mismatch():
    print("\n" + "=" * 60)
    print("TEST 2: Wrong A^{lk} shape")
    print("=" * 60)

    from games.network_game import Edge, NetworkGame, validate_game

    game = NetworkGame(2, (2, 3), [Edge(0, 1, np.ones((2, 3)), np.ones((2, 3)))])
    report = validate_game(game)
    print(f"   violations: {[str(v) for v in report]}")
    assert [v.kind for v in report] == ["shape_mismatch"], "Only A^{10} is mis-shaped"
    assert report[0].edge_index == 0
    print("✅ One shape violation")


def test_validate_self_loop_and_adjacency():
    print("\n" + "=" * 60)
    print("TEST 3: Self-loops, asymmetry, non-finite entries")
    print("=" * 60)

    from games.network_game import Edge, NetworkGame, validate_game

    edge = Edge(0, 1, np.eye(2), np.eye(2))
    looped = NetworkGame(2, (2, 2), [edge], adjacency=[[1, 1], [1, 0]])
    kinds = [v.kind for v in validate_game(looped)]
    assert kinds == ["self_loop"], f"Expected one self-loop violation, got {kinds}"
    print("✅ Adjacency self-loop reported")

    asymmetric = NetworkGame(3, (2, 2, 2), [edge], adjacency=[[0, 1, 1], [1, 0, 0], [0, 0, 0]])
    assert [v.kind for v in validate_game(asymmetric)] == ["asymmetric_adjacency"]
    print("✅ Asymmetric adjacency reported")

    mismatch = NetworkGame(3, (2, 2, 2), [edge], adjacency=[[0, 1, 1], [1, 0, 0], [1, 0, 0]])
    assert [v.kind for v in validate_game(mismatch)] == ["adjacency_mismatch"]
    print("✅ Adjacency link without matrices reported")

    bad = NetworkGame(2, (2, 2), [Edge(0, 1, [[np.nan, 0], [0, 1]], np.eye(2))])
    assert [v.kind for v in validate_game(bad)] == ["non_finite"]
    edge_loop = NetworkGame(2, (2, 2), [Edge(1, 1, np.eye(2), np.eye(2))])
    assert [v.kind for v in validate_game(edge_loop)] == ["self_loop"]
    print("✅ Non-finite and self-loop edges reported")


def test_payoff_operator_requires_valid_game():
    from games.errors import GameValidationError
    from games.network_game import Edge, NetworkGame

    game = NetworkGame(2, (2, 3), [Edge(0, 1, np.ones((2, 3)), np.ones((2, 3)))])
    with pytest.raises(GameValidationError) as info:
        _ = game.payoff_operator
    assert info.value.violations[0].kind == "shape_mismatch"


def test_reward_examples(two_agent_identity):
    print("\n" + "=" * 60)
    print("TEST 4: Reward vectors")
    print("=" * 60)

    from games.network_game import Edge, JointStrategy, NetworkGame, reward

    x = JointStrategy((np.array([0.5, 0.5]), np.array([0.3, 0.7])))
    r = reward(two_agent_identity, 0, x)
    print(f"   identity, x_l=(0.3, 0.7) -> r_0 = {r}")
    np.testing.assert_allclose(r, [0.3, 0.7], atol=1e-15)

    zeros = NetworkGame(2, (2, 2), [Edge(0, 1, np.zeros((2, 2)), np.zeros((2, 2)))])
    np.testing.assert_array_equal(reward(zeros, 1, x), [0.0, 0.0])

    a, b = np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([[0.5, -1.0], [2.0, 0.0]])
    star = NetworkGame(3, (2, 2, 2), [Edge(0, 1, a, np.eye(2)), Edge(0, 2, b, np.eye(2))])
    y = JointStrategy((np.array([0.2, 0.8]), np.array([0.6, 0.4]), np.array([0.1, 0.9])))
    expected = [sum(a[i, j] * y[1][j] + b[i, j] * y[2][j] for j in range(2)) for i in range(2)]
    np.testing.assert_allclose(reward(star, 0, y), expected, atol=1e-14)
    print("✅ Reward matches scalar-loop oracle")


def test_reward_errors(two_agent_identity):
    from games.errors import AgentIndexError, DomainError
    from games.network_game import JointStrategy, reward

    x = JointStrategy.uniform((2, 2))
    with pytest.raises(AgentIndexError):
        reward(two_agent_identity, 2, x)
    with pytest.raises(AgentIndexError):
        reward(two_agent_identity, -1, x)
    with pytest.raises(DomainError):
        reward(two_agent_identity, 0, JointStrategy.uniform((3, 2)))


def test_payoff_examples(two_agent_identity, random_ring):
    print("\n" + "=" * 60)
    print("TEST 5: Payoffs")
    print("=" * 60)

    from games.network_game import Edge, JointStrategy, NetworkGame, payoff

    half = JointStrategy.uniform((2, 2))
    assert payoff(two_agent_identity, 0, half) == pytest.approx(0.5, abs=1e-15)
    zeros = NetworkGame(2, (2, 2), [Edge(0, 1, np.zeros((2, 2)), np.zeros((2, 2)))])
    assert payoff(zeros, 0, half) == 0.0
    print("✅ Identity and zero payoffs")

    rng = np.random.default_rng(3)
    layout = random_ring.layout
    x = JointStrategy.from_flat(layout.sample_dirichlet(rng), random_ring.action_counts)
    for k in range(3):
        assert payoff(random_ring, k, x) == pytest.approx(_brute_force_payoff(random_ring, k, x), abs=1e-12)
    print("✅ Random ring payoffs match triple-loop oracle")


def test_bilinearity_and_own_strategy_independence(random_ring, rng):
    print("\n" + "=" * 60)
    print("TEST 6: Bilinearity identities")
    print("=" * 60)

    from games.network_game import JointStrategy, payoff, reward

    layout = random_ring.layout
    counts = random_ring.action_counts
    for _ in range(20):
        x = JointStrategy.from_flat(layout.sample_dirichlet(rng), counts)
        y = JointStrategy.from_flat(layout.sample_dirichlet(rng), counts)
        for k in range(3):
            assert payoff(random_ring, k, x) == pytest.approx(float(x[k] @ reward(random_ring, k, x)), abs=1e-12)
            swapped = JointStrategy(tuple(y[j] if j == k else x[j] for j in range(3)))
            np.testing.assert_allclose(reward(random_ring, k, swapped), reward(random_ring, k, x), atol=1e-14)
            for a in (0.0, 0.25, 0.5, 1.0):
                mix = JointStrategy(tuple(a * x[j] + (1 - a) * y[j] for j in range(3)))
                expected = a * reward(random_ring, k, x) + (1 - a) * reward(random_ring, k, y)
                np.testing.assert_allclose(reward(random_ring, k, mix), expected, atol=1e-12)
    print("✅ u_k = <x_k, r_k>, r_k ignores x_k, r_k is affine")


def test_perturbed_payoff(two_agent_identity, random_ring, rng):
    print("\n" + "=" * 60)
    print("TEST 7: Entropy-perturbed payoffs")
    print("=" * 60)

    from games.errors import DomainError
    from games.network_game import Edge, ExplorationRates, JointStrategy, NetworkGame, payoff, perturbed_payoff
    from games.simplex import entropy

    zeros = NetworkGame(2, (2, 2), [Edge(0, 1, np.zeros((2, 2)), np.zeros((2, 2)))])
    half = JointStrategy.uniform((2, 2))
    value = perturbed_payoff(zeros, ExplorationRates.uniform(1.0, 2), 0, half)
    print(f"   zero payoffs, uniform, T=1 -> {value:.6f}")
    assert value == pytest.approx(np.log(2), abs=1e-12)

    value = perturbed_payoff(two_agent_identity, ExplorationRates.uniform(2.0, 2), 0, half)
    assert value == pytest.approx(0.5 + 2 * np.log(2), abs=1e-12)

    degenerate = ExplorationRates.degenerate([0.0, 0.0])
    assert perturbed_payoff(two_agent_identity, degenerate, 0, half) == payoff(two_agent_identity, 0, half)
    print("✅ Examples and T=0 limit")

    rates = ExplorationRates((0.5, 1.5, 3.0))
    layout = random_ring.layout
    for _ in range(10):
        x = JointStrategy.from_flat(layout.clamp(layout.sample_dirichlet(rng), 1e-9), random_ring.action_counts)
        for k in range(3):
            gap = perturbed_payoff(random_ring, rates, k, x) - payoff(random_ring, k, x)
            assert gap == pytest.approx(rates[k] * entropy(x[k]), abs=1e-12)
            assert 0.0 <= entropy(x[k]) <= np.log(3) + 1e-12

    boundary = JointStrategy((np.array([1.0, 0.0]), np.array([0.5, 0.5])))
    with pytest.raises(DomainError):
        perturbed_payoff(two_agent_identity, ExplorationRates.uniform(1.0, 2), 0, boundary)
    print("✅ Gap equals T_k * entropy; boundary strategies rejected")


def test_strategy_and_rate_invariants():
    from games.errors import DomainError
    from games.network_game import ExplorationRates, JointStrategy

    with pytest.raises(DomainError):
        JointStrategy((np.array([0.5, 0.6]),))
    with pytest.raises(DomainError):
        JointStrategy((np.array([1.2, -0.2]),))
    JointStrategy((np.array([0.5, 0.5 + 5e-10]),))
    with pytest.raises(DomainError):
        ExplorationRates((1.0, 0.0))
    with pytest.raises(DomainError):
        ExplorationRates((1.0, -2.0))

    x = JointStrategy((np.array([0.2, 0.8]), np.array([1.0, 0.0])))
    assert not x.is_interior()
    assert JointStrategy.uniform((2, 3)).is_interior(floor=1e-12)
    with pytest.raises(ValueError):
        x[0][0] = 0.5


def test_payoff_operator_stacks_rewards(random_ring, rng):
    from games.network_game import JointStrategy, all_rewards, reward

    x = JointStrategy.from_flat(random_ring.layout.sample_dirichlet(rng), random_ring.action_counts)
    stacked = np.concatenate([reward(random_ring, k, x) for k in range(3)])
    np.testing.assert_allclose(all_rewards(random_ring, x.flat()), stacked, atol=1e-13)
    np.testing.assert_allclose(random_ring.payoff_operator @ x.flat(), stacked, atol=1e-13)


def test_edge_storage_orientation_is_irrelevant():
    from games.network_game import Edge, JointStrategy, NetworkGame, reward

    a, b = np.array([[1.0, -2.0], [0.5, 3.0]]), np.array([[2.0, 1.0], [-1.0, 0.0]])
    forward = NetworkGame(2, (2, 2), [Edge(0, 1, a, b)])
    backward = NetworkGame(2, (2, 2), [Edge(1, 0, b, a)])
    x = JointStrategy((np.array([0.3, 0.7]), np.array([0.9, 0.1])))
    for k in range(2):
        np.testing.assert_allclose(reward(forward, k, x), reward(backward, k, x))
    np.testing.assert_array_equal(forward.payoff_operator, backward.payoff_operator)
    np.testing.assert_array_equal(forward.edge_between(1, 0).a_kl.entries, b)
    assert forward.neighbours(0) == [1]


def test_layout_segment_operations():
    from games.simplex import AgentLayout

    layout = AgentLayout([2, 3])
    values = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    np.testing.assert_array_equal(layout.segment_sum(values), [3.0, 12.0])
    np.testing.assert_array_equal(layout.expand(np.array([1.0, 2.0])), [1, 1, 2, 2, 2])
    soft = layout.softmax(np.array([1000.0, 0.0, 0.0, 0.0, 0.0]))
    np.testing.assert_allclose(layout.segment_sum(soft), [1.0, 1.0])
    assert soft[1] == 0.0
    np.testing.assert_allclose(layout.clamp(soft, 1e-12)[1], 1e-12, rtol=1e-9)

    batch = np.vstack([values, values[::-1]])
    assert layout.segment_sum(batch).shape == (2, 2)
    uniform = AgentLayout([3, 3])
    assert uniform.uniform and not layout.uniform
