# agents/q_learning.py
"""
NetGame QL — Q-Learning Agents & Dynamics
=========================================
Boltzmann Q-Learning on a network polymatrix game, in two forms:

  1. Discrete algorithm (the fixed-protocol experiment runs)
        Q_ki <- (1 - α_k) Q_ki + α_k r_ki(x_{-k}),   x_k = softmax(Q_k / T_k)
  2. Continuous-time Q-Learning dynamics (QLD)
        ẋ_ki = x_ki [r_ki - ⟨x_k, r_k⟩ + T_k Σ_j x_kj ln(x_kj / x_ki)]
     integrated with classical RK4 and clamp-and-renormalise after each step.

Both forms have a batched runner over many initial strategies, which the
experiment sweeps use.

With uniform α and T, one discrete iteration advances the QLD clock by α/T.
Trajectories carry the windowed convergence verdict (max-min)/max < l.
"""

import logging
from dataclasses import dataclass
from typing import Any, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from games.errors import DomainError, IntegrationError
from games.network_game import GAME_CONFIG, ExplorationRates, JointStrategy, NetworkGame
from games.simplex import AgentLayout

logger = logging.getLogger(__name__)

# =============================================================================
# CONFIGURATION
# =============================================================================
DYNAMICS_CONFIG = {
    "alpha": 0.01,          # learning step α_k
    "iterations": 20_000,   # discrete iterations per run
    "stride": 1,            # record every `stride` iterations / steps
    "window": 2_500,        # final window W for the convergence check
    "tolerance": 1e-5,      # convergence tolerance l
    "dt": 0.01,             # RK4 step
    "floor": GAME_CONFIG["interior_floor"],
}


# =============================================================================
# STATE TYPES
# =============================================================================
@dataclass(frozen=True)
class QState:
    """Per-agent Q-value vectors."""

    blocks: Tuple[np.ndarray, ...]

    def __post_init__(self):
        blocks = tuple(np.array(b, dtype=float) for b in self.blocks)
        for k, block in enumerate(blocks):
            if block.ndim != 1 or block.size == 0:
                raise DomainError(f"Q-values of agent {k} must be a non-empty vector")
            if not np.all(np.isfinite(block)):
                raise DomainError(f"Q-values of agent {k} are not finite")
            block.setflags(write=False)
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_flat(cls, flat: Any, action_counts: Sequence[int]) -> "QState":
        return cls(AgentLayout(action_counts).split(np.asarray(flat, dtype=float)))

    @classmethod
    def zeros(cls, action_counts: Sequence[int]) -> "QState":
        return cls(tuple(np.zeros(n) for n in action_counts))

    @classmethod
    def matching(cls, x: JointStrategy, rates: ExplorationRates) -> "QState":
        """Q_k = T_k ln x_k, whose Boltzmann policy is x itself."""
        if not x.is_interior():
            raise DomainError("initial strategy must be interior to seed Q-values")
        return cls(tuple(rates[k] * np.log(block) for k, block in enumerate(x.blocks)))

    @property
    def action_counts(self) -> Tuple[int, ...]:
        return tuple(b.size for b in self.blocks)

    def __getitem__(self, k: int) -> np.ndarray:
        return self.blocks[k]

    def flat(self) -> np.ndarray:
        return np.concatenate(self.blocks)


class ConvergenceVerdict(NamedTuple):
    converged: bool
    statistic: float


@dataclass
class TrajectoryRecord:
    """Recorded states of one run plus its windowed convergence verdict."""

    time_points: np.ndarray        # (R,)
    states: np.ndarray             # (R, D) flat joint strategies
    action_counts: Tuple[int, ...]
    window: int
    tolerance: float
    converged: bool
    per_component_relative_range: float
    mode: str = "discrete"

    def __len__(self) -> int:
        return len(self.time_points)

    def strategy(self, index: int) -> JointStrategy:
        return JointStrategy.from_flat(self.states[index], self.action_counts)

    @property
    def final_strategy(self) -> JointStrategy:
        return self.strategy(-1)

    def first_action_series(self) -> np.ndarray:
        """(R, N) probability each agent puts on its first action."""
        return self.states[:, AgentLayout(self.action_counts).starts]

    def to_frame(self) -> pd.DataFrame:
        """Long table with columns t, agent, action, prob."""
        layout = AgentLayout(self.action_counts)
        actions = np.concatenate([np.arange(n) for n in self.action_counts])
        records = len(self.time_points)
        return pd.DataFrame({
            "t": np.repeat(self.time_points, layout.dimension),
            "agent": np.tile(layout.agent_index, records),
            "action": np.tile(actions, records),
            "prob": self.states.reshape(-1),
        })


# =============================================================================
# CONVERGENCE CHECK
# =============================================================================
def relative_range(states: np.ndarray) -> np.ndarray:
    """(max_t - min_t) / max_t per component over axis 0; 0 where max is 0."""
    high = states.max(axis=0)
    low = states.min(axis=0)
    spread = high - low
    return np.divide(spread, high, out=np.zeros_like(spread), where=high > 0)


def convergence_check(
    states: Union[np.ndarray, Sequence[JointStrategy]],
    tolerance: float = DYNAMICS_CONFIG["tolerance"],
) -> ConvergenceVerdict:
    """
    Windowed convergence test over the given states (the final window W).

    states may be a list of JointStrategy, an array (W, D), or a batch
    (W, B, D); a batch converges only if every member does.
    """
    if tolerance <= 0:
        raise DomainError(f"tolerance must be positive, got {tolerance}")
    if isinstance(states, np.ndarray):
        window = states
    else:
        window = np.array([s.flat() if isinstance(s, JointStrategy) else np.asarray(s) for s in states])
    if window.shape[0] == 0:
        raise DomainError("convergence window is empty")
    statistic = float(relative_range(window).max())
    return ConvergenceVerdict(statistic < tolerance, statistic)


# =============================================================================
# DISCRETE Q-LEARNING
# =============================================================================
def _check_rates(game: NetworkGame, rates: ExplorationRates) -> None:
    if len(rates) != game.num_agents:
        raise DomainError(f"{len(rates)} exploration rates for {game.num_agents} agents")


def _alpha_per_coordinate(game: NetworkGame, alpha: Union[float, Sequence[float]]) -> np.ndarray:
    values = np.broadcast_to(np.asarray(alpha, dtype=float), (game.num_agents,))
    if np.any(values < 0) or np.any(values > 1) or not np.all(np.isfinite(values)):
        raise DomainError(f"learning step must lie in [0, 1], got {alpha}")
    return game.layout.expand(values)


def boltzmann_policy(q: QState, rates: ExplorationRates) -> JointStrategy:
    """
    x_ki = exp(Q_ki / T_k) / Σ_j exp(Q_kj / T_k), max-subtracted.

    The result is clamped to the interior floor so extreme Q-gaps give
    (1 - ε, ε) instead of an exact zero.
    """
    layout = AgentLayout(q.action_counts)
    if len(rates) != layout.num_agents:
        raise DomainError(f"{len(rates)} exploration rates for {layout.num_agents} agents")
    x = layout.softmax(q.flat() / rates.per_coordinate(layout))
    return JointStrategy(layout.split(layout.clamp(x, DYNAMICS_CONFIG["floor"])))


def q_learning_step(
    game: NetworkGame,
    q: QState,
    rates: ExplorationRates,
    alpha: Union[float, Sequence[float]],
) -> QState:
    """One simultaneous Q-update of every agent against the current policies."""
    _check_rates(game, rates)
    a = _alpha_per_coordinate(game, alpha)
    x = boltzmann_policy(q, rates).flat()
    r = game.payoff_operator @ x
    return QState.from_flat((1.0 - a) * q.flat() + a * r, game.action_counts)


def run_q_learning_batch(
    game: NetworkGame,
    rates: ExplorationRates,
    x0: np.ndarray,
    alpha: Union[float, Sequence[float]] = DYNAMICS_CONFIG["alpha"],
    iterations: int = DYNAMICS_CONFIG["iterations"],
    stride: int = DYNAMICS_CONFIG["stride"],
    keep_last: Optional[int] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Run discrete Q-Learning from B initial strategies at once.

    Args:
        x0: (B, D) interior initial strategies; Q starts at T ln x0.
        keep_last: keep only the last `keep_last` recorded states (None = all).

    Returns:
        (times, states) with states of shape (R, B, D); times count iterations.
    """
    _check_rates(game, rates)
    if iterations < 0 or stride < 1:
        raise DomainError(f"need iterations >= 0 and stride >= 1, got {iterations}, {stride}")
    layout = game.layout
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    if x0.shape[-1] != layout.dimension or np.any(x0 <= 0):
        raise DomainError("initial strategies must be interior points of the game's simplex")
    t = rates.per_coordinate(layout)
    a = _alpha_per_coordinate(game, alpha)
    p_t = np.asarray(game.payoff_operator).T

    recorded_ticks = range(0, iterations + 1, stride)
    first_kept = 0 if keep_last is None else max(0, len(recorded_ticks) - keep_last)
    times: List[int] = []
    states: List[np.ndarray] = []

    q = t * np.log(x0)
    for tick in range(iterations + 1):
        x = layout.softmax(q / t)
        if tick % stride == 0 and tick // stride >= first_kept:
            times.append(tick)
            states.append(x)
        if tick == iterations:
            break
        q = (1.0 - a) * q + a * (x @ p_t)
        if not np.all(np.isfinite(q)):
            raise IntegrationError(tick + 1, "Q-values became non-finite")
    return np.asarray(times, dtype=float), np.asarray(states)


def simulate_q_learning(
    game: NetworkGame,
    rates: ExplorationRates,
    x0: JointStrategy,
    alpha: Union[float, Sequence[float]] = DYNAMICS_CONFIG["alpha"],
    iterations: int = DYNAMICS_CONFIG["iterations"],
    stride: int = DYNAMICS_CONFIG["stride"],
    window: int = DYNAMICS_CONFIG["window"],
    tolerance: float = DYNAMICS_CONFIG["tolerance"],
) -> TrajectoryRecord:
    """Discrete Q-Learning from one initial strategy, with its convergence verdict."""
    times, states = run_q_learning_batch(game, rates, x0.flat()[None, :], alpha, iterations, stride)
    return _record(game, times, states[:, 0, :], window, tolerance, "discrete")


# =============================================================================
# CONTINUOUS-TIME DYNAMICS
# =============================================================================
def _qld_field(layout: AgentLayout, p_t: np.ndarray, t: np.ndarray, x: np.ndarray) -> np.ndarray:
    r = x @ p_t
    log_x = np.log(x)
    mass = layout.expand(layout.segment_sum(x))
    mean_reward = layout.expand(layout.segment_dot(x, r))
    neg_entropy = layout.expand(layout.segment_dot(x, log_x))
    return x * (r - mean_reward + t * (neg_entropy - log_x * mass))


def qld_vector_field(game: NetworkGame, rates: ExplorationRates, x: Union[JointStrategy, np.ndarray]) -> np.ndarray:
    """
    QLD tangent vector at an interior x (flat, same layout as x).

    Each agent block sums to zero, so the flow stays on the simplex.
    """
    _check_rates(game, rates)
    flat = x.flat() if isinstance(x, JointStrategy) else np.asarray(x, dtype=float)
    if flat.shape[-1] != game.dimension:
        raise DomainError(f"strategy has {flat.shape[-1]} coordinates, expected {game.dimension}")
    if np.any(flat <= 0):
        raise DomainError("QLD needs a strictly interior strategy")
    return _qld_field(game.layout, np.asarray(game.payoff_operator).T, rates.per_coordinate(game.layout), flat)


def integrate_qld_batch(
    game: NetworkGame,
    rates: ExplorationRates,
    x0: np.ndarray,
    dt: float = DYNAMICS_CONFIG["dt"],
    steps: int = DYNAMICS_CONFIG["iterations"],
    stride: int = DYNAMICS_CONFIG["stride"],
    keep_last: Optional[int] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Classical RK4 on the QLD field at fixed dt for B initial strategies at
    once; every accepted state is clamped to the interior floor and
    renormalised per agent.

    Returns:
        (times, states) with states of shape (R, B, D); times in QLD units.
    """
    _check_rates(game, rates)
    if dt <= 0:
        raise DomainError(f"dt must be positive, got {dt}")
    if steps < 0 or stride < 1:
        raise DomainError(f"need steps >= 0 and stride >= 1, got {steps}, {stride}")
    layout = game.layout
    x = np.atleast_2d(np.asarray(x0, dtype=float))
    if x.shape[-1] != layout.dimension or np.any(x <= 0):
        raise DomainError("initial strategies must be interior points of the game's simplex")

    floor = DYNAMICS_CONFIG["floor"]
    p_t = np.asarray(game.payoff_operator).T
    t = rates.per_coordinate(layout)

    def field(y: np.ndarray) -> np.ndarray:
        return _qld_field(layout, p_t, t, np.maximum(y, floor))

    recorded_ticks = range(0, steps + 1, stride)
    first_kept = 0 if keep_last is None else max(0, len(recorded_ticks) - keep_last)
    times: List[float] = []
    states: List[np.ndarray] = []
    if first_kept == 0:
        times.append(0.0)
        states.append(x.copy())
    for step in range(1, steps + 1):
        k1 = field(x)
        k2 = field(x + 0.5 * dt * k1)
        k3 = field(x + 0.5 * dt * k2)
        k4 = field(x + dt * k3)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise IntegrationError(step, "QLD state became non-finite")
        x = layout.clamp(x, floor)
        if step % stride == 0 and step // stride >= first_kept:
            times.append(step * dt)
            states.append(x.copy())
    return np.asarray(times, dtype=float), np.asarray(states)


def integrate_qld(
    game: NetworkGame,
    rates: ExplorationRates,
    x0: JointStrategy,
    dt: float = DYNAMICS_CONFIG["dt"],
    steps: int = DYNAMICS_CONFIG["iterations"],
    stride: int = DYNAMICS_CONFIG["stride"],
    window: int = DYNAMICS_CONFIG["window"],
    tolerance: float = DYNAMICS_CONFIG["tolerance"],
) -> TrajectoryRecord:
    """RK4 integration of QLD from one interior strategy, with its convergence verdict."""
    if not x0.is_interior():
        raise DomainError("initial strategy must be interior")
    times, states = integrate_qld_batch(game, rates, x0.flat()[None, :], dt, steps, stride)
    return _record(game, times, states[:, 0, :], window, tolerance, "ode")


def _record(
    game: NetworkGame, times: np.ndarray, states: np.ndarray, window: int, tolerance: float, mode: str
) -> TrajectoryRecord:
    if window < 1:
        raise DomainError(f"window must be >= 1, got {window}")
    verdict = convergence_check(states[-window:], tolerance)
    logger.debug("%s run on %s: statistic %.3e (converged=%s)", mode, game.name, verdict.statistic, verdict.converged)
    return TrajectoryRecord(
        time_points=times,
        states=states,
        action_counts=game.action_counts,
        window=min(window, len(states)),
        tolerance=tolerance,
        converged=verdict.converged,
        per_component_relative_range=verdict.statistic,
        mode=mode,
    )
