# games/network_game.py
"""
NetGame QL — Network Polymatrix Game Model
==========================================
Core types for network polymatrix games and the payoff quantities every
other package builds on:

  - PayoffMatrix, Edge, NetworkGame: the game itself (agents, action
    counts, undirected edges carrying both oriented payoff matrices)
  - JointStrategy, ExplorationRates: points of the product simplex and
    per-agent temperatures
  - validate_game(): report-style structural validation
  - reward(), payoff(), perturbed_payoff(): the bilinear payoffs and the
    entropy-regularised payoffs whose Nash equilibria are the QRE

All values are immutable after construction.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from games.errors import AgentIndexError, DomainError, GameValidationError
from games.simplex import AgentLayout, entropy

logger = logging.getLogger(__name__)

# =============================================================================
# CONFIGURATION
# =============================================================================
GAME_CONFIG = {
    "interior_floor": 1e-12,   # ε_floor for log-dependent operations
    "simplex_tol": 1e-9,       # |sum(x_k) - 1| tolerance
}


def _frozen_array(values: Any) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


# =============================================================================
# PAYOFF MATRICES & EDGES
# =============================================================================
@dataclass(frozen=True)
class PayoffMatrix:
    """Payoff of the owning agent (rows) against a neighbour's actions (cols)."""

    entries: np.ndarray

    def __post_init__(self):
        array = _frozen_array(self.entries)
        if array.ndim != 2:
            raise DomainError(f"payoff matrix must be 2-D, got shape {array.shape}")
        object.__setattr__(self, "entries", array)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.entries.shape

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.entries)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "PayoffMatrix":
        return cls(np.zeros((rows, cols)))


def _as_payoff(matrix: Union[PayoffMatrix, Any]) -> PayoffMatrix:
    return matrix if isinstance(matrix, PayoffMatrix) else PayoffMatrix(matrix)


@dataclass(frozen=True)
class Edge:
    """Undirected edge {k, l} with both oriented matrices A^{kl} and A^{lk}."""

    k: int
    l: int
    a_kl: PayoffMatrix
    a_lk: PayoffMatrix

    def __post_init__(self):
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "l", int(self.l))
        object.__setattr__(self, "a_kl", _as_payoff(self.a_kl))
        object.__setattr__(self, "a_lk", _as_payoff(self.a_lk))

    @property
    def pair(self) -> Tuple[int, int]:
        return (min(self.k, self.l), max(self.k, self.l))

    def swapped(self) -> "Edge":
        return Edge(self.l, self.k, self.a_lk, self.a_kl)

    def interaction_matrix(self) -> np.ndarray:
        """A^{kl} + (A^{lk})^T, the matrix whose norm defines δ_S on this edge."""
        return self.a_kl.entries + self.a_lk.entries.T


# =============================================================================
# VALIDATION REPORT
# =============================================================================
@dataclass(frozen=True)
class Violation:
    """One structural problem found by validate_game()."""

    kind: str
    message: str
    edge_index: Optional[int] = None

    def __str__(self) -> str:
        where = f" (edge #{self.edge_index})" if self.edge_index is not None else ""
        return f"{self.kind}{where}: {self.message}"


# =============================================================================
# NETWORK GAME
# =============================================================================
class NetworkGame:
    """
    N agents, per-agent action counts, and one Edge per interacting pair.

    The adjacency matrix G is derived from the edges unless an explicit one
    is supplied (for instance from a custom topology); validate_game()
    checks that the two agree.
    """

    def __init__(
        self,
        num_agents: int,
        action_counts: Sequence[int],
        edges: Iterable[Edge],
        adjacency: Optional[Any] = None,
        name: str = "custom",
    ):
        self.num_agents = int(num_agents)
        self.action_counts: Tuple[int, ...] = tuple(int(n) for n in action_counts)
        self.edges: Tuple[Edge, ...] = tuple(edges)
        self.name = name
        self._explicit_adjacency = None if adjacency is None else _frozen_array(adjacency)

    def __repr__(self) -> str:
        return (
            f"NetworkGame(name={self.name!r}, num_agents={self.num_agents}, "
            f"action_counts={list(self.action_counts)}, edges={len(self.edges)})"
        )

    # -------------------------------------------------------------------------
    # Derived structure
    # -------------------------------------------------------------------------
    @cached_property
    def layout(self) -> AgentLayout:
        return AgentLayout(self.action_counts)

    @property
    def dimension(self) -> int:
        return self.layout.dimension

    @cached_property
    def adjacency(self) -> np.ndarray:
        if self._explicit_adjacency is not None:
            return self._explicit_adjacency
        g = np.zeros((self.num_agents, self.num_agents))
        for edge in self.edges:
            if 0 <= edge.k < self.num_agents and 0 <= edge.l < self.num_agents:
                g[edge.k, edge.l] = 1.0
                g[edge.l, edge.k] = 1.0
        g.setflags(write=False)
        return g

    @cached_property
    def incidence(self) -> Dict[int, List[Tuple[int, np.ndarray]]]:
        """agent -> [(neighbour, A^{agent,neighbour}), ...]."""
        table: Dict[int, List[Tuple[int, np.ndarray]]] = {k: [] for k in range(self.num_agents)}
        for edge in self.edges:
            table.setdefault(edge.k, []).append((edge.l, edge.a_kl.entries))
            table.setdefault(edge.l, []).append((edge.k, edge.a_lk.entries))
        return table

    def neighbours(self, k: int) -> List[int]:
        _check_agent(self, k)
        return sorted(l for l, _ in self.incidence[k])

    @cached_property
    def payoff_operator(self) -> np.ndarray:
        """
        Block matrix P with block (k, l) = A^{kl} on edges, zero elsewhere.

        Stacking all rewards gives r(x) = P x, and the off-diagonal part of
        the pseudo-hessian is exactly -P.
        """
        require_valid(self)
        layout = self.layout
        p = np.zeros((layout.dimension, layout.dimension))
        for edge in self.edges:
            p[layout.agent_slice(edge.k), layout.agent_slice(edge.l)] += edge.a_kl.entries
            p[layout.agent_slice(edge.l), layout.agent_slice(edge.k)] += edge.a_lk.entries
        p.setflags(write=False)
        return p

    def edge_between(self, k: int, l: int) -> Optional[Edge]:
        for edge in self.edges:
            if (edge.k, edge.l) == (k, l):
                return edge
            if (edge.k, edge.l) == (l, k):
                return edge.swapped()
        return None


# =============================================================================
# STRATEGIES & RATES
# =============================================================================
@dataclass(frozen=True)
class JointStrategy:
    """One probability vector per agent: a point of the product simplex Δ."""

    blocks: Tuple[np.ndarray, ...]
    tol: float = field(default=GAME_CONFIG["simplex_tol"], repr=False, compare=False)

    def __post_init__(self):
        blocks = tuple(_frozen_array(b) for b in self.blocks)
        for k, block in enumerate(blocks):
            if block.ndim != 1 or block.size == 0:
                raise DomainError(f"strategy of agent {k} must be a non-empty vector")
            if not np.all(np.isfinite(block)):
                raise DomainError(f"strategy of agent {k} has non-finite entries")
            if np.any(block < 0):
                raise DomainError(f"strategy of agent {k} has negative entries")
            if abs(block.sum() - 1.0) > self.tol:
                raise DomainError(f"strategy of agent {k} sums to {block.sum():.12f}, not 1")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_flat(cls, flat: Any, action_counts: Sequence[int]) -> "JointStrategy":
        layout = AgentLayout(action_counts)
        flat = np.asarray(flat, dtype=float)
        if flat.shape != (layout.dimension,):
            raise DomainError(f"flat strategy has shape {flat.shape}, expected ({layout.dimension},)")
        return cls(layout.split(flat))

    @classmethod
    def uniform(cls, action_counts: Sequence[int]) -> "JointStrategy":
        return cls(tuple(np.full(n, 1.0 / n) for n in action_counts))

    @property
    def action_counts(self) -> Tuple[int, ...]:
        return tuple(b.size for b in self.blocks)

    @property
    def num_agents(self) -> int:
        return len(self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def __getitem__(self, k: int) -> np.ndarray:
        return self.blocks[k]

    def flat(self) -> np.ndarray:
        return np.concatenate(self.blocks)

    def is_interior(self, floor: float = 0.0) -> bool:
        """All components strictly above 0 (floor=0) or at least floor."""
        if floor <= 0:
            return all(np.all(b > 0) for b in self.blocks)
        return all(np.all(b >= floor) for b in self.blocks)

    def distance(self, other: "JointStrategy") -> float:
        """Sup-norm distance between two joint strategies."""
        return float(np.max(np.abs(self.flat() - other.flat())))


@dataclass(frozen=True)
class ExplorationRates:
    """Per-agent exploration rates (Boltzmann temperatures) T_k > 0."""

    values: Tuple[float, ...]
    allow_zero: bool = field(default=False, repr=False)

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if not values:
            raise DomainError("exploration rates are empty")
        if not all(np.isfinite(v) for v in values):
            raise DomainError(f"exploration rates must be finite: {values}")
        if self.allow_zero:
            if min(values) < 0:
                raise DomainError(f"exploration rates must be >= 0: {values}")
        elif min(values) <= 0:
            raise DomainError(f"exploration rates must be > 0: {values}")
        object.__setattr__(self, "values", values)

    @classmethod
    def uniform(cls, rate: float, num_agents: int) -> "ExplorationRates":
        return cls(tuple([rate] * num_agents))

    @classmethod
    def degenerate(cls, values: Sequence[float]) -> "ExplorationRates":
        """Rates that may be zero; only for limit checks (T -> 0 recovers u_k)."""
        return cls(tuple(values), allow_zero=True)

    @property
    def minimum(self) -> float:
        return min(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, k: int) -> float:
        return self.values[k]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def per_coordinate(self, layout: AgentLayout) -> np.ndarray:
        return layout.expand(self.as_array())


# =============================================================================
# VALIDATION
# =============================================================================
def validate_game(game: NetworkGame) -> List[Violation]:
    """
    Check every NetworkGame invariant.

    Returns:
        List of Violation records; empty iff the game is well formed.
    """
    violations: List[Violation] = []
    n_agents = game.num_agents
    counts = game.action_counts

    if n_agents < 1:
        violations.append(Violation("agent_count", f"num_agents must be >= 1, got {n_agents}"))
    if len(counts) != n_agents:
        violations.append(Violation(
            "agent_count",
            f"{len(counts)} action counts given for {n_agents} agents",
        ))
    for k, n in enumerate(counts):
        if n < 1:
            violations.append(Violation("action_count", f"agent {k} has {n} actions"))

    seen_pairs: Dict[Tuple[int, int], int] = {}
    for index, edge in enumerate(game.edges):
        k, l = edge.k, edge.l
        if not (0 <= k < n_agents and 0 <= l < n_agents):
            violations.append(Violation(
                "agent_out_of_range", f"edge ({k}, {l}) references a missing agent", index
            ))
            continue
        if k == l:
            violations.append(Violation("self_loop", f"edge ({k}, {l}) is a self-loop", index))
            continue
        if edge.pair in seen_pairs:
            violations.append(Violation(
                "duplicate_edge",
                f"pair {edge.pair} already given by edge #{seen_pairs[edge.pair]}",
                index,
            ))
        seen_pairs.setdefault(edge.pair, index)

        if k < len(counts) and l < len(counts):
            expected_kl = (counts[k], counts[l])
            expected_lk = (counts[l], counts[k])
            if edge.a_kl.shape != expected_kl:
                violations.append(Violation(
                    "shape_mismatch",
                    f"A^{{{k}{l}}} has shape {edge.a_kl.shape}, expected {expected_kl}",
                    index,
                ))
            if edge.a_lk.shape != expected_lk:
                violations.append(Violation(
                    "shape_mismatch",
                    f"A^{{{l}{k}}} has shape {edge.a_lk.shape}, expected {expected_lk}",
                    index,
                ))
        for label, matrix in ((f"A^{{{k}{l}}}", edge.a_kl), (f"A^{{{l}{k}}}", edge.a_lk)):
            if not matrix.is_finite():
                violations.append(Violation("non_finite", f"{label} has NaN or infinite entries", index))

    if game._explicit_adjacency is not None:
        violations.extend(_validate_adjacency(game._explicit_adjacency, n_agents, set(seen_pairs)))

    return violations


def _validate_adjacency(g: np.ndarray, n_agents: int, edge_pairs: set) -> List[Violation]:
    if g.shape != (n_agents, n_agents):
        return [Violation("adjacency_shape", f"adjacency has shape {g.shape}, expected {(n_agents, n_agents)}")]
    found: List[Violation] = []
    if not np.all(np.isin(g, (0.0, 1.0))):
        found.append(Violation("adjacency_values", "adjacency entries must be 0 or 1"))
    if np.any(np.diag(g) != 0):
        loops = [int(i) for i in np.flatnonzero(np.diag(g))]
        found.append(Violation("self_loop", f"adjacency has self-loops at agents {loops}"))
    if not np.array_equal(g, g.T):
        count = int(np.count_nonzero(g != g.T) // 2)
        found.append(Violation("asymmetric_adjacency", f"adjacency is not symmetric ({count} mismatched pairs)"))
    if found:
        return found
    adjacency_pairs = {(int(i), int(j)) for i, j in zip(*np.nonzero(np.triu(g)))}
    for pair in sorted(adjacency_pairs - edge_pairs):
        found.append(Violation("adjacency_mismatch", f"adjacency links {pair} but no edge carries matrices"))
    for pair in sorted(edge_pairs - adjacency_pairs):
        found.append(Violation("adjacency_mismatch", f"edge {pair} is missing from the adjacency"))
    return found


def require_valid(game: NetworkGame) -> NetworkGame:
    """Raise GameValidationError unless validate_game() is clean."""
    violations = validate_game(game)
    if violations:
        raise GameValidationError(violations)
    return game


# =============================================================================
# PAYOFFS
# =============================================================================
def _check_agent(game: NetworkGame, k: int) -> None:
    if not isinstance(k, (int, np.integer)) or not 0 <= k < game.num_agents:
        raise AgentIndexError(f"agent index {k} outside 0..{game.num_agents - 1}")


def _check_strategy(game: NetworkGame, x: JointStrategy) -> None:
    if x.action_counts != game.action_counts:
        raise DomainError(
            f"strategy action counts {list(x.action_counts)} do not match game {list(game.action_counts)}"
        )


def reward(game: NetworkGame, k: int, x: JointStrategy) -> np.ndarray:
    """
    Reward vector r_k(x_{-k}) = sum over edges (k,l) of A^{kl} x_l.

    r_{ki} is the partial derivative of u_k with respect to x_{ki}; it does
    not depend on x_k itself.
    """
    _check_agent(game, k)
    _check_strategy(game, x)
    r = np.zeros(game.action_counts[k])
    for l, matrix in game.incidence[k]:
        r += matrix @ x[l]
    return r


def payoff(game: NetworkGame, k: int, x: JointStrategy) -> float:
    """u_k(x) = sum over edges (k,l) of x_k . A^{kl} x_l."""
    return float(x[k] @ reward(game, k, x))


def perturbed_payoff(game: NetworkGame, rates: ExplorationRates, k: int, x: JointStrategy) -> float:
    """
    Entropy-regularised payoff u_k(x) - T_k <x_k, ln x_k>.

    Raises:
        DomainError: if x_k has a zero component (the logarithm is undefined).
    """
    _check_agent(game, k)
    if not np.all(x[k] > 0):
        raise DomainError(f"perturbed payoff needs an interior strategy; agent {k} has a zero component")
    return payoff(game, k, x) + rates[k] * entropy(x[k])


def all_rewards(game: NetworkGame, flat_x: np.ndarray) -> np.ndarray:
    """Stacked rewards P x for flat (or batched (..., D)) strategies."""
    return flat_x @ game.payoff_operator.T
