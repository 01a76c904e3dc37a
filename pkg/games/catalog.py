# games/catalog.py
"""
NetGame QL — Benchmark Game Catalog
===================================
Network topologies and the benchmark games used by the experiments:

  - make_network(): ring / star / full / random / custom adjacency
  - make_chakraborty(), make_mismatching(): directed-cycle games, embedded
    in the undirected model with a zero reverse matrix
  - make_shapley(), make_sato(): one (A, B) pair on every edge
  - make_rps(), make_matching_pennies(): pairwise zero-sum games
  - make_random_game(): seeded Gaussian payoffs for property checks
  - build_game(): name + parameters -> NetworkGame (CLI entry point)

Orientation convention: on every edge the lower agent index owns the
first matrix (A^{kl} with k < l).
"""

import logging
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from games.errors import ConfigError, DomainError
from games.network_game import Edge, NetworkGame, PayoffMatrix, require_valid

logger = logging.getLogger(__name__)

# Minimum agent count per topology
MIN_AGENTS = {"ring": 3, "star": 2, "full": 2, "random": 2, "custom": 1}


# =============================================================================
# NETWORK DESCRIPTION
# =============================================================================
class NetworkSpec(BaseModel):
    """Which topology to build; `n` is accepted as an alias of num_agents."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True, frozen=True)

    kind: Literal["ring", "star", "full", "random", "custom"]
    num_agents: int = Field(alias="n", ge=1)
    custom_adjacency: Optional[List[List[int]]] = None
    # Only for kind == "random" (exploratory sweeps, not a benchmark topology)
    edge_probability: float = Field(default=0.5, ge=0.0, le=1.0)
    seed: int = 0

    @model_validator(mode="after")
    def _check_size(self) -> "NetworkSpec":
        minimum = MIN_AGENTS[self.kind]
        if self.num_agents < minimum:
            raise ValueError(f"{self.kind} network needs N >= {minimum}, got {self.num_agents}")
        if self.kind == "custom":
            if self.custom_adjacency is None:
                raise ValueError("custom network needs custom_adjacency")
            g = np.asarray(self.custom_adjacency)
            if g.shape != (self.num_agents, self.num_agents):
                raise ValueError(f"custom_adjacency has shape {g.shape}, expected N x N")
            if not np.array_equal(g, g.T) or np.any(np.diag(g) != 0) or not np.all(np.isin(g, (0, 1))):
                raise ValueError("custom_adjacency must be symmetric 0/1 with zero diagonal")
        return self


def _spec(network: Any) -> NetworkSpec:
    if isinstance(network, NetworkSpec):
        return network
    try:
        return NetworkSpec.model_validate(network)
    except ValueError as e:
        raise DomainError(f"invalid network spec: {e}") from e


def make_network(spec: Any) -> np.ndarray:
    """
    Symmetric 0/1 adjacency matrix with zero diagonal.

    ring: every agent linked to its two cyclic neighbours (max degree 2).
    star: hub 0 linked to every other agent (max degree N-1).
    full: all pairs (max degree N-1).
    """
    spec = _spec(spec)
    n = spec.num_agents
    if spec.kind == "ring":
        graph = nx.cycle_graph(n)
    elif spec.kind == "star":
        graph = nx.star_graph(n - 1)
    elif spec.kind == "full":
        graph = nx.complete_graph(n)
    elif spec.kind == "random":
        graph = nx.gnp_random_graph(n, spec.edge_probability, seed=spec.seed)
    else:
        return np.asarray(spec.custom_adjacency, dtype=float)
    return nx.to_numpy_array(graph, nodelist=range(n), dtype=float)


def _edge_pairs(adjacency: np.ndarray) -> List[Tuple[int, int]]:
    return [(int(k), int(l)) for k, l in zip(*np.nonzero(np.triu(adjacency, 1)))]


def _uniform_edges(adjacency: np.ndarray, a: np.ndarray, b: np.ndarray) -> List[Edge]:
    a_matrix, b_matrix = PayoffMatrix(a), PayoffMatrix(b)
    return [Edge(k, l, a_matrix, b_matrix) for k, l in _edge_pairs(adjacency)]


# =============================================================================
# DIRECTED-CYCLE GAMES
# =============================================================================
def make_directed_cycle_game(num_agents: int, a: np.ndarray, name: str) -> NetworkGame:
    """
    u_k = x_k . A x_l with l = k-1 mod N.

    Each directed link becomes the undirected edge {k, l} with A^{kl} = A and
    a zero matrix for the reverse direction. For N = 2 both directions land
    on the same pair and both oriented matrices equal A.
    """
    if num_agents < 2:
        raise DomainError(f"{name} game needs N >= 2, got {num_agents}")
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    oriented: Dict[Tuple[int, int], Dict[int, np.ndarray]] = {}
    for k in range(num_agents):
        l = (k - 1) % num_agents
        pair = (min(k, l), max(k, l))
        owners = oriented.setdefault(pair, {})
        owners[k] = owners.get(k, np.zeros((n, n))) + a
    edges = []
    for (k, l), owners in sorted(oriented.items()):
        edges.append(Edge(k, l, owners.get(k, np.zeros((n, n))), owners.get(l, np.zeros((n, n)))))
    return require_valid(NetworkGame(num_agents, [n] * num_agents, edges, name=name))


def chakraborty_matrix(alpha: float, beta: float) -> np.ndarray:
    return np.array([[1.0, alpha], [beta, 0.0]])


def make_chakraborty(num_agents: int, alpha: float, beta: float) -> NetworkGame:
    return make_directed_cycle_game(num_agents, chakraborty_matrix(alpha, beta), "chakraborty")


def mismatching_matrix(m: float) -> np.ndarray:
    return np.array([[0.0, 1.0], [m, 0.0]])


def make_mismatching(num_agents: int, m: float) -> NetworkGame:
    if m < 1:
        raise DomainError(f"mismatching game needs M >= 1, got {m}")
    return make_directed_cycle_game(num_agents, mismatching_matrix(m), "mismatching")


# =============================================================================
# EDGE-UNIFORM GAMES
# =============================================================================
def shapley_matrices(beta: float) -> Tuple[np.ndarray, np.ndarray]:
    a = np.array([
        [1.0, 0.0, beta],
        [beta, 1.0, 0.0],
        [0.0, beta, 1.0],
    ])
    b = np.array([
        [-beta, 1.0, 0.0],
        [0.0, -beta, 1.0],
        [1.0, 0.0, -beta],
    ])
    return a, b


def make_shapley(network: Any, beta: float) -> NetworkGame:
    """Shapley's game on every edge; A+B^T is circulant (1-β, 0, 1+β), so δ_S = 2."""
    if not 0.0 < beta < 1.0:
        raise DomainError(f"Shapley game needs beta in (0, 1), got {beta}")
    spec = _spec(network)
    adjacency = make_network(spec)
    a, b = shapley_matrices(beta)
    return require_valid(NetworkGame(spec.num_agents, [3] * spec.num_agents,
                                     _uniform_edges(adjacency, a, b), name="shapley"))


def sato_matrices(eps_x: float, eps_y: float) -> Tuple[np.ndarray, np.ndarray]:
    base = np.array([
        [0.0, -1.0, 1.0],
        [1.0, 0.0, -1.0],
        [-1.0, 1.0, 0.0],
    ])
    return base + eps_x * np.eye(3), base + eps_y * np.eye(3)


def make_sato(network: Any, eps_x: float, eps_y: float) -> NetworkGame:
    """Rock-paper-scissors with diagonal ties ε_X, ε_Y; A+B^T = (ε_X+ε_Y) I."""
    spec = _spec(network)
    adjacency = make_network(spec)
    a, b = sato_matrices(eps_x, eps_y)
    return require_valid(NetworkGame(spec.num_agents, [3] * spec.num_agents,
                                     _uniform_edges(adjacency, a, b), name="sato"))


def make_rps(network: Any) -> NetworkGame:
    """Pairwise zero-sum rock-paper-scissors network (Sato with ε = 0)."""
    game = make_sato(network, 0.0, 0.0)
    game.name = "rps"
    return game


def make_matching_pennies(network: Any) -> NetworkGame:
    """Pairwise zero-sum matching pennies: A = [[1,-1],[-1,1]], B = -A^T."""
    spec = _spec(network)
    adjacency = make_network(spec)
    a = np.array([[1.0, -1.0], [-1.0, 1.0]])
    return require_valid(NetworkGame(spec.num_agents, [2] * spec.num_agents,
                                     _uniform_edges(adjacency, a, -a.T), name="matching_pennies"))


def make_random_game(
    network: Any,
    action_counts: Optional[Sequence[int]] = None,
    num_actions: int = 2,
    scale: float = 1.0,
    seed: int = 0,
) -> NetworkGame:
    """Independent N(0, scale²) payoff entries on every edge of the network."""
    spec = _spec(network)
    adjacency = make_network(spec)
    counts = list(action_counts) if action_counts is not None else [num_actions] * spec.num_agents
    if len(counts) != spec.num_agents:
        raise DomainError(f"{len(counts)} action counts for {spec.num_agents} agents")
    rng = np.random.default_rng(seed)
    edges = []
    for k, l in _edge_pairs(adjacency):
        edges.append(Edge(
            k, l,
            scale * rng.standard_normal((counts[k], counts[l])),
            scale * rng.standard_normal((counts[l], counts[k])),
        ))
    return require_valid(NetworkGame(spec.num_agents, counts, edges, name="random"))


# =============================================================================
# NAME-BASED CONSTRUCTION (CLI CONFIG)
# =============================================================================
def _network_arg(params: Dict[str, Any]) -> Dict[str, Any]:
    if "network" not in params:
        raise ConfigError("this game needs a 'network' object")
    return params["network"]


def _agents_arg(params: Dict[str, Any]) -> int:
    if "n" in params:
        return int(params["n"])
    if "num_agents" in params:
        return int(params["num_agents"])
    if "network" in params:
        network = params["network"]
        return int(network.get("n", network.get("num_agents", 0)))
    raise ConfigError("this game needs 'n' (number of agents)")


GAME_BUILDERS: Dict[str, Callable[[Dict[str, Any]], NetworkGame]] = {
    "chakraborty": lambda p: make_chakraborty(_agents_arg(p), p.get("alpha", 7.0), p.get("beta", 8.5)),
    "mismatching": lambda p: make_mismatching(_agents_arg(p), p.get("m", 2.0)),
    "shapley": lambda p: make_shapley(_network_arg(p), p.get("beta", 0.2)),
    "sato": lambda p: make_sato(_network_arg(p), p.get("eps_x", 0.1), p.get("eps_y", -0.05)),
    "rps": lambda p: make_rps(_network_arg(p)),
    "matching_pennies": lambda p: make_matching_pennies(_network_arg(p)),
    "random": lambda p: make_random_game(
        _network_arg(p),
        action_counts=p.get("action_counts"),
        num_actions=p.get("num_actions", 2),
        scale=p.get("scale", 1.0),
        seed=p.get("seed", 0),
    ),
}


def build_game(params: Dict[str, Any]) -> NetworkGame:
    """
    Build a catalog game from a config object such as
    {"game": "shapley", "beta": 0.2, "network": {"kind": "ring", "n": 15}}.
    """
    name = params.get("game")
    if name == "file":
        from games.loader import load_game

        if "path" not in params:
            raise ConfigError("game 'file' needs a 'path'")
        return load_game(params["path"])
    builder = GAME_BUILDERS.get(name)
    if builder is None:
        raise ConfigError(f"unknown game {name!r}; choose from {sorted(GAME_BUILDERS) + ['file']}")
    try:
        game = builder(params)
    except DomainError as e:
        raise ConfigError(str(e)) from e
    logger.debug("🎲 built %r", game)
    return game
