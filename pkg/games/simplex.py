# games/simplex.py
"""
NetGame QL — Product-Simplex Helpers
====================================
Vectorised per-agent operations on flat strategy vectors.

A joint strategy of N agents with action counts n_1..n_N is stored as one
flat vector of length sum(n_k); agent k owns the contiguous slice
offsets[k]:offsets[k+1]. Every helper here accepts arrays whose LAST axis
is that flat axis, so batches of initial conditions (B, D) and windows of
states (W, B, D) go through the same code.
"""

from typing import Optional, Sequence, Tuple

import numpy as np


class AgentLayout:
    """Index bookkeeping for the flat product-simplex coordinates."""

    def __init__(self, action_counts: Sequence[int]):
        counts = tuple(int(n) for n in action_counts)
        if not counts or min(counts) < 1:
            raise ValueError(f"action counts must be positive, got {counts}")
        self.action_counts: Tuple[int, ...] = counts
        self.num_agents = len(counts)
        self.dimension = int(sum(counts))
        self.offsets = np.concatenate(([0], np.cumsum(counts))).astype(int)
        self.starts = self.offsets[:-1]
        self.agent_index = np.repeat(np.arange(self.num_agents), counts)
        # Equal action counts allow a reshape to (..., N, n) instead of reduceat
        self.uniform = len(set(counts)) == 1

    def __eq__(self, other: object) -> bool:
        return isinstance(other, AgentLayout) and other.action_counts == self.action_counts

    def __hash__(self) -> int:
        return hash(self.action_counts)

    def __repr__(self) -> str:
        return f"AgentLayout({list(self.action_counts)})"

    def agent_slice(self, k: int) -> slice:
        return slice(int(self.offsets[k]), int(self.offsets[k + 1]))

    def split(self, flat: np.ndarray) -> Tuple[np.ndarray, ...]:
        return tuple(flat[..., self.agent_slice(k)] for k in range(self.num_agents))

    # -------------------------------------------------------------------------
    # Segment reductions (last axis)
    # -------------------------------------------------------------------------
    def segment_sum(self, values: np.ndarray) -> np.ndarray:
        """Per-agent sums, shape (..., N)."""
        if self.uniform:
            n = self.action_counts[0]
            return values.reshape(values.shape[:-1] + (self.num_agents, n)).sum(axis=-1)
        return np.add.reduceat(values, self.starts, axis=-1)

    def segment_max(self, values: np.ndarray) -> np.ndarray:
        if self.uniform:
            n = self.action_counts[0]
            return values.reshape(values.shape[:-1] + (self.num_agents, n)).max(axis=-1)
        return np.maximum.reduceat(values, self.starts, axis=-1)

    def segment_min(self, values: np.ndarray) -> np.ndarray:
        if self.uniform:
            n = self.action_counts[0]
            return values.reshape(values.shape[:-1] + (self.num_agents, n)).min(axis=-1)
        return np.minimum.reduceat(values, self.starts, axis=-1)

    def expand(self, per_agent: np.ndarray) -> np.ndarray:
        """Broadcast per-agent values (..., N) back to coordinates (..., D)."""
        return np.repeat(per_agent, self.action_counts, axis=-1)

    def segment_dot(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Per-agent inner products <a_k, b_k>, shape (..., N)."""
        return self.segment_sum(a * b)

    # -------------------------------------------------------------------------
    # Simplex maps
    # -------------------------------------------------------------------------
    def softmax(self, logits: np.ndarray) -> np.ndarray:
        """Per-agent softmax with max-subtraction."""
        shifted = logits - self.expand(self.segment_max(logits))
        weights = np.exp(shifted)
        return weights / self.expand(self.segment_sum(weights))

    def normalise(self, x: np.ndarray) -> np.ndarray:
        return x / self.expand(self.segment_sum(x))

    def clamp(self, x: np.ndarray, floor: float) -> np.ndarray:
        """Clamp every coordinate to >= floor, then renormalise each agent block."""
        return self.normalise(np.maximum(x, floor))

    def uniform_point(self) -> np.ndarray:
        return 1.0 / self.expand(np.asarray(self.action_counts, dtype=float))

    def sample_dirichlet(self, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
        """Independent Dirichlet(1,...,1) draw per agent; shape (D,) or (size, D)."""
        shape = (self.dimension,) if size is None else (size, self.dimension)
        # Normalised exponentials are Dirichlet(1,...,1) per segment
        draws = rng.standard_exponential(shape)
        return self.normalise(draws)

    def block_sums_ok(self, x: np.ndarray, tol: float) -> bool:
        return bool(np.all(np.abs(self.segment_sum(x) - 1.0) <= tol))


def entropy(p: np.ndarray) -> float:
    """Shannon entropy -sum p ln p with 0 ln 0 = 0."""
    p = np.asarray(p, dtype=float)
    positive = p[p > 0]
    return float(-np.sum(positive * np.log(positive)))
