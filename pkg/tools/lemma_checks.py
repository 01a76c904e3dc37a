# tools/lemma_checks.py
"""
NetGame QL — Matrix Inequality Checks
=====================================
Randomised numerical checks of the inequalities the stability threshold
rests on. Each check returns a report and never raises on a violation:

  - block two-norm bound  ‖N‖₂ <= √(‖G‖₁‖G‖_∞) · max ‖A_ij‖₂
  - Weyl's inequality     λ_min(D+N) >= λ_min(D) + λ_min(N)
  - spectral radius       ρ(M) = ‖M‖₂ for symmetric M
  - entropy convexity     ⟨∇h(x) - ∇h(y), x - y⟩ >= T‖x - y‖², h = T⟨x, ln x⟩
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
import scipy.linalg

from games.errors import DomainError
from games.simplex import AgentLayout
from tools.spectral import operator_inf_norm, operator_one_norm, operator_two_norm, spectral_radius

logger = logging.getLogger(__name__)

Block = Tuple[int, int]


@dataclass
class InequalityReport:
    """Outcome of a randomised inequality check."""

    name: str
    trials: int
    violations: int = 0
    worst_margin: float = float("inf")  # min over trials of (rhs - lhs)
    pairs: List[Tuple[float, float]] = field(default_factory=list)  # (lhs, rhs) per trial

    @property
    def holds(self) -> bool:
        return self.violations == 0

    def record(self, lhs: float, rhs: float, slack: float) -> None:
        self.pairs.append((lhs, rhs))
        self.worst_margin = min(self.worst_margin, rhs - lhs)
        if lhs > rhs + slack:
            self.violations += 1


# =============================================================================
# BLOCK TWO-NORM LEMMA
# =============================================================================
def _block_sizes(g: np.ndarray, blocks: Mapping[Block, np.ndarray], default: int) -> List[int]:
    sizes: Dict[int, int] = {}
    for (i, j), block in blocks.items():
        rows, cols = np.shape(block)
        for agent, size in ((i, rows), (j, cols)):
            if sizes.setdefault(agent, size) != size:
                raise DomainError(f"inconsistent block sizes for agent {agent}")
    return [sizes.get(i, default) for i in range(g.shape[0])]


def assemble_block_matrix(g: np.ndarray, blocks: Mapping[Block, np.ndarray], sizes: List[int]) -> np.ndarray:
    layout = AgentLayout(sizes)
    n = np.zeros((layout.dimension, layout.dimension))
    for (i, j), block in blocks.items():
        n[layout.agent_slice(i), layout.agent_slice(j)] = block
    return n


def verify_block_norm_lemma(
    g: np.ndarray,
    blocks: Optional[Mapping[Block, np.ndarray]] = None,
    trials: int = 1,
    seed: int = 0,
    block_size: int = 3,
) -> InequalityReport:
    """
    Compare ‖N‖₂ with √(‖G‖₁‖G‖_∞)·max‖A_ij‖₂ for block matrices N with
    G's sparsity pattern.

    Trial 0 uses `blocks` when given; every other trial redraws each block
    with standard normal entries of the same shape.
    """
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise DomainError(f"G must be square, got shape {g.shape}")
    given = {(int(i), int(j)): np.asarray(b, dtype=float) for (i, j), b in (blocks or {}).items()}
    for i, j in given:
        if g[i, j] == 0:
            raise DomainError(f"block ({i}, {j}) sits where G is zero")
    sizes = _block_sizes(g, given, block_size)
    support = [(int(i), int(j)) for i, j in zip(*np.nonzero(g))]
    scale = np.sqrt(operator_one_norm(g) * operator_inf_norm(g))

    rng = np.random.default_rng(seed)
    report = InequalityReport("block_two_norm", trials)
    for trial in range(trials):
        if trial == 0 and blocks is not None:
            current = given
        else:
            current = {(i, j): rng.standard_normal((sizes[i], sizes[j])) for i, j in support}
        lhs = operator_two_norm(assemble_block_matrix(g, current, sizes))
        rhs = scale * max((operator_two_norm(b) for b in current.values()), default=0.0)
        report.record(lhs, rhs, slack=1e-12 * max(1.0, rhs))
    _log(report)
    return report


# =============================================================================
# WEYL, SPECTRAL RADIUS, ENTROPY CONVEXITY
# =============================================================================
def _random_symmetric(rng: np.random.Generator, dim: int) -> np.ndarray:
    x = rng.standard_normal((dim, dim))
    return 0.5 * (x + x.T)


def verify_weyl_inequality(trials: int = 200, max_dim: int = 30, seed: int = 0) -> InequalityReport:
    """λ_min(D) + λ_min(N) <= λ_min(D + N) on random symmetric pairs."""
    rng = np.random.default_rng(seed)
    report = InequalityReport("weyl", trials)
    for _ in range(trials):
        dim = int(rng.integers(1, max_dim + 1))
        d, n = _random_symmetric(rng, dim), _random_symmetric(rng, dim)
        lhs = scipy.linalg.eigvalsh(d)[0] + scipy.linalg.eigvalsh(n)[0]
        rhs = scipy.linalg.eigvalsh(d + n)[0]
        report.record(float(lhs), float(rhs), slack=1e-9)
    _log(report)
    return report


def verify_spectral_radius_identity(trials: int = 200, max_dim: int = 30, seed: int = 0) -> InequalityReport:
    """|ρ(M) - ‖M‖₂| <= 1e-9 relative for random symmetric M (recorded as lhs=gap, rhs=0)."""
    rng = np.random.default_rng(seed)
    report = InequalityReport("spectral_radius", trials)
    for _ in range(trials):
        m = _random_symmetric(rng, int(rng.integers(1, max_dim + 1)))
        two_norm = operator_two_norm(m)
        gap = abs(spectral_radius(m) - two_norm)
        report.record(gap, 0.0, slack=1e-9 * max(1.0, two_norm))
    _log(report)
    return report


def verify_entropy_strong_convexity(
    rate: float, num_actions: int, trials: int = 200, seed: int = 0, floor: float = 1e-9
) -> InequalityReport:
    """T‖x - y‖² <= ⟨∇h(x) - ∇h(y), x - y⟩ for h(x) = T⟨x, ln x⟩ on the simplex interior."""
    if rate <= 0:
        raise DomainError(f"rate must be positive, got {rate}")
    layout = AgentLayout([num_actions])
    rng = np.random.default_rng(seed)
    report = InequalityReport("entropy_strong_convexity", trials)
    for _ in range(trials):
        x = layout.clamp(layout.sample_dirichlet(rng), floor)
        y = layout.clamp(layout.sample_dirichlet(rng), floor)
        diff = x - y
        lhs = rate * float(diff @ diff)
        rhs = rate * float((np.log(x) - np.log(y)) @ diff)
        report.record(lhs, rhs, slack=1e-12)
    _log(report)
    return report


def _log(report: InequalityReport) -> None:
    if report.holds:
        logger.info("✅ %s: %d trials, worst margin %.3e", report.name, report.trials, report.worst_margin)
    else:
        logger.warning("⚠️ %s: %d of %d trials violated", report.name, report.violations, report.trials)
