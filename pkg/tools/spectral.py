# tools/spectral.py
"""
NetGame QL — Spectral Stability Analysis
========================================
Operator norms, the interaction coefficient δ_S and the exploration-rate
threshold ½·δ_S·‖G‖_∞ above which Q-Learning converges to a unique QRE,
plus a numerical monotonicity certificate evaluated on the pseudo-hessian

    J(x) = D(x) + N(x),  D = blockdiag(T_k diag(1/x_k)),  N_{kl} = -A^{kl}.

Whenever min_k T_k exceeds the threshold, λ_min((J+J^T)/2) >= T - threshold
at every interior point; monotonicity_certificate() samples that claim.
"""

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import scipy.linalg
from pydantic import BaseModel, Field

from games.errors import DomainError, NoEdgesWarning
from games.network_game import ExplorationRates, JointStrategy, NetworkGame, require_valid

logger = logging.getLogger(__name__)

# =============================================================================
# CONFIGURATION
# =============================================================================
SPECTRAL_CONFIG = {
    "power_tol": 1e-12,
    "power_max_iter": 100_000,
    "dense_norm_max_dim": 64,      # Gram matrices up to this size use eigvalsh
    "dense_eig_max_dim": 512,      # λ_min by dense eigensolve up to this size
    "certificate_floor": 1e-9,     # clamp for sampled certificate points
    "certificate_slack": 1e-8,
}


# =============================================================================
# POWER ITERATION
# =============================================================================
def power_iteration(
    s: np.ndarray,
    tol: float = SPECTRAL_CONFIG["power_tol"],
    max_iter: int = SPECTRAL_CONFIG["power_max_iter"],
    seed: int = 0,
) -> Tuple[float, np.ndarray, bool]:
    """
    Dominant eigenpair of a symmetric positive semidefinite matrix.

    Stops when the Rayleigh quotient changes by less than tol relative.

    Returns:
        (eigenvalue, unit eigenvector, converged)
    """
    n = s.shape[0]
    rng = np.random.default_rng(seed)
    v = np.ones(n) + 0.1 * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = s @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0, v, True
        lam_new = float(v @ w)
        v = w / norm
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-300):
            return lam_new, v, True
        lam = lam_new
    return lam, v, False


# =============================================================================
# NORMS
# =============================================================================
def _finite_matrix(m: Any) -> np.ndarray:
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.ndim != 2:
        raise DomainError(f"expected a matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError("matrix has NaN or infinite entries")
    return m


def operator_two_norm(m: Any) -> float:
    """Largest singular value: √λ_max(MᵀM)."""
    m = _finite_matrix(m)
    if m.size == 0:
        return 0.0
    gram = m.T @ m if m.shape[1] <= m.shape[0] else m @ m.T
    if gram.shape[0] <= SPECTRAL_CONFIG["dense_norm_max_dim"]:
        return float(np.sqrt(max(scipy.linalg.eigvalsh(gram)[-1], 0.0)))
    value, _, converged = power_iteration(gram)
    if not converged:
        logger.warning("⚠️ power iteration hit its cap on a %dx%d Gram matrix; using dense eigensolve", *gram.shape)
        value = scipy.linalg.eigvalsh(gram)[-1]
    return float(np.sqrt(max(value, 0.0)))


def operator_inf_norm(m: Any) -> float:
    """Maximum absolute row sum."""
    m = _finite_matrix(m)
    if m.size == 0:
        return 0.0
    return float(np.abs(m).sum(axis=1).max())


def operator_one_norm(m: Any) -> float:
    """Maximum absolute column sum."""
    return operator_inf_norm(_finite_matrix(m).T)


def spectral_radius(m: Any) -> float:
    m = _finite_matrix(m)
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(m))))


def lambda_min(s: np.ndarray) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    n = s.shape[0]
    if n <= SPECTRAL_CONFIG["dense_eig_max_dim"]:
        return float(scipy.linalg.eigvalsh(s, subset_by_index=[0, 0])[0])
    # Shifted power iteration: c >= ρ(S), so cI - S is PSD with top eigenvalue c - λ_min
    shift = operator_inf_norm(s)
    value, _, converged = power_iteration(shift * np.eye(n) - s)
    if not converged:
        logger.warning("⚠️ shifted power iteration hit its cap at dimension %d", n)
    return float(shift - value)


# =============================================================================
# INTERACTION COEFFICIENT & THRESHOLD
# =============================================================================
def edge_interaction_norms(game: NetworkGame) -> Dict[Tuple[int, int], float]:
    """‖A^{kl} + (A^{lk})ᵀ‖₂ per undirected edge, keyed by (min, max) agent pair."""
    require_valid(game)
    return {edge.pair: operator_two_norm(edge.interaction_matrix()) for edge in game.edges}


def interaction_coefficient(game: NetworkGame) -> float:
    """δ_S = max over edges of ‖A^{kl} + (A^{lk})ᵀ‖₂; 0 (with a warning) when edgeless."""
    norms = edge_interaction_norms(game)
    if not norms:
        warnings.warn(f"game {game.name!r} has no edges; δ_S = 0", NoEdgesWarning, stacklevel=2)
        return 0.0
    return max(norms.values())


class StabilityReport(BaseModel):
    """Network and payoff quantities behind the exploration threshold."""

    delta_s: float
    g_inf_norm: float
    g_one_norm: float
    g_two_norm: float = Field(description="diagnostic only; never used in the threshold")
    threshold: float
    per_edge_norms: Dict[str, float]
    warnings: List[str] = []

    def certifies(self, rates: ExplorationRates) -> bool:
        """True when every T_k is strictly above the threshold."""
        return rates.minimum > self.threshold

    def to_json_dict(self) -> Dict[str, Any]:
        return self.model_dump(include={
            "delta_s", "g_inf_norm", "g_one_norm", "g_two_norm", "threshold", "per_edge_norms",
        })


def _edge_key(pair: Tuple[int, int]) -> str:
    return f"{pair[0]}-{pair[1]}"


def stability_threshold(game: NetworkGame) -> StabilityReport:
    """Assemble δ_S, ‖G‖_∞, ‖G‖₁, ‖G‖₂ and the threshold ½·δ_S·‖G‖_∞."""
    norms = edge_interaction_norms(game)
    notes: List[str] = []
    if not norms:
        warnings.warn(f"game {game.name!r} has no edges; δ_S = 0", NoEdgesWarning, stacklevel=2)
        notes.append("no_edges")
    delta_s = max(norms.values(), default=0.0)
    g = game.adjacency
    g_inf = operator_inf_norm(g)
    report = StabilityReport(
        delta_s=delta_s,
        g_inf_norm=g_inf,
        g_one_norm=operator_one_norm(g),
        g_two_norm=operator_two_norm(g),
        threshold=0.5 * delta_s * g_inf,
        per_edge_norms={_edge_key(pair): value for pair, value in sorted(norms.items())},
        warnings=notes,
    )
    logger.info("📐 %s: δ_S=%.6g ‖G‖∞=%g threshold=%.6g", game.name, delta_s, g_inf, report.threshold)
    return report


# =============================================================================
# PSEUDO-GRADIENT & PSEUDO-HESSIAN
# =============================================================================
def _interior_flat(game: NetworkGame, x: Union[JointStrategy, np.ndarray]) -> np.ndarray:
    flat = x.flat() if isinstance(x, JointStrategy) else np.asarray(x, dtype=float)
    if flat.shape != (game.dimension,):
        raise DomainError(f"strategy has shape {flat.shape}, expected ({game.dimension},)")
    if not np.all(flat > 0):
        raise DomainError("pseudo-gradient and pseudo-hessian need a strictly interior strategy")
    return flat


def pseudo_gradient(game: NetworkGame, rates: ExplorationRates, x: Union[JointStrategy, np.ndarray]) -> np.ndarray:
    """F_k(x) = -∇_{x_k} u^H_k = T_k (ln x_k + 1) - r_k(x_{-k}), flattened."""
    flat = _interior_flat(game, x)
    t = rates.per_coordinate(game.layout)
    return t * (np.log(flat) + 1.0) - game.payoff_operator @ flat


def pseudo_hessian_parts(
    game: NetworkGame, rates: ExplorationRates, x: Union[JointStrategy, np.ndarray]
) -> Tuple[np.ndarray, np.ndarray]:
    """(D(x), N) with D the entropy block-diagonal and N = -P the payoff part."""
    flat = _interior_flat(game, x)
    d = np.diag(rates.per_coordinate(game.layout) / flat)
    return d, -np.asarray(game.payoff_operator)


def pseudo_hessian(game: NetworkGame, rates: ExplorationRates, x: Union[JointStrategy, np.ndarray]) -> np.ndarray:
    """Jacobian of the pseudo-gradient, J(x) = D(x) + N."""
    d, n = pseudo_hessian_parts(game, rates, x)
    return d + n


def strong_monotonicity_ratio(
    game: NetworkGame,
    rates: ExplorationRates,
    x: Union[JointStrategy, np.ndarray],
    y: Union[JointStrategy, np.ndarray],
) -> float:
    """⟨F(x) - F(y), x - y⟩ / ‖x - y‖²; bounded below by T - threshold above it."""
    fx, fy = pseudo_gradient(game, rates, x), pseudo_gradient(game, rates, y)
    dx = _interior_flat(game, x) - _interior_flat(game, y)
    denom = float(dx @ dx)
    if denom == 0.0:
        raise DomainError("x and y coincide")
    return float((fx - fy) @ dx) / denom


# =============================================================================
# MONOTONICITY CERTIFICATE
# =============================================================================
class MonotonicityCertificate(BaseModel):
    sampled_points: int
    min_eigenvalue_observed: float
    theoretical_lower_bound: float
    satisfied: bool
    threshold: float
    min_rate: float
    premise_holds: bool


def _sample_min_eigenvalue(game: NetworkGame, rates: ExplorationRates, seed: int, index: int) -> float:
    rng = np.random.default_rng([seed, index])
    layout = game.layout
    x = layout.clamp(layout.sample_dirichlet(rng), SPECTRAL_CONFIG["certificate_floor"])
    j = pseudo_hessian(game, rates, x)
    return lambda_min(0.5 * (j + j.T))


def monotonicity_certificate(
    game: NetworkGame,
    rates: ExplorationRates,
    num_samples: int,
    seed: int = 0,
    workers: int = 1,
) -> MonotonicityCertificate:
    """
    Sample interior points (Dirichlet(1,...,1) per agent, stream (seed, i))
    and compare the smallest observed λ_min of the symmetrised pseudo-hessian
    with T - ½·δ_S·‖G‖_∞.
    """
    if num_samples < 1:
        raise DomainError(f"num_samples must be >= 1, got {num_samples}")
    report = stability_threshold(game)
    indices = range(num_samples)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            eigenvalues = list(pool.map(lambda i: _sample_min_eigenvalue(game, rates, seed, i), indices))
    else:
        eigenvalues = [_sample_min_eigenvalue(game, rates, seed, i) for i in indices]

    observed = min(eigenvalues)
    bound = rates.minimum - report.threshold
    certificate = MonotonicityCertificate(
        sampled_points=num_samples,
        min_eigenvalue_observed=observed,
        theoretical_lower_bound=bound,
        satisfied=observed >= bound - SPECTRAL_CONFIG["certificate_slack"],
        threshold=report.threshold,
        min_rate=rates.minimum,
        premise_holds=report.certifies(rates),
    )
    if certificate.satisfied:
        logger.info("✅ certificate holds: λ_min=%.6g >= %.6g", observed, bound)
    else:
        logger.warning("⚠️ certificate violated: λ_min=%.6g < %.6g", observed, bound)
    return certificate
