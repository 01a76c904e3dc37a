# agents/qre_solver.py
"""
NetGame QL — Quantal Response Equilibrium Solver
================================================
Damped fixed-point iteration on the logit map

    L(x)_ki = exp(r_ki(x_{-k}) / T_k) / Σ_j exp(r_kj(x_{-k}) / T_k),
    x <- (1 - γ) x + γ L(x).

γ starts at the configured damping and is halved (down to a floor) when
the best residual stops improving, which tames the rotation that
near-zero-sum networks induce in the plain iteration. Below the
stability threshold several QRE may exist and the iteration may fail;
that is reported as QRENotConvergedError with the best point found.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Union

import numpy as np

from games.errors import DomainError, QRENotConvergedError
from games.network_game import GAME_CONFIG, ExplorationRates, JointStrategy, NetworkGame

logger = logging.getLogger(__name__)

QRE_CONFIG = {
    "damping": 0.5,
    "tol": 1e-10,
    "max_iter": 100_000,
    "min_damping": 1e-3,
    "patience": 50,     # iterations without a new best residual before γ is halved
}


@dataclass(frozen=True)
class QREResult:
    strategy: JointStrategy
    residual: float
    iterations: int
    damping: float

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "strategies": [block.tolist() for block in self.strategy.blocks],
            "residual": self.residual,
            "iterations": self.iterations,
        }


def logit_map(game: NetworkGame, rates: ExplorationRates, x: Union[JointStrategy, np.ndarray]) -> np.ndarray:
    """Per-agent Boltzmann response to the current rewards, flattened."""
    flat = x.flat() if isinstance(x, JointStrategy) else np.asarray(x, dtype=float)
    layout = game.layout
    return layout.softmax((game.payoff_operator @ flat) / rates.per_coordinate(layout))


def qre_residual(game: NetworkGame, rates: ExplorationRates, x: Union[JointStrategy, np.ndarray]) -> float:
    """‖x - L(x)‖_∞."""
    flat = x.flat() if isinstance(x, JointStrategy) else np.asarray(x, dtype=float)
    return float(np.max(np.abs(flat - logit_map(game, rates, flat))))


def solve_qre(
    game: NetworkGame,
    rates: ExplorationRates,
    x0: Optional[JointStrategy] = None,
    damping: float = QRE_CONFIG["damping"],
    tol: float = QRE_CONFIG["tol"],
    max_iter: int = QRE_CONFIG["max_iter"],
) -> QREResult:
    """
    Find x with ‖x - L(x)‖_∞ < tol.

    Raises:
        DomainError: damping outside (0, 1], tol <= 0, rate count mismatch.
        QRENotConvergedError: max_iter reached; carries the best point.
    """
    if not 0.0 < damping <= 1.0:
        raise DomainError(f"damping must lie in (0, 1], got {damping}")
    if tol <= 0:
        raise DomainError(f"tol must be positive, got {tol}")
    if len(rates) != game.num_agents:
        raise DomainError(f"{len(rates)} exploration rates for {game.num_agents} agents")

    layout = game.layout
    p = np.asarray(game.payoff_operator)
    t = rates.per_coordinate(layout)
    x = layout.uniform_point() if x0 is None else layout.clamp(x0.flat(), GAME_CONFIG["interior_floor"])

    gamma = damping
    best_x, best_residual, since_best = x, np.inf, 0
    for iteration in range(max_iter + 1):
        response = layout.softmax((p @ x) / t)
        residual = float(np.max(np.abs(x - response)))
        if residual < tol:
            logger.info("✅ QRE solved on %s in %d iterations (residual %.2e)", game.name, iteration, residual)
            return QREResult(JointStrategy(layout.split(x)), residual, iteration, gamma)
        if residual < best_residual:
            best_x, best_residual, since_best = x, residual, 0
        else:
            since_best += 1
            if since_best >= QRE_CONFIG["patience"] and gamma > QRE_CONFIG["min_damping"]:
                gamma = max(0.5 * gamma, QRE_CONFIG["min_damping"])
                logger.debug("QRE damping reduced to %.4g at iteration %d", gamma, iteration)
                x, since_best = best_x, 0
                continue
        x = (1.0 - gamma) * x + gamma * response

    logger.warning("⚠️ QRE solver stopped after %d iterations (best residual %.2e)", max_iter, best_residual)
    raise QRENotConvergedError(best_x, best_residual, max_iter)
