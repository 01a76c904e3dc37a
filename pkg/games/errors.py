# games/errors.py
"""
NetGame QL — Error Types
========================
One hierarchy for the whole toolkit. The CLI maps ConfigError to exit
code 1 and every other NetGameError to exit code 2.
"""

from typing import Any, List, Optional

import numpy as np


class NetGameError(Exception):
    """Base class for all toolkit errors."""


class GameValidationError(NetGameError, ValueError):
    """A NetworkGame violates one of its structural invariants."""

    def __init__(self, violations: List[Any]):
        self.violations = list(violations)
        details = "; ".join(str(v) for v in self.violations) or "unknown violation"
        super().__init__(f"Invalid network game: {details}")

    def __reduce__(self):
        return type(self), (self.violations,)


class AgentIndexError(NetGameError, IndexError):
    """Agent index outside 0..N-1."""


class DomainError(NetGameError, ValueError):
    """Input outside the domain of an operation (boundary strategy, bad rate, ...)."""


class QRENotConvergedError(NetGameError, RuntimeError):
    """Fixed-point iteration hit max_iter without reaching the tolerance."""

    def __init__(self, best_point: Optional[np.ndarray], best_residual: float, iterations: int):
        self.best_point = best_point
        self.best_residual = best_residual
        self.iterations = iterations
        super().__init__(
            f"QRE solver did not converge in {iterations} iterations "
            f"(best residual {best_residual:.3e})"
        )

    def __reduce__(self):
        return type(self), (self.best_point, self.best_residual, self.iterations)


class IntegrationError(NetGameError, FloatingPointError):
    """A dynamics step produced a non-finite state."""

    def __init__(self, step: int, message: str = "non-finite state"):
        self.step = step
        self.detail = message
        super().__init__(f"{message} at step {step}")

    def __reduce__(self):
        return type(self), (self.step, self.detail)


class ConfigError(NetGameError, ValueError):
    """Malformed run configuration."""


class GameFileError(ConfigError):
    """Malformed game JSON file; messages are anchored to file lines."""

    def __init__(self, path: str, messages: List[str]):
        self.path = path
        self.messages = list(messages)
        super().__init__(f"{path}: " + "; ".join(self.messages))

    def __reduce__(self):
        return type(self), (self.path, self.messages)


class NoEdgesWarning(UserWarning):
    """The game has no edges, so every network quantity is zero."""
