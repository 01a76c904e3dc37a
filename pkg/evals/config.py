# evals/config.py
"""
NetGame QL — Run Configuration
==============================
Pydantic models for the JSON config files the CLI reads. Unknown keys are
rejected everywhere; CLI flags (--seed, --out, --threads) override the
matching fields after validation.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Type, TypeVar, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, ValidationError, model_validator

from agents.q_learning import DYNAMICS_CONFIG
from agents.qre_solver import QRE_CONFIG
from games.catalog import NetworkSpec, build_game
from games.errors import ConfigError
from games.network_game import ExplorationRates, NetworkGame

logger = logging.getLogger(__name__)

GameName = Literal["chakraborty", "mismatching", "shapley", "sato", "rps", "matching_pennies", "random", "file"]
RateSpec = Union[PositiveFloat, List[PositiveFloat]]
SweepNetwork = Literal["ring", "star", "full"]

M = TypeVar("M", bound=BaseModel)


class NetworkConfig(NetworkSpec):
    """The `network` object of a game config."""


class GameConfig(BaseModel):
    """
    A catalog game by name plus its parameters, e.g.
    {"game": "shapley", "beta": 0.2, "network": {"kind": "ring", "n": 15}}.
    """

    model_config = ConfigDict(extra="forbid")

    game: GameName
    network: Optional[NetworkConfig] = None
    n: Optional[int] = Field(default=None, ge=1)
    # Chakraborty / Shapley parameters
    alpha: Optional[float] = None
    beta: Optional[float] = None
    # Mismatching
    m: Optional[float] = None
    # Sato
    eps_x: Optional[float] = None
    eps_y: Optional[float] = None
    # Random games
    action_counts: Optional[List[int]] = None
    num_actions: Optional[int] = Field(default=None, ge=1)
    scale: Optional[float] = None
    seed: Optional[int] = None
    # Game files
    path: Optional[str] = None

    def to_params(self) -> Dict[str, Any]:
        return self.model_dump(exclude_none=True)

    def build(self) -> NetworkGame:
        return build_game(self.to_params())

    def build_sized(self, kind: str, num_agents: int) -> NetworkGame:
        """The same game on a sweep topology with `num_agents` agents."""
        params = self.to_params()
        params["n"] = num_agents
        params["network"] = {"kind": kind, "num_agents": num_agents}
        return build_game(params)


def make_rates(spec: RateSpec, game: NetworkGame) -> ExplorationRates:
    """A scalar T applies to every agent; a list must give one rate per agent."""
    if isinstance(spec, list):
        if len(spec) != game.num_agents:
            raise ConfigError(f"T lists {len(spec)} rates but the game has {game.num_agents} agents")
        return ExplorationRates(tuple(spec))
    return ExplorationRates.uniform(spec, game.num_agents)


# =============================================================================
# COMMAND CONFIGS
# =============================================================================
class _RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    seed: int = Field(default=0, ge=0)
    out: str = "results"
    threads: int = Field(default=1, ge=1)

    def result_params(self) -> Dict[str, Any]:
        """Fields that determine the results; output location and worker count do not."""
        return self.model_dump(exclude={"out", "threads"})


class CertifyConfig(_RunConfig):
    game: GameConfig
    T: RateSpec
    samples: int = Field(default=100, ge=1)


class SimulateConfig(_RunConfig):
    game: GameConfig
    T: RateSpec
    mode: Literal["discrete", "ode"] = "discrete"
    alpha: float = Field(default=DYNAMICS_CONFIG["alpha"], ge=0.0, le=1.0)
    iterations: int = Field(default=DYNAMICS_CONFIG["iterations"], ge=0)
    dt: PositiveFloat = DYNAMICS_CONFIG["dt"]
    stride: int = Field(default=DYNAMICS_CONFIG["stride"], ge=1)
    window: int = Field(default=DYNAMICS_CONFIG["window"], ge=1)
    tolerance: PositiveFloat = DYNAMICS_CONFIG["tolerance"]
    x0: Optional[List[List[float]]] = None
    svg: bool = True

    @model_validator(mode="after")
    def _window_fits(self) -> "SimulateConfig":
        if self.window > self.iterations:
            raise ValueError(f"window ({self.window}) exceeds iterations ({self.iterations})")
        return self


class QREConfig(_RunConfig):
    game: GameConfig
    T: RateSpec
    damping: float = Field(default=QRE_CONFIG["damping"], gt=0.0, le=1.0)
    tol: PositiveFloat = QRE_CONFIG["tol"]
    max_iter: int = Field(default=QRE_CONFIG["max_iter"], ge=1)
    starts: int = Field(default=1, ge=1)
    x0: Optional[List[List[float]]] = None


class BisectionRange(BaseModel):
    model_config = ConfigDict(extra="forbid")

    low: PositiveFloat = 0.005
    high: Optional[PositiveFloat] = None  # None: derived from the stability threshold
    resolution: PositiveFloat = 0.01

    @model_validator(mode="after")
    def _positive_width(self) -> "BisectionRange":
        if self.high is not None and self.high <= self.low:
            raise ValueError(f"bisection range [{self.low}, {self.high}] has no positive width")
        return self


class SweepConfig(_RunConfig):
    """Shared by the boxplot (T grid) and boundary (bisection) sweeps."""

    game: GameConfig
    networks: List[SweepNetwork] = ["ring", "star", "full"]
    agent_counts: List[int] = Field(default_factory=lambda: list(range(3, 13)))
    T_grid: Optional[List[PositiveFloat]] = None
    bisection: BisectionRange = BisectionRange()
    initial_conditions: Optional[int] = Field(default=None, ge=1)
    agents: List[int] = [0, 1, 2]
    mode: Optional[Literal["discrete", "ode"]] = None
    alpha: float = Field(default=DYNAMICS_CONFIG["alpha"], ge=0.0, le=1.0)
    iterations: int = Field(default=DYNAMICS_CONFIG["iterations"], ge=1)
    dt: PositiveFloat = 0.1
    window: int = Field(default=DYNAMICS_CONFIG["window"], ge=1)
    tolerance: PositiveFloat = DYNAMICS_CONFIG["tolerance"]
    svg: bool = True

    @model_validator(mode="after")
    def _check_sweep(self) -> "SweepConfig":
        if self.window > self.iterations:
            raise ValueError(f"window ({self.window}) exceeds iterations ({self.iterations})")
        if self.game.game == "file":
            raise ValueError("sweeps resize the game per (network, N); a game file has a fixed size")
        if not self.agent_counts or any(n < 2 for n in self.agent_counts):
            raise ValueError("agent_counts must be a non-empty list of values >= 2")
        if not self.networks:
            raise ValueError("networks must not be empty")
        if any(a < 0 for a in self.agents):
            raise ValueError("agents must be non-negative indices")
        return self


# =============================================================================
# LOADING
# =============================================================================
def parse_config(payload: Dict[str, Any], model: Type[M], source: str = "<config>") -> M:
    try:
        return model.model_validate(payload)
    except ValidationError as e:
        details = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(f"{source}: {details}") from e


def load_config(path: Union[str, Path], model: Type[M]) -> M:
    """Read and validate a JSON run config; every failure becomes ConfigError."""
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: line {e.lineno}: invalid JSON ({e.msg})") from e
    if not isinstance(payload, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    config = parse_config(payload, model, str(path))
    logger.debug("📂 loaded %s from %s", model.__name__, path)
    return config


def apply_overrides(config: M, seed: Optional[int] = None, out: Optional[str] = None, threads: Optional[int] = None) -> M:
    """CLI flags win over config fields; values are re-validated."""
    updates = {k: v for k, v in (("seed", seed), ("out", out), ("threads", threads)) if v is not None}
    if not updates:
        return config
    if not isinstance(config, _RunConfig):
        return config
    return parse_config({**config.model_dump(exclude_none=True), **updates}, type(config), "command line")


def load_game_config(path: Union[str, Path]) -> NetworkGame:
    """`analyze` takes a bare game config."""
    return load_config(path, GameConfig).build()
