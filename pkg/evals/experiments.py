# evals/experiments.py
"""
NetGame QL — Experiment Harness
===============================
Batch protocols behind the CLI:

  - run_simulation(): one trajectory (discrete Q-Learning or QLD)
  - solve_qre_from_config(): QRE from one or several starts
  - run_certificate(): sampled monotonicity certificate
  - run_boxplot(): final-window first-action samples over a T grid
  - run_boundary(): smallest converging T per (network, N), by bisection

A T "passes" when every initial condition meets the windowed convergence
criterion. Initial conditions are seeded per (network, N) and shared by
every probe of that pair, so results depend only on the config and seed.
Independent (network, N) tasks fan out over a process pool.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from agents.q_learning import (
    TrajectoryRecord,
    convergence_check,
    integrate_qld,
    integrate_qld_batch,
    run_q_learning_batch,
    simulate_q_learning,
)
from agents.qre_solver import QREResult, solve_qre
from evals.config import CertifyConfig, QREConfig, SimulateConfig, SweepConfig, make_rates
from games.errors import ConfigError, DomainError, IntegrationError
from games.network_game import ExplorationRates, JointStrategy, NetworkGame
from tools.spectral import MonotonicityCertificate, monotonicity_certificate, stability_threshold

logger = logging.getLogger(__name__)

# =============================================================================
# CONFIGURATION
# =============================================================================
HARNESS_CONFIG = {
    "resolution": 0.01,
    "boundary_initial_conditions": 10,
    "boxplot_initial_conditions": 35,
    # QLD; the certificate is a statement about this flow. Discrete steps at
    # alpha = 0.01 overshoot on rotational games: Sato ring N=3 bisects to
    # T ~ 0.099 discrete vs ~ 0.031 QLD, against a threshold of 0.05.
    "boundary_mode": "ode",
    "boxplot_mode": "discrete",
    "initial_floor": 1e-9,
    "widen_factor": 2.0,
    "default_span": 0.5,           # automatic bracket top: threshold + span (at least 2x threshold)
}

NETWORK_CODES = {"ring": 0, "star": 1, "full": 2}


# =============================================================================
# SHARED HELPERS
# =============================================================================
@dataclass(frozen=True)
class DynamicsSettings:
    """How one batch of trajectories is produced and judged."""

    mode: str
    alpha: float
    iterations: int
    dt: float
    window: int
    tolerance: float

    @classmethod
    def for_sweep(cls, config: SweepConfig, default_mode: str) -> "DynamicsSettings":
        return cls(
            mode=config.mode or default_mode,
            alpha=config.alpha,
            iterations=config.iterations,
            dt=config.dt,
            window=config.window,
            tolerance=config.tolerance,
        )


def initial_conditions(game: NetworkGame, count: int, seed: int, *key: int) -> np.ndarray:
    """(count, D) Dirichlet(1,...,1) starts from the stream (seed, *key)."""
    rng = np.random.default_rng([seed, *key])
    layout = game.layout
    return layout.clamp(layout.sample_dirichlet(rng, size=count), HARNESS_CONFIG["initial_floor"])


def final_window(game: NetworkGame, rates: ExplorationRates, x0: np.ndarray, settings: DynamicsSettings) -> np.ndarray:
    """Last `window` states of every trajectory, shape (W, B, D)."""
    if settings.mode == "ode":
        _, states = integrate_qld_batch(
            game, rates, x0, dt=settings.dt, steps=settings.iterations, keep_last=settings.window
        )
    else:
        _, states = run_q_learning_batch(
            game, rates, x0, alpha=settings.alpha, iterations=settings.iterations, keep_last=settings.window
        )
    return states


@dataclass(frozen=True)
class ProbeRecord:
    """One tested exploration rate."""

    T: float
    passed: bool
    statistic: float


def probe_rate(game: NetworkGame, rate: float, x0: np.ndarray, settings: DynamicsSettings) -> ProbeRecord:
    """Run every start at uniform T = rate; pass iff all of them converge."""
    rates = ExplorationRates.uniform(rate, game.num_agents)
    try:
        window = final_window(game, rates, x0, settings)
    except IntegrationError as e:
        logger.warning("⚠️ %s at T=%.6g: %s", game.name, rate, e)
        return ProbeRecord(rate, False, math.inf)
    statistics = [convergence_check(window[:, b, :], settings.tolerance).statistic for b in range(window.shape[1])]
    worst = max(statistics)
    record = ProbeRecord(rate, worst < settings.tolerance, worst)
    logger.debug("probe %s T=%.6g -> %s (statistic %.3e)", game.name, rate, record.passed, worst)
    return record


def _strategy_from_rows(rows: List[List[float]], game: NetworkGame) -> JointStrategy:
    try:
        strategy = JointStrategy(tuple(np.asarray(row, dtype=float) for row in rows))
    except DomainError as e:
        raise ConfigError(f"x0: {e}") from e
    if strategy.action_counts != game.action_counts:
        raise ConfigError(f"x0 has action counts {strategy.action_counts}, game has {game.action_counts}")
    return strategy


# =============================================================================
# SINGLE-GAME COMMANDS
# =============================================================================
def run_simulation(config: SimulateConfig) -> Tuple[NetworkGame, TrajectoryRecord]:
    game = config.game.build()
    rates = make_rates(config.T, game)
    if config.x0 is not None:
        x0 = _strategy_from_rows(config.x0, game)
    else:
        x0 = JointStrategy.from_flat(initial_conditions(game, 1, config.seed)[0], game.action_counts)

    if config.mode == "ode":
        record = integrate_qld(
            game, rates, x0, dt=config.dt, steps=config.iterations, stride=config.stride,
            window=config.window, tolerance=config.tolerance,
        )
    else:
        record = simulate_q_learning(
            game, rates, x0, alpha=config.alpha, iterations=config.iterations, stride=config.stride,
            window=config.window, tolerance=config.tolerance,
        )
    verdict = "converged" if record.converged else "did not converge"
    logger.info("✅ %s at T=%s %s (statistic %.3e)", game.name, config.T, verdict, record.per_component_relative_range)
    return game, record


def solve_qre_from_config(config: QREConfig) -> Dict[str, Any]:
    """
    Solve from x0 (or the uniform point) and, with starts > 1, from extra
    seeded Dirichlet starts; reports the first solution plus agreement.
    """
    game = config.game.build()
    rates = make_rates(config.T, game)
    starts: List[Optional[JointStrategy]] = [None if config.x0 is None else _strategy_from_rows(config.x0, game)]
    if config.starts > 1:
        extra = initial_conditions(game, config.starts - 1, config.seed)
        starts.extend(JointStrategy.from_flat(row, game.action_counts) for row in extra)

    results: List[QREResult] = [
        solve_qre(game, rates, x0=x0, damping=config.damping, tol=config.tol, max_iter=config.max_iter)
        for x0 in starts
    ]
    payload = results[0].to_json_dict()
    if len(results) > 1:
        payload["starts"] = len(results)
        payload["max_pairwise_distance"] = max(
            a.strategy.distance(b.strategy) for i, a in enumerate(results) for b in results[i + 1:]
        )
    return payload


def run_certificate(config: CertifyConfig) -> MonotonicityCertificate:
    game = config.game.build()
    rates = make_rates(config.T, game)
    return monotonicity_certificate(game, rates, config.samples, seed=config.seed, workers=config.threads)


# =============================================================================
# BISECTION
# =============================================================================
@dataclass
class BisectionOutcome:
    boundary: float          # smallest passing T found; nan when unresolved
    low: float
    high: float
    resolved: bool
    widened: bool
    probes: List[ProbeRecord] = field(default_factory=list)


def bisect_boundary(
    probe: Callable[[float], ProbeRecord],
    low: float,
    high: float,
    resolution: float = HARNESS_CONFIG["resolution"],
) -> BisectionOutcome:
    """
    Bisect on a pass/fail predicate that is monotone in T (fails below the
    boundary, passes above). A bracket whose ends agree is widened once;
    if it still does not straddle the boundary the result is unresolved.
    """
    if not 0 < low < high:
        raise DomainError(f"bisection bracket [{low}, {high}] has no positive width")
    if resolution <= 0:
        raise DomainError(f"resolution must be positive, got {resolution}")
    probes: List[ProbeRecord] = []

    def passes(rate: float) -> bool:
        record = probe(rate)
        probes.append(record)
        return record.passed

    low_ok, high_ok = passes(low), passes(high)
    widened = False
    if low_ok and high_ok:
        if low <= resolution:
            # the boundary lies in (0, low]
            return BisectionOutcome(low, 0.0, low, True, False, probes)
        widened = True
        low = max(low / (2 * HARNESS_CONFIG["widen_factor"]), resolution)
        logger.warning("⚠️ bracket widened: both ends pass, retrying from T=%.6g", low)
        low_ok = passes(low)
    elif not low_ok and not high_ok:
        widened = True
        high = high * HARNESS_CONFIG["widen_factor"]
        logger.warning("⚠️ bracket widened: both ends fail, retrying up to T=%.6g", high)
        high_ok = passes(high)

    if low_ok and high_ok and low <= resolution:
        return BisectionOutcome(low, 0.0, low, True, widened, probes)
    if low_ok or not high_ok:
        logger.warning("⚠️ bracket [%.6g, %.6g] does not straddle the boundary; unresolved", low, high)
        return BisectionOutcome(math.nan, low, high, False, widened, probes)

    while high - low > resolution:
        mid = 0.5 * (low + high)
        if passes(mid):
            high = mid
        else:
            low = mid
    return BisectionOutcome(high, low, high, True, widened, probes)


# =============================================================================
# BOUNDARY SWEEP
# =============================================================================
@dataclass
class BoundaryResult:
    """Empirical and theoretical stability boundary for one (network, N)."""

    network: str
    n: int
    empirical_boundary_T: float
    theoretical_threshold: float
    resolved: bool
    bracket_low: float
    bracket_high: float
    runs: List[ProbeRecord] = field(default_factory=list)

    def to_row(self) -> Dict[str, Any]:
        row = asdict(self)
        row.pop("runs")
        row["probes"] = len(self.runs)
        return row


def _bracket_top(threshold: float, config: SweepConfig) -> float:
    if config.bisection.high is not None:
        return config.bisection.high
    top = max(2.0 * threshold, threshold + HARNESS_CONFIG["default_span"])
    return max(top, config.bisection.low + config.bisection.resolution)


def boundary_task(payload: Dict[str, Any]) -> BoundaryResult:
    """Locate the boundary for one (network, N); runs inside a worker process."""
    config = SweepConfig.model_validate(payload["config"])
    kind, n = payload["network"], payload["n"]
    game = config.game.build_sized(kind, n)
    threshold = stability_threshold(game).threshold
    settings = DynamicsSettings.for_sweep(config, HARNESS_CONFIG["boundary_mode"])
    count = config.initial_conditions or HARNESS_CONFIG["boundary_initial_conditions"]
    x0 = initial_conditions(game, count, config.seed, NETWORK_CODES[kind], n)

    outcome = bisect_boundary(
        lambda rate: probe_rate(game, rate, x0, settings),
        config.bisection.low,
        _bracket_top(threshold, config),
        config.bisection.resolution,
    )
    logger.info(
        "📈 %s %s N=%d: empirical boundary %.4g, threshold %.4g", config.game.game, kind, n, outcome.boundary, threshold
    )
    return BoundaryResult(kind, n, outcome.boundary, threshold, outcome.resolved, outcome.low, outcome.high, outcome.probes)


def _sweep_pairs(config: SweepConfig) -> List[Tuple[str, int]]:
    return [(kind, n) for kind in config.networks for n in sorted(set(config.agent_counts))]


def _fan_out(task: Callable[[Dict[str, Any]], Any], payloads: List[Dict[str, Any]], threads: int, desc: str) -> List[Any]:
    """Run payloads inline or over a process pool; results keep payload order."""
    results: List[Any] = [None] * len(payloads)
    with tqdm(total=len(payloads), desc=desc, disable=None) as progress:
        if threads <= 1:
            for i, payload in enumerate(payloads):
                results[i] = task(payload)
                progress.update(1)
        else:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                futures = {pool.submit(task, payload): i for i, payload in enumerate(payloads)}
                for future in as_completed(futures):
                    results[futures[future]] = future.result()
                    progress.update(1)
    return results


def run_boundary(config: SweepConfig) -> List[BoundaryResult]:
    """Boundary per (network, N) in config order, networks first."""
    dumped = config.model_dump()
    payloads = [{"config": dumped, "network": kind, "n": n} for kind, n in _sweep_pairs(config)]
    return _fan_out(boundary_task, payloads, config.threads, "boundary")


def boundary_frame(results: Sequence[BoundaryResult]) -> pd.DataFrame:
    columns = ["network", "n", "empirical_boundary_T", "theoretical_threshold", "resolved", "bracket_low", "bracket_high", "probes"]
    return pd.DataFrame([r.to_row() for r in results], columns=columns)


def probes_frame(results: Sequence[BoundaryResult]) -> pd.DataFrame:
    rows = [
        {"network": r.network, "n": r.n, "probe": i, "T": p.T, "passed": p.passed, "statistic": p.statistic}
        for r in results
        for i, p in enumerate(r.runs)
    ]
    return pd.DataFrame(rows, columns=["network", "n", "probe", "T", "passed", "statistic"])


# =============================================================================
# BOXPLOT SWEEP
# =============================================================================
def boxplot_task(payload: Dict[str, Any]) -> pd.DataFrame:
    """Final-window first-action samples for one (network, N, T)."""
    config = SweepConfig.model_validate(payload["config"])
    kind, n, rate = payload["network"], payload["n"], payload["T"]
    game = config.game.build_sized(kind, n)
    agents = list(config.agents)
    if max(agents, default=-1) >= game.num_agents:
        raise ConfigError(f"agents {agents} out of range for {game.num_agents} agents")
    settings = DynamicsSettings.for_sweep(config, HARNESS_CONFIG["boxplot_mode"])
    count = config.initial_conditions or HARNESS_CONFIG["boxplot_initial_conditions"]
    x0 = initial_conditions(game, count, config.seed, NETWORK_CODES[kind], n)

    window = final_window(game, ExplorationRates.uniform(rate, game.num_agents), x0, settings)
    samples = window[:, :, np.asarray(game.layout.starts)[agents]].transpose(1, 2, 0)   # (B, A, W)
    b, a, w = samples.shape
    return pd.DataFrame({
        "T": np.full(b * a * w, rate),
        "init": np.repeat(np.arange(b), a * w),
        "agent": np.tile(np.repeat(np.asarray(agents), w), b),
        "sample_index": np.tile(np.arange(w), b * a),
        "prob": samples.reshape(-1),
    })


def run_boxplot(config: SweepConfig) -> Dict[Tuple[str, int], pd.DataFrame]:
    """Long-form samples per (network, N), rows ordered by T, init, agent, sample."""
    if not config.T_grid:
        raise ConfigError("boxplot needs a non-empty T_grid")
    dumped = config.model_dump()
    grid = sorted(set(config.T_grid))
    pairs = _sweep_pairs(config)
    payloads = [{"config": dumped, "network": kind, "n": n, "T": rate} for kind, n in pairs for rate in grid]
    frames = _fan_out(boxplot_task, payloads, config.threads, "boxplot")

    tables: Dict[Tuple[str, int], pd.DataFrame] = {}
    for i, pair in enumerate(pairs):
        chunk = frames[i * len(grid):(i + 1) * len(grid)]
        tables[pair] = pd.concat(chunk, ignore_index=True)
    return tables


def sample_spread(table: pd.DataFrame) -> pd.DataFrame:
    """max - min of the samples per (T, agent)."""
    grouped = table.groupby(["T", "agent"])["prob"]
    return (grouped.max() - grouped.min()).rename("spread").reset_index()


# =============================================================================
# TREND FIT
# =============================================================================
@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float


def linear_fit(ns: Sequence[float], values: Sequence[float]) -> LinearFit:
    """Least-squares line through (N, boundary) points with its R²."""
    x = np.asarray(ns, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise DomainError("linear_fit needs at least two paired points")
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sum((y - (slope * x + intercept)) ** 2))
    total = float(np.sum((y - y.mean()) ** 2))
    if total == 0.0:
        r_squared = 1.0 if residual == 0.0 else 0.0
    else:
        r_squared = 1.0 - residual / total
    return LinearFit(float(slope), float(intercept), r_squared)
