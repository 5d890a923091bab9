"""
Monte-Carlo-Sweeps ueber generierte Instanzen.

Pro Trial (Seed = master_seed + i) wird eine Instanz erzeugt, die Ground
Truth berechnet, der Agent des Modus ausgefuehrt und eine ``TrialRow``
geschrieben. Trials laufen parallel in einem Thread-Pool; der Report wird
nach Seed sortiert zusammengesetzt und ist fuer gleiche Konfigurationen
byte-identisch (``wall_ms`` bleibt 0, solange ``record_wall_time`` aus ist).
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Callable, Optional, Union

import duckdb
import numpy as np
import pandas as pd

from env import (
    EpisodicEnv,
    GroundTruth,
    TrialTimeout,
    gen_mdp,
    gen_stochastic_rewards,
    policy_matches,
    solve_dp,
)
from env.jsonio import write_json
from funclass import (
    MAX_BRUTEFORCE_DOMAIN,
    FiniteClass,
    LinearClass,
    compute_approx_error,
    eluder_dim_bruteforce,
    eluder_dim_greedy,
    gen_finite_class,
    gen_linear_features,
)
from general_agent import GeneralAgentConfig, StochasticConfig, learn_general, learn_stochastic
from linear_agent import LinearAgentConfig, data_addition_bound, learn_linear

from . import bounds
from .config import ExperimentConfig, as_range, log

# ---------------------------------------------------------------------------
# Konstanten
# ---------------------------------------------------------------------------

# Abstand zur Pfadsummen-Grenze 1, damit max|Q*| + delta <= 1 auch nach Rundung gilt
PATH_HEADROOM = 1e-9

STATUS_OK = "ok"
STATUS_FAILED = "failed"
STATUS_TIMEOUT = "timeout"

BOOL_COLUMNS = ("matched_pi_star", "premise_satisfied", "dataset_premise")
INT_COLUMNS = (
    "seed",
    "horizon",
    "n_pairs",
    "d",
    "class_size",
    "dim_e",
    "n_samples",
    "data_additions",
    "recur_line_executions",
    "explore_calls",
    "y_size",
    "oracle_calls",
    "reward_samples",
    "estimate_calls",
    "env_steps",
    "bound_estimates",
    "eluder_brute_a",
    "eluder_brute_b",
    "eluder_greedy_a",
    "eluder_greedy_b",
)

SUMMARY_SQL = """
SELECT
    mode,
    COUNT(*) AS trials,
    SUM(CASE WHEN status = 'ok' THEN 1 ELSE 0 END) AS completed,
    AVG(CASE WHEN matched_pi_star THEN 1.0 ELSE 0.0 END) AS success_rate,
    AVG(CASE WHEN premise_satisfied THEN 1.0 ELSE 0.0 END) AS premise_rate,
    MIN(rho) AS min_rho,
    MAX(delta) AS max_delta,
    MAX(data_additions) AS max_data_additions,
    MIN(bound_data_additions) AS min_bound_data_additions,
    MAX(y_size) AS max_y_size,
    MIN(bound_y_size) AS min_bound_y_size,
    MAX(estimate_calls) AS max_estimate_calls,
    MAX(reward_samples) AS max_reward_samples,
    MAX(max_return_error) AS max_return_error,
    MAX(eluder_brute_a) AS max_eluder_dim
FROM trials
GROUP BY mode
ORDER BY mode
"""


# ---------------------------------------------------------------------------
# Zeilen und Report
# ---------------------------------------------------------------------------


@dataclass
class TrialRow:
    """Eine Zeile des Reports (Spalten in dieser Reihenfolge, siehe docs/reports.md)."""

    mode: str
    seed: int
    status: str = STATUS_OK
    error: str = ""
    horizon: Optional[int] = None
    n_pairs: Optional[int] = None
    d: Optional[int] = None
    class_size: Optional[int] = None
    rho: Optional[float] = None
    delta: Optional[float] = None
    delta_r: Optional[float] = None
    p: Optional[float] = None
    dim_e: Optional[int] = None
    c: Optional[float] = None
    n_samples: Optional[int] = None
    matched_pi_star: Optional[bool] = None
    max_return_error: Optional[float] = None
    premise_satisfied: Optional[bool] = None
    dataset_premise: Optional[bool] = None
    data_additions: Optional[int] = None
    recur_line_executions: Optional[int] = None
    explore_calls: Optional[int] = None
    y_size: Optional[int] = None
    oracle_calls: Optional[int] = None
    reward_samples: Optional[int] = None
    estimate_calls: Optional[int] = None
    env_steps: Optional[int] = None
    bound_data_additions: Optional[float] = None
    bound_y_size: Optional[float] = None
    bound_y_size_c: Optional[float] = None
    bound_estimates: Optional[int] = None
    eluder_eps_a: Optional[float] = None
    eluder_eps_b: Optional[float] = None
    eluder_brute_a: Optional[int] = None
    eluder_brute_b: Optional[int] = None
    eluder_greedy_a: Optional[int] = None
    eluder_greedy_b: Optional[int] = None
    wall_ms: float = 0.0


REPORT_COLUMNS = tuple(f.name for f in fields(TrialRow))
TEXT_COLUMNS = ("mode", "status", "error")
FLOAT_COLUMNS = tuple(
    name for name in REPORT_COLUMNS if name not in BOOL_COLUMNS + INT_COLUMNS + TEXT_COLUMNS
)


@dataclass
class Report:
    """Ergebnis eines Sweeps.

    Attributes:
        config: Echo der Konfiguration (JSON-kompatibel)
        rows: Trial-Zeilen, nach (mode, seed) sortiert
    """

    config: dict
    rows: list[TrialRow]

    def frame(self) -> pd.DataFrame:
        """Zeilen als DataFrame mit festen Spalten und nullable Typen."""
        frame = pd.DataFrame([asdict(row) for row in self.rows], columns=list(REPORT_COLUMNS))
        return normalize_frame(frame)

    def summary(self) -> list[dict]:
        """Aggregate pro Modus (per SQL aus den Zeilen neu berechenbar)."""
        return summarize(self.frame())

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.csv_text(), encoding="utf-8")
        return path

    def csv_text(self) -> str:
        return self.frame().to_csv(index=False, float_format="%.17g", lineterminator="\n")

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "summary": self.summary(),
            "rows": [asdict(row) for row in self.rows],
        }

    def to_json(self, path: Union[str, Path]) -> Path:
        return write_json(self.to_dict(), path)


def normalize_frame(frame: pd.DataFrame) -> pd.DataFrame:
    """Setzt die Report-Typen (auch fuer aus CSV gelesene Zeilen)."""
    frame = frame.copy()
    for column in BOOL_COLUMNS:
        if column in frame:
            frame[column] = frame[column].map(_as_optional_bool).astype("boolean")
    for column in INT_COLUMNS:
        if column in frame:
            frame[column] = pd.to_numeric(frame[column]).astype("Int64")
    for column in TEXT_COLUMNS:
        if column in frame:
            frame[column] = frame[column].fillna("").astype(str)
    for column in FLOAT_COLUMNS:
        if column in frame:
            frame[column] = pd.to_numeric(frame[column]).astype(float)
    return frame


def summarize(frame: pd.DataFrame) -> list[dict]:
    conn = duckdb.connect()
    try:
        conn.register("trials", frame)
        result = conn.execute(SUMMARY_SQL)
        columns = [d[0] for d in result.description]
        return [
            {name: _plain(value) for name, value in zip(columns, record)}
            for record in result.fetchall()
        ]
    finally:
        conn.close()


def read_report_csv(path: Union[str, Path]) -> pd.DataFrame:
    """Liest einen CSV-Report. Fehlende Datei -> FileNotFoundError."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Report nicht gefunden: {path}")
    return normalize_frame(pd.read_csv(path, keep_default_na=True))


def _as_optional_bool(value) -> Optional[bool]:
    if value is None or value is pd.NA:
        return None
    if isinstance(value, str):
        if value == "":
            return None
        return value.strip().lower() == "true"
    if isinstance(value, float) and math.isnan(value):
        return None
    return bool(value)


def _plain(value):
    if value is None:
        return None
    if isinstance(value, (np.integer, int)) and not isinstance(value, bool):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if hasattr(value, "__float__") and not isinstance(value, (str, bool)):
        return float(value)
    return value


# ---------------------------------------------------------------------------
# Ziehen der Instanz-Parameter
# ---------------------------------------------------------------------------


def _draw_int(rng: np.random.Generator, value) -> int:
    lo, hi = as_range(value)
    return int(rng.integers(int(lo), int(hi) + 1))


def _draw_real(rng: np.random.Generator, value) -> float:
    lo, hi = as_range(value)
    if lo == hi:
        return float(lo)
    return float(rng.uniform(float(lo), float(hi)))


def _draw_mdp_shape(cfg: ExperimentConfig, rng: np.random.Generator) -> tuple[int, list[int], float]:
    inst = cfg.instance
    horizon = _draw_int(rng, inst.horizon)
    widths = [1] + [_draw_int(rng, inst.level_width) for _ in range(horizon - 1)]
    rho_target = _draw_real(rng, inst.target_gap)
    return horizon, widths, rho_target


def _actions_spec(cfg: ExperimentConfig):
    lo, hi = as_range(cfg.instance.actions)
    return int(lo) if lo == hi else (int(lo), int(hi))


def _delta_target(cfg: ExperimentConfig, max_delta: float) -> float:
    if cfg.agent.delta_fraction is not None:
        return max(0.0, cfg.agent.delta_fraction * max_delta)
    return cfg.instance.delta_target


def _max_return_error(explore_returns: dict, truth: GroundTruth) -> float:
    worst = 0.0
    for state, values in explore_returns.items():
        for value in values:
            worst = max(worst, abs(value - truth.v_star[state]))
    return worst


def _eluder_dim(cfg: ExperimentConfig, function_class: FiniteClass, rho: float) -> int:
    keys = function_class.keys
    if len(keys) <= MAX_BRUTEFORCE_DOMAIN:
        return eluder_dim_bruteforce(function_class, keys, rho / 4.0)
    if cfg.agent.dim_e_value is not None:
        return cfg.agent.dim_e_value
    raise ValueError(
        f"{len(keys)} Paare > {MAX_BRUTEFORCE_DOMAIN}: agent.dim_e_value muss gesetzt sein"
    )


def _fill(row: TrialRow, **values) -> None:
    for name, value in values.items():
        setattr(row, name, value)


def _agent_rho_delta(cfg: ExperimentConfig, rho: float, delta: float) -> tuple[float, float]:
    agent_rho = cfg.agent.rho if cfg.agent.rho is not None else rho
    agent_delta = cfg.agent.delta if cfg.agent.delta is not None else delta
    return agent_rho, agent_delta


# ---------------------------------------------------------------------------
# Trials pro Modus
# ---------------------------------------------------------------------------


def _linear_trial(cfg: ExperimentConfig, row: TrialRow, deadline: Optional[float]) -> None:
    seed = row.seed
    inst, agent = cfg.instance, cfg.agent
    rng = np.random.default_rng(seed)
    horizon, widths, rho_target = _draw_mdp_shape(cfg, rng)
    d = _draw_int(rng, inst.d)
    delta_target = _delta_target(cfg, bounds.linear_max_delta(rho_target, d, agent.log_base))

    max_path_sum = min(inst.max_path_sum, 1.0 - delta_target) - PATH_HEADROOM
    mdp = gen_mdp(seed, horizon, widths, _actions_spec(cfg), rho_target, max_path_sum=max_path_sum)
    truth = solve_dp(mdp)
    feature_map, theta_star = gen_linear_features(truth, d, delta_target, seed)
    delta = compute_approx_error(LinearClass(feature_map), truth, theta_hint=theta_star).delta
    rho, delta = _agent_rho_delta(cfg, truth.gap, delta)

    _fill(
        row,
        horizon=horizon,
        n_pairs=mdp.n_pairs,
        d=d,
        rho=rho,
        delta=delta,
        premise_satisfied=bounds.linear_premise(rho, delta, d, agent.log_base),
        bound_data_additions=data_addition_bound(d, rho, agent.log_base),
    )
    env = EpisodicEnv(mdp, deadline=deadline)
    config = LinearAgentConfig(memoize=agent.memoize, log_base=agent.log_base)
    policy, stats = learn_linear(env, feature_map, rho, config)

    row.matched_pi_star = policy_matches(truth, policy, mdp)
    row.max_return_error = _max_return_error(stats.explore_returns, truth)
    row.data_additions = stats.data_additions
    row.recur_line_executions = stats.recur_line_executions
    row.explore_calls = stats.explore_calls
    row.env_steps = stats.env_steps


def _general_instance(cfg: ExperimentConfig, seed: int, stochastic: bool):
    inst, agent = cfg.instance, cfg.agent
    rng = np.random.default_rng(seed)
    horizon, widths, rho_target = _draw_mdp_shape(cfg, rng)

    max_path_sum = inst.max_path_sum - PATH_HEADROOM
    if stochastic:
        max_path_sum = min(max_path_sum, 1.0 - horizon * inst.noise_width - PATH_HEADROOM)
    mdp = gen_mdp(seed, horizon, widths, _actions_spec(cfg), rho_target, max_path_sum=max_path_sum)
    if stochastic:
        mdp = gen_stochastic_rewards(mdp, seed, inst.noise_family, inst.noise_width)
    truth = solve_dp(mdp)

    # Erst die Dimension der provisorischen Klasse, dann delta relativ zur Voraussetzung platzieren
    function_class = gen_finite_class(truth, inst.class_size, inst.delta_target, seed, inst.class_spread)
    if agent.delta_fraction is not None:
        dim_e = _eluder_dim(cfg, function_class, truth.gap)
        if stochastic:
            delta_r = agent.delta_r if agent.delta_r is not None else bounds.default_delta_r(truth.gap, dim_e)
            max_delta = bounds.stochastic_max_delta(truth.gap, delta_r, dim_e)
        else:
            max_delta = bounds.general_max_delta(truth.gap, dim_e)
        function_class = gen_finite_class(
            truth, inst.class_size, _delta_target(cfg, max_delta), seed, inst.class_spread
        )
    return mdp, truth, function_class


def _general_trial(cfg: ExperimentConfig, row: TrialRow, deadline: Optional[float]) -> None:
    seed = row.seed
    agent = cfg.agent
    mdp, truth, function_class = _general_instance(cfg, seed, stochastic=False)
    delta = compute_approx_error(function_class, truth).delta
    rho, delta = _agent_rho_delta(cfg, truth.gap, delta)
    dim_e = _eluder_dim(cfg, function_class, rho)

    premise = bounds.general_premise(rho, delta, dim_e)
    _fill(
        row,
        horizon=mdp.horizon,
        n_pairs=mdp.n_pairs,
        class_size=function_class.size,
        rho=rho,
        delta=delta,
        dim_e=dim_e,
        c=agent.c,
        premise_satisfied=premise,
        dataset_premise=bounds.dataset_premise(rho, delta, dim_e, agent.c),
        bound_y_size=bounds.dataset_bound(dim_e),
        bound_y_size_c=bounds.dataset_bound(dim_e, agent.c),
    )
    env = EpisodicEnv(mdp, deadline=deadline)
    policy, stats = learn_general(env, function_class, rho, delta, GeneralAgentConfig(strict_labels=premise))

    row.matched_pi_star = policy_matches(truth, policy, mdp)
    row.max_return_error = _max_return_error(stats.explore_returns, truth)
    row.y_size = stats.y_size
    row.oracle_calls = stats.oracle_calls
    row.explore_calls = stats.explore_calls
    row.env_steps = stats.env_steps


def _stochastic_trial(cfg: ExperimentConfig, row: TrialRow, deadline: Optional[float]) -> None:
    seed = row.seed
    agent = cfg.agent
    mdp, truth, function_class = _general_instance(cfg, seed, stochastic=True)
    delta = compute_approx_error(function_class, truth).delta
    rho, delta = _agent_rho_delta(cfg, truth.gap, delta)
    dim_e = _eluder_dim(cfg, function_class, rho)
    delta_r = agent.delta_r if agent.delta_r is not None else bounds.default_delta_r(rho, dim_e)
    stochastic = StochasticConfig(delta_r=delta_r, p=agent.p, dim_e_value=max(dim_e, 1), horizon=mdp.horizon)

    _fill(
        row,
        horizon=mdp.horizon,
        n_pairs=mdp.n_pairs,
        class_size=function_class.size,
        rho=rho,
        delta=delta,
        delta_r=delta_r,
        p=agent.p,
        dim_e=dim_e,
        n_samples=stochastic.n_samples,
        premise_satisfied=bounds.stochastic_premise(rho, delta, delta_r, dim_e),
        bound_y_size=bounds.dataset_bound(dim_e),
        bound_estimates=bounds.estimate_bound(dim_e, mdp.horizon),
    )
    # Eigener Reward-Strom pro Trial, getrennt vom Instanz-Generator
    env = EpisodicEnv(mdp, rng=np.random.default_rng([seed, 1]), deadline=deadline)
    policy, stats = learn_stochastic(env, function_class, rho, delta, stochastic)

    row.matched_pi_star = policy_matches(truth, policy, mdp)
    row.y_size = stats.y_size
    row.oracle_calls = stats.oracle_calls
    row.explore_calls = stats.explore_calls
    row.reward_samples = stats.reward_samples
    row.estimate_calls = stats.estimate_calls
    row.env_steps = stats.env_steps


def _eluder_trial(cfg: ExperimentConfig, row: TrialRow, deadline: Optional[float]) -> None:
    seed = row.seed
    inst = cfg.instance
    rng = np.random.default_rng(seed)
    n_points = _draw_int(rng, inst.eluder_points)
    levels = max(inst.eluder_levels, 2)
    # Quantisierte Werte erzeugen Gleichstaende an den Schwellen
    tables = rng.integers(0, levels, size=(inst.class_size, n_points)) / (levels - 1)
    keys = tuple((0, 0, a) for a in range(n_points))
    function_class = FiniteClass(keys=keys, tables=tables)
    eps_a, eps_b = inst.eluder_eps

    _fill(
        row,
        n_pairs=n_points,
        class_size=function_class.size,
        eluder_eps_a=eps_a,
        eluder_eps_b=eps_b,
        eluder_brute_a=eluder_dim_bruteforce(function_class, keys, eps_a),
        eluder_brute_b=eluder_dim_bruteforce(function_class, keys, eps_b),
        eluder_greedy_a=eluder_dim_greedy(function_class, keys, eps_a),
        eluder_greedy_b=eluder_dim_greedy(function_class, keys, eps_b),
    )


TRIALS: dict[str, Callable[[ExperimentConfig, TrialRow, Optional[float]], None]] = {
    "linear": _linear_trial,
    "general": _general_trial,
    "stochastic": _stochastic_trial,
    "eluder": _eluder_trial,
}

VERIFY_MODES = ("linear", "general", "stochastic")


# ---------------------------------------------------------------------------
# Sweep
# ---------------------------------------------------------------------------


def run_trial(cfg: ExperimentConfig, mode: str, seed: int) -> TrialRow:
    """Fuehrt einen Trial aus; Fehler und Timeouts werden als Zeile erfasst."""
    started = time.monotonic()
    budget = cfg.run.trial_budget_s
    deadline = started + budget if budget is not None else None
    row = TrialRow(mode=mode, seed=seed)
    try:
        TRIALS[mode](cfg, row, deadline)
    except TrialTimeout as e:
        row.status, row.error = STATUS_TIMEOUT, str(e)
        log(f"Trial {mode}/{seed}: Zeitbudget ueberschritten", "warning")
    except Exception as e:
        row.status, row.error = STATUS_FAILED, f"{type(e).__name__}: {e}"
        log(f"Trial {mode}/{seed} fehlgeschlagen: {e}", "warning")
    if cfg.run.record_wall_time:
        row.wall_ms = (time.monotonic() - started) * 1000.0
    log(f"Trial {mode}/{seed}: {row.status}", "debug")
    return row


def run_sweep(cfg: ExperimentConfig) -> Report:
    """Fuehrt alle Trials des konfigurierten Modus aus.

    Raises:
        ValueError: wenn die Konfiguration ungueltig ist (alle Fehler gesammelt)
    """
    errors = cfg.collect_errors()
    if errors:
        raise ValueError("Fehler in der Konfiguration:\n" + "\n".join(f"  - {e}" for e in errors))

    modes = VERIFY_MODES if cfg.mode == "verify" else (cfg.mode,)
    seeds = [cfg.run.master_seed + i for i in range(cfg.run.trials)]
    jobs = [(mode, seed) for mode in modes for seed in seeds]
    log(f"Sweep: {len(jobs)} Trials ({', '.join(modes)}), Parallelitaet {cfg.run.parallelism}")

    if cfg.run.parallelism == 1:
        rows = [run_trial(cfg, mode, seed) for mode, seed in jobs]
    else:
        with ThreadPoolExecutor(max_workers=cfg.run.parallelism) as pool:
            futures = [pool.submit(run_trial, cfg, mode, seed) for mode, seed in jobs]
            rows = [future.result() for future in futures]

    rows.sort(key=lambda row: (row.mode, row.seed))
    report = Report(config=cfg.echo(), rows=rows)
    failed = sum(row.status != STATUS_OK for row in rows)
    level = "warning" if failed else "success"
    log(f"Sweep abgeschlossen: {len(rows) - failed}/{len(rows)} Trials ok", level)
    return report
