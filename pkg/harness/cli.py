"""
Kommandozeile: Instanzen erzeugen, loesen, Agenten ausfuehren, Sweeps pruefen.

Ergebnisse gehen als JSON auf stdout (oder nach ``--out``), Meldungen auf stderr.

Verwendung:
    python -m harness.cli gen mdp --seed 0 --horizon 3 --widths 1,3,3 --actions 2 --gap 0.2 --out mdp.json
    python -m harness.cli gen features --mdp mdp.json --d 4 --delta 0.0 --seed 0 --out phi.json
    python -m harness.cli solve --mdp mdp.json
    python -m harness.cli learn-linear --mdp mdp.json --features phi.json --rho 0.2
    python -m harness.cli sweep --config config.yaml --mode general --trials 50
    python -m harness.cli verify --report reports/general.csv
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from env import DeterministicMdp, EpisodicEnv, gen_mdp, gen_stochastic_rewards, policy_matches, solve_dp
from env.jsonio import dumps, write_json
from funclass import (
    MAX_BRUTEFORCE_DOMAIN,
    FeatureMap,
    FiniteClass,
    eluder_dim_bruteforce,
    eluder_dim_greedy,
    gen_finite_class,
    gen_linear_features,
)
from general_agent import GeneralAgentConfig, StochasticConfig, learn_general, learn_stochastic
from linear_agent import LinearAgentConfig, learn_linear

from .config import ExperimentConfig, log, seed_from_environ, set_verbose
from .sweep import read_report_csv, run_sweep
from .verify import verify_bounds

# ---------------------------------------------------------------------------
# Hilfsfunktionen
# ---------------------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def _action_spec(text: str):
    """``2`` oder ``2-4`` (inklusiver Bereich)."""
    if "-" in text:
        lo, hi = text.split("-", 1)
        return (int(lo), int(hi))
    return int(text)


def _emit(obj: Any, out: Optional[Path]) -> None:
    if out is None:
        print(dumps(obj))
    else:
        write_json(obj, out)
        log(f"Geschrieben: {out}", "success")


def _policy_list(policy: dict) -> list[list[int]]:
    return [[*state, action] for state, action in sorted(policy.items())]


def _log_oracle_trace(stats) -> None:
    for state, answer in stats.oracle_trace:
        log(f"Oracle {state}: {answer}", "debug")


def _dim_e(function_class: FiniteClass, rho: float, given: Optional[int]) -> int:
    if given is not None:
        return given
    if len(function_class.keys) > MAX_BRUTEFORCE_DOMAIN:
        raise ValueError(f"Mehr als {MAX_BRUTEFORCE_DOMAIN} Paare: --dim-e angeben")
    return max(1, eluder_dim_bruteforce(function_class, function_class.keys, rho / 4.0))


# ---------------------------------------------------------------------------
# Subkommandos
# ---------------------------------------------------------------------------


def cmd_gen(args: argparse.Namespace) -> None:
    if args.kind == "mdp":
        widths = _int_list(args.widths) if args.widths else [1] + [3] * (args.horizon - 1)
        mdp = gen_mdp(
            args.seed,
            args.horizon,
            widths,
            _action_spec(args.actions),
            args.gap,
            max_path_sum=args.max_path_sum,
        )
        log(f"MDP: H={mdp.horizon}, {mdp.n_pairs} Paare, Luecke {args.gap}", "info")
        _emit(mdp.to_dict(), args.out)
    elif args.kind == "stochastic":
        mdp = gen_stochastic_rewards(DeterministicMdp.load(args.mdp), args.seed, args.family, args.width)
        _emit(mdp.to_dict(), args.out)
    elif args.kind == "features":
        truth = solve_dp(DeterministicMdp.load(args.mdp))
        feature_map, theta_star = gen_linear_features(truth, args.d, args.delta, args.seed)
        _emit({**feature_map.to_dict(), "theta_star": theta_star}, args.out)
    else:
        truth = solve_dp(DeterministicMdp.load(args.mdp))
        function_class = gen_finite_class(truth, args.size, args.delta, args.seed, args.spread)
        _emit(function_class.to_list(), args.out)


def cmd_solve(args: argparse.Namespace) -> None:
    truth = solve_dp(DeterministicMdp.load(args.mdp))
    _emit(truth.to_dict(), args.out)


def cmd_learn_linear(args: argparse.Namespace) -> None:
    mdp = DeterministicMdp.load(args.mdp)
    feature_map = FeatureMap.load(args.features)
    feature_map.check_against(mdp)
    config = LinearAgentConfig.from_config_yaml()
    config = replace(
        config,
        memoize=args.memoize or config.memoize,
        log_base=args.log_base or config.log_base,
    )
    policy, stats = learn_linear(EpisodicEnv(mdp), feature_map, args.rho, config)
    result = stats.to_dict()
    result["matched_pi_star"] = policy_matches(solve_dp(mdp), policy, mdp)
    log(f"{stats.data_additions} Datenpunkte, {stats.recur_line_executions} Rekursionen", "success")
    _emit(result, args.out)


def cmd_learn_general(args: argparse.Namespace) -> None:
    mdp = DeterministicMdp.load(args.mdp)
    function_class = FiniteClass.load(args.function_class)
    function_class.check_against(mdp)
    config = GeneralAgentConfig.from_config_yaml()
    policy, stats = learn_general(EpisodicEnv(mdp), function_class, args.rho, args.delta, config)
    _log_oracle_trace(stats)
    result = stats.to_dict()
    result["matched_pi_star"] = policy_matches(solve_dp(mdp), policy, mdp)
    log(f"|Y| = {stats.y_size}, {stats.oracle_calls} Oracle-Aufrufe", "success")
    _emit(result, args.out)


def cmd_learn_stochastic(args: argparse.Namespace) -> None:
    mdp = DeterministicMdp.load(args.mdp)
    function_class = FiniteClass.load(args.function_class)
    function_class.check_against(mdp)
    dim_e = _dim_e(function_class, args.rho, args.dim_e)
    cfg = StochasticConfig(delta_r=args.delta_r, p=args.p, dim_e_value=dim_e, horizon=mdp.horizon)
    log(f"n = {cfg.n_samples} Samples pro Schaetzung (dim_E = {dim_e})", "info")
    seed = seed_from_environ(args.seed)
    env = EpisodicEnv(mdp, rng=np.random.default_rng(seed))
    config = GeneralAgentConfig.from_config_yaml()
    policy, stats = learn_stochastic(env, function_class, args.rho, args.delta, cfg, config)
    _log_oracle_trace(stats)
    result = stats.to_dict()
    result["matched_pi_star"] = policy_matches(solve_dp(mdp), policy, mdp)
    result["n_samples"] = cfg.n_samples
    result["dim_e_value"] = dim_e
    result["seed"] = seed
    _emit(result, args.out)


def cmd_eluder(args: argparse.Namespace) -> None:
    function_class = FiniteClass.load(args.function_class)
    keys = function_class.keys
    result = {"eps": args.eps, "domain_size": len(keys), "greedy": eluder_dim_greedy(function_class, keys, args.eps)}
    if not args.greedy_only:
        result["bruteforce"] = eluder_dim_bruteforce(function_class, keys, args.eps)
    _emit(result, args.out)


def _load_experiment(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {
        "mode": getattr(args, "mode", None),
        "run.trials": getattr(args, "trials", None),
        "run.master_seed": getattr(args, "seed", None),
        "run.parallelism": getattr(args, "parallelism", None),
    }
    cfg = ExperimentConfig.from_file(args.config, overrides=overrides)
    errors = cfg.collect_errors()
    if errors:
        log("Fehler in der Konfiguration:", "error")
        for e in errors:
            log(f"  - {e}", "error")
        sys.exit(1)
    return cfg


def _write_report(report, cfg: ExperimentConfig, args: argparse.Namespace) -> None:
    csv_path = args.out_csv or cfg.output.csv
    json_path = args.out_json or cfg.output.json_report
    if csv_path:
        report.to_csv(csv_path)
        log(f"CSV: {csv_path}", "success")
    if json_path:
        report.to_json(json_path)
        log(f"JSON: {json_path}", "success")


def cmd_sweep(args: argparse.Namespace) -> None:
    cfg = _load_experiment(args)
    report = run_sweep(cfg)
    _write_report(report, cfg, args)
    if not (args.out_csv or cfg.output.csv or args.out_json or cfg.output.json_report):
        print(dumps(report.to_dict()))


def cmd_verify(args: argparse.Namespace) -> None:
    if args.report:
        frame = read_report_csv(args.report)
        threshold = args.threshold if args.threshold is not None else 0.85
        result = verify_bounds(frame, threshold)
    else:
        args.mode = "verify"
        cfg = _load_experiment(args)
        report = run_sweep(cfg)
        _write_report(report, cfg, args)
        threshold = args.threshold if args.threshold is not None else cfg.agent.success_threshold
        result = verify_bounds(report, threshold)

    for line in result.lines:
        log(line.describe(), "success" if line.passed else "error")
    print(dumps(result.to_dict()))
    if not result.passed:
        sys.exit(1)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="harness.cli", description="Agnostisches Q-Learning in deterministischen MDPs")
    parser.add_argument("--verbose", action="store_true", help="Debug-Ausgaben (auch AGNOSTICQ_DEBUG=1)")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="Instanzen erzeugen")
    gen_sub = gen.add_subparsers(dest="kind", required=True)
    p = gen_sub.add_parser("mdp")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--widths", help="Zustaende pro Level, z.B. 1,3,3")
    p.add_argument("--actions", default="2", help="Aktionen pro Zustand: 2 oder 2-4")
    p.add_argument("--gap", type=float, required=True)
    p.add_argument("--max-path-sum", type=float, default=1.0)
    p = gen_sub.add_parser("stochastic")
    p.add_argument("--mdp", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--family", default="twopoint")
    p.add_argument("--width", type=float, default=0.1)
    p = gen_sub.add_parser("features")
    p.add_argument("--mdp", type=Path, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p = gen_sub.add_parser("class")
    p.add_argument("--mdp", type=Path, required=True)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--spread", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    for p in gen_sub.choices.values():
        p.add_argument("--out", type=Path)
    gen.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="Q*, V*, pi* und Luecke berechnen")
    p.add_argument("--mdp", type=Path, required=True)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("learn-linear", help="Linearer Agent")
    p.add_argument("--mdp", type=Path, required=True)
    p.add_argument("--features", type=Path, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--memoize", action="store_true")
    p.add_argument("--log-base", choices=["e", "2", "10"])
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_learn_linear)

    for name, func in (("learn-general", cmd_learn_general), ("learn-stochastic", cmd_learn_stochastic)):
        p = sub.add_parser(name, help="Agent ueber einer endlichen Klasse")
        p.add_argument("--mdp", type=Path, required=True)
        p.add_argument("--class", dest="function_class", type=Path, required=True)
        p.add_argument("--rho", type=float, required=True)
        p.add_argument("--delta", type=float, default=0.0)
        p.add_argument("--out", type=Path)
        p.set_defaults(func=func)
        if name == "learn-stochastic":
            p.add_argument("--delta-r", type=float, required=True)
            p.add_argument("--p", type=float, default=0.1)
            p.add_argument("--dim-e", type=int)
            p.add_argument("--seed", type=int, default=0, help="Reward-Seed; AGNOSTICQ_SEED hat Vorrang")

    p = sub.add_parser("eluder", help="Eluder-Dimension einer endlichen Klasse")
    p.add_argument("--class", dest="function_class", type=Path, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--greedy-only", action="store_true")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_eluder)

    for name, func in (("sweep", cmd_sweep), ("verify", cmd_verify)):
        p = sub.add_parser(name, help="Monte-Carlo-Sweep" if name == "sweep" else "Schranken pruefen")
        p.add_argument("--config", type=Path)
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int, help="Master-Seed")
        p.add_argument("--parallelism", type=int)
        p.add_argument("--out-csv", type=Path)
        p.add_argument("--out-json", type=Path)
        p.set_defaults(func=func)
        if name == "sweep":
            p.add_argument("--mode", choices=["linear", "general", "stochastic", "eluder", "verify"])
        else:
            p.add_argument("--report", type=Path, help="Vorhandenen CSV-Report pruefen")
            p.add_argument("--threshold", type=float)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        set_verbose(True)
    try:
        args.func(args)
    except (ValueError, RuntimeError, FileNotFoundError) as e:
        log(f"{type(e).__name__}: {e}", "error")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
