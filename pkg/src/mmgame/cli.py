"""Command-line front door.

Subcommands::

    mmgame analyze --preset table4 --out results/table4
    mmgame train   --preset table3-row1 --seed 7 --out results/row1
    mmgame payoff  --preset figure8 --out results/figure8
    mmgame analyze --config my_experiment.json --out results/custom

Exit codes: 0 success, 2 solver non-convergence, 3 invalid configuration.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis as ga
from . import reports
from .config import AnalysisConfig, ConfigError, ExperimentSpec, load_spec
from .engine import run_batch
from .market import InventoryPenalty, build_payoff_tensor, tensor_from_matrix
from .presets import PRESET_GROUPS, get_preset, preset_names

EXIT_OK = 0
EXIT_SOLVER = 2
EXIT_CONFIG = 3


def _build_tensor(spec: ExperimentSpec, xi: float | None = None):
    game = spec.game
    if game.explicit_side_payoff is not None:
        return tensor_from_matrix(game.explicit_side_payoff)
    penalty = InventoryPenalty(game.xi if xi is None else xi)
    return build_payoff_tensor(
        game.grid(), game.arrival_model(), penalty, two_sided=game.two_sided
    )


def _arrival_from_game(game):
    w = np.asarray(game.weights)
    sigma = game.sigma

    def arrival(freq: np.ndarray) -> float:
        return float(np.exp(-(w @ freq) / sigma))

    return arrival


def cmd_analyze(spec: ExperimentSpec, out_dir: Path) -> int:
    ana = spec.analysis or AnalysisConfig()
    solver_kwargs = dict(
        tol=ana.tol,
        damping=ana.damping,
        max_iter=ana.max_iter,
        continuation_from=ana.continuation_from,
    )
    out_dir.mkdir(parents=True, exist_ok=True)

    base_tensor = _build_tensor(spec)
    reports.write_tensor(base_tensor, out_dir)
    report = ga.equilibrium_report(base_tensor)

    xi_values = ana.xi_values
    if xi_values is None:
        xi_values = (spec.game.xi,)
    blocks = []
    solver_info = []
    bounds = []
    for xi in xi_values:
        tensor = base_tensor if xi == spec.game.xi else _build_tensor(spec, xi=xi)
        res = ga.fixed_point_q(tensor, ana.temperature, ana.gamma, **solver_kwargs)
        blocks.append((xi, res.q, res.policy))
        solver_info.append(
            {"xi": xi, "residual": res.residual, "iterations": res.iterations, "branch": res.branch}
        )
        bounds.append(
            {"xi": xi, "bound": ga.contraction_coefficient(tensor, ana.temperature, ana.gamma)}
        )
    reports.write_analysis_rows(out_dir, blocks)

    summary = {
        "name": spec.name,
        "config": spec.to_dict(),
        "config_digest": spec.digest(),
        "temperature": ana.temperature,
        "gamma": ana.gamma,
        "nash": [list(c) for c in report.nash],
        "cooperative": [list(c) for c in report.cooperative],
        "max_total_payoff": report.max_total_payoff,
        "contraction_bounds": bounds,
        "solver": solver_info,
    }

    if not spec.game.two_sided and len(spec.game.levels) == 2:
        z = base_tensor.agent_matrix(1)
        roots = ga.two_spread_crossings(z, ana.temperature)
        intercept = (z[0, 1] - z[1, 1]) / ana.temperature
        slope = (z[0, 0] - z[0, 1] + z[1, 1]) / ana.temperature
        reports.write_crossing(out_dir, ana.temperature, intercept, slope, roots)
        summary["crossing_roots"] = roots

    if spec.game.two_sided and spec.game.xi == 0.0 and spec.game.explicit_side_payoff is None:
        defect = ga.separability_check(
            spec.game.grid(), spec.game.arrival_model(), ana.temperature, ana.gamma,
            **solver_kwargs,
        )
        summary["separability_defect"] = defect

    if ana.u is not None:
        limit = ga.infinite_agent_limit(spec.game.grid(), _arrival_from_game(spec.game), ana.u)
        summary["limit_profile"] = {
            "u": limit.u,
            "probabilities": limit.probabilities.tolist(),
            "residual": limit.residual,
            "unique": limit.unique,
        }

    reports.write_summary(out_dir, summary)
    return EXIT_OK


def cmd_payoff(spec: ExperimentSpec, out_dir: Path) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    tensor = _build_tensor(spec)
    reports.write_tensor(tensor, out_dir)
    report = ga.equilibrium_report(tensor)
    reports.write_summary(
        out_dir,
        {
            "name": spec.name,
            "config": spec.to_dict(),
            "config_digest": spec.digest(),
            "nash": [list(c) for c in report.nash],
            "cooperative": [list(c) for c in report.cooperative],
            "max_total_payoff": report.max_total_payoff,
        },
    )
    return EXIT_OK


def cmd_train(spec: ExperimentSpec, out_dir: Path, jobs: int = 1) -> int:
    if spec.training is None:
        raise ConfigError(f"experiment {spec.name!r} has no training section")
    out_dir.mkdir(parents=True, exist_ok=True)
    train = spec.training
    started = time.perf_counter()
    result = run_batch(
        spec.game.grid(),
        spec.game.arrival_model(),
        spec.game.penalty(),
        train.settings(spec.game),
        n_instances=train.instances,
        base_seed=train.seed,
        two_sided=spec.game.two_sided,
        config_digest=spec.digest(),
        jobs=jobs,
    )
    reports.write_batch(result, out_dir)

    q_mean = result.mean_final_q()
    per_instance_q = np.array([r.final_q.mean(axis=(0, 1)) for r in result.records])
    stderr = per_instance_q.std(axis=0, ddof=1) / np.sqrt(len(result.records)) if len(result.records) > 1 else np.zeros_like(q_mean)
    summary = {
        "name": spec.name,
        "config": spec.to_dict(),
        "config_digest": spec.digest(),
        "base_seed": train.seed,
        "instances": train.instances,
        "terminations": [r.termination for r in result.records],
        "stop_periods": [r.stop_period for r in result.records],
        "mean_final_q": q_mean.tolist(),
        "final_q_stderr": stderr.tolist(),
        "implied_probabilities": result.implied_probabilities().tolist(),
        "last_window_orders": result.last_window_orders(),
        "last_window_reward": result.last_window_rewards(),
        "action_frequencies": result.action_frequencies().tolist(),
        "max_abs_inventory": float(max(r.max_abs_inventory.max() for r in result.records)),
        "wall_clock": time.perf_counter() - started,
    }
    reports.write_summary(out_dir, summary)
    return EXIT_OK


def cmd_train_group(names: tuple[str, ...], out_dir: Path, seed: int | None,
                    instances: int | None, jobs: int) -> int:
    rows = []
    for name in names:
        spec = _apply_overrides(get_preset(name), seed=seed, instances=instances)
        sub = out_dir / name
        cmd_train(spec, sub, jobs=jobs)
        import json

        summary = json.loads((sub / "summary.json").read_text())
        rows.append(
            [name, reports._fmt(summary["last_window_orders"]), reports._fmt(summary["last_window_reward"])]
        )
    reports.write_csv(out_dir / "comparison.csv", ["variant", "orders", "reward"], rows)
    return EXIT_OK


def _apply_overrides(spec: ExperimentSpec, seed=None, instances=None, temperature=None,
                     xi_values=None, u=None) -> ExperimentSpec:
    game = spec.game
    analysis = spec.analysis
    training = spec.training
    if xi_values is not None:
        analysis = replace(analysis or AnalysisConfig(), xi_values=tuple(xi_values))
    if u is not None:
        analysis = replace(analysis or AnalysisConfig(), u=u)
    if temperature is not None:
        if analysis is not None:
            analysis = replace(analysis, temperature=temperature)
        if training is not None:
            training = replace(training, temperature=temperature)
    if seed is not None and training is not None:
        training = replace(training, seed=seed)
    if instances is not None and training is not None:
        training = replace(training, instances=instances)
    out = ExperimentSpec(name=spec.name, game=game, analysis=analysis, training=training)
    out.validate()
    return out


def _load(args) -> ExperimentSpec:
    if args.preset and args.config:
        raise ConfigError("pass either --preset or --config, not both")
    if args.preset:
        return get_preset(args.preset)
    if args.config:
        return load_spec(args.config)
    raise ConfigError("one of --preset or --config is required")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", help="built-in experiment name")
    p.add_argument("--config", help="path to an experiment JSON file")
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--dump-config", action="store_true",
                   help="print the resolved experiment JSON and exit")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mmgame",
        description="Market-making game analysis and independent Q-learning experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_an = sub.add_parser("analyze", help="equilibria, fixed points, crossings, limits")
    _add_common(p_an)
    p_an.add_argument("--xi", help="comma-separated inventory-aversion values")
    p_an.add_argument("--u", type=float, help="temperature-scaling exponent for the limit profile")
    p_an.add_argument("--temperature", type=float, help="override the preset temperature")

    p_tr = sub.add_parser("train", help="run learning experiments")
    _add_common(p_tr)
    p_tr.add_argument("--seed", type=int, help="override the base seed")
    p_tr.add_argument("--instances", type=int, help="override the instance count")
    p_tr.add_argument("--jobs", type=int, default=1, help="parallel worker processes")

    p_po = sub.add_parser("payoff", help="emit the payoff tensor for a game")
    _add_common(p_po)

    p_ls = sub.add_parser("presets", help="list built-in experiments")

    args = parser.parse_args(argv)
    try:
        if args.command == "presets":
            for name in preset_names():
                print(name)
            return EXIT_OK

        out_dir = Path(args.out)
        if args.command == "train" and args.preset in PRESET_GROUPS:
            if args.dump_config:
                for name in PRESET_GROUPS[args.preset]:
                    print(get_preset(name).to_json())
                return EXIT_OK
            return cmd_train_group(
                PRESET_GROUPS[args.preset], out_dir, args.seed, args.instances, args.jobs
            )

        spec = _load(args)
        if args.command == "analyze":
            xi_values = None
            if args.xi:
                xi_values = tuple(float(x) for x in args.xi.split(","))
            spec = _apply_overrides(
                spec, temperature=args.temperature, xi_values=xi_values, u=args.u
            )
        elif args.command == "train":
            spec = _apply_overrides(spec, seed=args.seed, instances=args.instances)
        spec.validate()

        if args.dump_config:
            print(spec.to_json())
            return EXIT_OK

        if args.command == "analyze":
            return cmd_analyze(spec, out_dir)
        if args.command == "train":
            return cmd_train(spec, out_dir, jobs=args.jobs)
        return cmd_payoff(spec, out_dir)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ga.FixedPointError as exc:
        print(f"error: {exc} (residual {exc.residual:.3e})", file=sys.stderr)
        return EXIT_SOLVER
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
