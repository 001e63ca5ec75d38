"""Command line front end.

Three subcommands: `solve` compiles a game, samples the model, and
certifies what came back; `oracle` lists the pure equilibria straight
from the payoff matrices; `compile` exports the binary model without
sampling. Errors leave on exit code 1 with a one-line JSON object on
stdout, and `solve`/`oracle` leave on 2 when no equilibrium was found.
"""

from __future__ import annotations

import argparse
import json
import os
import shlex
import time
from pathlib import Path

from .analysis import certify, decode, histogram
from .errors import GameFormatError, NashQuboError, ParameterError
from .games import BimatrixGame, load_game, pure_nash_enumerate
from .pipeline import CompiledGame, compile_game
from .qubo import model_to_payload
from .rationals import parse_rational
from .samplers import (
    DEFAULT_CAPACITY,
    SampleSet,
    sample_external,
    sample_sa,
    solve_exhaustive,
)

FIXTURE_DIR = Path(__file__).parent / "fixtures"


def bundled_game_names() -> list[str]:
    return sorted(p.stem for p in FIXTURE_DIR.glob("*.json"))


def resolve_game(token: str) -> BimatrixGame:
    """A path to a game file, or the name of a bundled game."""
    path = Path(token)
    if path.exists():
        return load_game(path)
    stem = token[:-5] if token.endswith(".json") else token
    bundled = FIXTURE_DIR / f"{stem}.json"
    if bundled.exists():
        return load_game(bundled)
    raise GameFormatError(
        f"no game file at {token!r} and no bundled game of that name; "
        "bundled games: " + ", ".join(bundled_game_names())
    )


def _capacity_limit() -> int:
    raw = os.environ.get("NASHQUBO_CAPACITY")
    if raw is None:
        return DEFAULT_CAPACITY
    try:
        return int(raw)
    except ValueError:
        raise ParameterError(
            f"NASHQUBO_CAPACITY must be an integer, got {raw!r}"
        ) from None


def _rational_flag(text: str):
    try:
        return parse_rational(text)
    except NashQuboError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _add_game_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--game",
        required=True,
        help="path to a game JSON file, or a bundled game name",
    )


def _add_compile_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--slack-mode",
        choices=("per-row", "paper-compat"),
        default="per-row",
        help="fresh slack per constraint row, or one shared per player",
    )
    parser.add_argument(
        "--theta1", type=_rational_flag, default="1",
        help="penalty weight on the first player's simplex condition",
    )
    parser.add_argument(
        "--theta2", type=_rational_flag, default="1",
        help="penalty weight on the second player's simplex condition",
    )
    parser.add_argument(
        "--lambda", dest="lam", type=_rational_flag, default="1",
        help="penalty weight on the first player's constraint rows",
    )
    parser.add_argument(
        "--phi", type=_rational_flag, default="1",
        help="penalty weight on the second player's constraint rows",
    )
    parser.add_argument(
        "--bits-alpha", type=int, default=None,
        help="override the derived bit width of the first bound scalar",
    )
    parser.add_argument(
        "--bits-beta", type=int, default=None,
        help="override the derived bit width of the second bound scalar",
    )
    parser.add_argument(
        "--emit-qubo", type=Path, default=None, metavar="PATH",
        help="write the compiled model as JSON to this file",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nashqubo",
        description="compile bimatrix games to binary models and hunt equilibria",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="compile, sample, and certify")
    _add_game_argument(solve)
    _add_compile_arguments(solve)
    solve.add_argument(
        "--sampler",
        choices=("auto", "exhaustive", "sa", "external"),
        default="auto",
        help="auto enumerates small models and anneals the rest",
    )
    solve.add_argument("--reads", type=int, default=1000)
    solve.add_argument("--seed", type=int, default=1234)
    solve.add_argument(
        "--external-cmd", default=None, metavar="CMD",
        help="command line of the external sampler (required with --sampler external)",
    )
    solve.add_argument(
        "--out", type=Path, default=None, metavar="DIR",
        help="directory for report.json, report.csv, and manifest.json",
    )

    oracle = sub.add_parser("oracle", help="list pure equilibria from the payoffs")
    _add_game_argument(oracle)

    compile_cmd = sub.add_parser("compile", help="export the model without sampling")
    _add_game_argument(compile_cmd)
    _add_compile_arguments(compile_cmd)

    return parser


def _compile_from_args(args) -> CompiledGame:
    game = resolve_game(args.game)
    return compile_game(
        game,
        slack_mode=args.slack_mode,
        theta1=args.theta1,
        theta2=args.theta2,
        lam=args.lam,
        phi=args.phi,
        bits_alpha=args.bits_alpha,
        bits_beta=args.bits_beta,
    )


def _config_payload(args, resolved_sampler: str | None, capacity: int) -> dict:
    payload = {
        "game": args.game,
        "slack_mode": args.slack_mode,
        "theta1": str(args.theta1),
        "theta2": str(args.theta2),
        "lambda": str(args.lam),
        "phi": str(args.phi),
        "bits_alpha": args.bits_alpha,
        "bits_beta": args.bits_beta,
        "capacity": capacity,
    }
    if resolved_sampler is not None:
        payload["sampler"] = args.sampler
        payload["resolved_sampler"] = resolved_sampler
        payload["reads"] = args.reads
        payload["seed"] = args.seed
    return payload


def _model_payload_summary(bundle: CompiledGame) -> dict:
    return {
        "n_vars": bundle.model.n_vars,
        "scale": {
            "objective": bundle.scale.objective,
            "p1_rows": list(bundle.scale.p1_rows),
            "p2_rows": list(bundle.scale.p2_rows),
        },
        "encodings": {
            name: {"lower": enc.lower, "bits": enc.bits}
            for name, enc in sorted(bundle.encodings.items())
        },
    }


def _run_sampler(args, bundle: CompiledGame, capacity: int) -> tuple[str, SampleSet]:
    name = args.sampler
    if name == "auto":
        name = "exhaustive" if bundle.model.n_vars <= capacity else "sa"
    if name == "exhaustive":
        return name, solve_exhaustive(bundle.model, capacity=capacity)
    if name == "sa":
        return name, sample_sa(bundle.model, reads=args.reads, seed=args.seed)
    if args.external_cmd is None:
        raise ParameterError("--sampler external requires --external-cmd")
    cmd = shlex.split(args.external_cmd)
    return name, sample_external(bundle.model, cmd=cmd, reads=args.reads)


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _emit_qubo(args, bundle: CompiledGame) -> None:
    if args.emit_qubo is not None:
        _write_text(
            args.emit_qubo,
            json.dumps(model_to_payload(bundle.model), indent=2, sort_keys=True) + "\n",
        )


def _cmd_solve(args) -> int:
    started = time.perf_counter()
    capacity = _capacity_limit()
    bundle = _compile_from_args(args)
    sampler_name, result = _run_sampler(args, bundle, capacity)
    report = histogram(bundle.game, result, bundle.program)

    certificates = []
    for record in result.ground_records():
        decoded = decode(bundle.model, record.assignment, bundle.program)
        if decoded.feasible:
            certificates.append(
                certify(bundle.game, decoded, objective_scale=bundle.objective_scale)
            )
    certificates.sort(key=lambda c: (c.profile, c.alpha, c.beta))
    equilibria = sorted({c.profile for c in certificates if c.is_nash})

    _emit_qubo(args, bundle)
    config = _config_payload(args, sampler_name, capacity)
    if args.out is not None:
        report_payload = {
            "game": bundle.game.to_payload(),
            "config": config,
            "model": _model_payload_summary(bundle),
            "result": {
                "min_energy": str(result.min_energy),
                "distinct_states": len(result.records),
                "total_occurrences": result.total_occurrences,
                "certificates": [c.to_payload() for c in certificates],
                "equilibria": [[p.row, p.col] for p in equilibria],
                "histogram": report.to_payload(),
            },
        }
        _write_text(
            args.out / "report.json",
            json.dumps(report_payload, indent=2, sort_keys=True) + "\n",
        )
        _write_text(args.out / "report.csv", report.to_csv())
        manifest = {
            "config": config,
            "n_vars": bundle.model.n_vars,
            "scale": _model_payload_summary(bundle)["scale"],
            "sampler_duration_s": result.info.duration,
            "wall_clock_s": time.perf_counter() - started,
        }
        _write_text(
            args.out / "manifest.json",
            json.dumps(manifest, indent=2, sort_keys=True) + "\n",
        )

    game = bundle.game
    print(
        f"{game.name}: {game.n_rows}x{game.n_cols} game, "
        f"{bundle.model.n_vars} binary variables, sampler {sampler_name}"
    )
    print(
        f"minimum energy {result.min_energy} across "
        f"{len(result.records)} distinct states"
    )
    if equilibria:
        print("certified equilibria: " + ", ".join(str(p) for p in equilibria))
    else:
        print("no certified equilibrium in the minimum energy states")
    if args.out is not None:
        print(f"reports written to {args.out}")
    return 0 if equilibria else 2


def _cmd_oracle(args) -> int:
    game = resolve_game(args.game)
    equilibria = pure_nash_enumerate(game)
    print(
        json.dumps(
            {
                "game": game.name,
                "equilibria": [[p.row, p.col] for p in equilibria],
                "count": len(equilibria),
            },
            sort_keys=True,
        )
    )
    return 0 if equilibria else 2


def _cmd_compile(args) -> int:
    bundle = _compile_from_args(args)
    _emit_qubo(args, bundle)
    summary = {
        "game": bundle.game.name,
        "config": _config_payload(args, None, _capacity_limit()),
        "model": _model_payload_summary(bundle),
    }
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"solve": _cmd_solve, "oracle": _cmd_oracle, "compile": _cmd_compile}
    try:
        return handlers[args.command](args)
    except (NashQuboError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
