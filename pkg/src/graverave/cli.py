"""Command-line entry point: ``graverave <command> ...`` (or ``python -m graverave``)."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import harness
from .evolver import WORKERS_ENV
from .levelgen import SPEC_BY_NAME, GeneratorParams, GenerationError, generate
from .metrics import MetricId
from .personas import PERSONAS, PersonaId


def _personas(token: str) -> list[PersonaId]:
    if token.lower() == "all":
        return list(PERSONAS)
    return [PersonaId.parse(t) for t in token.split(",") if t]


def _metric(token: str) -> MetricId:
    return MetricId.parse(token)


def _param(token: str) -> tuple[str, float | int]:
    name, sep, value = token.partition("=")
    if not sep or name not in SPEC_BY_NAME:
        raise argparse.ArgumentTypeError(
            f"expected k=v with k in {', '.join(SPEC_BY_NAME)}; got {token!r}")
    spec = SPEC_BY_NAME[name]
    try:
        return name, int(value) if spec.integer else float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad value for {name}: {value!r}") from None


def cmd_baseline(args: argparse.Namespace) -> int:
    rows: list[dict] | None = [] if args.csv else None
    means = harness.baseline(args.personas, args.levels, args.seed, args.metric, rows)
    print(f"{'persona':<8} mean_reward   ({args.levels} levels, seed {args.seed})")
    for p, m in means.items():
        print(f"{p.value:<8} {m:>11.3f}")
    if args.csv:
        harness.write_csv(Path(args.csv), "summaries", harness.SUMMARY_FIELDS, rows)
    if args.json:
        Path(args.json).write_text(json.dumps({p.value: m for p, m in means.items()}, indent=1))
    return 0


def cmd_evolve(args: argparse.Namespace) -> int:
    spec = harness.ExperimentSpec.from_preset(
        args.preset, personas=args.persona, metric=args.metric, out_dir=args.out,
        population_size=args.population, generations=args.generations, runs=args.runs,
        master_seed=args.seed, seed_only=args.seed_only,
    )
    harness.campaign(spec, workers=args.workers, progress=None if args.quiet else print)
    problems = harness.verify(spec.out_dir)
    for msg in problems:
        print(f"verify: {msg}", file=sys.stderr)
    print(f"archive written to {spec.out_dir}")
    return 1 if problems else 0


def cmd_specificity(args: argparse.Namespace) -> int:
    populations, _ = harness.collect_populations(args.inputs)
    out = args.out if args.out is not None else args.inputs[0]
    matrices = harness.specificity(args.inputs, out, workers=args.workers)
    for name, matrix in matrices.items():
        print(f"{name} (rows: player, columns: levels evolved for)")
        print(harness.format_matrix(matrix, list(populations)))
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    level = harness.load_level(args.level, args.elite)
    trace, _ = harness.replay(level, args.persona, grid=args.grid)
    sys.stdout.write(trace)
    return 0


def cmd_gen(args: argparse.Namespace) -> int:
    params = GeneratorParams.default(args.seed).with_values(**dict(args.param))
    try:
        level = generate(params)
    except GenerationError as exc:
        print(f"generation failed: {exc}", file=sys.stderr)
        return 1
    Path(args.out).write_text(level.to_json())
    print("\n".join(level.rows()))
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    problems = harness.verify(args.inputs)
    for msg in problems:
        print(msg)
    print("ok" if not problems else f"{len(problems)} problem(s)")
    return 1 if problems else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graverave", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("baseline", help="mean reward of each persona on random levels")
    p.add_argument("--levels", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--persona", dest="personas", type=_personas, default=list(PERSONAS))
    p.add_argument("--metric", type=_metric, default=MetricId.EASY,
                   help="metric for the fitness column of --csv")
    p.add_argument("--csv", help="write per-episode summaries here")
    p.add_argument("--json", help="write the per-persona means here")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("evolve", help="run an evolution campaign and archive it",
                       epilog=f"worker processes: ${WORKERS_ENV} or --workers (default 1)")
    p.add_argument("--persona", type=_personas, required=True, help="r01..r04, comma list, or all")
    p.add_argument("--metric", type=_metric, required=True)
    p.add_argument("--preset", choices=sorted(harness.PRESETS), default="desk")
    p.add_argument("--population", type=int)
    p.add_argument("--generations", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seed-only", action="store_true", help="evolve only the random seed")
    p.add_argument("--workers", type=int)
    p.add_argument("--quiet", action="store_true")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("specificity", help="cross-play final populations")
    p.add_argument("--in", dest="inputs", type=Path, nargs="+", required=True)
    p.add_argument("--out", type=Path)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_specificity)

    p = sub.add_parser("replay", help="step-by-step trace of a persona on a level")
    p.add_argument("--level", type=Path, required=True,
                   help="level JSON, parameter JSON, or elites.json")
    p.add_argument("--persona", type=PersonaId.parse, required=True)
    p.add_argument("--elite", type=int, default=0, help="index into an elites file")
    p.add_argument("--grid", action="store_true", help="draw the board after every step")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("gen", help="generate one level")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--param", type=_param, action="append", default=[], metavar="K=V")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify", help="check a campaign archive")
    p.add_argument("--in", dest="inputs", type=Path, required=True)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
