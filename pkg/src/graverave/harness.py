"""Experiment orchestration: baselines, evolution campaigns, specificity
matrices, archive verification and replays.

Campaign archive layout::

    OUT/config.json
    OUT/<persona>/aggregate.csv           mean and std across runs per generation
    OUT/<persona>/run_<k>/run.json        config snapshot, derived seed, status
    OUT/<persona>/run_<k>/generations.csv one row per generation
    OUT/<persona>/run_<k>/elites.json     last evaluated generation's elites
    OUT/<persona>/run_<k>/final_population.json

Every CSV starts with a ``# graverave <kind> v1`` comment line.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import statistics
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .evolver import EvolutionConfig, GenerationStats, run_evolution, specificity_matrix
from .levelgen import GenerationError, GeneratorParams, generate, random_params
from .metrics import EpisodeSummary, MetricId, fitness, play_episode
from .personas import PERSONAS, PersonaId
from .rng import SplitMix64
from .world import Level, render, reset

log = logging.getLogger(__name__)

CSV_VERSION = "v1"
ARCHIVE_SCHEMA = "graverave-campaign/1"
PRESETS = {
    "desk": {"population_size": 30, "generations": 15, "runs": 5},
    "paper": {"population_size": 100, "generations": 30, "runs": 15},
}
AGGREGATE_FIELDS = ("generation", "runs", "mean_reward_mean", "mean_reward_std",
                    "mean_fitness_mean", "mean_fitness_std", "max_fitness_mean",
                    "elite_mean_base_hp_mean")


def derive_seed(master_seed: int, persona: PersonaId | str, run_index: int) -> int:
    """First 8 bytes (big-endian) of SHA-256 over ``"{master}:{persona}:{run}"``."""
    token = f"{master_seed}:{PersonaId(persona).value}:{run_index}".encode()
    return int.from_bytes(hashlib.sha256(token).digest()[:8], "big")


def write_csv(path: Path, kind: str, fieldnames: Sequence[str], rows: Iterable[dict]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# graverave {kind} {CSV_VERSION}\n")
        w = csv.DictWriter(fh, fieldnames=list(fieldnames))
        w.writeheader()
        for row in rows:
            w.writerow({k: _fmt(row[k]) for k in fieldnames})


def _fmt(v: Any) -> Any:
    return repr(v) if isinstance(v, float) else v


def read_csv(path: Path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


# -- baseline -----------------------------------------------------------------

def baseline(personas: Sequence[PersonaId | str] = PERSONAS, level_count: int = 1000,
             rng_seed: int = 0, metric: MetricId | str = MetricId.EASY,
             rows: list[dict] | None = None) -> dict[PersonaId, float]:
    """Mean cumulative reward per persona over ``level_count`` random levels.

    The levels are generated once and shared by all personas. Genomes whose
    level cannot be built are skipped. Per-episode rows are appended to
    ``rows`` when given.
    """
    if level_count < 1:
        raise ValueError("level_count must be >= 1")
    rng = SplitMix64(rng_seed)
    levels: list[tuple[int, Level]] = []
    for k in range(level_count):
        params = random_params(rng)
        try:
            levels.append((k, generate(params)))
        except GenerationError:
            log.warning("level %d skipped: generation failed for %s", k, params)
    out = {}
    for p in map(PersonaId, personas):
        rewards = []
        for k, level in levels:
            s = play_episode(level, p)
            rewards.append(s.reward)
            if rows is not None:
                rows.append(summary_row(k, p, s, fitness(metric, s)))
        out[p] = statistics.fmean(rewards) if rewards else math.nan
    return out


SUMMARY_FIELDS = ("level_id", "persona", "E", "B", "reward", "steps", "outcome", "fitness")


def summary_row(level_id: Any, persona: PersonaId, s: EpisodeSummary, fit: float) -> dict:
    return {"level_id": level_id, "persona": persona.value, "E": s.enemies_remaining,
            "B": s.base_hp, "reward": s.reward, "steps": s.steps,
            "outcome": s.outcome.value, "fitness": fit}


# -- campaigns ----------------------------------------------------------------

@dataclass
class ExperimentSpec:
    personas: list[PersonaId]
    metric: MetricId
    out_dir: Path
    population_size: int = 30
    generations: int = 15
    runs: int = 5
    master_seed: int = 0
    seed_only: bool = False

    def __post_init__(self) -> None:
        self.personas = [PersonaId(p) for p in self.personas]
        self.metric = MetricId(self.metric)
        self.out_dir = Path(self.out_dir)
        if self.runs < 1:
            raise ValueError("runs must be >= 1")

    @classmethod
    def from_preset(cls, preset: str, **kwargs: Any) -> ExperimentSpec:
        merged = dict(PRESETS[preset])
        merged.update({k: v for k, v in kwargs.items() if v is not None})
        return cls(**merged)

    def run_config(self, persona: PersonaId, run_index: int) -> EvolutionConfig:
        return EvolutionConfig(
            persona=persona, metric=self.metric, population_size=self.population_size,
            generations=self.generations, seed_only=self.seed_only,
            master_rng_seed=derive_seed(self.master_seed, persona, run_index),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": ARCHIVE_SCHEMA,
            "personas": [p.value for p in self.personas],
            "metric": self.metric.value,
            "population_size": self.population_size,
            "generations": self.generations,
            "runs": self.runs,
            "master_seed": self.master_seed,
            "seed_only": self.seed_only,
        }


def _run_dir(root: Path, persona: PersonaId, k: int) -> Path:
    return root / persona.value / f"run_{k:02d}"


def _write_run(path: Path, cfg: EvolutionConfig, run_index: int, result) -> None:
    path.mkdir(parents=True, exist_ok=True)
    write_csv(path / "generations.csv", "generations", GenerationStats.CSV_FIELDS,
              (s.to_row() for s in result.stats))
    n = cfg.n_elites
    order = sorted(range(len(result.last_evaluations)), key=lambda i: -result.last_evaluations[i].fitness)[:n]
    elites = []
    for i in order:
        e = result.last_evaluations[i]
        elites.append({"params": e.params.to_dict(), "fitness": e.fitness,
                       "summary": e.summary.to_row() if e.summary else None})
    (path / "elites.json").write_text(json.dumps(elites, indent=1))
    (path / "final_population.json").write_text(
        json.dumps([g.to_dict() for g in result.final_population], indent=1))
    (path / "run.json").write_text(json.dumps(
        {"run_index": run_index, "config": cfg.to_dict(), "status": "complete"}, indent=1))


def aggregate_rows(per_run: list[list[dict[str, str]]]) -> list[dict[str, Any]]:
    """Mean and population std across runs, generation by generation."""
    if not per_run:
        return []
    n_gen = min(len(r) for r in per_run)
    rows = []
    for g in range(n_gen):
        col = lambda k: [float(run[g][k]) for run in per_run]  # noqa: E731
        rewards, fits = col("mean_reward"), col("mean_fitness")
        rows.append({
            "generation": g,
            "runs": len(per_run),
            "mean_reward_mean": statistics.fmean(rewards),
            "mean_reward_std": statistics.pstdev(rewards),
            "mean_fitness_mean": statistics.fmean(fits),
            "mean_fitness_std": statistics.pstdev(fits),
            "max_fitness_mean": statistics.fmean(col("max_fitness")),
            "elite_mean_base_hp_mean": statistics.fmean(col("elite_mean_base_hp")),
        })
    return rows


def campaign(spec: ExperimentSpec, workers: int | None = None,
             progress: Callable[[str], None] | None = None) -> Path:
    root = spec.out_dir
    root.mkdir(parents=True, exist_ok=True)
    (root / "config.json").write_text(json.dumps(spec.to_dict(), indent=1))
    for persona in spec.personas:
        per_run = []
        for k in range(spec.runs):
            cfg = spec.run_config(persona, k)
            path = _run_dir(root, persona, k)
            try:
                result = run_evolution(cfg, workers=workers)
            except Exception as exc:  # noqa: BLE001 - a failed run must not sink the campaign
                log.exception("run %s/%d failed", persona.value, k)
                path.mkdir(parents=True, exist_ok=True)
                (path / "run.json").write_text(json.dumps(
                    {"run_index": k, "config": cfg.to_dict(), "status": "failed", "error": str(exc)}))
                continue
            _write_run(path, cfg, k, result)
            per_run.append(read_csv(path / "generations.csv"))
            if progress is not None:
                last = result.stats[-1]
                progress(f"{persona.value} run {k}: gen0 reward {result.stats[0].mean_reward:.2f}"
                         f" -> final {last.mean_reward:.2f}")
        write_csv(root / persona.value / "aggregate.csv", "aggregate", AGGREGATE_FIELDS,
                  aggregate_rows(per_run))
    return root


# -- archive access -----------------------------------------------------------

@dataclass
class RunRecord:
    persona: PersonaId
    run_index: int
    status: str
    config: dict[str, Any]
    path: Path

    def generations(self) -> list[dict[str, str]]:
        return read_csv(self.path / "generations.csv")

    def final_population(self) -> list[GeneratorParams]:
        data = json.loads((self.path / "final_population.json").read_text())
        return [GeneratorParams.from_dict(d) for d in data]

    def elites(self) -> list[dict[str, Any]]:
        return json.loads((self.path / "elites.json").read_text())


@dataclass
class Archive:
    root: Path
    config: dict[str, Any]
    runs: dict[PersonaId, list[RunRecord]] = field(default_factory=dict)

    def complete_runs(self, persona: PersonaId) -> list[RunRecord]:
        return [r for r in self.runs.get(persona, []) if r.status == "complete"]


def load_archive(root: Path | str) -> Archive:
    root = Path(root)
    cfg_path = root / "config.json"
    if not cfg_path.exists():
        raise FileNotFoundError(f"{root} has no config.json; not a campaign archive")
    config = json.loads(cfg_path.read_text())
    archive = Archive(root, config)
    for token in config["personas"]:
        persona = PersonaId(token)
        records = []
        for run_json in sorted((root / token).glob("run_*/run.json")):
            meta = json.loads(run_json.read_text())
            records.append(RunRecord(persona, meta["run_index"], meta["status"],
                                     meta["config"], run_json.parent))
        archive.runs[persona] = records
    return archive


def verify(root: Path | str) -> list[str]:
    """Problems found in an archive; empty means it checks out.

    Checks row counts, recomputes every aggregate from the per-run files and
    confirms the best fitness never drops from one generation to the next.
    """
    archive = load_archive(root)
    cfg = archive.config
    problems = []
    for persona, records in archive.runs.items():
        complete = archive.complete_runs(persona)
        if len(records) != cfg["runs"]:
            problems.append(f"{persona.value}: {len(records)} run directories, expected {cfg['runs']}")
        per_run = []
        for rec in complete:
            rows = rec.generations()
            if len(rows) != cfg["generations"]:
                problems.append(f"{rec.path}: {len(rows)} generation rows, expected {cfg['generations']}")
            best = [float(r["max_fitness"]) for r in rows]
            for g in range(1, len(best)):
                if best[g] < best[g - 1]:
                    problems.append(f"{rec.path}: best fitness fell at generation {g} "
                                    f"({best[g - 1]} -> {best[g]})")
            per_run.append(rows)
        agg_path = archive.root / persona.value / "aggregate.csv"
        if not agg_path.exists():
            problems.append(f"{agg_path} missing")
            continue
        stored = read_csv(agg_path)
        expected = aggregate_rows(per_run)
        if len(stored) != len(expected):
            problems.append(f"{agg_path}: {len(stored)} rows, expected {len(expected)}")
            continue
        for got, want in zip(stored, expected):
            for k in AGGREGATE_FIELDS:
                if not math.isclose(float(got[k]), float(want[k]), rel_tol=1e-9, abs_tol=1e-12):
                    problems.append(f"{agg_path}: generation {want['generation']} {k} "
                                    f"is {got[k]}, recomputed {want[k]}")
    return problems


# -- specificity --------------------------------------------------------------

CONSISTENT_KEYS = ("metric", "population_size", "generations", "seed_only")


def collect_populations(roots: Sequence[Path | str]) -> tuple[dict[PersonaId, list[list[GeneratorParams]]], dict]:
    """Final populations per persona gathered from one or more archives,
    which must agree on metric, population size, generations and mode."""
    populations: dict[PersonaId, list[list[GeneratorParams]]] = {}
    reference = None
    for root in roots:
        archive = load_archive(root)
        key = {k: archive.config[k] for k in CONSISTENT_KEYS}
        if reference is None:
            reference = key
        elif key != reference:
            raise ValueError(f"inconsistent archive {root}: {key} != {reference}")
        for persona in archive.runs:
            if persona in populations:
                raise ValueError(f"persona {persona.value} appears in more than one archive")
            populations[persona] = [r.final_population() for r in archive.complete_runs(persona)]
    ordered = {p: populations[p] for p in PERSONAS if p in populations}
    return ordered, reference or {}


def specificity(roots: Sequence[Path | str], out_dir: Path | str | None = None,
                statistics_: Sequence[str] = ("reward", "base_hp"),
                workers: int | None = None) -> dict[str, list[list[float]]]:
    populations, _ = collect_populations(roots)
    matrices = specificity_matrix(populations, statistics_, players=PERSONAS, workers=workers)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        cols = [f"gen_for_{p.value}" for p in populations]
        for name, matrix in matrices.items():
            rows = [{"persona": PERSONAS[i].value, **dict(zip(cols, row))} for i, row in enumerate(matrix)]
            write_csv(out_dir / f"specificity_{name}.csv", f"specificity_{name}", ["persona", *cols], rows)
    return matrices


def format_matrix(matrix: list[list[float]], columns: Sequence[PersonaId]) -> str:
    head = "      " + "".join(f"{'gen ' + c.value:>10}" for c in columns)
    lines = [head]
    for p, row in zip(PERSONAS, matrix):
        lines.append(f"{p.value:>5} " + "".join(f"{v:>10.2f}" for v in row))
    return "\n".join(lines)


# -- replay -------------------------------------------------------------------

def replay(level: Level, persona: PersonaId | str, grid: bool = False) -> tuple[str, EpisodeSummary]:
    """Deterministic step-by-step trace: one ``step action reward base_hp`` line
    per step, optionally followed by the ASCII board."""
    persona = PersonaId(persona)
    lines = [f"# replay persona={persona.value}"]
    if grid:
        lines.append(render(reset(level)))

    def on_step(state, action, reward):
        lines.append(f"{state.step_count} {action.name} {reward} {state.base_hp}")
        if grid:
            lines.append(render(state))

    summary = play_episode(level, persona, on_step)
    lines.append(f"# outcome={summary.outcome.value} E={summary.enemies_remaining} "
                 f"B={summary.base_hp} reward={summary.reward} steps={summary.steps}")
    return "\n".join(lines) + "\n", summary


def load_level(path: Path | str, elite: int = 0) -> Level:
    """Level from a level JSON, a parameter JSON, or an ``elites.json`` list."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    if isinstance(data, list):
        if not 0 <= elite < len(data):
            raise ValueError(f"{path}: elite index {elite} out of range (0..{len(data) - 1})")
        data = data[elite]
        data = data.get("params", data)
    if "grid" in data:
        return Level.from_dict(data)
    return generate(GeneratorParams.from_dict(data))
