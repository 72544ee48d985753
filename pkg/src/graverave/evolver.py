"""Elitist, mutation-only genetic algorithm over generator parameters.

Each generation every genome is played once by the persona and scored with
the metric. The top ``elite_fraction`` survive unchanged; the rest of the
next population are round-robin copies of the elites in which every gene is
re-drawn from its range with probability ``mutation_rate``. In seed-only
mode only ``random_seed`` may change (at ``seed_only_mutation_rate``).
"""

from __future__ import annotations

import math
import os
import statistics
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

from .levelgen import PARAM_SPECS, GenerationError, GeneratorParams, generate, random_params
from .metrics import WORST_FITNESS, EpisodeSummary, MetricId, fitness, play_episode
from .personas import PersonaId
from .rng import SplitMix64

WORKERS_ENV = "GRAVERAVE_WORKERS"


@dataclass(frozen=True)
class EvolutionConfig:
    persona: PersonaId
    metric: MetricId
    population_size: int = 100
    generations: int = 30
    elite_fraction: float = 0.30
    mutation_rate: float = 0.05
    seed_only: bool = False
    seed_only_mutation_rate: float = 0.20
    master_rng_seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "persona", PersonaId(self.persona))
        object.__setattr__(self, "metric", MetricId(self.metric))
        if self.population_size < 1 or self.generations < 1:
            raise ValueError("population_size and generations must be >= 1")
        if not 0 < self.elite_fraction < 1:
            raise ValueError("elite_fraction must lie in (0, 1)")
        for rate in (self.mutation_rate, self.seed_only_mutation_rate):
            if not 0 <= rate <= 1:
                raise ValueError("mutation rates must lie in [0, 1]")

    @property
    def n_elites(self) -> int:
        return max(1, math.floor(self.elite_fraction * self.population_size))

    def to_dict(self) -> dict[str, Any]:
        return {
            "persona": self.persona.value,
            "metric": self.metric.value,
            "population_size": self.population_size,
            "generations": self.generations,
            "elite_fraction": self.elite_fraction,
            "mutation_rate": self.mutation_rate,
            "seed_only": self.seed_only,
            "seed_only_mutation_rate": self.seed_only_mutation_rate,
            "master_rng_seed": self.master_rng_seed,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> EvolutionConfig:
        return cls(**data)


@dataclass(frozen=True)
class Evaluation:
    params: GeneratorParams
    fitness: float
    summary: EpisodeSummary | None


@dataclass
class GenerationStats:
    generation: int
    mean_fitness: float
    std_fitness: float
    min_fitness: float
    max_fitness: float
    mean_reward: float
    std_reward: float
    mean_base_hp: float
    elite_mean_reward: float
    elite_mean_base_hp: float
    n_failed: int
    elites: list[GeneratorParams] = field(default_factory=list)

    CSV_FIELDS = ("generation", "mean_fitness", "std_fitness", "min_fitness", "max_fitness",
                  "mean_reward", "std_reward", "mean_base_hp", "elite_mean_reward",
                  "elite_mean_base_hp", "n_failed")

    def to_row(self) -> dict[str, Any]:
        return {k: getattr(self, k) for k in self.CSV_FIELDS}


@dataclass
class EvolutionResult:
    config: EvolutionConfig
    final_population: list[GeneratorParams]
    stats: list[GenerationStats]
    last_evaluations: list[Evaluation]


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def init_population(cfg: EvolutionConfig, rng: SplitMix64) -> list[GeneratorParams]:
    return [random_params(rng) for _ in range(cfg.population_size)]


def mutate(params: GeneratorParams, rng: SplitMix64, rate: float, seed_only: bool = False) -> GeneratorParams:
    """Re-draw each mutable gene uniformly from its range with probability ``rate``."""
    changes = {}
    for spec in PARAM_SPECS:
        if seed_only and not spec.seed:
            continue
        if rng.random() < rate:
            changes[spec.name] = spec.sample(rng)
    return params.with_values(**changes) if changes else params


def rank(population: Sequence[GeneratorParams], fitnesses: Sequence[float]) -> list[int]:
    """Indices sorted by descending fitness; ties keep population order."""
    return sorted(range(len(population)), key=lambda i: -fitnesses[i])


def select_and_reproduce(population: Sequence[GeneratorParams], fitnesses: Sequence[float],
                         cfg: EvolutionConfig, rng: SplitMix64) -> list[GeneratorParams]:
    if not population:
        raise ValueError("cannot reproduce an empty population")
    if len(population) != len(fitnesses):
        raise ValueError("every genome needs a fitness")
    n = cfg.population_size
    elites = [population[i] for i in rank(population, fitnesses)[:cfg.n_elites]]
    rate = cfg.seed_only_mutation_rate if cfg.seed_only else cfg.mutation_rate
    offspring = [mutate(elites[k % len(elites)], rng, rate, cfg.seed_only)
                 for k in range(n - len(elites))]
    return elites + offspring


def _play(args: tuple[GeneratorParams, PersonaId]) -> EpisodeSummary | None:
    params, persona = args
    try:
        level = generate(params)
    except GenerationError:
        return None
    return play_episode(level, persona)


def play_all(genomes: Sequence[GeneratorParams], persona: PersonaId,
             workers: int | None = None) -> list[EpisodeSummary | None]:
    """Play every genome once; results come back in input order."""
    workers = worker_count() if workers is None else workers
    jobs = [(g, persona) for g in genomes]
    if workers <= 1 or len(jobs) < 2:
        return [_play(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_play, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def evaluate_population(genomes: Sequence[GeneratorParams], persona: PersonaId, metric: MetricId,
                        cache: dict[GeneratorParams, EpisodeSummary | None] | None = None,
                        workers: int | None = None) -> list[Evaluation]:
    cache = {} if cache is None else cache
    todo = list(dict.fromkeys(g for g in genomes if g not in cache))
    for g, s in zip(todo, play_all(todo, persona, workers)):
        cache[g] = s
    out = []
    for g in genomes:
        s = cache[g]
        out.append(Evaluation(g, WORST_FITNESS if s is None else fitness(metric, s), s))
    return out


def _mean(xs: list[float]) -> float:
    return statistics.fmean(xs) if xs else math.nan


def _pstdev(xs: list[float]) -> float:
    return statistics.pstdev(xs) if xs else math.nan


def generation_stats(generation: int, evals: list[Evaluation], n_elites: int) -> GenerationStats:
    ok = [e for e in evals if e.summary is not None]
    fits = [e.fitness for e in ok]
    rewards = [float(e.summary.reward) for e in ok]
    order = rank([e.params for e in evals], [e.fitness for e in evals])[:n_elites]
    elites = [evals[i] for i in order]
    elite_ok = [e for e in elites if e.summary is not None]
    return GenerationStats(
        generation=generation,
        mean_fitness=_mean(fits),
        std_fitness=_pstdev(fits),
        min_fitness=min(fits) if fits else math.nan,
        max_fitness=max(fits) if fits else math.nan,
        mean_reward=_mean(rewards),
        std_reward=_pstdev(rewards),
        mean_base_hp=_mean([float(e.summary.base_hp) for e in ok]),
        elite_mean_reward=_mean([float(e.summary.reward) for e in elite_ok]),
        elite_mean_base_hp=_mean([float(e.summary.base_hp) for e in elite_ok]),
        n_failed=len(evals) - len(ok),
        elites=[e.params for e in elites],
    )


def run_evolution(cfg: EvolutionConfig, workers: int | None = None,
                  on_generation: Callable[[GenerationStats], None] | None = None) -> EvolutionResult:
    rng = SplitMix64(cfg.master_rng_seed)
    population = init_population(cfg, rng)
    cache: dict[GeneratorParams, EpisodeSummary | None] = {}
    stats = []
    evals: list[Evaluation] = []
    for gen in range(cfg.generations):
        evals = evaluate_population(population, cfg.persona, cfg.metric, cache, workers)
        s = generation_stats(gen, evals, cfg.n_elites)
        stats.append(s)
        if on_generation is not None:
            on_generation(s)
        population = select_and_reproduce(population, [e.fitness for e in evals], cfg, rng)
    return EvolutionResult(cfg, population, stats, evals)


STATISTICS: dict[str, Callable[[EpisodeSummary], float]] = {
    "reward": lambda s: float(s.reward),
    "base_hp": lambda s: float(s.base_hp),
}


def specificity_matrix(populations: dict[PersonaId, list[list[GeneratorParams]]],
                       statistics_: Sequence[str] = ("reward",),
                       players: Sequence[PersonaId] | None = None,
                       workers: int | None = None) -> dict[str, list[list[float]]]:
    """Cell ``[i][j]``: mean statistic when persona ``i`` plays the final
    populations evolved for persona ``j`` (averaged over runs and levels).

    ``populations[j]`` holds one final population per run.
    """
    columns = list(populations)
    players = list(players) if players is not None else columns
    counts = {len(runs) for runs in populations.values()}
    if len(counts) != 1:
        raise ValueError(f"mismatched run counts across personas: {sorted(counts)}")
    for name in statistics_:
        if name not in STATISTICS:
            raise ValueError(f"unknown statistic {name!r}")
    out = {name: [[math.nan] * len(columns) for _ in players] for name in statistics_}
    for j, col in enumerate(columns):
        genomes = [g for run in populations[col] for g in run]
        for i, row in enumerate(players):
            summaries = [s for s in play_all(genomes, row, workers) if s is not None]
            for name in statistics_:
                out[name][i][j] = _mean([STATISTICS[name](s) for s in summaries])
    return out

