"""Experience metrics over finished episodes.

With ``E`` enemies left and base health ``B`` at the end of an episode:

* hardcore:   ``-((5 - E) - (10 - B))``
* easy:       ``(5 - E) - (10 - B)``
* close call: ``10 - B`` if ``B >= 1`` else ``-1``
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import asdict, dataclass
from enum import Enum

from .levelgen import GenerationError, GeneratorParams, generate
from .personas import PersonaId, act
from .world import BASE_MAX_HP, N_ENEMIES, Level, Outcome, observe, reset, step

WORST_FITNESS = float("-inf")


class MetricId(str, Enum):
    HARDCORE = "hardcore"
    EASY = "easy"
    CLOSE_CALL = "close-call"

    @classmethod
    def parse(cls, token: str) -> MetricId:
        try:
            return cls(token.lower().replace("_", "-"))
        except ValueError:
            raise ValueError(f"unknown metric {token!r}; expected hardcore, easy or close-call") from None


@dataclass(frozen=True)
class EpisodeSummary:
    enemies_remaining: int
    base_hp: int
    reward: int
    steps: int
    outcome: Outcome

    @property
    def kills(self) -> int:
        return N_ENEMIES - self.enemies_remaining

    def to_row(self) -> dict:
        row = asdict(self)
        row["outcome"] = self.outcome.value
        return row


def fitness_hardcore(s: EpisodeSummary) -> float:
    return -((N_ENEMIES - s.enemies_remaining) - (BASE_MAX_HP - s.base_hp))


def fitness_easy(s: EpisodeSummary) -> float:
    return (N_ENEMIES - s.enemies_remaining) - (BASE_MAX_HP - s.base_hp)


def fitness_close_call(s: EpisodeSummary) -> float:
    if s.base_hp >= 1:
        return BASE_MAX_HP - s.base_hp
    return -1


FITNESS: dict[MetricId, Callable[[EpisodeSummary], float]] = {
    MetricId.HARDCORE: fitness_hardcore,
    MetricId.EASY: fitness_easy,
    MetricId.CLOSE_CALL: fitness_close_call,
}


def fitness(metric: MetricId | str, s: EpisodeSummary) -> float:
    return FITNESS[MetricId(metric)](s)


def play_episode(level: Level, persona: PersonaId | str,
                 on_step: Callable | None = None) -> EpisodeSummary:
    """Play ``level`` to the end with ``persona``.

    ``on_step(state, action, reward)`` is called after every step.
    """
    persona = PersonaId(persona)
    state = reset(level)
    while state.outcome == Outcome.RUNNING:
        action = act(persona, observe(state))
        _, reward = step(state, action)
        if on_step is not None:
            on_step(state, action, reward)
    return EpisodeSummary(state.enemies_remaining, state.base_hp, state.cumulative_reward,
                          state.step_count, state.outcome)


def evaluate(level: Level, persona: PersonaId | str,
             metric: MetricId | str) -> tuple[float, EpisodeSummary]:
    summary = play_episode(level, persona)
    return fitness(metric, summary), summary


def evaluate_params(params: GeneratorParams, persona: PersonaId | str,
                    metric: MetricId | str) -> tuple[float, EpisodeSummary | None]:
    """Generate and play; a genome whose level cannot be built gets ``WORST_FITNESS``."""
    try:
        level = generate(params)
    except GenerationError:
        return WORST_FITNESS, None
    return evaluate(level, persona, metric)
