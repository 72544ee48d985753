"""Turn-based "Grave Rave" simulation.

A 15x15 board with a base, a player and five enemies buried in graves.
Each call to :func:`step` resolves, in this fixed order:

1. in-flight projectiles advance one tile and resolve impacts;
2. the player's action;
3. each enemy by spawn index: emergence (step 20 onward), then base attack,
   flee or rush;
4. the step counter increments;
5. the terminal check.

Reward per step is +1 per enemy killed and -1 per base hit point lost.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import TYPE_CHECKING, Any

import numpy as np

from . import kernels

if TYPE_CHECKING:
    from .levelgen import GeneratorParams

SIZE = 15
N_CELLS = SIZE * SIZE
N_ENEMIES = 5
BASE_MAX_HP = 10
TREE_HITS = 3
EMERGE_STEP = 20
RUSH_STEP = 70
MAX_STEPS = 500

# Tile codes, stored one byte per cell.
EMPTY, ROCK, TREE, GRAVE, BASE = 0, 1, 2, 3, 4

# Extra codes used only in observation snapshots.
PLAYER_CODE, ENEMY_CODE, BURIED_CODE, PROJECTILE_CODE = 5, 6, 7, 8

TILE_CHARS = {EMPTY: ".", ROCK: "R", TREE: "T", GRAVE: "G", BASE: "B"}
CHAR_TILES = {v: k for k, v in TILE_CHARS.items()}
PLAYER_CHAR = "P"

Coord = tuple[int, int]


class Facing(IntEnum):
    N = 0
    E = 1
    S = 2
    W = 3


# Indexed by Facing; also the fixed N, E, S, W tie-break order.
DELTAS: tuple[Coord, ...] = ((-1, 0), (0, 1), (1, 0), (0, -1))


class Action(IntEnum):
    MOVE_N = 0
    MOVE_E = 1
    MOVE_S = 2
    MOVE_W = 3
    ATTACK = 4

    @classmethod
    def move(cls, facing: Facing | int) -> Action:
        return cls(int(facing))


ACTIONS = tuple(Action)


class Status(IntEnum):
    BURIED = 0
    ACTIVE = 1
    DEAD = 2


class Outcome(str, Enum):
    RUNNING = "running"
    WON = "won"
    LOST = "lost"
    STEP_LIMIT = "step_limit"


class InvalidLevelError(ValueError):
    pass


class TerminalStateError(RuntimeError):
    pass


def in_bounds(r: int, c: int) -> bool:
    return 0 <= r < SIZE and 0 <= c < SIZE


def euclidean(a: Coord, b: Coord) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def manhattan(a: Coord, b: Coord) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def direction_to(src: Coord, dst: Coord) -> Facing:
    """Cardinal direction along the larger gap; rows win ties."""
    dr, dc = dst[0] - src[0], dst[1] - src[1]
    if abs(dr) >= abs(dc) and dr != 0:
        return Facing.S if dr > 0 else Facing.N
    return Facing.E if dc > 0 else Facing.W


@dataclass(frozen=True)
class Level:
    """Immutable playable level. ``tiles`` is flat row-major, one code per cell."""

    tiles: bytes
    player_start: Coord
    base_pos: Coord
    graves: tuple[Coord, ...]
    flee_distance: float
    params: GeneratorParams | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        problems = self.problems()
        if problems:
            raise InvalidLevelError("; ".join(problems))

    def problems(self) -> list[str]:
        out = []
        if len(self.tiles) != N_CELLS:
            return [f"grid must have {N_CELLS} cells, got {len(self.tiles)}"]
        if any(t not in TILE_CHARS for t in self.tiles):
            out.append("unknown tile code")
        bases = [i for i, t in enumerate(self.tiles) if t == BASE]
        if len(bases) != 1:
            out.append(f"expected exactly one base, found {len(bases)}")
        elif divmod(bases[0], SIZE) != tuple(self.base_pos):
            out.append("base_pos does not match the base tile")
        if manhattan(self.player_start, self.base_pos) != 1:
            out.append("player_start must be 4-adjacent to base_pos")
        elif not in_bounds(*self.player_start) or self.tile(*self.player_start) != EMPTY:
            out.append("player_start must be an empty in-bounds tile")
        if len(self.graves) != N_ENEMIES or len(set(self.graves)) != N_ENEMIES:
            out.append(f"expected {N_ENEMIES} distinct graves")
        for g in self.graves:
            if not in_bounds(*g) or self.tile(*g) != GRAVE:
                out.append(f"grave {g} is not on a grave tile")
            if g in (self.player_start, self.base_pos):
                out.append(f"grave {g} overlaps player or base")
        n_grave_tiles = sum(1 for t in self.tiles if t == GRAVE)
        if n_grave_tiles != len(self.graves):
            out.append("grave tiles do not match grave list")
        if not 0.0 <= self.flee_distance <= 10.0:
            out.append("flee_distance outside [0, 10]")
        return out

    def tile(self, r: int, c: int) -> int:
        return self.tiles[r * SIZE + c]

    def rows(self) -> list[str]:
        chars = [TILE_CHARS[t] for t in self.tiles]
        pr, pc = self.player_start
        chars[pr * SIZE + pc] = PLAYER_CHAR
        return ["".join(chars[r * SIZE:(r + 1) * SIZE]) for r in range(SIZE)]

    def to_dict(self) -> dict[str, Any]:
        return {
            "grid": self.rows(),
            "graves": [list(g) for g in self.graves],
            "flee_distance": self.flee_distance,
            "params": self.params.to_dict() if self.params is not None else None,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_rows(cls, rows: list[str], flee_distance: float,
                  graves: list[Coord] | None = None, params: GeneratorParams | None = None) -> Level:
        if len(rows) != SIZE or any(len(row) != SIZE for row in rows):
            raise InvalidLevelError(f"grid must be {SIZE} rows of {SIZE} characters")
        tiles = bytearray(N_CELLS)
        player = base = None
        found_graves = []
        for r, row in enumerate(rows):
            for c, ch in enumerate(row):
                if ch == PLAYER_CHAR:
                    if player is not None:
                        raise InvalidLevelError(f"row {r}: second player marker")
                    player = (r, c)
                    continue
                if ch not in CHAR_TILES:
                    raise InvalidLevelError(f"row {r}, column {c}: unknown tile {ch!r}")
                tiles[r * SIZE + c] = CHAR_TILES[ch]
                if ch == "B":
                    base = (r, c)
                elif ch == "G":
                    found_graves.append((r, c))
        if player is None or base is None:
            raise InvalidLevelError("grid needs one 'P' and one 'B'")
        if graves is None:
            graves = found_graves
        elif sorted(map(tuple, graves)) != sorted(found_graves):
            raise InvalidLevelError("'graves' does not match the 'G' tiles in the grid")
        return cls(bytes(tiles), player, base, tuple(tuple(g) for g in graves),
                   float(flee_distance), params)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Level:
        from .levelgen import GeneratorParams

        for key in ("grid", "flee_distance"):
            if key not in data:
                raise InvalidLevelError(f"missing field {key!r}")
        params = data.get("params")
        return cls.from_rows(
            list(data["grid"]),
            data["flee_distance"],
            [tuple(g) for g in data["graves"]] if data.get("graves") is not None else None,
            GeneratorParams.from_dict(params) if params else None,
        )

    @classmethod
    def from_json(cls, text: str) -> Level:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidLevelError(f"line {exc.lineno}: {exc.msg}") from exc
        return cls.from_dict(data)


@dataclass
class EnemyState:
    pos: Coord
    status: Status
    index: int


@dataclass
class Projectile:
    pos: Coord
    facing: Facing


@dataclass
class GameState:
    level: Level
    tiles: bytearray
    hits: bytearray
    player_pos: Coord
    facing: Facing
    base_hp: int
    enemies: list[EnemyState]
    projectiles: list[Projectile]
    step_count: int = 0
    cumulative_reward: int = 0
    outcome: Outcome = Outcome.RUNNING
    _rush: tuple[list[int], bytes] | None = field(default=None, repr=False, compare=False)

    def tile(self, r: int, c: int) -> int:
        return self.tiles[r * SIZE + c]

    def enemy_at(self, pos: Coord) -> EnemyState | None:
        for e in self.enemies:
            if e.status != Status.DEAD and e.pos == pos:
                return e
        return None

    @property
    def enemies_remaining(self) -> int:
        return sum(1 for e in self.enemies if e.status != Status.DEAD)

    @property
    def kills(self) -> int:
        return N_ENEMIES - self.enemies_remaining

    def copy(self) -> GameState:
        return GameState(
            self.level, bytearray(self.tiles), bytearray(self.hits), self.player_pos,
            self.facing, self.base_hp,
            [EnemyState(e.pos, e.status, e.index) for e in self.enemies],
            [Projectile(p.pos, p.facing) for p in self.projectiles],
            self.step_count, self.cumulative_reward, self.outcome,
        )


@dataclass(frozen=True)
class EnemyView:
    pos: Coord
    status: Status
    index: int


@dataclass(frozen=True)
class Observation:
    """Read-only snapshot handed to agents.

    Structured fields serve the rule-based personas; :meth:`grid` gives the
    integer-coded board for generic agents.
    """

    tiles: bytes
    hits: bytes
    player_pos: Coord
    facing: Facing
    base_pos: Coord
    base_hp: int
    enemies: tuple[EnemyView, ...]
    projectiles: tuple[tuple[Coord, Facing], ...]
    step_count: int
    flee_distance: float

    def tile(self, r: int, c: int) -> int:
        return self.tiles[r * SIZE + c]

    def living(self) -> list[EnemyView]:
        return [e for e in self.enemies if e.status != Status.DEAD]

    def grid(self) -> np.ndarray:
        g = np.frombuffer(self.tiles, dtype=np.uint8).reshape(SIZE, SIZE).astype(np.int8)
        for (r, c), _ in self.projectiles:
            g[r, c] = PROJECTILE_CODE
        for e in self.enemies:
            if e.status == Status.ACTIVE:
                g[e.pos] = ENEMY_CODE
            elif e.status == Status.BURIED:
                g[e.pos] = BURIED_CODE
        g[self.player_pos] = PLAYER_CODE
        return g


GRID_CODE_CHARS = {EMPTY: ".", ROCK: "R", TREE: "T", GRAVE: "G", BASE: "B",
                   PLAYER_CODE: "P", BURIED_CODE: "G"}


def grid_to_rows(grid: np.ndarray) -> list[str]:
    """Map an observation grid of a fresh episode to level serialization rows."""
    return ["".join(GRID_CODE_CHARS[int(v)] for v in row) for row in grid]


def reset(level: Level) -> GameState:
    problems = level.problems()
    if problems:
        raise InvalidLevelError("; ".join(problems))
    hits = bytearray(TREE_HITS if t == TREE else 0 for t in level.tiles)
    return GameState(
        level=level,
        tiles=bytearray(level.tiles),
        hits=hits,
        player_pos=level.player_start,
        facing=direction_to(level.player_start, level.base_pos),
        base_hp=BASE_MAX_HP,
        enemies=[EnemyState(g, Status.BURIED, i) for i, g in enumerate(level.graves)],
        projectiles=[],
    )


def observe(state: GameState) -> Observation:
    return Observation(
        tiles=bytes(state.tiles),
        hits=bytes(state.hits),
        player_pos=state.player_pos,
        facing=state.facing,
        base_pos=state.level.base_pos,
        base_hp=state.base_hp,
        enemies=tuple(EnemyView(e.pos, e.status, e.index) for e in state.enemies),
        projectiles=tuple((p.pos, p.facing) for p in state.projectiles),
        step_count=state.step_count,
        flee_distance=state.level.flee_distance,
    )


def is_terminal(state: GameState) -> Outcome:
    if state.base_hp <= 0:
        return Outcome.LOST
    if all(e.status == Status.DEAD for e in state.enemies):
        return Outcome.WON
    if state.step_count >= MAX_STEPS:
        return Outcome.STEP_LIMIT
    return Outcome.RUNNING


def resolve_projectile(state: GameState, pos: Coord, facing: Facing) -> tuple[str, int]:
    """Resolve a projectile entering ``pos``.

    Returns ``(outcome, kills)`` where outcome is one of ``"flying"``,
    ``"kill"``, ``"tree"`` or ``"blocked"``.
    """
    r, c = pos
    if not in_bounds(r, c):
        return "blocked", 0
    enemy = state.enemy_at(pos)
    if enemy is not None:
        if enemy.status == Status.BURIED:
            # Impact on a grave with a buried enemy: the shot is spent.
            return "blocked", 0
        enemy.status = Status.DEAD
        return "kill", 1
    t = state.tiles[r * SIZE + c]
    if t == TREE:
        state.tiles[r * SIZE + c] = EMPTY
        state.hits[r * SIZE + c] = 0
        state._rush = None
        return "tree", 0
    if t == ROCK or t == BASE:
        return "blocked", 0
    return "flying", 0


def _advance_projectiles(state: GameState) -> int:
    kills = 0
    alive = []
    for p in state.projectiles:
        dr, dc = DELTAS[p.facing]
        p.pos = (p.pos[0] + dr, p.pos[1] + dc)
        outcome, k = resolve_projectile(state, p.pos, p.facing)
        kills += k
        if outcome == "flying":
            alive.append(p)
    state.projectiles = alive
    return kills


def _player_blocked(state: GameState, r: int, c: int) -> bool:
    if not in_bounds(r, c):
        return True
    t = state.tiles[r * SIZE + c]
    if t == ROCK or t == TREE or t == BASE:
        return True
    e = state.enemy_at((r, c))
    return e is not None and e.status == Status.ACTIVE


def step_on_grave(state: GameState) -> int:
    """Kill a buried enemy under the player, if any. Returns kills (0 or 1)."""
    e = state.enemy_at(state.player_pos)
    if e is not None and e.status == Status.BURIED:
        e.status = Status.DEAD
        return 1
    return 0


def _apply_player(state: GameState, action: Action) -> int:
    if action == Action.ATTACK:
        dr, dc = DELTAS[state.facing]
        pos = (state.player_pos[0] + dr, state.player_pos[1] + dc)
        outcome, kills = resolve_projectile(state, pos, state.facing)
        if outcome == "flying":
            state.projectiles.append(Projectile(pos, state.facing))
        return kills
    facing = Facing(int(action))
    state.facing = facing
    dr, dc = DELTAS[facing]
    r, c = state.player_pos[0] + dr, state.player_pos[1] + dc
    if _player_blocked(state, r, c):
        return 0
    state.player_pos = (r, c)
    return step_on_grave(state)


def _enemy_can_enter(state: GameState, pos: Coord, me: EnemyState) -> bool:
    r, c = pos
    if not in_bounds(r, c) or pos == state.player_pos:
        return False
    t = state.tiles[r * SIZE + c]
    if t == ROCK or t == BASE or t == TREE:
        return False
    other = state.enemy_at(pos)
    return other is None or other is me


def enemy_move(state: GameState, enemy: EnemyState) -> tuple[str, Coord | None]:
    """Intended action of an active enemy: ``("attack_base", None)``,
    ``("move", dest)``, ``("chop", tree_pos)`` or ``("stay", None)``."""
    pos = enemy.pos
    base = state.level.base_pos
    if manhattan(pos, base) == 1:
        return "attack_base", None
    if state.step_count < RUSH_STEP and euclidean(pos, state.player_pos) < state.level.flee_distance:
        here = euclidean(pos, state.player_pos)
        best, best_d = None, here
        for dr, dc in DELTAS:
            dest = (pos[0] + dr, pos[1] + dc)
            if _enemy_can_enter(state, dest, enemy):
                d = euclidean(dest, state.player_pos)
                if d > best_d:
                    best, best_d = dest, d
        return ("move", best) if best is not None else ("stay", None)
    return _rush(state, enemy)


def rush_field(state: GameState) -> tuple[list[int], bytes]:
    """Cost-to-base field for rushing enemies; trees cost 1 + remaining hits.

    Cached on the state and rebuilt when a tree disappears.
    """
    if state._rush is None:
        costs = bytearray(N_CELLS)
        for i, t in enumerate(state.tiles):
            if t == TREE:
                costs[i] = 1 + state.hits[i]
            elif t != ROCK and t != BASE:
                costs[i] = 1
        b = state.level.base_pos
        costs = bytes(costs)
        state._rush = (kernels.weighted_distances(costs, SIZE, SIZE, b[0] * SIZE + b[1]), costs)
    return state._rush


def _rush(state: GameState, enemy: EnemyState) -> tuple[str, Coord | None]:
    pos = enemy.pos
    base = state.level.base_pos
    dist, costs = rush_field(state)
    here = dist[pos[0] * SIZE + pos[1]]
    dr, dc = base[0] - pos[0], base[1] - pos[1]
    vertical = Facing.S if dr > 0 else Facing.N
    horizontal = Facing.E if dc > 0 else Facing.W
    preferred = (vertical, horizontal) if abs(dr) >= abs(dc) else (horizontal, vertical)
    order = list(preferred) + [f for f in Facing if f not in preferred]
    for f in order:
        r, c = pos[0] + DELTAS[f][0], pos[1] + DELTAS[f][1]
        if not in_bounds(r, c):
            continue
        i = r * SIZE + c
        if dist[i] < 0 or dist[i] + costs[i] != here:
            continue
        if state.tiles[i] == TREE:
            return "chop", (r, c)
        if _enemy_can_enter(state, (r, c), enemy):
            return "move", (r, c)
    return "stay", None


def _projectile_at(state: GameState, pos: Coord) -> Projectile | None:
    for p in state.projectiles:
        if p.pos == pos:
            return p
    return None


def _apply_enemies(state: GameState) -> tuple[int, int]:
    kills = damage = 0
    for enemy in state.enemies:
        if enemy.status == Status.DEAD:
            continue
        if enemy.status == Status.BURIED:
            if state.step_count < EMERGE_STEP:
                continue
            enemy.status = Status.ACTIVE
        kind, dest = enemy_move(state, enemy)
        if kind == "attack_base":
            if state.base_hp > 0:
                state.base_hp -= 1
                damage += 1
        elif kind == "move":
            enemy.pos = dest
            p = _projectile_at(state, dest)
            if p is not None:
                # Walking into a flying projectile is an impact.
                enemy.status = Status.DEAD
                state.projectiles.remove(p)
                kills += 1
        elif kind == "chop":
            i = dest[0] * SIZE + dest[1]
            state.hits[i] -= 1
            if state.hits[i] == 0:
                state.tiles[i] = EMPTY
            state._rush = None
    return kills, damage


def step(state: GameState, action: Action | int) -> tuple[GameState, int]:
    """Advance ``state`` in place by one turn and return ``(state, reward)``."""
    if state.outcome != Outcome.RUNNING:
        raise TerminalStateError(f"episode already ended ({state.outcome.value})")
    action = Action(action)
    kills = _advance_projectiles(state)
    kills += _apply_player(state, action)
    k, damage = _apply_enemies(state)
    kills += k
    state.step_count += 1
    reward = kills - damage
    state.cumulative_reward += reward
    state.outcome = is_terminal(state)
    return state, reward


def render(state: GameState) -> str:
    """ASCII board: tiles, ``P`` player, ``E``/``g`` active/buried enemy, ``*`` projectile."""
    chars = [TILE_CHARS[t] for t in state.tiles]
    for p in state.projectiles:
        chars[p.pos[0] * SIZE + p.pos[1]] = "*"
    for e in state.enemies:
        if e.status == Status.ACTIVE:
            chars[e.pos[0] * SIZE + e.pos[1]] = "E"
        elif e.status == Status.BURIED:
            chars[e.pos[0] * SIZE + e.pos[1]] = "g"
    chars[state.player_pos[0] * SIZE + state.player_pos[1]] = PLAYER_CHAR
    return "\n".join("".join(chars[r * SIZE:(r + 1) * SIZE]) for r in range(SIZE))


class GraveRaveEnv:
    """Gym-style wrapper: ``reset() -> obs`` and ``step(a) -> (obs, reward, done, info)``."""

    n_actions = len(ACTIONS)

    def __init__(self, level: Level) -> None:
        self.level = level
        self.state = reset(level)

    def reset(self) -> Observation:
        self.state = reset(self.level)
        return observe(self.state)

    def step(self, action: Action | int) -> tuple[Observation, int, bool, dict[str, Any]]:
        _, reward = step(self.state, action)
        done = self.state.outcome != Outcome.RUNNING
        info = {"outcome": self.state.outcome, "base_hp": self.state.base_hp,
                "enemies_remaining": self.state.enemies_remaining}
        return observe(self.state), reward, done, info
