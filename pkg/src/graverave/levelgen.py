"""Seeded cellular-automata level generator.

``generate(params)`` is a pure function of a 10-gene :class:`GeneratorParams`:

1. seed a :class:`~graverave.rng.SplitMix64` stream with ``random_seed``;
2. scatter rocks and grow them with refinement passes;
3. require the rock-free cells to be 4-connected, else back to 2;
4. scatter trees on rock-free cells and grow them the same way;
5. pick the base among cells with a clear 8-neighbourhood (back to 2 if
   there are none) and the player on a free 4-neighbour of it;
6. place five graves on the remaining free cells.

Restarts keep drawing from the same stream. Dense rock settings almost never
produce a connected map by chance, so after ``CONNECTIVITY_RESTARTS`` failed
connectivity checks the map is repaired instead: free cells outside the
largest 4-connected region become rock.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from typing import Any

from . import kernels
from .rng import SplitMix64
from .world import BASE, DELTAS, EMPTY, GRAVE, N_CELLS, N_ENEMIES, ROCK, SIZE, TREE, Level

MAX_ATTEMPTS = 1000
CONNECTIVITY_RESTARTS = 100


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ParamSpec:
    name: str
    lo: float
    hi: float
    integer: bool
    seed: bool = False

    def sample(self, rng: SplitMix64) -> int | float:
        if self.integer:
            return rng.randint(int(self.lo), int(self.hi))
        return rng.uniform(self.lo, self.hi)

    def contains(self, value: float) -> bool:
        if self.integer and (not isinstance(value, int) or isinstance(value, bool)):
            return False
        return self.lo <= value <= self.hi


PARAM_SPECS: tuple[ParamSpec, ...] = (
    ParamSpec("random_seed", 1, 9999, True, seed=True),
    ParamSpec("initial_rock_density", 0.1, 0.4, False),
    ParamSpec("rock_refinement_runs", 1, 3, True),
    ParamSpec("rock_neighbour_number", 4, 8, True),
    ParamSpec("rock_neighbour_depth", 1, 2, True),
    ParamSpec("initial_tree_density", 0.1, 0.4, False),
    ParamSpec("tree_refinement_runs", 1, 3, True),
    ParamSpec("tree_neighbour_number", 4, 8, True),
    ParamSpec("tree_neighbour_depth", 1, 2, True),
    ParamSpec("flee_distance", 0.0, 10.0, False),
)
SPEC_BY_NAME = {s.name: s for s in PARAM_SPECS}


@dataclass(frozen=True)
class GeneratorParams:
    random_seed: int
    initial_rock_density: float
    rock_refinement_runs: int
    rock_neighbour_number: int
    rock_neighbour_depth: int
    initial_tree_density: float
    tree_refinement_runs: int
    tree_neighbour_number: int
    tree_neighbour_depth: int
    flee_distance: float

    def __post_init__(self) -> None:
        bad = [s.name for s in PARAM_SPECS if not s.contains(getattr(self, s.name))]
        if bad:
            raise ValueError(f"parameters out of range: {', '.join(bad)}")

    @classmethod
    def default(cls, random_seed: int = 1) -> GeneratorParams:
        """Mid-range values for everything but the seed."""
        return cls(random_seed, 0.25, 2, 6, 2, 0.25, 2, 6, 2, 5.0)

    def with_values(self, **changes: Any) -> GeneratorParams:
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> GeneratorParams:
        names = [f.name for f in fields(cls)]
        missing = [n for n in names if n not in data]
        unknown = [k for k in data if k not in names]
        if missing or unknown:
            raise ValueError(f"bad parameter set (missing={missing}, unknown={unknown})")
        values = {}
        for spec in PARAM_SPECS:
            v = data[spec.name]
            if spec.integer:
                if isinstance(v, float) and v.is_integer():
                    v = int(v)
            else:
                v = float(v)
            values[spec.name] = v
        return cls(**values)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> GeneratorParams:
        return cls.from_dict(json.loads(text))


def random_params(rng: SplitMix64) -> GeneratorParams:
    return GeneratorParams(**{s.name: s.sample(rng) for s in PARAM_SPECS})


def refine_cells(grid, runs: int, neighbour_number: int, depth: int, target: int,
                 width: int = SIZE, height: int = SIZE) -> bytearray:
    """Grow ``target`` cells: each pass, an EMPTY cell with more than
    ``neighbour_number`` target cells within euclidean ``depth`` turns into one.
    Passes read the previous grid and write a fresh one."""
    return kernels.refine(bytes(grid), width, height, runs, neighbour_number, depth, target)


def connectivity_check(grid, width: int = SIZE, height: int = SIZE) -> bool:
    """True iff all non-rock cells form one 4-connected component."""
    return kernels.is_connected(bytes(grid), width, height, ROCK)


def fill_pockets(grid) -> bytearray:
    """Turn every non-rock cell outside the largest 4-connected non-rock
    region into rock. Ties go to the region found first in row-major order."""
    out = bytearray(grid)
    label = [0] * N_CELLS
    best_label, best_size, n_labels = 0, 0, 0
    for start in range(N_CELLS):
        if out[start] == ROCK or label[start]:
            continue
        n_labels += 1
        label[start] = n_labels
        stack, size = [start], 1
        while stack:
            i = stack.pop()
            r, c = divmod(i, SIZE)
            for dr, dc in DELTAS:
                rr, cc = r + dr, c + dc
                j = rr * SIZE + cc
                if 0 <= rr < SIZE and 0 <= cc < SIZE and out[j] != ROCK and not label[j]:
                    label[j] = n_labels
                    size += 1
                    stack.append(j)
        if size > best_size:
            best_label, best_size = n_labels, size
    for i in range(N_CELLS):
        if out[i] != ROCK and label[i] != best_label:
            out[i] = ROCK
    return out


def _scatter(grid: bytearray, rng: SplitMix64, density: float, kind: int) -> None:
    for i in range(len(grid)):
        if grid[i] == EMPTY and rng.random() < density:
            grid[i] = kind


def _base_candidates(grid: bytearray) -> list[int]:
    out = []
    for r in range(SIZE):
        for c in range(SIZE):
            if grid[r * SIZE + c] != EMPTY:
                continue
            clear = True
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    rr, cc = r + dr, c + dc
                    if 0 <= rr < SIZE and 0 <= cc < SIZE and grid[rr * SIZE + cc] in (ROCK, TREE):
                        clear = False
            if clear:
                out.append(r * SIZE + c)
    return out


def generate(params: GeneratorParams) -> Level:
    rng = SplitMix64(params.random_seed)
    connectivity_failures = 0
    for _ in range(MAX_ATTEMPTS):
        grid = bytearray(N_CELLS)
        _scatter(grid, rng, params.initial_rock_density, ROCK)
        grid = refine_cells(grid, params.rock_refinement_runs, params.rock_neighbour_number,
                            params.rock_neighbour_depth, ROCK)
        if not connectivity_check(grid):
            connectivity_failures += 1
            if connectivity_failures <= CONNECTIVITY_RESTARTS:
                continue
            grid = fill_pockets(grid)
            if all(t == ROCK for t in grid):
                continue
        _scatter(grid, rng, params.initial_tree_density, TREE)
        grid = refine_cells(grid, params.tree_refinement_runs, params.tree_neighbour_number,
                            params.tree_neighbour_depth, TREE)
        candidates = _base_candidates(grid)
        if not candidates:
            continue
        base = rng.choice(candidates)
        br, bc = divmod(base, SIZE)
        spots = [(br + dr, bc + dc) for dr, dc in DELTAS
                 if 0 <= br + dr < SIZE and 0 <= bc + dc < SIZE]
        player = rng.choice(spots)
        grid[base] = BASE
        free = [i for i in range(N_CELLS) if grid[i] == EMPTY and i != player[0] * SIZE + player[1]]
        if len(free) < N_ENEMIES:
            continue
        graves = []
        for _ in range(N_ENEMIES):
            i = free.pop(rng.randbelow(len(free)))
            grid[i] = GRAVE
            graves.append(divmod(i, SIZE))
        return Level(bytes(grid), player, (br, bc), tuple(graves), float(params.flee_distance), params)
    raise GenerationError(f"no valid level for {params} after {MAX_ATTEMPTS} attempts")
