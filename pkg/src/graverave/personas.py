"""Rule-based persona agents.

* R01, the Shooter: hunts the enemy closest to the base and shoots it once
  it has a clear line; never goes through trees.
* R02, the Defender: R01, but only while that enemy is within
  ``DEFEND_THRESHOLD`` of the base; otherwise walks clockwise around the base.
* R03, the Grave-robber: runs to the nearest buried enemy and steps on its
  grave until the enemies emerge, then plays as R01.
* R04, the Mad Man: hunts the enemy closest to itself, grave-stepping buried
  ones, and shoots through trees in its way. Fires at any active enemy it
  has a clear line to. Ignores the base.

Every policy is a pure function of the :class:`~graverave.world.Observation`.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from . import kernels
from .world import (
    BASE, DELTAS, EMERGE_STEP, ROCK, SIZE, TREE,
    Action, Coord, Facing, Observation, Status, direction_to, euclidean, in_bounds,
)

DEFEND_THRESHOLD = 4.0
PLAYER_OBSTACLES = frozenset({ROCK, TREE})

# The 8-ring around the base, clockwise from north.
RING8: tuple[Coord, ...] = ((-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1))


class PersonaId(str, Enum):
    R01 = "r01"
    R02 = "r02"
    R03 = "r03"
    R04 = "r04"

    @classmethod
    def parse(cls, token: str) -> PersonaId:
        try:
            return cls(token.lower())
        except ValueError:
            raise ValueError(f"unknown persona {token!r}; expected one of r01, r02, r03, r04") from None


PERSONAS = tuple(PersonaId)


@dataclass(frozen=True)
class Threat:
    index: int
    pos: Coord
    status: Status
    score: float
    target: bool


def threat_ranking(obs: Observation, reference: Coord) -> list[Threat]:
    """Score living enemies by closeness to ``reference`` (threat = -distance).

    Returned in spawn order; exactly one entry has ``target=True``, the highest
    threat with the lowest spawn index winning ties.
    """
    living = obs.living()
    if not living:
        return []
    scores = [-euclidean(e.pos, reference) for e in living]
    best = max(range(len(living)), key=lambda k: (scores[k], -living[k].index))
    return [Threat(e.index, e.pos, e.status, s, k == best)
            for k, (e, s) in enumerate(zip(living, scores))]


def _target(ranking: list[Threat]) -> Threat | None:
    for t in ranking:
        if t.target:
            return t
    return None


def line_of_sight(tiles: bytes, src: Coord, dst: Coord) -> bool:
    """Same row or column with no rock, tree or base strictly between."""
    (r0, c0), (r1, c1) = src, dst
    if r0 == r1:
        lo, hi = sorted((c0, c1))
        between = (tiles[r0 * SIZE + c] for c in range(lo + 1, hi))
    elif c0 == c1:
        lo, hi = sorted((r0, r1))
        between = (tiles[r * SIZE + c0] for r in range(lo + 1, hi))
    else:
        return False
    return all(t != ROCK and t != TREE and t != BASE for t in between)


def _mask(tiles: bytes, obstacles: frozenset[int]) -> bytes:
    return bytes(0 if (t in obstacles or t == BASE) else 1 for t in tiles)


def _costs(tiles: bytes, hits: bytes) -> bytes:
    """Entering cost for weighted search: trees cost 1 + hits, rock/base impassable."""
    out = bytearray(len(tiles))
    for i, t in enumerate(tiles):
        if t == TREE:
            out[i] = 1 + hits[i]
        elif t != ROCK and t != BASE:
            out[i] = 1
    return bytes(out)


def _descend(dist: list[int], src: Coord, extra=None) -> Facing | None:
    """First neighbour (N, E, S, W order) minimising the remaining distance."""
    best, best_d = None, None
    for f, (dr, dc) in enumerate(DELTAS):
        r, c = src[0] + dr, src[1] + dc
        if not in_bounds(r, c):
            continue
        i = r * SIZE + c
        d = dist[i]
        if d < 0:
            continue
        if extra is not None:
            d += extra[i]
        if best_d is None or d < best_d:
            best, best_d = Facing(f), d
    return best


def _field(tiles: bytes, dst: Coord, obstacles: frozenset[int] = PLAYER_OBSTACLES,
           hits: bytes | None = None, weighted: bool = False) -> tuple[list[int], bytes | None]:
    src = dst[0] * SIZE + dst[1]
    if weighted:
        costs = _costs(tiles, hits if hits is not None else bytes(len(tiles)))
        return kernels.weighted_distances(costs, SIZE, SIZE, src), costs
    return kernels.bfs_distances(_mask(tiles, obstacles), SIZE, SIZE, src), None


def next_step(tiles: bytes, src: Coord, dst: Coord, obstacles: frozenset[int] = PLAYER_OBSTACLES,
              hits: bytes | None = None, weighted: bool = False) -> Facing | None:
    if src == dst:
        return None
    dist, costs = _field(tiles, dst, obstacles, hits, weighted)
    return _descend(dist, src, costs)


def find_path(tiles: bytes, src: Coord, dst: Coord, obstacles: frozenset[int] = PLAYER_OBSTACLES,
              hits: bytes | None = None, weighted: bool = False) -> list[Coord] | None:
    """Shortest 4-connected path ``[src, ..., dst]`` avoiding ``obstacles`` and the base.

    With ``weighted=True`` trees are passable at cost ``1 + hits`` (only rock
    and base block). Returns None when ``dst`` cannot be reached.
    """
    dist, costs = _field(tiles, dst, obstacles, hits, weighted)
    path = [src]
    pos = src
    while pos != dst:
        f = _descend(dist, pos, costs)
        if f is None:
            return None
        dr, dc = DELTAS[f]
        pos = (pos[0] + dr, pos[1] + dc)
        path.append(pos)
    return path


def _aim(obs: Observation, pos: Coord) -> Action:
    d = direction_to(obs.player_pos, pos)
    return Action.ATTACK if obs.facing == d else Action.move(d)


def _hunt(obs: Observation, target: Coord, weighted: bool = False) -> Action | None:
    if line_of_sight(obs.tiles, obs.player_pos, target):
        return _aim(obs, target)
    f = next_step(obs.tiles, obs.player_pos, target, hits=obs.hits, weighted=weighted)
    if f is None:
        return None
    return _breach(obs, f) if weighted else Action.move(f)


def _nearest(obs: Observation, cells: list[Coord]) -> Coord | None:
    """Cell with the shortest walk from the player; ties keep list order."""
    if not cells:
        return None
    p = obs.player_pos
    dist = kernels.bfs_distances(_mask(obs.tiles, PLAYER_OBSTACLES), SIZE, SIZE, p[0] * SIZE + p[1])
    best, best_d = None, None
    for cell in cells:
        d = dist[cell[0] * SIZE + cell[1]]
        if d >= 0 and (best_d is None or d < best_d):
            best, best_d = cell, d
    return best


def _walk_to(obs: Observation, cell: Coord) -> Action | None:
    f = next_step(obs.tiles, obs.player_pos, cell)
    return Action.move(f) if f is not None else None


def _hold(obs: Observation) -> Action:
    """Fallback when the target is out of reach: wait beside the base."""
    br, bc = obs.base_pos
    spots = [(br + dr, bc + dc) for dr, dc in DELTAS
             if in_bounds(br + dr, bc + dc) and obs.tile(br + dr, bc + dc) not in (ROCK, TREE)]
    if obs.player_pos in spots:
        return Action.move(direction_to(obs.player_pos, obs.base_pos))
    spot = _nearest(obs, spots)
    if spot is not None:
        a = _walk_to(obs, spot)
        if a is not None:
            return a
    return Action.move(obs.facing)


def _shooter(obs: Observation) -> Action:
    target = _target(threat_ranking(obs, obs.base_pos))
    if target is None:
        return Action.move(obs.facing)
    action = _hunt(obs, target.pos)
    return action if action is not None else _hold(obs)


def _patrol(obs: Observation) -> Action:
    br, bc = obs.base_pos
    ring = [(br + dr, bc + dc) for dr, dc in RING8]
    usable = [in_bounds(*cell) and obs.tile(*cell) not in (ROCK, TREE) for cell in ring]
    if obs.player_pos in ring:
        k = ring.index(obs.player_pos)
        for step in range(1, len(ring)):
            j = (k + step) % len(ring)
            if usable[j]:
                a = _walk_to(obs, ring[j])
                if a is not None:
                    return a
    else:
        spot = _nearest(obs, [cell for cell, ok in zip(ring, usable) if ok])
        if spot is not None:
            a = _walk_to(obs, spot)
            if a is not None:
                return a
    return _hold(obs)


def r01(obs: Observation) -> Action:
    return _shooter(obs)


def r02(obs: Observation) -> Action:
    target = _target(threat_ranking(obs, obs.base_pos))
    if target is not None and euclidean(target.pos, obs.base_pos) < DEFEND_THRESHOLD:
        return _shooter(obs)
    return _patrol(obs)


def r03(obs: Observation) -> Action:
    if obs.step_count < EMERGE_STEP:
        buried = [e.pos for e in obs.enemies if e.status == Status.BURIED]
        grave = _nearest(obs, buried)
        if grave is not None:
            a = _walk_to(obs, grave)
            if a is not None:
                return a
    return _shooter(obs)


def _breach(obs: Observation, f: Facing) -> Action:
    """Move along ``f``, shooting first if a tree is in the way."""
    dr, dc = DELTAS[f]
    if obs.tile(obs.player_pos[0] + dr, obs.player_pos[1] + dc) == TREE:
        return Action.ATTACK if obs.facing == f else Action.move(f)
    return Action.move(f)


def _sighted(obs: Observation) -> Coord | None:
    """Active enemy with a clear line to the player: one straight ahead
    first, otherwise the nearest."""
    p = obs.player_pos
    seen = [e for e in obs.living()
            if e.status == Status.ACTIVE and line_of_sight(obs.tiles, p, e.pos)]
    if not seen:
        return None
    best = min(seen, key=lambda e: (direction_to(p, e.pos) != obs.facing, euclidean(e.pos, p), e.index))
    return best.pos


def r04(obs: Observation) -> Action:
    spot = _sighted(obs)
    if spot is not None:
        return _aim(obs, spot)
    target = _target(threat_ranking(obs, obs.player_pos))
    if target is None:
        return Action.move(obs.facing)
    if target.status == Status.BURIED:
        # Closest enemy is still in its grave: go and step on it.
        f = next_step(obs.tiles, obs.player_pos, target.pos, hits=obs.hits, weighted=True)
        if f is not None:
            return _breach(obs, f)
    else:
        action = _hunt(obs, target.pos, weighted=True)
        if action is not None:
            return action
    if line_of_sight(obs.tiles, obs.player_pos, target.pos):
        return _aim(obs, target.pos)
    return Action.move(direction_to(obs.player_pos, target.pos))


POLICIES = {PersonaId.R01: r01, PersonaId.R02: r02, PersonaId.R03: r03, PersonaId.R04: r04}


def act(persona: PersonaId | str, obs: Observation) -> Action:
    return POLICIES[PersonaId(persona)](obs)


def chosen_target(persona: PersonaId | str, obs: Observation) -> int | None:
    """Spawn index of the enemy the persona is currently hunting."""
    persona = PersonaId(persona)
    ref = obs.player_pos if persona == PersonaId.R04 else obs.base_pos
    t = _target(threat_ranking(obs, ref))
    return t.index if t is not None else None
