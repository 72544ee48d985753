"""Micro-level builders for hand-traced scenarios."""

from __future__ import annotations

from graverave.world import SIZE, Level, Status, reset

GRAVES = ((14, 10), (14, 11), (14, 12), (14, 13), (14, 14))


def make_level(base=(7, 7), player=(7, 6), graves=GRAVES, rocks=(), trees=(), flee=0.0) -> Level:
    rows = [["."] * SIZE for _ in range(SIZE)]
    for r, c in rocks:
        rows[r][c] = "R"
    for r, c in trees:
        rows[r][c] = "T"
    for r, c in graves:
        rows[r][c] = "G"
    rows[base[0]][base[1]] = "B"
    rows[player[0]][player[1]] = "P"
    return Level.from_rows(["".join(r) for r in rows], flee, list(graves))


def staged(level: Level, active=(), buried=None, step_count=0, player=None, facing=None):
    """Fresh state with the first ``len(active)`` enemies placed and active.

    Remaining enemies stay buried when ``buried`` is true, else are dead.
    """
    state = reset(level)
    keep = len(active)
    for k, e in enumerate(state.enemies):
        if k < keep:
            e.pos, e.status = tuple(active[k]), Status.ACTIVE
        elif not buried:
            e.status = Status.DEAD
    state.step_count = step_count
    if player is not None:
        state.player_pos = player
    if facing is not None:
        state.facing = facing
    return state
