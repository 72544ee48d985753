import pytest

from graverave import personas
from graverave.levelgen import generate, random_params
from graverave.personas import (
    DEFEND_THRESHOLD, PERSONAS, PersonaId, act, chosen_target, find_path, line_of_sight,
    threat_ranking,
)
from graverave.rng import SplitMix64
from graverave.world import (
    ROCK, TREE, Action, Facing, Outcome, Status, direction_to, euclidean, observe, reset, step,
)

from helpers import make_level, staged


def obs_of(level, **kw):
    return observe(staged(level, **kw))


def test_parse():
    assert PersonaId.parse("R03") is PersonaId.R03
    with pytest.raises(ValueError, match="r01"):
        PersonaId.parse("r05")
    assert len(PERSONAS) == 4


def test_line_of_sight():
    tiles = bytearray(make_level(graves=((14, 10), (14, 11), (14, 12), (14, 13), (3, 5))).tiles)
    assert line_of_sight(tiles, (3, 3), (3, 4))
    assert line_of_sight(tiles, (3, 3), (3, 7))  # grave at (3,5) does not block
    assert not line_of_sight(tiles, (3, 3), (4, 4))
    tiles[3 * 15 + 6] = ROCK
    assert not line_of_sight(tiles, (3, 3), (3, 7))
    tiles[3 * 15 + 6] = TREE
    assert not line_of_sight(tiles, (3, 3), (3, 7))
    assert not line_of_sight(bytes(make_level().tiles), (7, 6), (7, 8))  # base in between


def test_threat_ranking_ties_and_reference():
    obs = obs_of(make_level(), active=[(7, 3), (7, 11)])
    ranking = threat_ranking(obs, (7, 7))
    assert [t.target for t in ranking] == [True, False]
    assert threat_ranking(obs_of(make_level(), active=[(0, 0)]), (7, 7))[0].target
    assert threat_ranking(obs_of(make_level(), active=[]), (7, 7)) == []


def test_find_path():
    tiles = make_level().tiles
    path = find_path(tiles, (0, 0), (0, 6))
    assert path[0] == (0, 0) and path[-1] == (0, 6) and len(path) == 7
    boxed = make_level(rocks=[(0, 1), (1, 0), (1, 1)]).tiles
    assert find_path(boxed, (5, 5), (0, 0)) is None
    wall = make_level(trees=[(r, 3) for r in range(15)]).tiles
    assert find_path(wall, (0, 0), (0, 6)) is None
    through = find_path(wall, (0, 0), (0, 6), hits=bytes(225), weighted=True)
    assert (0, 3) in through


def test_r01_attacks_in_line_of_sight():
    lvl = make_level()
    assert act("r01", obs_of(lvl, active=[(7, 2)], facing=Facing.W)) == Action.ATTACK
    assert act("r01", obs_of(lvl, active=[(7, 2)], facing=Facing.N)) == Action.MOVE_W


def test_r02_patrols_clockwise_when_enemies_far():
    lvl = make_level(player=(6, 7))
    far = [(0, 0)]
    assert act("r02", obs_of(lvl, active=far, player=(6, 7))) == Action.MOVE_E   # N -> NE
    assert act("r02", obs_of(lvl, active=far, player=(6, 8))) == Action.MOVE_S   # NE -> E
    assert act("r02", obs_of(lvl, active=far, player=(8, 6))) == Action.MOVE_N   # SW -> W
    near = [(4, 7)]
    assert euclidean(near[0], (7, 7)) < DEFEND_THRESHOLD
    assert act("r02", obs_of(lvl, active=near, player=(6, 7), facing=Facing.N)) == Action.ATTACK


def test_r04_and_r01_pick_different_targets():
    # Enemy 0 is nearer the player, enemy 1 nearer the base.
    obs = obs_of(make_level(), active=[(2, 6), (7, 12)])
    assert euclidean((2, 6), (7, 6)) < euclidean((7, 12), (7, 6))
    assert euclidean((7, 12), (7, 7)) < euclidean((2, 6), (7, 7))
    assert chosen_target("r01", obs) == 1
    assert chosen_target("r04", obs) == 0


def test_tree_wall_r04_shoots_r01_does_not():
    lvl = make_level(trees=[(r, 4) for r in range(15)])
    obs = obs_of(lvl, active=[(7, 1)], player=(7, 5), facing=Facing.W)
    assert act("r04", obs) == Action.ATTACK
    assert act("r01", obs) != Action.ATTACK
    # One tile further back R04 first walks up to the tree.
    assert act("r04", obs_of(lvl, active=[(7, 1)], facing=Facing.W)) == Action.MOVE_W


def test_r03_runs_for_graves_until_emergence():
    lvl = make_level()
    obs = obs_of(lvl, buried=True)
    a = act("r03", obs)
    assert a in (Action.MOVE_S, Action.MOVE_E)  # toward the graves on row 14
    late = obs_of(lvl, buried=True, step_count=20)
    assert act("r03", late) == act("r01", late)


def _episodes(n, seed=21):
    rng = SplitMix64(seed)
    for _ in range(n):
        yield generate(random_params(rng))


def test_policy_identities_over_play():
    checked = {"r03": 0, "r02": 0}
    for level in _episodes(25):
        s = reset(level)
        while s.outcome == Outcome.RUNNING:
            obs = observe(s)
            a = act("r01", obs)
            assert isinstance(a, Action)
            living = obs.living()
            if not any(e.status == Status.BURIED for e in living):
                assert act("r03", obs) == a
                checked["r03"] += 1
            if living and all(euclidean(e.pos, obs.base_pos) < DEFEND_THRESHOLD for e in living):
                assert act("r02", obs) == a
                checked["r02"] += 1
            if a == Action.ATTACK:
                t = [x for x in threat_ranking(obs, obs.base_pos) if x.target][0]
                assert line_of_sight(obs.tiles, obs.player_pos, t.pos)
                assert direction_to(obs.player_pos, t.pos) == obs.facing
            step(s, a)
    assert checked["r03"] > 100 and checked["r02"] > 0


@pytest.mark.parametrize("persona", PERSONAS)
def test_policies_deterministic_and_total(persona):
    for level in _episodes(8, seed=22):
        s = reset(level)
        while s.outcome == Outcome.RUNNING:
            obs = observe(s)
            a = act(persona, obs)
            assert a == act(persona, obs) and a in tuple(Action)
            step(s, a)


def test_policy_table_complete():
    assert set(personas.POLICIES) == set(PERSONAS)


def test_r04_fires_at_any_enemy_in_sight():
    # Enemy 0 is nearest but behind a rock; enemy 1 stands in a clear column.
    lvl = make_level(rocks=[(7, 4)])
    obs = obs_of(lvl, active=[(7, 3), (2, 6)], facing=Facing.N)
    assert chosen_target("r04", obs) == 0
    assert act("r04", obs) == Action.ATTACK
    assert act("r01", obs) != Action.ATTACK
