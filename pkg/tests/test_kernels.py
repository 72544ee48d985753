import random

import pytest

from graverave import _pykernels, kernels
from graverave.levelgen import connectivity_check, refine_cells

import oracles

try:
    from graverave import _ckernels
except ImportError:  # pragma: no cover - extension not built
    _ckernels = None

BACKENDS = [pytest.param(_pykernels, id="python"),
            pytest.param(_ckernels, id="cython",
                         marks=pytest.mark.skipif(_ckernels is None, reason="extension not built"))]

# 5x5 golden fixture: 1 = rock.
FIXTURE = [
    [1, 1, 0, 0, 0],
    [1, 0, 0, 0, 0],
    [0, 0, 0, 0, 0],
    [0, 0, 0, 1, 1],
    [0, 0, 0, 1, 1],
]
# Hand count, depth 2 (12 cells within radius 2), more than 2 rocks needed.
# (1,1) sees 3 rocks of the top-left cluster. (2,3), (2,4), (3,2), (4,2)
# each see 3 of the bottom-right block. (1,2) would reach 3 only by counting
# the freshly converted (1,1), which double buffering forbids.
FIXTURE_D2_N2 = [
    [1, 1, 0, 0, 0],
    [1, 1, 0, 0, 0],
    [0, 0, 0, 1, 1],
    [0, 0, 1, 1, 1],
    [0, 0, 1, 1, 1],
]
# Depth 1 (4-neighbourhood), more than 1 rock: only (1,1) has two.
FIXTURE_D1_N1 = [
    [1, 1, 0, 0, 0],
    [1, 1, 0, 0, 0],
    [0, 0, 0, 0, 0],
    [0, 0, 0, 1, 1],
    [0, 0, 0, 1, 1],
]


def flat(g):
    return bytes(v for row in g for v in row)


def random_grid(rng, w, h, density, kinds=(1,)):
    return bytes(rng.choice(kinds) if rng.random() < density else 0 for _ in range(w * h))


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


@pytest.mark.parametrize("impl", BACKENDS)
@pytest.mark.parametrize("depth,number,golden", [(2, 2, FIXTURE_D2_N2), (1, 1, FIXTURE_D1_N1)])
def test_refine_golden(impl, depth, number, golden):
    out = impl.refine_pass(flat(FIXTURE), 5, 5, number, depth, 1)
    assert bytes(out) == flat(golden)


@pytest.mark.parametrize("impl", BACKENDS)
def test_refine_matches_oracle(impl):
    rng = random.Random(1)
    for _ in range(60):
        w, h = rng.randint(3, 15), rng.randint(3, 15)
        grid = random_grid(rng, w, h, rng.uniform(0.1, 0.5), kinds=(1, 2))
        number, depth, target = rng.randint(0, 8), rng.randint(1, 2), rng.choice((1, 2))
        want = oracles.refine_once(oracles.to_2d(grid, w, h), number, depth, target)
        got = impl.refine_pass(grid, w, h, number, depth, target)
        assert oracles.to_2d(got, w, h) == want


def test_depth_one_never_exceeds_four():
    rng = random.Random(2)
    for _ in range(50):
        grid = random_grid(rng, 15, 15, 0.6)
        for number in range(4, 9):
            assert refine_cells(grid, 3, number, 1, 1) == grid


def test_all_rock_unchanged():
    grid = bytes([1] * 225)
    assert refine_cells(grid, 3, 4, 2, 1) == grid


def test_connectivity_examples():
    assert connectivity_check(bytes(225))
    wall = bytearray(225)
    for c in range(15):
        wall[7 * 15 + c] = 1
    assert not connectivity_check(wall)
    wall[7 * 15 + 3] = 0
    assert connectivity_check(wall)


@pytest.mark.parametrize("impl", BACKENDS)
def test_connectivity_matches_oracle(impl):
    rng = random.Random(3)
    for _ in range(200):
        w, h = rng.randint(2, 15), rng.randint(2, 15)
        grid = random_grid(rng, w, h, rng.uniform(0.2, 0.6))
        comps = oracles.components(oracles.to_2d(grid, w, h), lambda t: t != 1)
        assert impl.is_connected(grid, w, h, 1) == (len(comps) == 1)


@pytest.mark.parametrize("impl", BACKENDS)
def test_bfs_matches_oracle(impl):
    rng = random.Random(4)
    for _ in range(60):
        w, h = rng.randint(2, 12), rng.randint(2, 12)
        mask = bytes(0 if rng.random() < 0.3 else 1 for _ in range(w * h))
        src = rng.randrange(w * h)
        costs = oracles.to_2d(mask, w, h)
        want = oracles.relax_distances(costs, divmod(src, w), unit=True)
        assert oracles.to_2d(impl.bfs_distances(mask, w, h, src), w, h) == want


@pytest.mark.parametrize("impl", BACKENDS)
def test_weighted_matches_oracle(impl):
    rng = random.Random(5)
    for _ in range(60):
        w, h = rng.randint(2, 12), rng.randint(2, 12)
        costs = bytes(rng.choice((0, 1, 1, 1, 2, 3, 4)) for _ in range(w * h))
        src = rng.randrange(w * h)
        want = oracles.relax_distances(oracles.to_2d(costs, w, h), divmod(src, w), unit=False)
        assert oracles.to_2d(impl.weighted_distances(costs, w, h, src), w, h) == want


@pytest.mark.skipif(_ckernels is None, reason="extension not built")
def test_backends_agree_on_random_inputs():
    rng = random.Random(6)
    for _ in range(300):
        grid = random_grid(rng, 15, 15, rng.uniform(0.1, 0.5), kinds=(1, 2))
        args = (15, 15, rng.randint(0, 8), rng.randint(1, 2), 1)
        assert bytes(_pykernels.refine(grid, 15, 15, 3, *args[2:])) == bytes(_ckernels.refine(grid, 15, 15, 3, *args[2:]))
        assert _pykernels.is_connected(grid, 15, 15, 1) == _ckernels.is_connected(grid, 15, 15, 1)
        src = rng.randrange(225)
        mask = bytes(t != 1 for t in grid)
        assert _pykernels.bfs_distances(mask, 15, 15, src) == _ckernels.bfs_distances(mask, 15, 15, src)
        costs = bytes(0 if t == 1 else 1 + 3 * (t == 2) for t in grid)
        assert _pykernels.weighted_distances(costs, 15, 15, src) == _ckernels.weighted_distances(costs, 15, 15, src)
