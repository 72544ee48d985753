"""Pure-Python grid kernels.

Reference implementation of the routines in ``_ckernels.pyx``. Grids are
flat row-major byte sequences of length ``width * height``.
"""

from __future__ import annotations

import heapq
from collections import deque
from functools import lru_cache

UNREACHABLE = -1


@lru_cache(maxsize=None)
def neighbour_offsets(depth: int) -> tuple[tuple[int, int], ...]:
    """Offsets (dr, dc) != (0, 0) with euclidean length <= depth."""
    out = []
    for dr in range(-depth, depth + 1):
        for dc in range(-depth, depth + 1):
            if (dr or dc) and dr * dr + dc * dc <= depth * depth:
                out.append((dr, dc))
    return tuple(out)


def refine_pass(grid, width: int, height: int, number: int, depth: int, target: int) -> bytearray:
    offsets = neighbour_offsets(depth)
    out = bytearray(grid)
    for r in range(height):
        for c in range(width):
            if grid[r * width + c] != 0:
                continue
            count = 0
            for dr, dc in offsets:
                rr, cc = r + dr, c + dc
                if 0 <= rr < height and 0 <= cc < width and grid[rr * width + cc] == target:
                    count += 1
            if count > number:
                out[r * width + c] = target
    return out


def refine(grid, width: int, height: int, runs: int, number: int, depth: int, target: int) -> bytearray:
    out = bytearray(grid)
    for _ in range(runs):
        out = refine_pass(out, width, height, number, depth, target)
    return out


def is_connected(grid, width: int, height: int, blocked: int) -> bool:
    n = width * height
    free = [i for i in range(n) if grid[i] != blocked]
    if not free:
        return False
    seen = bytearray(n)
    seen[free[0]] = 1
    stack = [free[0]]
    reached = 1
    while stack:
        i = stack.pop()
        r, c = divmod(i, width)
        for j, ok in ((i - width, r > 0), (i + 1, c < width - 1), (i + width, r < height - 1), (i - 1, c > 0)):
            if ok and not seen[j] and grid[j] != blocked:
                seen[j] = 1
                reached += 1
                stack.append(j)
    return reached == len(free)


def bfs_distances(passable, width: int, height: int, source: int) -> list[int]:
    """Step counts from ``source`` over cells with a non-zero ``passable`` byte.

    The source itself is always expanded, whatever its mask value.
    """
    dist = [UNREACHABLE] * (width * height)
    dist[source] = 0
    queue = deque([source])
    while queue:
        i = queue.popleft()
        d = dist[i] + 1
        r, c = divmod(i, width)
        for j, ok in ((i - width, r > 0), (i + 1, c < width - 1), (i + width, r < height - 1), (i - 1, c > 0)):
            if ok and dist[j] == UNREACHABLE and passable[j]:
                dist[j] = d
                queue.append(j)
    return dist


def weighted_distances(costs, width: int, height: int, source: int) -> list[int]:
    """Cost-to-reach-``source`` field; ``costs[i]`` is the price of entering
    cell ``i`` and 0 marks it impassable.

    ``dist[u]`` is the cheapest total entering cost of a walk that starts at
    ``u`` and ends on ``source``.
    """
    dist = [UNREACHABLE] * (width * height)
    dist[source] = 0
    heap = [(0, source)]
    while heap:
        d, i = heapq.heappop(heap)
        if d > dist[i]:
            continue
        step = costs[i] or 1
        nd = d + step
        r, c = divmod(i, width)
        for j, ok in ((i - width, r > 0), (i + 1, c < width - 1), (i + width, r < height - 1), (i - 1, c > 0)):
            if ok and costs[j] and (dist[j] == UNREACHABLE or nd < dist[j]):
                dist[j] = nd
                heapq.heappush(heap, (nd, j))
    return dist
