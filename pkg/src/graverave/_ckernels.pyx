# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled grid kernels; same contracts as ``_pykernels``."""

DEF MAX_CELLS = 4096

cdef int UNREACHABLE = -1


cdef int _offsets(int depth, int *drs, int *dcs):
    cdef int dr, dc, n = 0
    for dr in range(-depth, depth + 1):
        for dc in range(-depth, depth + 1):
            if (dr != 0 or dc != 0) and dr * dr + dc * dc <= depth * depth:
                drs[n] = dr
                dcs[n] = dc
                n += 1
    return n


def refine_pass(const unsigned char[:] grid, int width, int height, int number, int depth, int target):
    cdef int drs[64]
    cdef int dcs[64]
    if depth > 3:
        raise ValueError("depth must be <= 3")
    cdef int n = _offsets(depth, drs, dcs)
    cdef bytearray out = bytearray(grid)
    cdef unsigned char[:] o = out
    cdef int r, c, k, rr, cc, count
    for r in range(height):
        for c in range(width):
            if grid[r * width + c] != 0:
                continue
            count = 0
            for k in range(n):
                rr = r + drs[k]
                cc = c + dcs[k]
                if 0 <= rr < height and 0 <= cc < width and grid[rr * width + cc] == target:
                    count += 1
            if count > number:
                o[r * width + c] = target
    return out


def refine(grid, int width, int height, int runs, int number, int depth, int target):
    out = bytearray(grid)
    for _ in range(runs):
        out = refine_pass(out, width, height, number, depth, target)
    return out


def is_connected(const unsigned char[:] grid, int width, int height, int blocked):
    cdef int n = width * height
    if n > MAX_CELLS:
        raise ValueError("grid too large")
    cdef unsigned char seen[MAX_CELLS]
    cdef int stack[MAX_CELLS]
    cdef int i, j, r, c, top = 0, reached = 0, total = 0, first = -1
    for i in range(n):
        seen[i] = 0
        if grid[i] != blocked:
            total += 1
            if first < 0:
                first = i
    if total == 0:
        return False
    seen[first] = 1
    stack[top] = first
    top += 1
    reached = 1
    while top > 0:
        top -= 1
        i = stack[top]
        r = i // width
        c = i - r * width
        if r > 0:
            j = i - width
            if not seen[j] and grid[j] != blocked:
                seen[j] = 1
                reached += 1
                stack[top] = j
                top += 1
        if c < width - 1:
            j = i + 1
            if not seen[j] and grid[j] != blocked:
                seen[j] = 1
                reached += 1
                stack[top] = j
                top += 1
        if r < height - 1:
            j = i + width
            if not seen[j] and grid[j] != blocked:
                seen[j] = 1
                reached += 1
                stack[top] = j
                top += 1
        if c > 0:
            j = i - 1
            if not seen[j] and grid[j] != blocked:
                seen[j] = 1
                reached += 1
                stack[top] = j
                top += 1
    return reached == total


cdef inline int _neighbours(int i, int width, int height, int *out):
    cdef int r = i // width
    cdef int c = i - r * width
    cdef int n = 0
    if r > 0:
        out[n] = i - width
        n += 1
    if c < width - 1:
        out[n] = i + 1
        n += 1
    if r < height - 1:
        out[n] = i + width
        n += 1
    if c > 0:
        out[n] = i - 1
        n += 1
    return n


def bfs_distances(const unsigned char[:] passable, int width, int height, int source):
    cdef int n = width * height
    if n > MAX_CELLS:
        raise ValueError("grid too large")
    cdef int dist[MAX_CELLS]
    cdef int queue[MAX_CELLS]
    cdef int nb[4]
    cdef int head = 0, tail = 0, i, j, k, m, d
    for i in range(n):
        dist[i] = UNREACHABLE
    dist[source] = 0
    queue[tail] = source
    tail += 1
    while head < tail:
        i = queue[head]
        head += 1
        d = dist[i] + 1
        m = _neighbours(i, width, height, nb)
        for k in range(m):
            j = nb[k]
            if dist[j] == UNREACHABLE and passable[j]:
                dist[j] = d
                queue[tail] = j
                tail += 1
    return [dist[i] for i in range(n)]


cdef inline void _push(long *heap, int *size, long item):
    cdef int k = size[0]
    cdef int parent
    size[0] += 1
    while k > 0:
        parent = (k - 1) >> 1
        if heap[parent] <= item:
            break
        heap[k] = heap[parent]
        k = parent
    heap[k] = item


cdef inline long _pop(long *heap, int *size):
    cdef long top = heap[0]
    cdef long last
    cdef int k = 0, child
    size[0] -= 1
    last = heap[size[0]]
    while True:
        child = 2 * k + 1
        if child >= size[0]:
            break
        if child + 1 < size[0] and heap[child + 1] < heap[child]:
            child += 1
        if heap[child] >= last:
            break
        heap[k] = heap[child]
        k = child
    heap[k] = last
    return top


def weighted_distances(const unsigned char[:] costs, int width, int height, int source):
    # Binary-heap Dijkstra with lazy deletion; entries pack (dist, cell).
    cdef int n = width * height
    if n > MAX_CELLS:
        raise ValueError("grid too large")
    cdef int dist[MAX_CELLS]
    cdef long heap[4 * MAX_CELLS + 1]
    cdef int size = 0
    cdef int nb[4]
    cdef int i, j, k, m, d, nd, step
    cdef long item
    for i in range(n):
        dist[i] = UNREACHABLE
    dist[source] = 0
    _push(heap, &size, source)
    while size > 0:
        item = _pop(heap, &size)
        d = <int>(item >> 16)
        i = <int>(item & 0xFFFF)
        if d > dist[i]:
            continue
        step = costs[i]
        if step == 0:
            step = 1
        nd = d + step
        m = _neighbours(i, width, height, nb)
        for k in range(m):
            j = nb[k]
            if costs[j] and (dist[j] == UNREACHABLE or nd < dist[j]):
                dist[j] = nd
                _push(heap, &size, (<long>nd << 16) | j)
    return [dist[i] for i in range(n)]
