"""Independent reference implementations used to check the models.

Everything here is deliberately written from scratch against the documented
semantics (plain BFS over adjacency lists, direct distance formulas) and
shares no stepping code with the package.
"""

from collections import deque

VON4 = ((0, -1), (1, 0), (0, 1), (-1, 0))
MOORE8 = VON4 + ((1, -1), (1, 1), (-1, 1), (-1, -1))


def bfs_reachable(trees, sparks, offsets):
    """Cells reached by a fire that starts on `sparks` and spreads only into
    tree cells under the given adjacency. trees is a bool array [y, x]."""
    h, w = trees.shape
    seen = set(sparks)
    queue = deque(sparks)
    while queue:
        x, y = queue.popleft()
        for dx, dy in offsets:
            nx, ny = x + dx, y + dy
            if 0 <= nx < w and 0 <= ny < h and trees[ny, nx] and (nx, ny) not in seen:
                seen.add((nx, ny))
                queue.append((nx, ny))
    return seen


def manhattan_ball(center, radius, width, height):
    cx, cy = center
    return {
        (x, y)
        for y in range(height)
        for x in range(width)
        if abs(x - cx) + abs(y - cy) <= radius
    }


def chebyshev_radius(center, width, height):
    """Largest chebyshev distance from center to any cell of the grid."""
    cx, cy = center
    return max(cx, width - 1 - cx, cy, height - 1 - cy)


def argmax_first(levels, threshold):
    """Index of the largest value at or above threshold, first on ties."""
    best, best_v = None, None
    for i, v in enumerate(levels):
        if v >= threshold and (best_v is None or v > best_v):
            best, best_v = i, v
    return best
