"""Independent reference computations used only by the tests.

Nothing here calls into the package's numerical paths.
"""

import itertools
import math

import mpmath
import numpy as np


def brute_force_laplacian(block):
    """Enumerate every pixel pair with plain loops."""
    block = [list(map(float, row)) for row in block]
    h, w = len(block), len(block[0])
    coords = [(r, c) for r in range(h) for c in range(w)]
    n = len(coords)
    lap = [[0.0] * n for _ in range(n)]
    for p in range(n):
        for q in range(n):
            if p == q:
                continue
            (r1, c1), (r2, c2) = coords[p], coords[q]
            d = math.sqrt((r1 - r2) ** 2 + (c1 - c2) ** 2)
            wpq = abs(block[r1][c1] - block[r2][c2]) / d
            lap[p][q] -= wpq
            lap[p][p] += wpq
    return np.array(lap)


def charpoly_eigenvalues(matrix, dps=60):
    """Eigenvalues as roots of the characteristic polynomial (Faddeev-LeVerrier in high precision)."""
    with mpmath.workdps(dps):
        a = mpmath.matrix([[mpmath.mpf(float(x)) for x in row] for row in np.asarray(matrix)])
        n = a.rows
        coeffs = [mpmath.mpf(1)]
        m = mpmath.zeros(n, n)
        for k in range(1, n + 1):
            m = a * m + coeffs[-1] * mpmath.eye(n)
            am = a * m
            c = -sum(am[i, i] for i in range(n)) / k
            coeffs.append(c)
        roots = mpmath.polyroots(coeffs, maxsteps=400, extraprec=4 * dps)
        return np.sort(np.array([float(mpmath.re(r)) for r in roots]))


class UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb

    def count(self):
        return len({self.find(i) for i in range(len(self.parent))})


def graph_components(weights, tol=0.0):
    n = len(weights)
    uf = UnionFind(n)
    for i in range(n):
        for j in range(i + 1, n):
            if weights[i][j] > tol:
                uf.union(i, j)
    return uf.count()


def mask_components(mask, neighborhood=8):
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    cells = [(r, c) for r in range(h) for c in range(w) if mask[r, c]]
    index = {rc: i for i, rc in enumerate(cells)}
    uf = UnionFind(len(cells))
    if neighborhood == 4:
        steps = [(0, 1), (1, 0), (0, -1), (-1, 0)]
    else:
        steps = [(dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1) if (dr, dc) != (0, 0)]
    for (r, c), i in index.items():
        for dr, dc in steps:
            j = index.get((r + dr, c + dc))
            if j is not None:
                uf.union(i, j)
    return uf.count()


def greedy_by_lexicographic_enumeration(sim, order):
    """The entropy-ordered greedy choice equals the injective map whose
    similarity sequence, read in processing order, is lexicographically
    largest (for matrices without ties)."""
    rows, cols = sim.shape
    best, best_key = None, None
    for perm in itertools.permutations(range(cols), rows):
        key = tuple(sim[i, perm[i]] for i in order)
        if best_key is None or key > best_key:
            best, best_key = perm, key
    return np.array(best)


def quarter_turn_slots(grid_rows, turns):
    """Source slot feeding each target slot after counter-clockwise quarter
    turns of a square image tiled by a square patch grid (disjoint tiling)."""
    n = grid_rows
    out = np.empty(n * n, dtype=int)
    for r in range(n):
        for c in range(n):
            t = turns % 4
            if t == 0:
                sr, sc = r, c
            elif t == 1:
                sr, sc = c, n - 1 - r
            elif t == 2:
                sr, sc = n - 1 - r, n - 1 - c
            else:
                sr, sc = n - 1 - c, r
            out[r * n + c] = sr * n + sc
    return out


def hflip_slots(grid_rows):
    n = grid_rows
    return np.array([r * n + (n - 1 - c) for r in range(n) for c in range(n)])


def shannon_entropy(row, eps=1e-12):
    p = [max(x, 0.0) + eps for x in row]
    s = sum(p)
    return -sum(x / s * math.log(x / s) for x in p)
