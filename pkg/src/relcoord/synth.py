"""Synthetic glyphs and scenes for experiments that would otherwise need MNIST."""

from __future__ import annotations

import numpy as np

from relcoord.errors import ValidationError

# Stroke skeletons on a unit square, (row, col) in [0, 1]; each glyph is a
# list of polylines. Asymmetric on purpose so quarter turns are distinguishable.
GLYPHS: dict[str, list[list[tuple[float, float]]]] = {
    "2": [[(0.28, 0.30), (0.18, 0.45), (0.20, 0.62), (0.32, 0.70), (0.46, 0.62), (0.80, 0.28), (0.80, 0.74)]],
    "3": [[(0.20, 0.30), (0.17, 0.55), (0.30, 0.68), (0.46, 0.52), (0.60, 0.68), (0.76, 0.58), (0.82, 0.34)], [(0.46, 0.52), (0.46, 0.40)]],
    "4": [[(0.17, 0.60), (0.58, 0.26), (0.60, 0.76)], [(0.30, 0.62), (0.84, 0.62)]],
    "5": [[(0.18, 0.70), (0.18, 0.34), (0.44, 0.30), (0.42, 0.56), (0.58, 0.70), (0.76, 0.60), (0.82, 0.36)]],
    "7": [[(0.20, 0.26), (0.20, 0.74), (0.50, 0.54), (0.84, 0.42)]],
    "F": [[(0.82, 0.32), (0.18, 0.32), (0.18, 0.72)], [(0.46, 0.32), (0.46, 0.62)]],
    "L": [[(0.18, 0.34), (0.82, 0.34), (0.82, 0.70)], [(0.50, 0.34), (0.40, 0.52)]],
    "J": [[(0.18, 0.42), (0.18, 0.72), (0.70, 0.62), (0.82, 0.44), (0.66, 0.30)]],
    "P": [[(0.84, 0.34), (0.18, 0.34), (0.20, 0.62), (0.36, 0.70), (0.50, 0.56), (0.50, 0.34)]],
    "R": [[(0.84, 0.32), (0.18, 0.32), (0.22, 0.64), (0.46, 0.60), (0.50, 0.34), (0.84, 0.72)]],
}


def _segment_distance(py, px, a, b):
    ay, ax = a
    by, bx = b
    vy, vx = by - ay, bx - ax
    length2 = vy * vy + vx * vx
    t = np.clip(((py - ay) * vy + (px - ax) * vx) / max(length2, 1e-12), 0.0, 1.0)
    return np.hypot(py - (ay + t * vy), px - (ax + t * vx))


def render_strokes(strokes, size: int = 28, width: float = 2.2, jitter=None) -> np.ndarray:
    """Anti-aliased rendering of polylines given in unit-square coordinates."""
    py, px = np.mgrid[0:size, 0:size].astype(np.float64)
    dist = np.full((size, size), np.inf)
    for line in strokes:
        pts = [(r * (size - 1), c * (size - 1)) for r, c in line]
        if jitter is not None:
            pts = [(r + dr, c + dc) for (r, c), (dr, dc) in zip(pts, jitter[: len(pts)])]
        for a, b in zip(pts[:-1], pts[1:]):
            dist = np.minimum(dist, _segment_distance(py, px, a, b))
    # unit-width soft edge at half the stroke width
    return np.clip(width / 2 + 0.5 - dist, 0.0, 1.0)


def glyph(name: str, size: int = 28, width: float = 2.2) -> np.ndarray:
    if name not in GLYPHS:
        raise ValidationError(f"unknown glyph {name!r}; choose from {sorted(GLYPHS)}")
    return render_strokes(GLYPHS[name], size, width)


def random_glyph(rng: np.random.Generator, size: int = 28, n_points: int = 6, width: float = 2.2) -> np.ndarray:
    """A random-walk scribble inside the central region of the frame."""
    pts = [tuple(rng.uniform(0.2, 0.8, size=2))]
    for _ in range(n_points - 1):
        step = rng.normal(0.0, 0.22, size=2)
        pts.append(tuple(np.clip(np.array(pts[-1]) + step, 0.15, 0.85)))
    return render_strokes([pts], size, width)


def random_scene(
    rng: np.random.Generator,
    n_objects: int,
    shape: tuple[int, int] = (28, 28),
    min_separation: int = 2,
    max_size: int = 6,
    max_tries: int = 2000,
) -> np.ndarray:
    """Binary-ish scene of ``n_objects`` filled rectangles/crosses/diagonals
    kept at least ``min_separation`` blank pixels apart (Chebyshev)."""
    h, w = shape
    scene = np.zeros(shape)
    occupied = np.zeros(shape, dtype=bool)
    placed = 0
    for _ in range(max_tries):
        if placed == n_objects:
            break
        sh, sw = rng.integers(1, max_size + 1, size=2)
        if sh > h or sw > w:
            continue
        y, x = rng.integers(0, h - sh + 1), rng.integers(0, w - sw + 1)
        kind = rng.integers(3)
        block = np.ones((sh, sw), dtype=bool)
        if kind == 1 and sh >= 3 and sw >= 3:
            block[:] = False
            block[sh // 2, :] = True
            block[:, sw // 2] = True
        elif kind == 2:
            m = min(sh, sw)
            block = np.zeros((m, m), dtype=bool)
            block[np.arange(m), np.arange(m)] = True
            sh = sw = m
        m = min_separation
        halo = occupied[max(0, y - m) : y + sh + m, max(0, x - m) : x + sw + m]
        if halo.any():
            continue
        scene[y : y + sh, x : x + sw][block] = rng.uniform(0.5, 1.0)
        occupied[y : y + sh, x : x + sw] |= block
        placed += 1
    if placed != n_objects:
        raise ValidationError(f"could only place {placed} of {n_objects} objects")
    return scene
