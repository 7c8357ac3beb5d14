"""Object counting from the multiplicity of the zero Laplacian eigenvalue.

The foreground mask is turned into an unweighted adjacency graph; its
Laplacian is block diagonal with one block per connected object, and each
block contributes exactly one zero eigenvalue.
"""

from __future__ import annotations

import numpy as np

from relcoord.errors import ValidationError
from relcoord.image_io import as_image

_OFFSETS = {
    4: [(0, 1), (1, 0)],
    8: [(0, 1), (1, 0), (1, 1), (1, -1)],
}


def _neighbourhood(neighborhood) -> list[tuple[int, int]]:
    key = {"4": 4, "8": 8, "4-connected": 4, "8-connected": 8}.get(str(neighborhood), neighborhood)
    if key not in _OFFSETS:
        raise ValidationError(f"neighborhood must be 4 or 8, got {neighborhood!r}")
    return _OFFSETS[key]


def foreground_graph(image, intensity_threshold: float = 0.1, neighborhood=8) -> np.ndarray:
    """Laplacian of the adjacency graph on pixels brighter than the threshold.

    Nodes are numbered in raster order of the foreground pixels. A blank image
    gives a 0x0 matrix.
    """
    img = as_image(image)
    if not 0.0 <= intensity_threshold < 1.0:
        raise ValidationError("intensity_threshold must lie in [0, 1)")
    mask = img > intensity_threshold
    ids = np.full(img.shape, -1, dtype=np.int64)
    ids[mask] = np.arange(int(mask.sum()))
    n = int(mask.sum())
    adj = np.zeros((n, n))
    h, w = img.shape
    for dy, dx in _neighbourhood(neighborhood):
        # pair each pixel with its (dy, dx) neighbour where both exist
        y0, y1 = 0, h - dy
        x0, x1 = max(0, -dx), w - max(0, dx)
        a = ids[y0:y1, x0:x1]
        b = ids[y0 + dy : y1 + dy, x0 + dx : x1 + dx]
        both = (a >= 0) & (b >= 0)
        adj[a[both], b[both]] = 1.0
        adj[b[both], a[both]] = 1.0
    return np.diag(adj.sum(axis=1)) - adj


def zero_eigenvalues(image, intensity_threshold: float = 0.1, eig_tolerance: float = 1e-8, neighborhood=8) -> np.ndarray:
    lap = foreground_graph(image, intensity_threshold, neighborhood)
    if lap.size == 0:
        return np.array([])
    if eig_tolerance <= 0:
        raise ValidationError("eig_tolerance must be positive")
    vals = np.linalg.eigvalsh(lap)
    return vals[np.abs(vals) <= eig_tolerance]


def count_objects(image, intensity_threshold: float = 0.1, eig_tolerance: float = 1e-8, neighborhood=8) -> int:
    """Number of near-zero eigenvalues of the foreground Laplacian."""
    return len(zero_eigenvalues(image, intensity_threshold, eig_tolerance, neighborhood))
