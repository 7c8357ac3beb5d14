"""Patch Laplacians and their sampler vectors.

Every pixel pair in a patch is joined by an edge weighted
``|I(p) - I(q)| / dist(p, q)`` with distances in patch-local coordinates, so
the spectrum is unchanged by any symmetry of the square.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from relcoord.errors import NumericError, ValidationError
from relcoord.patching import Patch


@dataclass
class SamplerVector:
    eigenvalues: np.ndarray
    sums: Optional[np.ndarray] = None

    def __post_init__(self):
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=np.float64)
        if self.sums is not None:
            self.sums = np.asarray(self.sums, dtype=np.float64)
            if self.sums.shape != self.eigenvalues.shape:
                raise ValidationError("sums and eigenvalues differ in length")

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def as_array(self) -> np.ndarray:
        """Feature vector: eigenvalues, followed by sums when present."""
        if self.sums is None:
            return self.eigenvalues
        return np.concatenate([self.eigenvalues, self.sums])

    def to_json(self) -> dict:
        d = {"eigenvalues": self.eigenvalues.tolist()}
        if self.sums is not None:
            d["sums"] = self.sums.tolist()
        return d

    @classmethod
    def from_json(cls, d: dict) -> "SamplerVector":
        return cls(np.array(d["eigenvalues"]), None if "sums" not in d else np.array(d["sums"]))


@lru_cache(maxsize=32)
def _inverse_distances(h: int, w: int) -> np.ndarray:
    rows, cols = np.divmod(np.arange(h * w), w)
    dist = np.hypot(rows[:, None] - rows[None, :], cols[:, None] - cols[None, :])
    with np.errstate(divide="ignore"):
        inv = np.where(dist > 0, 1.0 / np.where(dist > 0, dist, 1.0), 0.0)
    inv.flags.writeable = False
    return inv


def weight_matrix(values) -> np.ndarray:
    block = np.asarray(values.values if isinstance(values, Patch) else values, dtype=np.float64)
    if block.ndim != 2 or block.size == 0:
        raise ValidationError("patch must be a non-empty 2-D block")
    v = block.ravel()
    return np.abs(v[:, None] - v[None, :]) * _inverse_distances(*block.shape)


def laplacian_from_weights(weights: np.ndarray) -> np.ndarray:
    return np.diag(weights.sum(axis=1)) - weights


def patch_laplacian(patch) -> np.ndarray:
    """L = D - W over the fully connected pixel graph of ``patch``.

    Accepts a ``Patch`` or a bare 2-D block (rectangular blocks are allowed;
    only square ones enjoy the full dihedral invariance).
    """
    return laplacian_from_weights(weight_matrix(patch))


def eigh(m) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvector columns of a symmetric matrix."""
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericError("matrix has non-finite entries")
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * scale):
        raise ValidationError("matrix is not symmetric")
    # LAPACK syevd via numpy; returns ascending order already
    vals, vecs = np.linalg.eigh(0.5 * (a + a.T))
    return vals, vecs


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude component is positive.

    Among components tied in magnitude (within 1e-12) the first one decides.
    """
    vecs = np.array(vectors, dtype=np.float64, copy=True)
    mags = np.abs(vecs)
    lead = np.argmax(mags >= mags.max(axis=0, keepdims=True) - 1e-12, axis=0)
    signs = np.sign(vecs[lead, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def sampler_vector(patch, include_sums: bool = False) -> SamplerVector:
    """Ascending Laplacian spectrum of ``patch``, optionally with eigenvector sums."""
    lap = patch_laplacian(patch)
    if not include_sums:
        vals = np.linalg.eigvalsh(lap)
        return SamplerVector(vals)
    vals, vecs = eigh(lap)
    vecs = fix_signs(vecs)
    return SamplerVector(vals, vecs.sum(axis=0))


def sampler_vectors(patches: Sequence, include_sums: bool = False) -> list[SamplerVector]:
    if not include_sums and len(patches) > 0:
        # batched path: one LAPACK call over the stacked Laplacians
        blocks = [p.values if isinstance(p, Patch) else np.asarray(p) for p in patches]
        if len({b.shape for b in blocks}) == 1:
            laps = np.stack([patch_laplacian(b) for b in blocks])
            return [SamplerVector(v) for v in np.linalg.eigvalsh(laps)]
    return [sampler_vector(p, include_sums) for p in patches]


def average_sampler_vectors(vectors: Sequence[SamplerVector]) -> SamplerVector:
    """Component-wise mean of equally shaped sampler vectors."""
    if not vectors:
        raise ValidationError("need at least one sampler vector")
    n = len(vectors[0])
    has_sums = vectors[0].sums is not None
    for v in vectors:
        if len(v) != n or (v.sums is not None) != has_sums:
            raise ValidationError("sampler vectors differ in length or in carrying sums")
    vals = np.mean([v.eigenvalues for v in vectors], axis=0)
    sums = np.mean([v.sums for v in vectors], axis=0) if has_sums else None
    return SamplerVector(vals, sums)


def dumps(vectors: Sequence[SamplerVector]) -> str:
    return json.dumps([v.to_json() for v in vectors])


def loads(text: str) -> list[SamplerVector]:
    return [SamplerVector.from_json(d) for d in json.loads(text)]
