"""Analogies between mapping matrices: Raven-style solving, second-level
mappings, composition and inverse checks."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from relcoord.errors import ValidationError
from relcoord.image_io import as_image
from relcoord.mapping import MappingMatrix, learn_mapping, row_entropy
from relcoord.patching import PatchConfig, dihedral_compose


def mapping_similarity(a: MappingMatrix, b: MappingMatrix) -> float:
    """Fraction of rows whose assigned column agrees."""
    if a.shape != b.shape:
        raise ValidationError(f"mapping shapes differ: {a.shape} vs {b.shape}")
    return float(np.mean(a.assignment == b.assignment))


def solve_raven(
    a,
    b,
    c,
    candidates: Sequence,
    config: PatchConfig = PatchConfig(),
    include_sums: bool = False,
) -> tuple[int, list[float]]:
    """Pick the candidate D for which C -> D best matches the A -> B mapping.

    Returns the winning index (lowest on ties) and every candidate's score.
    """
    if len(candidates) < 2:
        raise ValidationError("need at least two candidates")
    a, b, c = as_image(a), as_image(b), as_image(c)
    cands = [as_image(d) for d in candidates]
    for img in (b, c, *cands):
        if img.shape != a.shape:
            raise ValidationError("all Raven images must share dimensions")
    m_ab = learn_mapping([(a, b)], config, include_sums, orient=False)
    scores = [
        mapping_similarity(m_ab, learn_mapping([(c, d)], config, include_sums, orient=False))
        for d in cands
    ]
    return int(np.argmax(scores)), scores


def second_level_mapping(
    pairs: Sequence[tuple[MappingMatrix, MappingMatrix]],
    config: PatchConfig,
    include_sums: bool = False,
) -> MappingMatrix:
    """Learn a mapping between mapping matrices, reading their soft parts as images."""
    if not pairs:
        raise ValidationError("need at least one pair of mappings")
    shape = pairs[0][0].soft.shape
    if shape[0] != shape[1]:
        raise ValidationError("second-level input must be square mappings")
    images = []
    for m1, m2 in pairs:
        if m1.soft.shape != shape or m2.soft.shape != shape:
            raise ValidationError("all mappings must share one square shape")
        images.append((np.clip(m1.soft, 0.0, 1.0), np.clip(m2.soft, 0.0, 1.0)))
    return learn_mapping(images, config, include_sums, orient=False)


def compose(m1: MappingMatrix, m2: MappingMatrix) -> MappingMatrix:
    """Mapping equivalent to applying ``m2`` first and then ``m1``.

    The binary part is the matrix product ``m1.binary @ m2.binary``.
    """
    if m1.cols != m2.rows:
        raise ValidationError(f"cannot compose {m1.shape} after {m2.shape}")
    product = (m1.binary.astype(np.int64) @ m2.binary.astype(np.int64)).astype(np.int8)
    orientation = None
    if m1.orientation is not None and m2.orientation is not None:
        orientation = dihedral_compose(m1.orientation, m2.orientation[m1.assignment])
    return MappingMatrix(product.astype(np.float64), product, row_entropy(product), orientation)


def fixed_fraction(m: MappingMatrix) -> float:
    if m.rows != m.cols:
        raise ValidationError("fixed points need a square mapping")
    return float(np.mean(np.diag(m.binary) == 1))


def is_inverse(m1: MappingMatrix, m2: MappingMatrix, threshold: float = 1.0) -> tuple[bool, float]:
    """Does ``m1`` undo ``m2``? Returns (fraction >= threshold, fraction of fixed slots)."""
    if m1.shape != m2.shape[::-1]:
        raise ValidationError(f"shapes {m1.shape} and {m2.shape} cannot be mutually inverse")
    frac = fixed_fraction(compose(m1, m2))
    return frac >= threshold, frac
