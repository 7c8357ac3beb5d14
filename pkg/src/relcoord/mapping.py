"""Mapping matrices between two patch sets.

Rows index patches of the deformed (target) image, columns index patches of
the original (source) image. A row's binary entry says which source patch
fills that target slot.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from relcoord.errors import ValidationError
from relcoord.image_io import as_image
from relcoord.patching import DIHEDRAL_ORDER, PatchConfig, dihedral, extract_patches, patch_stack
from relcoord.spectral import SamplerVector, average_sampler_vectors, sampler_vectors

ENTROPY_EPS = 1e-12
ZERO_NORM = 1e-12


@dataclass
class MappingMatrix:
    soft: np.ndarray
    binary: np.ndarray
    row_entropy: np.ndarray
    # per-row square symmetry applied to the source patch when it is placed
    orientation: Optional[np.ndarray] = None

    def __post_init__(self):
        self.soft = np.asarray(self.soft, dtype=np.float64)
        self.binary = np.asarray(self.binary, dtype=np.int8)
        self.row_entropy = np.asarray(self.row_entropy, dtype=np.float64)
        if self.soft.shape != self.binary.shape:
            raise ValidationError("soft and binary parts differ in shape")
        if self.row_entropy.shape != (self.soft.shape[0],):
            raise ValidationError("one entropy per row is required")
        if self.orientation is not None:
            self.orientation = np.asarray(self.orientation, dtype=np.int64)
            if self.orientation.shape != (self.soft.shape[0],):
                raise ValidationError("one orientation per row is required")

    @property
    def shape(self) -> tuple[int, int]:
        return self.binary.shape

    @property
    def rows(self) -> int:
        return self.binary.shape[0]

    @property
    def cols(self) -> int:
        return self.binary.shape[1]

    @property
    def assignment(self) -> np.ndarray:
        """Source column chosen by each row."""
        return np.argmax(self.binary, axis=1)

    @classmethod
    def from_assignment(cls, assignment, cols: Optional[int] = None, orientation=None) -> "MappingMatrix":
        """Build a mapping whose soft part equals its binary part."""
        assignment = np.asarray(assignment, dtype=np.int64)
        cols = len(assignment) if cols is None else cols
        binary = np.zeros((len(assignment), cols), dtype=np.int8)
        binary[np.arange(len(assignment)), assignment] = 1
        return cls(binary.astype(np.float64), binary, row_entropy(binary), orientation)

    def to_json(self) -> dict:
        d = {
            "shape": list(self.shape),
            "assignment": self.assignment.tolist(),
            "soft": self.soft.tolist(),
            "row_entropy": self.row_entropy.tolist(),
        }
        if self.orientation is not None:
            d["orientation"] = self.orientation.tolist()
        return d

    @classmethod
    def from_json(cls, d: dict) -> "MappingMatrix":
        rows, cols = d["shape"]
        binary = np.zeros((rows, cols), dtype=np.int8)
        binary[np.arange(rows), d["assignment"]] = 1
        return cls(np.array(d["soft"]).reshape(rows, cols), binary, np.array(d["row_entropy"]), d.get("orientation"))

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def _feature_matrix(svs: Sequence[SamplerVector]) -> np.ndarray:
    if not svs:
        raise ValidationError("empty sampler-vector list")
    lengths = {len(v.as_array()) for v in svs}
    if len(lengths) != 1:
        raise ValidationError(f"sampler vectors of differing lengths {sorted(lengths)}")
    return np.stack([v.as_array() for v in svs])


def similarity_matrix(source_svs: Sequence[SamplerVector], target_svs: Sequence[SamplerVector]) -> np.ndarray:
    """Cosine similarity, rows = target patches, columns = source patches.

    Two zero vectors are fully similar (1); a zero vector against a non-zero
    one scores 0.
    """
    src = _feature_matrix(source_svs)
    tgt = _feature_matrix(target_svs)
    if src.shape[1] != tgt.shape[1]:
        raise ValidationError("source and target sampler vectors differ in length")
    ns = np.linalg.norm(src, axis=1)
    nt = np.linalg.norm(tgt, axis=1)
    zs, zt = ns <= ZERO_NORM, nt <= ZERO_NORM
    src_u = src / np.where(zs, 1.0, ns)[:, None]
    tgt_u = tgt / np.where(zt, 1.0, nt)[:, None]
    sim = np.clip(tgt_u @ src_u.T, -1.0, 1.0)
    sim[np.ix_(zt, ~zs)] = 0.0
    sim[np.ix_(~zt, zs)] = 0.0
    sim[np.ix_(zt, zs)] = 1.0
    return sim


def row_entropy(m) -> np.ndarray:
    """Shannon entropy (nats) of each row, read as a distribution after clipping negatives."""
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2 or a.size == 0:
        raise ValidationError("row_entropy needs a non-empty 2-D matrix")
    p = np.clip(a, 0.0, None) + ENTROPY_EPS
    p /= p.sum(axis=1, keepdims=True)
    return -(p * np.log(p)).sum(axis=1)


def binarize(m) -> MappingMatrix:
    """Greedy conflict-free assignment, most confident (lowest entropy) rows first.

    Each row takes its best column not already taken; ties go to the lower
    index, both between rows of equal entropy and between equal columns.
    """
    soft = np.asarray(m, dtype=np.float64)
    if soft.ndim != 2 or soft.size == 0:
        raise ValidationError("binarize needs a non-empty 2-D matrix")
    rows, cols = soft.shape
    if rows > cols:
        raise ValidationError(f"{rows} target rows cannot map injectively to {cols} columns")
    ent = row_entropy(soft)
    order = np.argsort(ent, kind="stable")
    used = np.zeros(cols, dtype=bool)
    binary = np.zeros((rows, cols), dtype=np.int8)
    for i in order:
        scores = np.where(used, -np.inf, soft[i])
        j = int(np.argmax(scores))
        binary[i, j] = 1
        used[j] = True
    return MappingMatrix(soft, binary, ent)


def average_mappings(mappings: Sequence[MappingMatrix]) -> np.ndarray:
    """Element-wise mean of the binary parts."""
    if not mappings:
        raise ValidationError("need at least one mapping")
    shape = mappings[0].shape
    for mp in mappings:
        if mp.shape != shape:
            raise ValidationError(f"mapping shapes differ: {mp.shape} vs {shape}")
    acc = np.zeros(shape)
    for mp in mappings:
        acc += mp.binary
    return acc / len(mappings)


def _check_pairs(pairs) -> list[tuple[np.ndarray, np.ndarray]]:
    if not pairs:
        raise ValidationError("need at least one training pair")
    out = [(as_image(s), as_image(t)) for s, t in pairs]
    shape = out[0][0].shape
    for s, t in out:
        if s.shape != shape or t.shape != shape:
            raise ValidationError("all training images must share dimensions")
    return out


def learn_orientation(
    sources: np.ndarray, targets: np.ndarray, assignment: np.ndarray
) -> np.ndarray:
    """Pick, per target slot, the square symmetry that best carries the chosen
    source patch onto the target patch, summed over all training pairs.

    ``sources`` and ``targets`` are (pairs, patches, k, k) stacks.
    """
    chosen = sources[:, assignment]  # (pairs, rows, k, k)
    cost = np.empty((DIHEDRAL_ORDER, targets.shape[1]))
    for g in range(DIHEDRAL_ORDER):
        moved = dihedral(chosen, g)
        cost[g] = ((moved - targets) ** 2).sum(axis=(0, 2, 3))
    # argmin keeps the identity on ties (blank or symmetric patches)
    return np.argmin(cost, axis=0)


def learn_mapping(
    pairs: Sequence[tuple[np.ndarray, np.ndarray]],
    config: PatchConfig = PatchConfig(),
    include_sums: bool = False,
    strategy: str = "vote",
    orient: bool = True,
) -> MappingMatrix:
    """Learn a patch mapping from (source, target) training pairs.

    ``strategy="vote"`` binarises every pair and averages the binary votes;
    ``strategy="average_vectors"`` averages the sampler vectors slot by slot
    over the pairs first and matches once (only sensible when the pairs share
    patch origins). Either way the final matrix is re-binarised.
    """
    pairs = _check_pairs(pairs)
    src_grids = [extract_patches(s, config) for s, _ in pairs]
    tgt_grids = [extract_patches(t, config) for _, t in pairs]
    src_svs = [sampler_vectors(g.patches, include_sums) for g in src_grids]
    tgt_svs = [sampler_vectors(g.patches, include_sums) for g in tgt_grids]

    if strategy == "vote":
        votes = [binarize(similarity_matrix(s, t)) for s, t in zip(src_svs, tgt_svs)]
        averaged = average_mappings(votes)
    elif strategy == "average_vectors":
        src_mean = [average_sampler_vectors(col) for col in zip(*src_svs)]
        tgt_mean = [average_sampler_vectors(col) for col in zip(*tgt_svs)]
        averaged = similarity_matrix(src_mean, tgt_mean)
    else:
        raise ValidationError(f"unknown strategy {strategy!r}")

    final = binarize(averaged)
    if orient:
        final.orientation = learn_orientation(
            np.stack([patch_stack(g) for g in src_grids]),
            np.stack([patch_stack(g) for g in tgt_grids]),
            final.assignment,
        )
    return final
