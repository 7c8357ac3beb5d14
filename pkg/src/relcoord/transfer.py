"""Synthesize the deformed version of a new image from a learned mapping."""

from __future__ import annotations

import numpy as np

from relcoord.errors import ValidationError
from relcoord.image_io import as_image
from relcoord.mapping import MappingMatrix
from relcoord.patching import PatchConfig, assemble_image, dihedral, extract_patches


def apply_mapping(
    mapping: MappingMatrix,
    test,
    config: PatchConfig = PatchConfig(),
    orient: bool = True,
) -> np.ndarray:
    """Move the patches of ``test`` into the slots ``mapping`` assigns them.

    Placements run in decreasing row entropy, so where windows overlap the
    most confident rows are painted last and win. With ``orient`` the per-row
    symmetry learned alongside the mapping is applied to each patch; without
    it (or when the mapping carries none) patches are placed as they are.
    """
    img = as_image(test)
    grid = extract_patches(img, config)
    if len(grid) != mapping.cols:
        raise ValidationError(
            f"test image yields {len(grid)} patches, mapping expects {mapping.cols}"
        )
    if mapping.rows > len(grid):
        raise ValidationError("mapping has more target slots than the output grid")
    assignment = mapping.assignment
    use_orientation = orient and mapping.orientation is not None
    order = np.argsort(-mapping.row_entropy, kind="stable")
    placements = []
    for i in order:
        block = grid[int(assignment[i])].values
        if use_orientation:
            block = dihedral(block, int(mapping.orientation[i]))
        placements.append((int(i), block, float(-mapping.row_entropy[i])))
    return assemble_image(grid.shape, placements, config, img.shape)


def induced_assignment(shape: tuple[int, int], config: PatchConfig, spec) -> tuple[np.ndarray, np.ndarray]:
    """Slot permutation a deformation induces on the patch grid.

    Every pixel is labelled with its source slot and carried through
    ``deform``; each target slot takes its majority label. Returns the
    assignment and a mask of target slots filled by a single source slot.
    """
    from relcoord.image_io import deform

    h, w = shape
    rows, cols = config.grid_shape(h, w)
    k, s = config.patch_size, config.stride
    n = rows * cols
    labels = np.full((h, w), n, dtype=np.int64)  # n marks pixels outside every window
    for slot in range(n):
        y, x = config.origin(slot, cols)
        labels[y : y + k, x : x + k] = slot
    # encode labels as intensities; nearest-neighbour resampling copies them exactly
    moved = deform((labels + 1) / (n + 1), spec)
    moved = np.rint(moved * (n + 1)).astype(np.int64) - 1
    assignment = np.zeros(n, dtype=np.int64)
    pure = np.zeros(n, dtype=bool)
    for slot in range(n):
        y, x = config.origin(slot, cols)
        block = moved[y : y + k, x : x + k].ravel()
        values, counts = np.unique(block, return_counts=True)
        best = values[np.argmax(counts)]
        assignment[slot] = best if 0 <= best < n else slot
        pure[slot] = len(values) == 1 and 0 <= best < n
    return assignment, pure
