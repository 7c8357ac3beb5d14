"""Square patch extraction and reassembly.

A ``Patch`` knows only its own pixel block and an opaque sequence number;
where it sat in the image is recorded on the ``PatchGrid`` alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from relcoord.errors import ValidationError
from relcoord.image_io import as_image


@dataclass(frozen=True)
class PatchConfig:
    patch_size: int = 4
    stride: int = 4

    def __post_init__(self):
        if self.patch_size < 1:
            raise ValidationError("patch_size must be >= 1")
        if not 1 <= self.stride <= self.patch_size:
            raise ValidationError("stride must satisfy 1 <= stride <= patch_size")

    def grid_shape(self, height: int, width: int) -> tuple[int, int]:
        if self.patch_size > min(height, width):
            raise ValidationError(
                f"patch_size {self.patch_size} exceeds image {height}x{width}"
            )
        rows = (height - self.patch_size) // self.stride + 1
        cols = (width - self.patch_size) // self.stride + 1
        return rows, cols

    def origin(self, slot: int, cols: int) -> tuple[int, int]:
        r, c = divmod(slot, cols)
        return r * self.stride, c * self.stride


@dataclass(frozen=True, eq=False)
class Patch:
    values: np.ndarray
    index: int

    @property
    def size(self) -> int:
        return self.values.shape[0]


@dataclass
class PatchGrid:
    patches: list[Patch]
    rows: int
    cols: int
    config: PatchConfig
    height: int
    width: int

    def __len__(self) -> int:
        return len(self.patches)

    def __iter__(self):
        return iter(self.patches)

    def __getitem__(self, i: int) -> Patch:
        return self.patches[i]

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols


def extract_patches(image, config: PatchConfig) -> PatchGrid:
    """Cut ``image`` into raster-ordered windows; partial trailing windows are dropped."""
    img = as_image(image)
    rows, cols = config.grid_shape(*img.shape)
    k, s = config.patch_size, config.stride
    patches = []
    for r in range(rows):
        for c in range(cols):
            block = img[r * s : r * s + k, c * s : c * s + k].copy()
            block.flags.writeable = False
            patches.append(Patch(values=block, index=len(patches)))
    return PatchGrid(patches, rows, cols, config, img.shape[0], img.shape[1])


def assemble_image(
    grid_shape: tuple[int, int],
    placements: Iterable[tuple[int, Patch | np.ndarray, float]],
    config: PatchConfig,
    canvas: tuple[int, int],
) -> np.ndarray:
    """Paint patches into slots on a zero canvas, in the order given.

    Later placements overwrite earlier ones where windows overlap, so callers
    list the most trusted placements last.
    """
    rows, cols = grid_shape
    height, width = canvas
    k = config.patch_size
    out = np.zeros((height, width))
    for slot, patch, _confidence in placements:
        if not 0 <= slot < rows * cols:
            raise ValidationError(f"slot {slot} outside a {rows}x{cols} grid")
        values = patch.values if isinstance(patch, Patch) else np.asarray(patch)
        if values.shape != (k, k):
            raise ValidationError(f"patch shape {values.shape} does not match size {k}")
        y, x = config.origin(slot, cols)
        if y + k > height or x + k > width:
            raise ValidationError(f"slot {slot} does not fit the {height}x{width} canvas")
        out[y : y + k, x : x + k] = values
    return out


# The 8 distance-preserving symmetries of a square block: rot90 by k, then an
# optional transpose. Index g = 2*k + flip.
# Works on stacks: the last two axes are the block.
def dihedral(block: np.ndarray, g: int) -> np.ndarray:
    k, flip = divmod(g, 2)
    out = np.rot90(block, k, axes=(-2, -1))
    return np.swapaxes(out, -1, -2) if flip else out


DIHEDRAL_ORDER = 8


def patch_stack(grid: PatchGrid | Sequence[Patch]) -> np.ndarray:
    """(count, k, k) array of patch values."""
    return np.stack([p.values for p in grid])


def _dihedral_table() -> np.ndarray:
    probe = np.arange(9.0).reshape(3, 3)
    images = [dihedral(probe, g) for g in range(DIHEDRAL_ORDER)]
    table = np.empty((DIHEDRAL_ORDER, DIHEDRAL_ORDER), dtype=np.int64)
    for g1 in range(DIHEDRAL_ORDER):
        for g2 in range(DIHEDRAL_ORDER):
            both = dihedral(dihedral(probe, g2), g1)
            table[g1, g2] = next(g for g, im in enumerate(images) if np.array_equal(im, both))
    return table


DIHEDRAL_PRODUCT = _dihedral_table()


def dihedral_compose(g1, g2):
    """Symmetry equal to applying ``g2`` first, then ``g1``."""
    return DIHEDRAL_PRODUCT[g1, g2]
