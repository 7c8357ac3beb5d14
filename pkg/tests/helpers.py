"""Test-side conveniences built on the package (not independent oracles)."""

import numpy as np

from relcoord.mapping import similarity_matrix
from relcoord.patching import PatchConfig, extract_patches
from relcoord.spectral import sampler_vector


def content_slots(image, config=PatchConfig(4, 4), level=0.0):
    return np.array([p.values.max() > level for p in extract_patches(image, config)])


def distinct_slots(image, config=PatchConfig(4, 4)):
    """Content slots whose spectrum is not shared (up to scale) by any other patch."""
    svs = [sampler_vector(p) for p in extract_patches(image, config)]
    sim = similarity_matrix(svs, svs)
    np.fill_diagonal(sim, 0.0)
    return content_slots(image, config) & (sim.max(axis=1) < 1 - 1e-9)
