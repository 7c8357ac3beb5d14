"""Coordinate-free spectral patch features and deformation transfer."""

from relcoord.errors import (
    DivergenceError,
    FormatError,
    NumericError,
    RelcoordError,
    TruncatedFileError,
    ValidationError,
)
from relcoord.image_io import (
    DeformSpec,
    ImageSet,
    augment,
    augment_pairs,
    deform,
    load_idx,
    load_pgm,
    save_pgm,
)
from relcoord.patching import PatchConfig, Patch, PatchGrid, assemble_image, extract_patches
from relcoord.spectral import (
    SamplerVector,
    average_sampler_vectors,
    eigh,
    patch_laplacian,
    sampler_vector,
)
from relcoord.mapping import (
    MappingMatrix,
    average_mappings,
    binarize,
    learn_mapping,
    row_entropy,
    similarity_matrix,
)
from relcoord.transfer import apply_mapping
from relcoord.analogy import (
    compose,
    is_inverse,
    mapping_similarity,
    second_level_mapping,
    solve_raven,
)
from relcoord.dynamics import (
    DynamicsConfig,
    TemporalSignal,
    analytic_response,
    recover_frequencies,
    simulate,
)
from relcoord.numerosity import count_objects, foreground_graph

__version__ = "0.1.0"

__all__ = [
    "DeformSpec",
    "DivergenceError",
    "DynamicsConfig",
    "FormatError",
    "ImageSet",
    "MappingMatrix",
    "NumericError",
    "Patch",
    "PatchConfig",
    "PatchGrid",
    "RelcoordError",
    "SamplerVector",
    "TemporalSignal",
    "TruncatedFileError",
    "ValidationError",
    "analytic_response",
    "apply_mapping",
    "assemble_image",
    "augment",
    "augment_pairs",
    "average_mappings",
    "average_sampler_vectors",
    "binarize",
    "compose",
    "count_objects",
    "deform",
    "eigh",
    "extract_patches",
    "foreground_graph",
    "is_inverse",
    "learn_mapping",
    "load_idx",
    "load_pgm",
    "mapping_similarity",
    "patch_laplacian",
    "recover_frequencies",
    "row_entropy",
    "sampler_vector",
    "save_pgm",
    "second_level_mapping",
    "similarity_matrix",
    "simulate",
    "solve_raven",
]
