"""Image containers, IDX/PGM codecs, ground-truth deformations and augmentation.

Images are plain 2-D ``float64`` arrays with intensities in ``[0, 1]``.
"""

from __future__ import annotations

import gzip
import os
import struct
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from relcoord.errors import FormatError, TruncatedFileError, ValidationError

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801


def as_image(array) -> np.ndarray:
    """Validate and return ``array`` as a float image in [0, 1]."""
    img = np.asarray(array, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ValidationError(f"image must be a non-empty 2-D array, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValidationError("image contains non-finite intensities")
    if img.min() < 0.0 or img.max() > 1.0:
        raise ValidationError("image intensities must lie in [0, 1]")
    return img


@dataclass
class ImageSet:
    images: np.ndarray  # (count, height, width)
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.labels is not None and len(self.labels) != len(self.images):
            raise ValidationError(
                f"{len(self.labels)} labels for {len(self.images)} images"
            )

    def __len__(self) -> int:
        return len(self.images)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.images[i]


@dataclass
class DeformSpec:
    """Ground-truth geometric deformation.

    ``rotation`` turns counter-clockwise (as displayed, rows pointing down)
    about the image centre. ``affine`` maps centred (row, col) coordinates
    ``p`` to ``linear @ p + offset``.
    """

    kind: str = "rotation"
    angle_degrees: float = 0.0
    linear: np.ndarray = field(default_factory=lambda: np.eye(2))
    offset: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        if self.kind not in ("rotation", "affine"):
            raise ValidationError(f"unknown deformation kind {self.kind!r}")
        self.linear = np.asarray(self.linear, dtype=np.float64).reshape(2, 2)
        self.offset = np.asarray(self.offset, dtype=np.float64).reshape(2)
        if self.kind == "affine" and abs(np.linalg.det(self.linear)) <= 1e-12:
            raise ValidationError("affine linear part is not invertible")

    @classmethod
    def rotation(cls, angle_degrees: float) -> "DeformSpec":
        return cls(kind="rotation", angle_degrees=float(angle_degrees))

    @classmethod
    def affine(cls, linear, offset=(0.0, 0.0)) -> "DeformSpec":
        return cls(kind="affine", linear=linear, offset=offset)

    def forward_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (A, b) mapping centred source coords to centred target coords."""
        if self.kind == "affine":
            return self.linear, self.offset
        theta = np.deg2rad(self.angle_degrees)
        c, s = np.cos(theta), np.sin(theta)
        # snap so that quarter turns are exact permutations
        c = float(np.rint(c)) if abs(c - np.rint(c)) < 1e-12 else c
        s = float(np.rint(s)) if abs(s - np.rint(s)) < 1e-12 else s
        # counter-clockwise on screen with (row, col) axes
        return np.array([[c, -s], [s, c]]), np.zeros(2)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "angle_degrees": self.angle_degrees,
            "linear": self.linear.tolist(),
            "offset": self.offset.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DeformSpec":
        return cls(
            kind=d.get("kind", "rotation"),
            angle_degrees=d.get("angle_degrees", 0.0),
            linear=d.get("linear", np.eye(2)),
            offset=d.get("offset", (0.0, 0.0)),
        )


def _open(path):
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, "rb")
    return open(path, "rb")


def _read_idx(path, expected_magic: int) -> np.ndarray:
    with _open(path) as f:
        header = f.read(4)
        if len(header) < 4:
            raise TruncatedFileError(f"{path}: missing IDX magic")
        (magic,) = struct.unpack(">I", header)
        if magic != expected_magic:
            raise FormatError(f"{path}: bad IDX magic 0x{magic:08x}")
        ndim = magic & 0xFF
        raw = f.read(4 * ndim)
        if len(raw) < 4 * ndim:
            raise TruncatedFileError(f"{path}: truncated IDX header")
        dims = struct.unpack(f">{ndim}I", raw)
        count = int(np.prod(dims))
        payload = f.read(count)
        if len(payload) < count:
            raise TruncatedFileError(
                f"{path}: expected {count} payload bytes, found {len(payload)}"
            )
    return np.frombuffer(payload, dtype=np.uint8).reshape(dims)


def load_idx(path, labels_path=None) -> ImageSet:
    """Read an IDX image file (and optionally its label file) into an ImageSet."""
    images = _read_idx(path, IDX_IMAGE_MAGIC).astype(np.float64) / 255.0
    labels = None
    if labels_path is not None:
        labels = _read_idx(labels_path, IDX_LABEL_MAGIC).astype(np.int64)
    return ImageSet(images=images, labels=labels)


def save_idx(images, path) -> None:
    """Write images as an IDX3 ubyte file.

    uint8 arrays are written verbatim; anything else must be floats in [0, 1].
    """
    arr = np.asarray(images)
    if arr.ndim != 3:
        raise ValidationError("save_idx expects a (count, height, width) array")
    if arr.dtype == np.uint8:
        data = arr
    else:
        arr = arr.astype(np.float64)
        if not np.all(np.isfinite(arr)) or arr.min(initial=0.0) < 0.0 or arr.max(initial=0.0) > 1.0:
            raise ValidationError("float images must lie in [0, 1]")
        data = np.rint(arr * 255.0).astype(np.uint8)
    header = struct.pack(">I", IDX_IMAGE_MAGIC) + struct.pack(">3I", *data.shape)
    _atomic_write(path, header + data.tobytes())


def save_idx_labels(labels, path) -> None:
    data = np.asarray(labels, dtype=np.uint8)
    header = struct.pack(">I", IDX_LABEL_MAGIC) + struct.pack(">I", len(data))
    _atomic_write(path, header + data.tobytes())


def _atomic_write(path, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _pgm_tokens(data: bytes, count: int, start: int) -> tuple[list[bytes], int]:
    # whitespace-separated header tokens, '#' comments run to end of line
    tokens = []
    i = start
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < n and not data[j : j + 1].isspace() and data[j : j + 1] != b"#":
            j += 1
        if j == i:
            raise TruncatedFileError("PGM header ended early")
        tokens.append(data[i:j])
        i = j
    return tokens, i


def load_pgm(path) -> np.ndarray:
    """Read a P2 (ASCII) or P5 (binary) greymap with maxval <= 255."""
    data = Path(path).read_bytes()
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise FormatError(f"{path}: unsupported PNM magic {magic!r}")
    (w, h, maxval), pos = _pgm_tokens(data, 3, 2)
    width, height, maxval = int(w), int(h), int(maxval)
    if not 0 < maxval <= 255:
        raise FormatError(f"{path}: maxval {maxval} not in 1..255")
    count = width * height
    if magic == b"P5":
        payload = data[pos + 1 : pos + 1 + count]
        if len(payload) < count:
            raise TruncatedFileError(f"{path}: truncated P5 raster")
        values = np.frombuffer(payload, dtype=np.uint8).astype(np.float64)
    else:
        tokens = data[pos:].split()
        if len(tokens) < count:
            raise TruncatedFileError(f"{path}: truncated P2 raster")
        values = np.array([int(t) for t in tokens[:count]], dtype=np.float64)
    if values.max(initial=0) > maxval:
        raise FormatError(f"{path}: sample exceeds maxval")
    return values.reshape(height, width) / maxval


def save_pgm(image, path) -> None:
    """Write ``image`` as a binary P5 greymap (maxval 255)."""
    img = as_image(image)
    raster = np.rint(img * 255.0).astype(np.uint8)
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii")
    _atomic_write(path, header + raster.tobytes())


def deform(image, spec: DeformSpec) -> np.ndarray:
    """Resample ``image`` under ``spec`` by inverse mapping, nearest neighbour.

    Samples falling outside the frame are filled with 0. Quarter-turn
    rotations of square images are exact pixel permutations.
    """
    img = as_image(image)
    h, w = img.shape
    a, b = spec.forward_matrix()
    a_inv = np.linalg.inv(a)
    centre = np.array([(h - 1) / 2.0, (w - 1) / 2.0])
    rows, cols = np.mgrid[0:h, 0:w]
    target = np.stack([rows.ravel(), cols.ravel()], axis=0).astype(np.float64)
    source = a_inv @ (target - centre[:, None] - b[:, None]) + centre[:, None]
    # the tiny bias keeps exact .5 ties from depending on float noise
    src = np.rint(source + 1e-9).astype(np.int64)
    inside = (src[0] >= 0) & (src[0] < h) & (src[1] >= 0) & (src[1] < w)
    out = np.zeros(h * w)
    out[inside] = img[src[0, inside], src[1, inside]]
    return out.reshape(h, w)


def shift(image, dy: int, dx: int) -> np.ndarray:
    """Translate by integer offsets with zero fill."""
    img = np.asarray(image, dtype=np.float64)
    out = np.zeros_like(img)
    h, w = img.shape
    ys, yd = (slice(0, h - dy), slice(dy, h)) if dy >= 0 else (slice(-dy, h), slice(0, h + dy))
    xs, xd = (slice(0, w - dx), slice(dx, w)) if dx >= 0 else (slice(-dx, w), slice(0, w + dx))
    out[yd, xd] = img[ys, xs]
    return out


def augment(
    image,
    max_shift: int = 1,
    max_angle: float = 0.0,
    noise_sigma: float = 0.0,
    n: int = 1,
    seed: int = 0,
) -> list[np.ndarray]:
    """Saccade-style jitter: small rotation, integer shift, clamped Gaussian noise.

    Pure function of its arguments; the same ``seed`` yields the same list.
    """
    img = as_image(image)
    if n < 1:
        raise ValidationError("n must be at least 1")
    if noise_sigma < 0:
        raise ValidationError("noise_sigma must be non-negative")
    if max_shift < 0 or max_angle < 0:
        raise ValidationError("max_shift and max_angle must be non-negative")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        dy, dx = rng.integers(-max_shift, max_shift + 1, size=2)
        angle = rng.uniform(-max_angle, max_angle) if max_angle > 0 else 0.0
        noise = rng.normal(0.0, noise_sigma, size=img.shape) if noise_sigma > 0 else 0.0
        a = deform(img, DeformSpec.rotation(angle)) if angle != 0.0 else img.copy()
        a = shift(a, int(dy), int(dx))
        out.append(np.clip(a + noise, 0.0, 1.0))
    return out


def augment_pairs(
    image,
    spec: DeformSpec,
    max_shift: int = 1,
    max_angle: float = 0.0,
    noise_sigma: float = 0.0,
    n: int = 1,
    seed: int = 0,
    target_noise_sigma: float = 0.0,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Covarying training pairs: each target is the deformation of its jittered source.

    ``target_noise_sigma`` adds independent sensor noise to the targets only,
    drawn from a stream derived from ``seed``.
    """
    if target_noise_sigma < 0:
        raise ValidationError("target_noise_sigma must be non-negative")
    sources = augment(image, max_shift, max_angle, noise_sigma, n, seed)
    targets = [deform(s, spec) for s in sources]
    if target_noise_sigma > 0:
        rng = np.random.default_rng([seed, 1])
        targets = [np.clip(t + rng.normal(0.0, target_noise_sigma, t.shape), 0.0, 1.0) for t in targets]
    return list(zip(sources, targets))


def load_any(path) -> np.ndarray:
    """Load a single image from PGM, or the first image of an IDX file."""
    path = Path(path)
    head = _open(path).read(4)
    if head[:2] in (b"P2", b"P5", b"P3", b"P6"):
        return load_pgm(path)
    if len(head) == 4 and struct.unpack(">I", head)[0] == IDX_IMAGE_MAGIC:
        return load_idx(path).images[0]
    if path.suffix == ".npy":
        return as_image(np.load(path))
    raise FormatError(f"{path}: unrecognised image format")


def stack(images: Sequence[np.ndarray]) -> np.ndarray:
    return np.stack([as_image(i) for i in images])
