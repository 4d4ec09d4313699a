"""Masked-image corruption for self-supervised pretraining inputs.

Three seeded stages: remove whole patches, sparsify a fraction of the
survivors by dropping pixels, then jitter the remaining content with a
per-channel affine color map. Every random draw comes from a counter-based
Philox stream keyed by (seed, stage tag), so results are reproducible
across platforms and parallel workers, and the color stage can never
perturb the masking stages.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .conditioning import validate_color_image
from .errors import IndivisibleImage

# Philox substream tags, one per independent decision.
_TAG_PATCH_REMOVAL = 1
_TAG_SPARSIFY_CHOICE = 2
_TAG_PIXEL_DROP = 3
_TAG_COLOR_AFFINE = 4
_TAG_SPEC_SAMPLING = 5


def _stream(seed: int, tag: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(key=np.array([seed & 0xFFFFFFFFFFFFFFFF, tag], dtype=np.uint64))
    )


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


@dataclass(frozen=True)
class CorruptionSpec:
    """Parameters of one corruption draw. gain/bias ranges are sampled per
    image inside corrupt(); everything else is a fixed scalar."""

    patch_size: int = 8
    patch_mask_ratio: float = 0.7
    sparsify_fraction: float = 0.5
    pixel_drop_prob: float = 0.6
    gain_range: tuple[float, float] = (0.8, 1.25)
    bias_range: tuple[float, float] = (-0.1, 0.1)
    seed: int = 0

    def __post_init__(self):
        if self.patch_size < 1:
            raise ValueError("patch_size must be >= 1")
        for name in ("patch_mask_ratio", "sparsify_fraction", "pixel_drop_prob"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if not (self.gain_range[0] > 0 and self.gain_range[0] <= self.gain_range[1]):
            raise ValueError(f"bad gain_range {self.gain_range}")
        if not (self.bias_range[0] <= self.bias_range[1]):
            raise ValueError(f"bad bias_range {self.bias_range}")


@dataclass(frozen=True)
class CorruptedImage:
    """image: corrupted float32 (H, W, 3); patch_mask: (rows, cols) bool grid,
    True = patch removed; pixel_mask: (H, W) bool, True = pixel retained."""

    image: np.ndarray
    patch_mask: np.ndarray
    pixel_mask: np.ndarray


def patch_grid(height: int, width: int, patch_size: int):
    """Row-major patch layout: (rows, cols, rects) where rects[k] is the
    (row_lo, row_hi, col_lo, col_hi) pixel rectangle of patch k."""
    if patch_size < 1 or height % patch_size or width % patch_size:
        raise IndivisibleImage(
            f"patch size {patch_size} does not divide {height}x{width}"
        )
    rows = height // patch_size
    cols = width // patch_size
    rects = [
        (r * patch_size, (r + 1) * patch_size, c * patch_size, (c + 1) * patch_size)
        for r in range(rows)
        for c in range(cols)
    ]
    return rows, cols, rects


def corrupt(image, spec: CorruptionSpec) -> CorruptedImage:
    """Apply the three-stage corruption; bit-identical for identical inputs."""
    img = validate_color_image(image).copy()
    h, w = img.shape[:2]
    rows, cols, rects = patch_grid(h, w, spec.patch_size)
    num_patches = rows * cols

    patch_mask = np.zeros((rows, cols), dtype=bool)
    pixel_mask = np.ones((h, w), dtype=bool)

    # stage 1: remove whole patches
    n_remove = _round_half_up(spec.patch_mask_ratio * num_patches)
    removed = _stream(spec.seed, _TAG_PATCH_REMOVAL).permutation(num_patches)[:n_remove]
    for k in removed:
        r0, r1, c0, c1 = rects[k]
        img[r0:r1, c0:c1] = 0.0
        pixel_mask[r0:r1, c0:c1] = False
        patch_mask[k // cols, k % cols] = True

    # stage 2: sparsify a fraction of the surviving patches
    removed_set = set(int(k) for k in removed)
    surviving = [k for k in range(num_patches) if k not in removed_set]
    n_sparse = _round_half_up(spec.sparsify_fraction * len(surviving))
    pick = _stream(spec.seed, _TAG_SPARSIFY_CHOICE).permutation(len(surviving))[:n_sparse]
    drop_field = _stream(spec.seed, _TAG_PIXEL_DROP).random((h, w))
    for j in pick:
        r0, r1, c0, c1 = rects[surviving[j]]
        dropped = drop_field[r0:r1, c0:c1] < spec.pixel_drop_prob
        block = img[r0:r1, c0:c1]
        block[dropped] = 0.0
        pixel_mask[r0:r1, c0:c1] &= ~dropped

    # stage 3: per-channel affine on retained content only
    rng = _stream(spec.seed, _TAG_COLOR_AFFINE)
    gains = rng.uniform(spec.gain_range[0], spec.gain_range[1], size=3)
    biases = rng.uniform(spec.bias_range[0], spec.bias_range[1], size=3)
    jittered = np.clip(img.astype(np.float64) * gains + biases, 0.0, 1.0).astype(
        np.float32
    )
    img[pixel_mask] = jittered[pixel_mask]

    return CorruptedImage(img, patch_mask, pixel_mask)


def sample_spec(seed: int, patch_size: int = 8) -> CorruptionSpec:
    """Default per-sample draw: high MAE-style mask ratios and mild exposure
    jitter. patch_mask_ratio ~ U[0.5, 0.9], pixel_drop_prob ~ U[0.3, 0.9]."""
    rng = _stream(seed, _TAG_SPEC_SAMPLING)
    return CorruptionSpec(
        patch_size=patch_size,
        patch_mask_ratio=float(rng.uniform(0.5, 0.9)),
        sparsify_fraction=0.5,
        pixel_drop_prob=float(rng.uniform(0.3, 0.9)),
        gain_range=(0.8, 1.25),
        bias_range=(-0.1, 0.1),
        seed=seed,
    )


def spec_to_dict(spec: CorruptionSpec) -> dict:
    return {
        "patch_size": spec.patch_size,
        "patch_mask_ratio": spec.patch_mask_ratio,
        "sparsify_fraction": spec.sparsify_fraction,
        "pixel_drop_prob": spec.pixel_drop_prob,
        "gain_range": list(spec.gain_range),
        "bias_range": list(spec.bias_range),
        "seed": spec.seed,
    }


def spec_from_dict(data: dict) -> CorruptionSpec:
    base = CorruptionSpec()
    kwargs = {}
    for name in (
        "patch_size",
        "patch_mask_ratio",
        "sparsify_fraction",
        "pixel_drop_prob",
        "seed",
    ):
        if name in data:
            kwargs[name] = data[name]
    for name in ("gain_range", "bias_range"):
        if name in data:
            kwargs[name] = tuple(data[name])
    return replace(base, **kwargs)
