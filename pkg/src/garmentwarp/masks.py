"""Mask refinement, arm/hand region derivation, person preprocessing and the
free-form brush-stroke mask generator.

Refinement is deterministic morphology: it fills the holes and smooths the
noisy boundary of a coarsely warped garment mask so it can bound UV
inpainting. A mask that is already clean (e.g. a solid rectangle) passes
through unchanged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from PIL import Image, ImageDraw
from scipy import ndimage

from .rasters import BinaryMask, DensePoseMap, RgbImage, _require_same_shape

# Arm and hand entries of the standard 24-part body chart.
ARM_HAND_PARTS = frozenset({3, 4, 15, 16, 17, 18, 19, 20, 21, 22})

_CROSS_4 = ndimage.generate_binary_structure(2, 1)


@dataclass(frozen=True)
class RefineParams:
    """Knobs for refine_mask; all radii in pixels, hole area in pixels^2."""

    close_radius: int = 5
    min_hole_area: int = 64
    smooth_radius: int = 3

    def __post_init__(self):
        if self.close_radius < 0 or self.min_hole_area < 0 or self.smooth_radius < 0:
            raise ValueError("refine parameters must be non-negative")


def _disk(radius: int) -> np.ndarray:
    y, x = np.ogrid[-radius : radius + 1, -radius : radius + 1]
    return x * x + y * y <= radius * radius


def _box(radius: int) -> np.ndarray:
    return np.ones((2 * radius + 1, 2 * radius + 1), dtype=bool)


def _padded_close(mask: np.ndarray, structure: np.ndarray) -> np.ndarray:
    # Pad with background so the erosion step cannot eat the image border.
    r = structure.shape[0] // 2
    if r == 0:
        return mask
    padded = np.pad(mask, r, mode="constant", constant_values=False)
    closed = ndimage.binary_closing(padded, structure=structure)
    return closed[r:-r, r:-r]


def _fill_small_holes(mask: np.ndarray, max_area: int) -> np.ndarray:
    """Fill background components not touching the border with area < max_area.

    Background connectivity is 4-neighbor (the complement of 8-connected
    foreground).
    """
    if max_area <= 0:
        return mask
    labels, n = ndimage.label(~mask, structure=_CROSS_4)
    if n == 0:
        return mask
    border = np.unique(
        np.concatenate([labels[0, :], labels[-1, :], labels[:, 0], labels[:, -1]])
    )
    sizes = np.bincount(labels.ravel(), minlength=n + 1)
    fill = np.zeros(n + 1, dtype=bool)
    fill[1:] = sizes[1:] < max_area
    fill[border] = False
    return mask | fill[labels]


def refine_mask(coarse: BinaryMask, params: RefineParams = RefineParams()) -> BinaryMask:
    """Clean a coarsely warped garment mask.

    Stages: close with a disk of ``close_radius`` (bridges speckle gaps),
    fill enclosed holes smaller than ``min_hole_area``, then open and close
    with a box of side 2*``smooth_radius``+1 to knock protrusions and notches
    off the boundary. The box kernel keeps straight edges and corners intact.
    """
    m = coarse.bits
    if params.close_radius > 0:
        m = _padded_close(m, _disk(params.close_radius))
    m = _fill_small_holes(m, params.min_hole_area)
    if params.smooth_radius > 0:
        box = _box(params.smooth_radius)
        m = ndimage.binary_opening(m, structure=box)
        m = _padded_close(m, box)
    return BinaryMask(m)


def derive_arm_mask(p_dp: DensePoseMap, warped_validity: BinaryMask) -> BinaryMask:
    """Arm/hand pixels not covered by the warped garment."""
    _require_same_shape("densepose", p_dp.i, "validity", warped_validity.bits)
    arms = np.isin(p_dp.i, list(ARM_HAND_PARTS))
    return BinaryMask(arms & ~warped_validity.bits)


def preprocess_person(p: RgbImage, upper_mask: BinaryMask, skin_mask: BinaryMask) -> RgbImage:
    """Blank the upper-body region with the mean skin color.

    Falls back to mid-gray when the skin mask is empty.
    """
    _require_same_shape("image", p.pixels, "upper mask", upper_mask.bits)
    _require_same_shape("image", p.pixels, "skin mask", skin_mask.bits)
    if skin_mask.bits.any():
        fill = p.pixels[skin_mask.bits].astype(np.float64).mean(axis=0)
    else:
        fill = np.array([0.5, 0.5, 0.5])
    out = p.pixels.copy()
    out[upper_mask.bits] = fill.astype(np.float32)
    return RgbImage(out)


@dataclass(frozen=True)
class BrushSpec:
    """Parameters of the random brush-stroke mask generator.

    Count ranges are inclusive. ``max_turn_angle`` bounds the direction
    change per segment, in radians. The same spec (including seed) always
    produces the same mask.
    """

    stroke_count_range: tuple[int, int] = (1, 5)
    vertex_count_range: tuple[int, int] = (4, 12)
    brush_width_range: tuple[int, int] = (8, 32)
    max_turn_angle: float = math.radians(100.0)
    seed: int = 0

    def __post_init__(self):
        for name, (lo, hi) in (
            ("stroke_count_range", self.stroke_count_range),
            ("vertex_count_range", self.vertex_count_range),
            ("brush_width_range", self.brush_width_range),
        ):
            if hi < lo:
                raise ValueError(f"{name} is empty: {(lo, hi)}")
        if self.stroke_count_range[0] < 0 or self.vertex_count_range[0] < 0:
            raise ValueError("counts must be non-negative")
        if self.brush_width_range[0] < 1:
            raise ValueError("brush widths must be positive")


# Segment length as a fraction of the image diagonal; fixed so masks keep a
# comparable coverage across image sizes.
_SEGMENT_LENGTH_FRAC = (0.04, 0.12)


def free_form_mask(width: int, height: int, spec: BrushSpec = BrushSpec()) -> BinaryMask:
    """Union of random thick polyline strokes with disk caps at each vertex."""
    if width < 1 or height < 1:
        raise ValueError("mask dimensions must be positive")
    rng = np.random.default_rng(spec.seed)
    canvas = Image.new("L", (width, height), 0)
    draw = ImageDraw.Draw(canvas)
    diag = math.hypot(width, height)
    seg_lo = _SEGMENT_LENGTH_FRAC[0] * diag
    seg_hi = _SEGMENT_LENGTH_FRAC[1] * diag
    strokes = int(rng.integers(spec.stroke_count_range[0], spec.stroke_count_range[1] + 1))
    for _ in range(strokes):
        brush = int(rng.integers(spec.brush_width_range[0], spec.brush_width_range[1] + 1))
        x = float(rng.uniform(0, width))
        y = float(rng.uniform(0, height))
        angle = float(rng.uniform(0, 2 * math.pi))
        segments = int(rng.integers(spec.vertex_count_range[0], spec.vertex_count_range[1] + 1))
        points = [(x, y)]
        for _ in range(segments):
            angle += float(rng.uniform(-spec.max_turn_angle, spec.max_turn_angle))
            length = float(rng.uniform(seg_lo, seg_hi))
            x += length * math.cos(angle)
            y += length * math.sin(angle)
            points.append((x, y))
        if len(points) > 1:
            draw.line(points, fill=255, width=brush)
        r = brush / 2.0
        for px, py in points:
            draw.ellipse([px - r, py - r, px + r, py + r], fill=255)
    return BinaryMask(np.asarray(canvas, dtype=np.uint8) > 0)
