"""End-to-end garment warping through UV-space correspondence.

The full pipeline transports source-pixel coordinates (not colors) through
UV space: scatter garment coordinates into a per-part atlas, project the
target query mask into UV space, fill holes by per-part nearest-neighbor
inpainting, look the atlas up from the target frame to build a coordinate
grid, then gather colors from the full-resolution garment image by bilinear
sampling. Scattering RGB values instead of coordinates (use_grid=False)
reproduces the lower-fidelity direct-texture path for comparison.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .rasters import BinaryMask, DensePoseMap, RgbImage, _frozen, _require_same_shape, bilinear_sample
from .uv_atlas import (
    MissingSourceWarning,
    UvAtlas,
    _fill_parts,
    _scatter_mean,
    inpaint_nn,
    project_mask_to_uv,
    scatter_coords,
    texel_indices,
)


@dataclass(frozen=True, eq=False)
class CoordGrid:
    """Per-target-pixel source coordinates with a validity flag.

    ``x``/``y`` are real-valued source positions; they are only meaningful
    where ``valid`` is true, and then always lie inside the recorded source
    bounds.
    """

    x: np.ndarray
    y: np.ndarray
    valid: np.ndarray
    source_width: int
    source_height: int

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float32)
        y = np.asarray(self.y, dtype=np.float32)
        valid = np.asarray(self.valid, dtype=bool)
        _require_same_shape("x", x, "y", y)
        _require_same_shape("x", x, "valid", valid)
        if valid.any():
            vx = x[valid]
            vy = y[valid]
            if (
                vx.min() < 0
                or vx.max() > self.source_width - 1
                or vy.min() < 0
                or vy.max() > self.source_height - 1
            ):
                raise ValueError("valid grid coordinates outside source bounds")
        object.__setattr__(self, "x", _frozen(x.copy()))
        object.__setattr__(self, "y", _frozen(y.copy()))
        object.__setattr__(self, "valid", _frozen(valid.copy()))

    @property
    def width(self) -> int:
        return self.x.shape[1]

    @property
    def height(self) -> int:
        return self.x.shape[0]


@dataclass(frozen=True, eq=False)
class WarpResult:
    """A warped garment image plus the mask of pixels that found a source.

    Pixels with validity false are exactly black.
    """

    image: RgbImage
    validity: BinaryMask

    def __post_init__(self):
        _require_same_shape("image", self.image.pixels, "validity", self.validity.bits)
        px = self.image.pixels
        if not np.all(px[~self.validity.bits] == 0.0):
            px = px.copy()
            px[~self.validity.bits] = 0.0
            object.__setattr__(self, "image", RgbImage(px))


def _lookup_parts(
    payload: dict,
    valid: dict,
    p_dp: DensePoseMap,
    region: BinaryMask,
    resolution: int,
    nchan: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Read per-part texel payloads back into the target frame."""
    _require_same_shape("densepose", p_dp.i, "region", region.bits)
    out = np.zeros((p_dp.height, p_dp.width, nchan), dtype=np.float32)
    hit = np.zeros((p_dp.height, p_dp.width), dtype=bool)
    sel_all = region.bits & (p_dp.i > 0)
    for part, ok in valid.items():
        sel = sel_all & (p_dp.i == part)
        if not sel.any():
            continue
        rows, cols = np.nonzero(sel)
        a, b = texel_indices(p_dp.u[rows, cols], p_dp.v[rows, cols], resolution)
        found = ok[b, a]
        rows = rows[found]
        cols = cols[found]
        out[rows, cols] = payload[part][b[found], a[found]]
        hit[rows, cols] = True
    return out, hit


def build_coord_grid(atlas: UvAtlas, p_dp: DensePoseMap, region: BinaryMask) -> CoordGrid:
    """Look up the atlas from the target frame inside ``region``.

    A pixel gets the payload of the texel addressed by its (i, u, v) if that
    texel is valid; otherwise it is invalid, as are background pixels and
    pixels outside the region.
    """
    xy, hit = _lookup_parts(atlas.coords, atlas.valid, p_dp, region, atlas.resolution, 2)
    return CoordGrid(
        x=xy[:, :, 0],
        y=xy[:, :, 1],
        valid=hit,
        source_width=atlas.source_width,
        source_height=atlas.source_height,
    )


def gather(src: RgbImage, grid: CoordGrid) -> WarpResult:
    """Bilinearly sample the source image at every valid grid coordinate."""
    if (src.width, src.height) != (grid.source_width, grid.source_height):
        raise ValueError(
            f"grid was built for a {grid.source_width}x{grid.source_height} source, "
            f"got {src.width}x{src.height}"
        )
    out = np.zeros((grid.height, grid.width, 3), dtype=np.float32)
    rows, cols = np.nonzero(grid.valid)
    if rows.size:
        out[rows, cols] = bilinear_sample(src.pixels, grid.x[rows, cols], grid.y[rows, cols]).astype(
            np.float32
        )
    return WarpResult(RgbImage(out), BinaryMask(grid.valid.copy()))


def warp_coarse_mask(
    g_mask: BinaryMask, g_dp: DensePoseMap, p_dp: DensePoseMap, resolution: int
) -> BinaryMask:
    """Warp the garment mask by raw UV correspondence, with no inpainting.

    A target pixel is set iff its (i, u, v) addresses a texel that at least
    one masked garment pixel scattered into. The result typically has a noisy
    boundary and holes wherever the two maps' UV samples do not coincide.
    """
    atlas = scatter_coords(g_dp, g_mask, resolution)
    _, hit = _lookup_parts(
        atlas.coords, atlas.valid, p_dp, BinaryMask.full(p_dp.width, p_dp.height), resolution, 2
    )
    return BinaryMask(hit)


def warp_garment(
    g: RgbImage,
    g_dp: DensePoseMap,
    g_mask: BinaryMask,
    p_dp: DensePoseMap,
    query_mask: BinaryMask,
    resolution: int = 256,
    use_inpaint: bool = True,
    use_grid: bool = True,
    threads: int = 1,
) -> WarpResult:
    """Warp a garment image onto a target body-surface map.

    ``query_mask`` bounds the region being filled (validity is always a
    subset of it). With ``use_inpaint`` false, UV holes stay unfilled. With
    ``use_grid`` false, RGB values are scattered into the atlas instead of
    coordinates and colors are read back at texel resolution, skipping the
    full-resolution gather.
    """
    _require_same_shape("garment", g.pixels, "garment densepose", g_dp.i)
    _require_same_shape("garment", g.pixels, "garment mask", g_mask.bits)
    _require_same_shape("target densepose", p_dp.i, "query mask", query_mask.bits)
    if use_grid:
        atlas = scatter_coords(g_dp, g_mask, resolution)
        query = project_mask_to_uv(p_dp, query_mask, resolution)
        if use_inpaint:
            atlas = inpaint_nn(atlas, query, threads=threads)
        grid = build_coord_grid(atlas, p_dp, query_mask)
        return gather(g, grid)
    payload, valid = _scatter_mean(g_dp, g_mask, g.pixels, resolution)
    query = project_mask_to_uv(p_dp, query_mask, resolution)
    if use_inpaint:
        payload, valid, skipped = _fill_parts(payload, valid, query, threads=threads)
        _warn_skipped(skipped)
    colors, hit = _lookup_parts(payload, valid, p_dp, query_mask, int(resolution), 3)
    colors[~hit] = 0.0
    return WarpResult(RgbImage(colors), BinaryMask(hit))


def _warn_skipped(skipped: list[int]) -> None:
    if skipped:
        warnings.warn(
            f"no source texels for parts {skipped}; their query texels stay unfilled",
            MissingSourceWarning,
            stacklevel=3,
        )
