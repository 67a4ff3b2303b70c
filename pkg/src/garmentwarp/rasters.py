"""Core raster types and the generic flow-based resampling operator.

All rasters are numpy-backed and row-major; a pixel coordinate (x, y) means
column x of row y, so plane[y, x] is the value at (x, y). Every type freezes
its planes (read-only arrays) after construction, so instances are immutable
and safe to share across threads. Operations return new objects.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

N_BODY_PARTS = 24
N_CLASSES = N_BODY_PARTS + 1  # labels 1..24 plus background class 0


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _require_same_shape(name_a: str, a: np.ndarray, name_b: str, b: np.ndarray) -> None:
    if a.shape[:2] != b.shape[:2]:
        raise ValueError(
            f"dimension mismatch: {name_a} is {a.shape[1]}x{a.shape[0]}, "
            f"{name_b} is {b.shape[1]}x{b.shape[0]}"
        )


@dataclass(frozen=True, eq=False)
class DensePoseMap:
    """Per-pixel body-part labels plus continuous UV chart coordinates.

    ``i`` holds labels in {0..24} (0 = background); ``u`` and ``v`` hold the
    chart coordinates in [0, 1]. Construction normalizes the planes: u/v are
    clamped to [0, 1] and forced to 0 wherever i == 0.
    """

    i: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        i = np.asarray(self.i)
        if i.ndim != 2:
            raise ValueError("i_plane must be 2-D")
        if not np.issubdtype(i.dtype, np.integer):
            raise ValueError("i_plane must be integer-typed")
        if i.size and (int(i.min()) < 0 or int(i.max()) > N_BODY_PARTS):
            raise ValueError(f"i_plane: label out of range 0..{N_BODY_PARTS}")
        u = np.asarray(self.u, dtype=np.float32)
        v = np.asarray(self.v, dtype=np.float32)
        _require_same_shape("i_plane", i, "u_plane", u)
        _require_same_shape("i_plane", i, "v_plane", v)
        i = i.astype(np.uint8, copy=True)
        u = np.clip(u, 0.0, 1.0)
        v = np.clip(v, 0.0, 1.0)
        bg = i == 0
        u[bg] = 0.0
        v[bg] = 0.0
        object.__setattr__(self, "i", _frozen(i))
        object.__setattr__(self, "u", _frozen(u))
        object.__setattr__(self, "v", _frozen(v))

    @property
    def width(self) -> int:
        return self.i.shape[1]

    @property
    def height(self) -> int:
        return self.i.shape[0]

    @classmethod
    def background(cls, width: int, height: int) -> "DensePoseMap":
        z = np.zeros((height, width), dtype=np.uint8)
        return cls(z, np.zeros((height, width), np.float32), np.zeros((height, width), np.float32))


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """A boolean raster."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 2:
            raise ValueError("mask must be 2-D")
        if bits.shape[0] < 1 or bits.shape[1] < 1:
            raise ValueError("mask dimensions must be positive")
        object.__setattr__(self, "bits", _frozen(bits.astype(bool, copy=True)))

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def area(self) -> int:
        return int(self.bits.sum())

    @classmethod
    def full(cls, width: int, height: int, value: bool = True) -> "BinaryMask":
        return cls(np.full((height, width), value, dtype=bool))


@dataclass(frozen=True, eq=False)
class RgbImage:
    """An RGB raster with channel values in [0, 1] (clamped on construction)."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float32)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError("image must have shape (H, W, 3)")
        object.__setattr__(self, "pixels", _frozen(np.clip(px, 0.0, 1.0)))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True, eq=False)
class FlowField:
    """Per-pixel 2-D offsets in pixels; dx is horizontal, dy vertical."""

    dx: np.ndarray
    dy: np.ndarray

    def __post_init__(self):
        dx = np.asarray(self.dx, dtype=np.float32)
        dy = np.asarray(self.dy, dtype=np.float32)
        if dx.ndim != 2:
            raise ValueError("flow planes must be 2-D")
        _require_same_shape("dx", dx, "dy", dy)
        if not (np.isfinite(dx).all() and np.isfinite(dy).all()):
            raise ValueError("flow offsets must be finite")
        object.__setattr__(self, "dx", _frozen(dx.copy()))
        object.__setattr__(self, "dy", _frozen(dy.copy()))

    @property
    def width(self) -> int:
        return self.dx.shape[1]

    @property
    def height(self) -> int:
        return self.dx.shape[0]

    @classmethod
    def zero(cls, width: int, height: int) -> "FlowField":
        z = np.zeros((height, width), dtype=np.float32)
        return cls(z, z.copy())


def mask_densepose(dp: DensePoseMap, mask: BinaryMask) -> DensePoseMap:
    """Keep the map where the mask is true; background (i=u=v=0) elsewhere."""
    _require_same_shape("densepose", dp.i, "mask", mask.bits)
    keep = mask.bits
    return DensePoseMap(
        np.where(keep, dp.i, 0).astype(np.uint8),
        np.where(keep, dp.u, 0.0).astype(np.float32),
        np.where(keep, dp.v, 0.0).astype(np.float32),
    )


def bilinear_sample(plane: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Sample a (H, W) or (H, W, C) plane at real coordinates, clamp-to-edge.

    Returns float64 values of the same leading shape as ``xs``. Sampling at
    exact integer coordinates reproduces the stored values exactly.
    """
    h, w = plane.shape[:2]
    xs = np.clip(np.asarray(xs, dtype=np.float64), 0.0, w - 1.0)
    ys = np.clip(np.asarray(ys, dtype=np.float64), 0.0, h - 1.0)
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    wx = xs - x0
    wy = ys - y0
    if plane.ndim == 3:
        wx = wx[..., None]
        wy = wy[..., None]
    p = plane.astype(np.float64, copy=False)
    top = (1.0 - wx) * p[y0, x0] + wx * p[y0, x1]
    bot = (1.0 - wx) * p[y1, x0] + wx * p[y1, x1]
    return (1.0 - wy) * top + wy * bot


def nearest_sample(plane: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Sample a (H, W) plane at the nearest pixel, clamp-to-edge.

    Half-integer coordinates round up (floor(x + 0.5)).
    """
    h, w = plane.shape[:2]
    xs = np.clip(np.asarray(xs, dtype=np.float64), 0.0, w - 1.0)
    ys = np.clip(np.asarray(ys, dtype=np.float64), 0.0, h - 1.0)
    xi = np.minimum(np.floor(xs + 0.5).astype(np.intp), w - 1)
    yi = np.minimum(np.floor(ys + 0.5).astype(np.intp), h - 1)
    return plane[yi, xi]


def _flow_targets(flow: FlowField) -> tuple[np.ndarray, np.ndarray]:
    ys, xs = np.mgrid[0 : flow.height, 0 : flow.width]
    return xs + flow.dx.astype(np.float64), ys + flow.dy.astype(np.float64)


def flow_warp(src, flow: FlowField):
    """Resample a raster through a flow field: out(x, y) = src(x+dx, y+dy).

    Continuous planes (u/v, RGB, flow, float arrays) use bilinear
    interpolation; categorical planes (part labels, booleans, integer arrays)
    use nearest-neighbor so labels stay valid. Borders clamp to the edge.
    """
    if isinstance(src, DensePoseMap):
        _require_same_shape("src", src.i, "flow", flow.dx)
        xs, ys = _flow_targets(flow)
        return DensePoseMap(
            nearest_sample(src.i, xs, ys),
            bilinear_sample(src.u, xs, ys).astype(np.float32),
            bilinear_sample(src.v, xs, ys).astype(np.float32),
        )
    if isinstance(src, RgbImage):
        _require_same_shape("src", src.pixels, "flow", flow.dx)
        xs, ys = _flow_targets(flow)
        return RgbImage(bilinear_sample(src.pixels, xs, ys).astype(np.float32))
    if isinstance(src, BinaryMask):
        _require_same_shape("src", src.bits, "flow", flow.dx)
        xs, ys = _flow_targets(flow)
        return BinaryMask(nearest_sample(src.bits, xs, ys))
    if isinstance(src, FlowField):
        _require_same_shape("src", src.dx, "flow", flow.dx)
        xs, ys = _flow_targets(flow)
        return FlowField(
            bilinear_sample(src.dx, xs, ys).astype(np.float32),
            bilinear_sample(src.dy, xs, ys).astype(np.float32),
        )
    if isinstance(src, np.ndarray) and src.ndim == 2:
        _require_same_shape("src", src, "flow", flow.dx)
        xs, ys = _flow_targets(flow)
        if np.issubdtype(src.dtype, np.floating):
            return bilinear_sample(src, xs, ys).astype(src.dtype)
        return nearest_sample(src, xs, ys)
    raise TypeError(f"flow_warp does not support {type(src).__name__}")
