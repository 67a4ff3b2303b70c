"""Readers and writers for the on-disk raster formats.

Formats
-------
``.iuv`` binary map:
    magic ``IUV1``, then width and height as little-endian uint32, then three
    row-major planes: I (uint8 per pixel), U, V (little-endian float32 per
    pixel). Round-trips are bit-exact.
PNG IUV convention:
    R = part label (0-24), G = round(u*255), B = round(v*255). Loading
    dequantizes u = G/255, v = B/255 and clips R to [0, 24].
``FLO1`` flow file:
    magic ``FLO1``, width/height as above, then row-major interleaved
    (dx, dy) little-endian float32 pairs.
Masks:
    8-bit grayscale PNG; a pixel is true iff its value is >= 128.
Images:
    8-bit RGB PNG mapped linearly to [0, 1].
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import FormatError
from .rasters import N_BODY_PARTS, BinaryMask, DensePoseMap, FlowField, RgbImage

IUV_MAGIC = b"IUV1"
FLOW_MAGIC = b"FLO1"
_HEADER = struct.Struct("<4sII")


def _read_header(data: bytes, magic: bytes, path: Path) -> tuple[int, int]:
    if len(data) < _HEADER.size:
        raise FormatError(f"{path}: malformed header (file too short)")
    got, width, height = _HEADER.unpack_from(data)
    if got != magic:
        raise FormatError(f"{path}: bad magic {got!r}, expected {magic!r}")
    if width < 1 or height < 1:
        raise FormatError(f"{path}: non-positive dimensions {width}x{height}")
    return width, height


def _take(data: bytes, offset: int, count: int, dtype, field: str, path: Path) -> np.ndarray:
    nbytes = count * np.dtype(dtype).itemsize
    if len(data) < offset + nbytes:
        raise FormatError(f"{path}: {field} truncated")
    return np.frombuffer(data, dtype=dtype, count=count, offset=offset)


def load_iuv(path: str | Path) -> DensePoseMap:
    """Load a body-surface map from a ``.iuv`` binary or a quantized PNG."""
    path = Path(path)
    if path.suffix.lower() == ".png":
        return _load_iuv_png(path)
    data = path.read_bytes()
    w, h = _read_header(data, IUV_MAGIC, path)
    n = w * h
    off = _HEADER.size
    i_plane = _take(data, off, n, np.uint8, "i_plane", path)
    off += n
    u_plane = _take(data, off, n, "<f4", "u_plane", path)
    off += 4 * n
    v_plane = _take(data, off, n, "<f4", "v_plane", path)
    if int(i_plane.max(initial=0)) > N_BODY_PARTS:
        raise FormatError(f"{path}: i_plane label out of range 0..{N_BODY_PARTS}")
    for name, plane in (("u_plane", u_plane), ("v_plane", v_plane)):
        if not np.isfinite(plane).all():
            raise FormatError(f"{path}: {name} contains non-finite values")
    return DensePoseMap(
        i_plane.reshape(h, w),
        u_plane.reshape(h, w),
        v_plane.reshape(h, w),
    )


def _load_iuv_png(path: Path) -> DensePoseMap:
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    i_plane = np.minimum(arr[:, :, 0], N_BODY_PARTS)
    u_plane = arr[:, :, 1].astype(np.float32) / 255.0
    v_plane = arr[:, :, 2].astype(np.float32) / 255.0
    return DensePoseMap(i_plane, u_plane, v_plane)


def save_iuv(dp: DensePoseMap, path: str | Path) -> None:
    """Write a map to ``.iuv`` (lossless) or quantized PNG, by extension."""
    path = Path(path)
    if path.suffix.lower() == ".png":
        rgb = np.stack(
            [
                dp.i,
                np.rint(dp.u.astype(np.float64) * 255.0).astype(np.uint8),
                np.rint(dp.v.astype(np.float64) * 255.0).astype(np.uint8),
            ],
            axis=-1,
        )
        Image.fromarray(rgb, mode="RGB").save(path)
        return
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(IUV_MAGIC, dp.width, dp.height))
        fh.write(np.ascontiguousarray(dp.i).tobytes())
        fh.write(np.ascontiguousarray(dp.u, dtype="<f4").tobytes())
        fh.write(np.ascontiguousarray(dp.v, dtype="<f4").tobytes())


def load_flow(path: str | Path) -> FlowField:
    """Load a ``FLO1`` flow field."""
    path = Path(path)
    data = path.read_bytes()
    w, h = _read_header(data, FLOW_MAGIC, path)
    pairs = _take(data, _HEADER.size, 2 * w * h, "<f4", "flow data", path)
    grid = pairs.reshape(h, w, 2)
    if not np.isfinite(grid).all():
        raise FormatError(f"{path}: flow data contains non-finite values")
    return FlowField(grid[:, :, 0], grid[:, :, 1])


def save_flow(flow: FlowField, path: str | Path) -> None:
    path = Path(path)
    grid = np.stack([flow.dx, flow.dy], axis=-1).astype("<f4")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(FLOW_MAGIC, flow.width, flow.height))
        fh.write(np.ascontiguousarray(grid).tobytes())


def load_mask(path: str | Path) -> BinaryMask:
    """Load an 8-bit grayscale PNG mask, thresholded at 128."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("L"), dtype=np.uint8)
    return BinaryMask(arr >= 128)


def save_mask(mask: BinaryMask, path: str | Path) -> None:
    Image.fromarray(np.where(mask.bits, 255, 0).astype(np.uint8), mode="L").save(path)


def load_image(path: str | Path) -> RgbImage:
    """Load an RGB image PNG into [0, 1] floats."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    return RgbImage(arr.astype(np.float32) / 255.0)


def save_image(img: RgbImage, path: str | Path) -> None:
    arr = np.rint(img.pixels.astype(np.float64) * 255.0).astype(np.uint8)
    Image.fromarray(arr, mode="RGB").save(path)
