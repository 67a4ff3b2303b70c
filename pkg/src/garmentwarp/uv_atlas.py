"""Per-part UV texture atlases and mask-restricted nearest-neighbor inpainting.

A texel (part, a, b) covers the UV square [a/R, (a+1)/R) x [b/R, (b+1)/R);
its center is ((a+0.5)/R, (b+0.5)/R). Texel grids are stored as (R, R)
arrays indexed [b, a] so that the row-major linear index is b*R + a, which is
also the deterministic tie-break order for nearest-neighbor fills. UV spaces
of distinct parts are unrelated, so every operation here is strictly
per-part.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import ndimage

from .rasters import BinaryMask, DensePoseMap, _frozen, _require_same_shape


class MissingSourceWarning(UserWarning):
    """A part was queried for inpainting but holds no source texels."""


def texel_indices(u: np.ndarray, v: np.ndarray, resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """Map UV values in [0, 1] to texel indices: floor(u*R) clamped to R-1.

    The same rule is used when scattering sources and when querying, so a
    pixel always lands on the texel it would look up.
    """
    r = int(resolution)
    a = np.minimum(np.floor(u.astype(np.float64) * r).astype(np.int64), r - 1)
    b = np.minimum(np.floor(v.astype(np.float64) * r).astype(np.int64), r - 1)
    return a, b


@dataclass(frozen=True, eq=False)
class UvAtlas:
    """24 logical R x R texel grids; valid texels carry a source (x, y) coordinate.

    Only parts that hold at least one texel ever touched are materialized in
    ``coords``/``valid``; absent parts are all-invalid. ``source_width`` and
    ``source_height`` record the image bounds the payload coordinates refer to.
    """

    resolution: int
    source_width: int
    source_height: int
    coords: dict  # part id -> (R, R, 2) float32 array of (x, y), indexed [b, a]
    valid: dict  # part id -> (R, R) bool array, indexed [b, a]

    def __post_init__(self):
        if self.resolution < 1:
            raise ValueError("atlas resolution must be >= 1")
        for part, ok in self.valid.items():
            xy = self.coords[part]
            if ok.any():
                x = xy[:, :, 0][ok]
                y = xy[:, :, 1][ok]
                if x.min() < 0 or x.max() > self.source_width - 1 or y.min() < 0 or y.max() > self.source_height - 1:
                    raise ValueError(f"part {part}: texel payload outside source bounds")

    @property
    def parts(self) -> list[int]:
        """Parts with at least one valid texel, ascending."""
        return sorted(p for p, ok in self.valid.items() if ok.any())

    def valid_texel_count(self) -> int:
        return sum(int(ok.sum()) for ok in self.valid.values())


@dataclass(frozen=True, eq=False)
class UvQueryMask:
    """24 logical R x R boolean grids marking texels a target frame will look up."""

    resolution: int
    parts: dict  # part id -> (R, R) bool array, indexed [b, a]

    @property
    def active_parts(self) -> list[int]:
        return sorted(p for p, q in self.parts.items() if q.any())


def _scatter_mean(
    dp: DensePoseMap, mask: BinaryMask, values: np.ndarray, resolution: int
) -> tuple[dict, dict]:
    """Scatter per-pixel payload vectors into per-part texel grids, averaging collisions.

    ``values`` is (H, W, C); accumulation runs in float64 in row-major pixel
    order, so results are deterministic and order-independent up to float
    associativity of a fixed order.
    """
    _require_same_shape("densepose", dp.i, "mask", mask.bits)
    r = int(resolution)
    if r < 1:
        raise ValueError("resolution must be >= 1")
    nchan = values.shape[2]
    sel_all = mask.bits & (dp.i > 0)
    payload: dict = {}
    valid: dict = {}
    for part in np.unique(dp.i[sel_all]):
        part = int(part)
        sel = sel_all & (dp.i == part)
        a, b = texel_indices(dp.u[sel], dp.v[sel], r)
        lin = b * r + a
        count = np.bincount(lin, minlength=r * r).astype(np.float64)
        grid = np.zeros((r * r, nchan), dtype=np.float64)
        vals = values[sel].astype(np.float64)
        for c in range(nchan):
            grid[:, c] = np.bincount(lin, weights=vals[:, c], minlength=r * r)
        hit = count > 0
        grid[hit] /= count[hit, None]
        payload[part] = grid.reshape(r, r, nchan).astype(np.float32)
        valid[part] = hit.reshape(r, r)
    return payload, valid


def scatter_coords(g_dp: DensePoseMap, g_mask: BinaryMask, resolution: int) -> UvAtlas:
    """Scatter garment pixel coordinates into UV space.

    Every masked pixel with a part label writes its (x, y) position to the
    texel addressed by its (u, v); colliding pixels are averaged.
    """
    ys, xs = np.mgrid[0 : g_dp.height, 0 : g_dp.width]
    xy = np.stack([xs, ys], axis=-1).astype(np.float64)
    payload, valid = _scatter_mean(g_dp, g_mask, xy, resolution)
    return UvAtlas(
        resolution=int(resolution),
        source_width=g_dp.width,
        source_height=g_dp.height,
        coords={p: _frozen(v) for p, v in payload.items()},
        valid={p: _frozen(v) for p, v in valid.items()},
    )


def project_mask_to_uv(p_dp: DensePoseMap, query_mask: BinaryMask, resolution: int) -> UvQueryMask:
    """Project a target-frame mask into UV space: a texel is marked iff some
    masked pixel of that part addresses it."""
    _require_same_shape("densepose", p_dp.i, "mask", query_mask.bits)
    r = int(resolution)
    if r < 1:
        raise ValueError("resolution must be >= 1")
    sel_all = query_mask.bits & (p_dp.i > 0)
    parts: dict = {}
    for part in np.unique(p_dp.i[sel_all]):
        part = int(part)
        sel = sel_all & (p_dp.i == part)
        a, b = texel_indices(p_dp.u[sel], p_dp.v[sel], r)
        grid = np.zeros((r, r), dtype=bool)
        grid[b, a] = True
        parts[part] = _frozen(grid)
    return UvQueryMask(resolution=r, parts=parts)


@lru_cache(maxsize=None)
def _ring_offsets(d2: int) -> tuple[tuple[int, int], ...]:
    """All integer (da, db) with da*da + db*db == d2."""
    out = set()
    for da in range(math.isqrt(d2) + 1):
        rem = d2 - da * da
        db = math.isqrt(rem)
        if db * db == rem:
            out.update({(da, db), (da, -db), (-da, db), (-da, -db)})
    return tuple(sorted(out))


def _nn_fill_grid(
    valid: np.ndarray, need: np.ndarray, payload: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Fill ``need`` texels from the nearest valid texel (Euclidean distance on
    texel indices, ties broken by smallest row-major index b*R + a).

    The exact distance comes from a Euclidean distance transform; candidates
    at that distance are then enumerated on the integer circle so the
    tie-break is deterministic regardless of the transform's internal choice.
    """
    r = valid.shape[0]
    dist = ndimage.distance_transform_edt(~valid)
    bb, aa = np.nonzero(need)
    d2 = np.rint(dist[bb, aa] ** 2).astype(np.int64)
    sentinel = np.int64(r * r)
    best = np.full(bb.shape[0], sentinel, dtype=np.int64)
    for d in np.unique(d2):
        grp = np.nonzero(d2 == d)[0]
        tb = bb[grp]
        ta = aa[grp]
        keys = np.full(grp.shape[0], sentinel, dtype=np.int64)
        for da, db in _ring_offsets(int(d)):
            nb = tb + db
            na = ta + da
            ok = (nb >= 0) & (nb < r) & (na >= 0) & (na < r)
            if not ok.any():
                continue
            hit = np.zeros(grp.shape[0], dtype=bool)
            hit[ok] = valid[nb[ok], na[ok]]
            cand = nb * r + na
            keys[hit] = np.minimum(keys[hit], cand[hit])
        best[grp] = keys
    if (best == sentinel).any():
        raise AssertionError("distance transform disagreed with ring enumeration")
    out_payload = payload.copy()
    out_payload[bb, aa] = payload[best // r, best % r]
    out_valid = valid | need
    return out_payload, out_valid


def _fill_parts(
    payload: dict, valid: dict, query: UvQueryMask, threads: int = 1
) -> tuple[dict, dict, list[int]]:
    """Apply the per-part NN fill to query-true invalid texels.

    Returns new payload/valid dicts plus the parts that had query-true texels
    but no source texels (left unfilled).
    """
    out_payload = dict(payload)
    out_valid = dict(valid)
    skipped: list[int] = []
    work: list[int] = []
    for part, q in query.parts.items():
        if not q.any():
            continue
        ok = valid.get(part)
        if ok is None or not ok.any():
            skipped.append(part)
            continue
        if (q & ~ok).any():
            work.append(part)

    def _run(part: int) -> tuple[int, np.ndarray, np.ndarray]:
        q = query.parts[part]
        need = q & ~valid[part]
        filled, new_valid = _nn_fill_grid(valid[part], need, payload[part])
        return part, filled, new_valid

    if threads > 1 and len(work) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run, work))
    else:
        results = [_run(p) for p in work]
    for part, filled, new_valid in results:
        out_payload[part] = _frozen(filled)
        out_valid[part] = _frozen(new_valid)
    return out_payload, out_valid, sorted(skipped)


def inpaint_nn(atlas: UvAtlas, query: UvQueryMask, threads: int = 1) -> UvAtlas:
    """Fill query-marked holes from the nearest valid texel of the same part.

    Originally valid texels are untouched and texels outside the query stay
    invalid. Parts with query-true texels but no sources are skipped with a
    MissingSourceWarning; their pixels stay invalid downstream.
    """
    if atlas.resolution != query.resolution:
        raise ValueError(
            f"resolution mismatch: atlas {atlas.resolution}, query {query.resolution}"
        )
    payload, valid, skipped = _fill_parts(atlas.coords, atlas.valid, query, threads=threads)
    if skipped:
        warnings.warn(
            f"no source texels for parts {skipped}; their query texels stay unfilled",
            MissingSourceWarning,
            stacklevel=2,
        )
    return UvAtlas(
        resolution=atlas.resolution,
        source_width=atlas.source_width,
        source_height=atlas.source_height,
        coords=payload,
        valid=valid,
    )
