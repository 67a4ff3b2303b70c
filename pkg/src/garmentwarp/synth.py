"""Procedural garment/person fixture pairs with exact ground truth.

Each fixture places axis-aligned texture rectangles ("parts") in a garment
frame, assigns every part an affine UV field, and maps the part into the
person frame by an affine placement. The person frame gets the identical UV
field pulled back through the placement, so UV correspondence between the
two frames is exact by construction and the warped result has a closed form:
textures are continuous functions of garment coordinates, so the ground
truth is evaluated analytically at each person pixel's preimage rather than
resampled.

Speckle dropout simulates body-surface predictor sparsity by zeroing random
garment map pixels; it never touches the ground truth.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rasters import N_BODY_PARTS, BinaryMask, DensePoseMap, RgbImage

TEXTURES = ("stripes", "checker", "gradient", "noise")

Affine = tuple[float, float, float, float, float, float]

_IDENTITY: Affine = (1.0, 0.0, 0.0, 0.0, 1.0, 0.0)


def _apply_affine(coef: Affine, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a, b, c, d, e, f = coef
    return a * x + b * y + c, d * x + e * y + f


def _invert_affine(coef: Affine) -> Affine:
    a, b, c, d, e, f = coef
    det = a * e - b * d
    if abs(det) < 1e-12:
        raise ValueError("placement transform is not invertible")
    ia, ib, id_, ie = e / det, -b / det, -d / det, a / det
    return (ia, ib, -(ia * c + ib * f), id_, ie, -(id_ * c + ie * f))


@dataclass(frozen=True)
class PartSpec:
    """One rectangular garment part.

    ``rect`` is (x0, y0, w, h) in garment-frame pixels. ``uv_map`` sends
    garment coordinates to the part's UV chart: u = a*x + b*y + c,
    v = d*x + e*y + f; it must keep the rectangle inside the unit square.
    ``placement`` maps garment coordinates to person-frame coordinates.
    """

    part_id: int
    rect: tuple[float, float, float, float]
    uv_map: Affine
    placement: Affine = _IDENTITY


@dataclass(frozen=True)
class SynthSpec:
    width: int = 192
    height: int = 256
    parts: tuple[PartSpec, ...] = ()
    texture: str = "gradient"
    period: float = 16.0
    speckle_dropout: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("frame dimensions must be positive")
        if self.texture not in TEXTURES:
            raise ValueError(f"unknown texture {self.texture!r}; choose one of {TEXTURES}")
        if self.period <= 0:
            raise ValueError("texture period must be positive")
        if not 0.0 <= self.speckle_dropout <= 1.0:
            raise ValueError("speckle_dropout must be in [0, 1]")
        seen = set()
        for part in self.parts:
            if not 1 <= part.part_id <= N_BODY_PARTS:
                raise ValueError(f"part id {part.part_id} out of range 1..{N_BODY_PARTS}")
            if part.part_id in seen:
                raise ValueError(f"duplicate part id {part.part_id}")
            seen.add(part.part_id)
            x0, y0, w, h = part.rect
            if w <= 0 or h <= 0:
                raise ValueError(f"part {part.part_id}: empty rectangle")
            if x0 < 0 or y0 < 0 or x0 + w > self.width or y0 + h > self.height:
                raise ValueError(f"part {part.part_id}: rectangle outside the frame")
            for cx in (x0, x0 + w):
                for cy in (y0, y0 + h):
                    u, v = _apply_affine(part.uv_map, np.float64(cx), np.float64(cy))
                    if not (-1e-9 <= u <= 1 + 1e-9 and -1e-9 <= v <= 1 + 1e-9):
                        raise ValueError(
                            f"part {part.part_id}: uv_map sends corner ({cx}, {cy}) "
                            f"outside the unit square"
                        )
            _invert_affine(part.placement)


@dataclass(frozen=True, eq=False)
class SynthPair:
    garment: RgbImage
    garment_dp: DensePoseMap
    garment_mask: BinaryMask
    person_dp: DensePoseMap
    gt_warp: RgbImage
    gt_mask: BinaryMask


_STRIPE_A = (0.92, 0.16, 0.16)
_STRIPE_B = (0.12, 0.12, 0.88)
_CHECKER_A = (0.95, 0.82, 0.12)
_CHECKER_B = (0.08, 0.28, 0.52)


def _texture_values(
    spec: SynthSpec, gx: np.ndarray, gy: np.ndarray, noise: np.ndarray | None
) -> np.ndarray:
    """Evaluate the garment texture at continuous garment coordinates."""
    if spec.texture == "gradient":
        r = np.clip(gx / max(spec.width - 1, 1), 0.0, 1.0)
        g = np.clip(gy / max(spec.height - 1, 1), 0.0, 1.0)
        return np.stack([r, g, 0.5 * (r + g)], axis=-1)
    if spec.texture == "stripes":
        parity = np.floor(gx / spec.period).astype(np.int64) % 2 == 0
        return np.where(parity[..., None], _STRIPE_A, _STRIPE_B)
    if spec.texture == "checker":
        parity = (
            np.floor(gx / spec.period).astype(np.int64)
            + np.floor(gy / spec.period).astype(np.int64)
        ) % 2 == 0
        return np.where(parity[..., None], _CHECKER_A, _CHECKER_B)
    # noise: piecewise constant over garment pixels, nearest-pixel lookup
    assert noise is not None
    xi = np.clip(np.rint(gx).astype(np.intp), 0, spec.width - 1)
    yi = np.clip(np.rint(gy).astype(np.intp), 0, spec.height - 1)
    return noise[yi, xi]


def generate(spec: SynthSpec) -> SynthPair:
    """Rasterize a fixture pair; fully determined by the spec (incl. seed)."""
    w, h = spec.width, spec.height
    rng = np.random.default_rng(spec.seed)
    noise = rng.random((h, w, 3)) if spec.texture == "noise" else None

    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)

    garment = np.ones((h, w, 3), dtype=np.float64)
    g_i = np.zeros((h, w), dtype=np.uint8)
    g_u = np.zeros((h, w), dtype=np.float64)
    g_v = np.zeros((h, w), dtype=np.float64)

    p_i = np.zeros((h, w), dtype=np.uint8)
    p_u = np.zeros((h, w), dtype=np.float64)
    p_v = np.zeros((h, w), dtype=np.float64)
    gt = np.zeros((h, w, 3), dtype=np.float64)
    gt_mask = np.zeros((h, w), dtype=bool)

    for part in spec.parts:
        x0, y0, rw, rh = part.rect
        inside = (xs >= x0) & (xs < x0 + rw) & (ys >= y0) & (ys < y0 + rh)
        u, v = _apply_affine(part.uv_map, xs, ys)
        garment[inside] = _texture_values(spec, xs, ys, noise)[inside]
        g_i[inside] = part.part_id
        g_u[inside] = np.clip(u, 0.0, 1.0)[inside]
        g_v[inside] = np.clip(v, 0.0, 1.0)[inside]

        inv = _invert_affine(part.placement)
        gx, gy = _apply_affine(inv, xs, ys)
        p_inside = (gx >= x0) & (gx < x0 + rw) & (gy >= y0) & (gy < y0 + rh)
        pu, pv = _apply_affine(part.uv_map, gx, gy)
        p_i[p_inside] = part.part_id
        p_u[p_inside] = np.clip(pu, 0.0, 1.0)[p_inside]
        p_v[p_inside] = np.clip(pv, 0.0, 1.0)[p_inside]
        gt[p_inside] = _texture_values(spec, gx, gy, noise)[p_inside]
        gt_mask |= p_inside

    garment_mask = g_i > 0
    if spec.speckle_dropout > 0.0:
        drop = rng.random((h, w)) < spec.speckle_dropout
        g_i[drop] = 0
        g_u[drop] = 0.0
        g_v[drop] = 0.0

    return SynthPair(
        garment=RgbImage(garment.astype(np.float32)),
        garment_dp=DensePoseMap(g_i, g_u.astype(np.float32), g_v.astype(np.float32)),
        garment_mask=BinaryMask(garment_mask),
        person_dp=DensePoseMap(p_i, p_u.astype(np.float32), p_v.astype(np.float32)),
        gt_warp=RgbImage(gt.astype(np.float32)),
        gt_mask=BinaryMask(gt_mask),
    )


def sample_spec(
    seed: int,
    *,
    width: int = 192,
    height: int = 256,
    max_parts: int = 3,
    placement: str = "affine",
    angle_range: tuple[float, float] = (-45.0, 45.0),
    texture: str | None = None,
    uv_step: float = 2.0 / 256.0,
    speckle_dropout: float = 0.0,
) -> SynthSpec:
    """Draw a random fixture spec.

    ``placement`` is "identity", "translation" or "affine" (rotation about
    the part center plus a bounded shift, angles in degrees from
    ``angle_range``). ``uv_step`` is the UV distance between neighboring
    garment pixels; at atlas resolution R the scatter is collision-free when
    uv_step >= 2/R and densely filled when uv_step <= about 0.7/R.
    """
    if placement not in ("identity", "translation", "affine"):
        raise ValueError(f"unknown placement kind {placement!r}")
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, max_parts + 1))
    part_ids = rng.choice(np.arange(1, N_BODY_PARTS + 1), size=n, replace=False)
    chosen_texture = texture if texture is not None else TEXTURES[int(rng.integers(len(TEXTURES)))]
    parts = []
    band_h = height / n
    for k in range(n):
        # Keep the part inside a disk that fits its band so any rotation about
        # the center stays in frame, and small enough that the UV field never
        # needs rescaling below the requested step (span <= 2*rho*uv_step).
        rho_max = min(0.45 * min(band_h, width), 0.33 / uv_step)
        rho = float(rng.uniform(0.55, 0.95)) * rho_max
        aspect = float(rng.uniform(math.radians(30), math.radians(60)))
        rw = max(8.0, 2.0 * rho * math.cos(aspect))
        rh = max(8.0, 2.0 * rho * math.sin(aspect))
        cx = width / 2.0 + float(rng.uniform(-0.05, 0.05)) * width
        cy = (k + 0.5) * band_h
        rect = (cx - rw / 2.0, cy - rh / 2.0, rw, rh)

        psi = float(rng.uniform(0.0, 2.0 * math.pi))
        ca, sa = math.cos(psi), math.sin(psi)
        a, b = uv_step * ca, -uv_step * sa
        d, e = uv_step * sa, uv_step * ca
        corners_x = np.array([rect[0], rect[0] + rw, rect[0], rect[0] + rw])
        corners_y = np.array([rect[1], rect[1], rect[1] + rh, rect[1] + rh])
        cu = a * corners_x + b * corners_y
        cv = d * corners_x + e * corners_y
        span_u = float(cu.max() - cu.min())
        span_v = float(cv.max() - cv.min())
        shrink = min(1.0, 0.98 / max(span_u, span_v, 1e-9))
        a, b, d, e = a * shrink, b * shrink, d * shrink, e * shrink
        cu, cv = cu * shrink, cv * shrink
        off_u = float(rng.uniform(0.0, 1.0 - (cu.max() - cu.min()))) - float(cu.min())
        off_v = float(rng.uniform(0.0, 1.0 - (cv.max() - cv.min()))) - float(cv.min())
        uv_map = (a, b, off_u, d, e, off_v)

        if placement == "identity":
            place: Affine = _IDENTITY
        elif placement == "translation":
            slack_x = min(rect[0], width - (rect[0] + rw)) * 0.9
            slack_y = min(rect[1], height - (rect[1] + rh)) * 0.9
            place = (
                1.0,
                0.0,
                float(rng.uniform(-slack_x, slack_x)),
                0.0,
                1.0,
                float(rng.uniform(-slack_y, slack_y)),
            )
        else:
            theta = math.radians(float(rng.uniform(*angle_range)))
            ct, st = math.cos(theta), math.sin(theta)
            # rotate about the rect center, then shift within the band slack
            slack = max(0.0, rho_max - rho) * 0.8
            tx = float(rng.uniform(-slack, slack))
            ty = float(rng.uniform(-slack, slack))
            place = (
                ct,
                -st,
                cx - ct * cx + st * cy + tx,
                st,
                ct,
                cy - st * cx - ct * cy + ty,
            )
        parts.append(PartSpec(int(part_ids[k]), rect, uv_map, place))
    return SynthSpec(
        width=width,
        height=height,
        parts=tuple(parts),
        texture=chosen_texture,
        period=float(rng.uniform(8.0, 32.0)),
        speckle_dropout=speckle_dropout,
        seed=int(rng.integers(0, 2**63 - 1)),
    )


def spec_to_dict(spec: SynthSpec) -> dict:
    return {
        "width": spec.width,
        "height": spec.height,
        "texture": spec.texture,
        "period": spec.period,
        "speckle_dropout": spec.speckle_dropout,
        "seed": spec.seed,
        "parts": [
            {
                "part_id": p.part_id,
                "rect": list(p.rect),
                "uv_map": list(p.uv_map),
                "placement": list(p.placement),
            }
            for p in spec.parts
        ],
    }


def spec_from_dict(data: dict) -> SynthSpec:
    try:
        parts = tuple(
            PartSpec(
                part_id=int(p["part_id"]),
                rect=tuple(float(x) for x in p["rect"]),
                uv_map=tuple(float(x) for x in p["uv_map"]),
                placement=tuple(float(x) for x in p.get("placement", _IDENTITY)),
            )
            for p in data.get("parts", [])
        )
        return SynthSpec(
            width=int(data["width"]),
            height=int(data["height"]),
            parts=parts,
            texture=str(data.get("texture", "gradient")),
            period=float(data.get("period", 16.0)),
            speckle_dropout=float(data.get("speckle_dropout", 0.0)),
            seed=int(data.get("seed", 0)),
        )
    except KeyError as exc:
        raise ValueError(f"fixture spec is missing required field {exc.args[0]!r}") from exc
