"""Reference implementations of the training objectives and the blend rule.

Everything here is a forward-only, float64 evaluation intended as a numeric
oracle for an external training stack; no gradients are provided. All losses
are non-negative, finite on valid input and zero for perfect predictions (up
to the documented clamping epsilons).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rasters import N_CLASSES, BinaryMask, RgbImage, _require_same_shape
from .warp import WarpResult

_BCE_EPS = 1e-7


@dataclass(frozen=True, eq=False)
class LogitStack:
    """Raw per-class scores, shape (25, H, W): background plus 24 parts."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 3 or vals.shape[0] != N_CLASSES:
            raise ValueError(f"logits must have shape ({N_CLASSES}, H, W)")
        if not np.isfinite(vals).all():
            raise ValueError("logits must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def width(self) -> int:
        return self.values.shape[2]

    @property
    def height(self) -> int:
        return self.values.shape[1]


def cross_entropy(logits: LogitStack, target: np.ndarray, ignore_background: bool = False) -> float:
    """Mean negative log-softmax of the target class.

    With ``ignore_background``, pixels labeled 0 are excluded from the mean;
    an empty pixel count yields 0.
    """
    target = np.asarray(target)
    if target.shape != (logits.height, logits.width):
        raise ValueError("target shape does not match logits")
    if target.size and (int(target.min()) < 0 or int(target.max()) >= N_CLASSES):
        raise ValueError(f"target labels out of range 0..{N_CLASSES - 1}")
    vals = logits.values
    peak = vals.max(axis=0)
    lse = peak + np.log(np.exp(vals - peak).sum(axis=0))
    picked = np.take_along_axis(vals, target[None].astype(np.intp), axis=0)[0]
    nll = lse - picked
    if ignore_background:
        sel = target > 0
        if not sel.any():
            return 0.0
        return float(nll[sel].mean())
    return float(nll.mean())


def l1_loss(pred: np.ndarray, target: np.ndarray, mask: BinaryMask | None = None) -> float:
    """Mean absolute difference, optionally restricted to a mask."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    _require_same_shape("pred", pred, "target", target)
    diff = np.abs(pred - target)
    if mask is not None:
        _require_same_shape("pred", pred, "mask", mask.bits)
        if not mask.bits.any():
            return 0.0
        return float(diff[mask.bits].mean())
    return float(diff.mean())


def total_variation(plane: np.ndarray) -> float:
    """Anisotropic total variation, each direction averaged over its own count."""
    plane = np.asarray(plane, dtype=np.float64)
    if plane.ndim != 2 or plane.shape[0] < 2 or plane.shape[1] < 2:
        raise ValueError("total variation needs a plane of at least 2x2")
    horiz = np.abs(plane[:, 1:] - plane[:, :-1]).mean()
    vert = np.abs(plane[1:, :] - plane[:-1, :]).mean()
    return float(horiz + vert)


def bce_loss(pred: np.ndarray, target: BinaryMask) -> float:
    """Binary cross entropy of a probability plane against a mask.

    Probabilities are clamped to [1e-7, 1 - 1e-7] before the logs.
    """
    pred = np.asarray(pred, dtype=np.float64)
    _require_same_shape("pred", pred, "target", target.bits)
    p = np.clip(pred, _BCE_EPS, 1.0 - _BCE_EPS)
    t = target.bits.astype(np.float64)
    return float(-(t * np.log(p) + (1.0 - t) * np.log(1.0 - p)).mean())


def l2_mask_reg(alpha: np.ndarray) -> float:
    """Mean squared value of a blending-mask plane."""
    alpha = np.asarray(alpha, dtype=np.float64)
    return float(np.square(alpha).mean())


def blend(t_hat: RgbImage, alpha: np.ndarray, g_warp: WarpResult) -> RgbImage:
    """Per-pixel blend t = (1 - alpha) * t_hat + alpha * warped garment.

    Where the warp has no source pixel, alpha is forced to 0 so holes cannot
    leak black into the composite.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    _require_same_shape("coarse image", t_hat.pixels, "alpha", alpha)
    _require_same_shape("coarse image", t_hat.pixels, "warped image", g_warp.image.pixels)
    a = np.where(g_warp.validity.bits, alpha, 0.0)[..., None]
    out = (1.0 - a) * t_hat.pixels.astype(np.float64) + a * g_warp.image.pixels.astype(np.float64)
    return RgbImage(out.astype(np.float32))


def iuv_loss(
    i_logits: LogitStack,
    u_pred: np.ndarray,
    v_pred: np.ndarray,
    i_target: np.ndarray,
    u_target: np.ndarray,
    v_target: np.ndarray,
    weights: tuple[float, float, float, float, float] = (1.0, 1.0, 1.0, 1.0, 1.0),
    u_smooth: np.ndarray | None = None,
    v_smooth: np.ndarray | None = None,
) -> float:
    """Weighted sum: classification, U/V absolute error, U/V smoothness.

    The absolute-error terms are averaged over labeled target pixels only
    (label 0 marks unsupervised pixels), while classification covers every
    pixel with background as class 0. The smoothness (total variation) terms
    apply to ``u_smooth``/``v_smooth`` when given, which lets callers penalize
    the unaligned prediction planes while scoring the aligned ones; they
    default to ``u_pred``/``v_pred``.
    """
    if len(weights) != 5:
        raise ValueError("expected 5 loss weights")
    labeled = BinaryMask(np.asarray(i_target) > 0)
    u_smooth = u_pred if u_smooth is None else u_smooth
    v_smooth = v_pred if v_smooth is None else v_smooth
    terms = (
        cross_entropy(i_logits, i_target),
        l1_loss(u_pred, u_target, labeled),
        l1_loss(v_pred, v_target, labeled),
        total_variation(u_smooth),
        total_variation(v_smooth),
    )
    return float(sum(w * t for w, t in zip(weights, terms)))
