"""Command-line entry point.

Subcommands: ``synth`` (fixture generation), ``warp`` (garment warping),
``mask refine`` / ``mask freeform``, ``metrics`` (batch evaluation),
``loss-eval`` (single-loss evaluation, JSON to stdout) and ``uv-dump``
(atlas-part visualization). Exit codes: 0 success, 1 usage error, 2 data or
format error. Runs are reproducible: no environment variables are consulted
and all randomness is seeded through flags or spec files.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from . import __version__
from .errors import FormatError
from .fileio import (
    load_image,
    load_iuv,
    load_mask,
    save_image,
    save_iuv,
    save_mask,
)
from .losses import (
    LogitStack,
    bce_loss,
    cross_entropy,
    iuv_loss,
    l1_loss,
    l2_mask_reg,
    total_variation,
)
from .masks import BrushSpec, RefineParams, free_form_mask, refine_mask
from .metrics import evaluate_pair, summarize
from .synth import generate, spec_from_dict
from .uv_atlas import scatter_coords
from .warp import warp_coarse_mask, warp_garment

log = logging.getLogger("garmentwarp")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="garmentwarp", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--log-level", choices=("quiet", "info", "debug"), default="info", help="logging verbosity"
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("warp", help="warp a garment image onto a target body-surface map")
    p.add_argument("--garment", required=True, help="garment RGB image (PNG)")
    p.add_argument("--garment-iuv", required=True, help="garment body-surface map (.iuv or PNG)")
    p.add_argument("--garment-mask", required=True, help="garment foreground mask (PNG)")
    p.add_argument("--person-iuv", required=True, help="target body-surface map (.iuv or PNG)")
    p.add_argument(
        "--query-mask",
        default=None,
        help="refined region mask (PNG); derived from the coarse warped mask when omitted",
    )
    p.add_argument("--resolution", type=int, default=256, help="atlas texels per side")
    p.add_argument("--no-inpaint", action="store_true", help="skip the UV hole fill")
    p.add_argument(
        "--no-grid-warp",
        action="store_true",
        help="scatter RGB values instead of coordinates (texel-resolution colors)",
    )
    p.add_argument("--threads", type=int, default=1, help="per-part parallelism; output is identical")
    p.add_argument("--out", required=True, help="warped garment PNG")
    p.add_argument("--out-validity", default=None, help="optional validity mask PNG")

    p = sub.add_parser("mask", help="mask utilities")
    mask_sub = p.add_subparsers(dest="mask_command")
    mr = mask_sub.add_parser("refine", help="fill holes and smooth a coarse mask")
    mr.add_argument("--in", dest="infile", required=True, help="coarse mask PNG")
    mr.add_argument("--out", required=True, help="refined mask PNG")
    mr.add_argument("--close", type=int, default=5, help="closing disk radius (px)")
    mr.add_argument("--min-hole", type=int, default=64, help="fill holes smaller than this area")
    mr.add_argument("--smooth", type=int, default=3, help="boundary smoothing radius (px)")
    mf = mask_sub.add_parser("freeform", help="random brush-stroke mask")
    mf.add_argument("--w", type=int, required=True, help="mask width")
    mf.add_argument("--h", type=int, required=True, help="mask height")
    mf.add_argument("--seed", type=int, default=0)
    mf.add_argument("--strokes", type=int, nargs=2, default=(1, 5), metavar=("LO", "HI"))
    mf.add_argument("--vertices", type=int, nargs=2, default=(4, 12), metavar=("LO", "HI"))
    mf.add_argument("--widths", type=int, nargs=2, default=(8, 32), metavar=("LO", "HI"))
    mf.add_argument("--max-turn", type=float, default=100.0, help="max turn per segment (degrees)")
    mf.add_argument("--out", required=True)

    p = sub.add_parser("metrics", help="score prediction/ground-truth directories")
    p.add_argument("--pred-dir", required=True)
    p.add_argument("--gt-dir", required=True)
    p.add_argument("--warped-mask-dir", default=None)
    p.add_argument("--gt-mask-dir", default=None)
    p.add_argument("--json", dest="json_out", required=True, help="report path")

    p = sub.add_parser("loss-eval", help="evaluate one loss; prints {\"loss\": value}")
    p.add_argument("--kind", required=True, choices=("ce", "l1", "tv", "bce", "l2reg", "liuv"))
    p.add_argument("--json", action="store_true", help="accepted for compatibility; output is JSON")
    p.add_argument("--logits", help=".npy float array (25, H, W)")
    p.add_argument("--pred", help=".npy float plane")
    p.add_argument("--target", help=".npy plane, mask PNG, or label plane")
    p.add_argument("--mask", help="optional mask PNG restricting l1")
    p.add_argument("--plane", help=".npy float plane for tv")
    p.add_argument("--alpha", help=".npy probability plane for l2reg")
    p.add_argument("--ignore-background", action="store_true", help="exclude label 0 from ce")
    p.add_argument("--u-pred", help=".npy plane (liuv)")
    p.add_argument("--v-pred", help=".npy plane (liuv)")
    p.add_argument("--i-target", help="label plane .npy (liuv)")
    p.add_argument("--u-target", help=".npy plane (liuv)")
    p.add_argument("--v-target", help=".npy plane (liuv)")
    p.add_argument("--weights", type=float, nargs=5, default=(1.0,) * 5)

    p = sub.add_parser("synth", help="write a fixture pair from a spec JSON")
    p.add_argument("--spec", required=True, help="fixture spec JSON")
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("uv-dump", help="render one atlas part as a PNG")
    p.add_argument("--garment-iuv", required=True)
    p.add_argument("--garment-mask", required=True)
    p.add_argument("--resolution", type=int, default=256)
    p.add_argument("--part", type=int, required=True, help="part id 1..24")
    p.add_argument("--out", required=True)

    return parser


def _require(args: argparse.Namespace, names: list[str], kind: str) -> None:
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        flags = ", ".join("--" + n for n in missing)
        raise _UsageError(f"loss kind {kind!r} requires {flags}")


def _load_plane(path: str) -> np.ndarray:
    if path.endswith(".npy"):
        arr = np.load(path)
        if arr.ndim != 2:
            raise FormatError(f"{path}: expected a 2-D plane, got shape {arr.shape}")
        return arr.astype(np.float64)
    return load_mask(path).bits.astype(np.float64)


def _load_labels(path: str) -> np.ndarray:
    if path.endswith(".npy"):
        arr = np.load(path)
        if arr.ndim != 2:
            raise FormatError(f"{path}: expected a 2-D label plane, got shape {arr.shape}")
        return arr.astype(np.int64)
    return load_iuv(path).i.astype(np.int64)


def _cmd_warp(args) -> int:
    garment = load_image(args.garment)
    g_dp = load_iuv(args.garment_iuv)
    g_mask = load_mask(args.garment_mask)
    p_dp = load_iuv(args.person_iuv)
    if args.query_mask is not None:
        query = load_mask(args.query_mask)
    else:
        log.info("no query mask given; deriving one from the coarse warped mask")
        coarse = warp_coarse_mask(g_mask, g_dp, p_dp, args.resolution)
        query = refine_mask(coarse, RefineParams())
    result = warp_garment(
        garment,
        g_dp,
        g_mask,
        p_dp,
        query,
        resolution=args.resolution,
        use_inpaint=not args.no_inpaint,
        use_grid=not args.no_grid_warp,
        threads=args.threads,
    )
    save_image(result.image, args.out)
    log.info("wrote %s", args.out)
    if args.out_validity:
        save_mask(result.validity, args.out_validity)
        log.info("wrote %s", args.out_validity)
    return 0


def _cmd_mask(args) -> int:
    if args.mask_command == "refine":
        mask = load_mask(args.infile)
        params = RefineParams(
            close_radius=args.close, min_hole_area=args.min_hole, smooth_radius=args.smooth
        )
        save_mask(refine_mask(mask, params), args.out)
        log.info("wrote %s", args.out)
        return 0
    if args.mask_command == "freeform":
        spec = BrushSpec(
            stroke_count_range=tuple(args.strokes),
            vertex_count_range=tuple(args.vertices),
            brush_width_range=tuple(args.widths),
            max_turn_angle=math.radians(args.max_turn),
            seed=args.seed,
        )
        save_mask(free_form_mask(args.w, args.h, spec), args.out)
        log.info("wrote %s", args.out)
        return 0
    raise _UsageError("mask requires a subcommand: refine or freeform")


def _paired_files(dir_a: str, dir_b: str) -> list[tuple[Path, Path]]:
    a, b = Path(dir_a), Path(dir_b)
    names = sorted(
        {p.name for p in a.iterdir() if p.is_file()} & {p.name for p in b.iterdir() if p.is_file()}
    )
    return [(a / n, b / n) for n in names]


def _cmd_metrics(args) -> int:
    if (args.warped_mask_dir is None) != (args.gt_mask_dir is None):
        raise _UsageError("--warped-mask-dir and --gt-mask-dir must be given together")
    pairs = _paired_files(args.pred_dir, args.gt_dir)
    if not pairs:
        raise FormatError(f"no common filenames between {args.pred_dir} and {args.gt_dir}")
    reports = []
    for pred_path, gt_path in pairs:
        warped_mask = gt_mask = None
        if args.warped_mask_dir is not None:
            warped_mask = load_mask(Path(args.warped_mask_dir) / pred_path.name)
            gt_mask = load_mask(Path(args.gt_mask_dir) / pred_path.name)
        reports.append(evaluate_pair(load_image(pred_path), load_image(gt_path), warped_mask, gt_mask))
    report = summarize(reports)
    Path(args.json_out).write_text(json.dumps(report, indent=2) + "\n")
    print(json.dumps(report))
    return 0


def _cmd_loss_eval(args) -> int:
    kind = args.kind
    if kind == "ce":
        _require(args, ["logits", "target"], kind)
        logits = LogitStack(np.load(args.logits))
        value = cross_entropy(logits, _load_labels(args.target), args.ignore_background)
    elif kind == "l1":
        _require(args, ["pred", "target"], kind)
        mask = load_mask(args.mask) if args.mask else None
        value = l1_loss(_load_plane(args.pred), _load_plane(args.target), mask)
    elif kind == "tv":
        _require(args, ["plane"], kind)
        value = total_variation(_load_plane(args.plane))
    elif kind == "bce":
        _require(args, ["pred", "target"], kind)
        value = bce_loss(_load_plane(args.pred), load_mask(args.target))
    elif kind == "l2reg":
        _require(args, ["alpha"], kind)
        value = l2_mask_reg(_load_plane(args.alpha))
    else:  # liuv
        _require(args, ["logits", "u-pred", "v-pred", "i-target", "u-target", "v-target"], kind)
        value = iuv_loss(
            LogitStack(np.load(args.logits)),
            _load_plane(args.u_pred),
            _load_plane(args.v_pred),
            _load_labels(args.i_target),
            _load_plane(args.u_target),
            _load_plane(args.v_target),
            weights=tuple(args.weights),
        )
    print(json.dumps({"loss": value}))
    return 0


def _cmd_synth(args) -> int:
    try:
        data = json.loads(Path(args.spec).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{args.spec}: invalid JSON ({exc})") from exc
    pair = generate(spec_from_dict(data))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_image(pair.garment, out / "garment.png")
    save_iuv(pair.garment_dp, out / "garment.iuv")
    save_mask(pair.garment_mask, out / "garment_mask.png")
    save_iuv(pair.person_dp, out / "person.iuv")
    save_image(pair.gt_warp, out / "gt_warp.png")
    save_mask(pair.gt_mask, out / "gt_mask.png")
    log.info("wrote fixture pair to %s", out)
    return 0


def _cmd_uv_dump(args) -> int:
    g_dp = load_iuv(args.garment_iuv)
    g_mask = load_mask(args.garment_mask)
    if not 1 <= args.part <= 24:
        raise _UsageError("--part must be in 1..24")
    atlas = scatter_coords(g_dp, g_mask, args.resolution)
    r = atlas.resolution
    img = np.zeros((r, r, 3), dtype=np.uint8)
    img[:, :] = (255, 0, 255)  # invalid texels are magenta
    ok = atlas.valid.get(args.part)
    if ok is not None and ok.any():
        xy = atlas.coords[args.part]
        img[ok, 0] = np.rint(xy[ok, 0] / max(atlas.source_width - 1, 1) * 255).astype(np.uint8)
        img[ok, 1] = np.rint(xy[ok, 1] / max(atlas.source_height - 1, 1) * 255).astype(np.uint8)
        img[ok, 2] = 0
    Image.fromarray(img, mode="RGB").save(args.out)
    log.info("wrote %s", args.out)
    return 0


_DISPATCH = {
    "warp": _cmd_warp,
    "mask": _cmd_mask,
    "metrics": _cmd_metrics,
    "loss-eval": _cmd_loss_eval,
    "synth": _cmd_synth,
    "uv-dump": _cmd_uv_dump,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    if args.command is None:
        parser.print_help()
        return 1
    level = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}[args.log_level]
    logging.basicConfig(level=level, format="%(message)s")
    try:
        return _DISPATCH[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (FormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
