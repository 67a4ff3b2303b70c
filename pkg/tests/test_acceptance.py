"""Acceptance gate: every criterion at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one line per
criterion. Each criterion is a separate test so failures are attributable.
"""
import json
import math
import time

import numpy as np

from garmentwarp.cli import run
from garmentwarp.losses import (
    LogitStack,
    bce_loss,
    cross_entropy,
    l1_loss,
    l2_mask_reg,
    total_variation,
)
from garmentwarp.masks import RefineParams, refine_mask
from garmentwarp.metrics import miou, nm_ssim, ssim
from garmentwarp.rasters import BinaryMask
from garmentwarp.synth import generate, sample_spec, spec_to_dict
from garmentwarp.uv_atlas import UvAtlas, UvQueryMask, inpaint_nn
from garmentwarp.warp import warp_coarse_mask, warp_garment

from conftest import random_image, random_mask
from test_losses import scalar_cross_entropy
from test_uv_atlas import brute_force_nn, random_atlas


def _report(number: int, description: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {description}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def test_criterion_1_self_warp_identity():
    max_err = 0.0
    worst_time = 0.0
    for seed in range(50):
        pair = generate(sample_spec(seed, placement="identity", uv_step=2.0 / 256))
        t0 = time.perf_counter()
        res = warp_garment(
            pair.garment, pair.garment_dp, pair.garment_mask, pair.person_dp, pair.gt_mask, 256
        )
        worst_time = max(worst_time, time.perf_counter() - t0)
        inside = pair.gt_mask.bits
        err = float(np.abs(res.image.pixels - pair.gt_warp.pixels)[inside].max())
        max_err = max(max_err, err)
    _report(
        1,
        "self-warp reproduces the garment (max error <= 2/255, < 1 s per fixture)",
        max_err <= 2 / 255 and worst_time < 1.0,
        f"max_err={max_err:.6f}, worst_time={worst_time * 1000:.0f}ms over 50 fixtures",
    )


def test_criterion_2_nn_fill_matches_exhaustive_oracle():
    rng = np.random.default_rng(20240)
    checked = 0
    exact = True
    while checked < 200:
        r = int(rng.integers(2, 33))
        atlas = random_atlas(rng, r, density=float(rng.uniform(0.02, 0.5)))
        if not atlas.valid[1].any():
            continue
        query = rng.random((r, r)) < rng.uniform(0.2, 0.8)
        out = inpaint_nn(atlas, UvQueryMask(r, {1: query}))
        exp_payload, exp_valid = brute_force_nn(atlas.valid[1], atlas.coords[1], query, r)
        if not (np.array_equal(out.valid[1], exp_valid) and np.array_equal(out.coords[1], exp_payload)):
            exact = False
            break
        checked += 1
    _report(
        2,
        "nearest-neighbor fill equals the exhaustive search incl. tie-breaks",
        exact and checked == 200,
        f"{checked} random atlases at R<=32, exact",
    )


def test_criterion_3_hole_free_after_fill():
    rng = np.random.default_rng(555)
    holes = 0
    for _ in range(100):
        r = int(rng.integers(4, 25))
        parts_valid, parts_coords, parts_query = {}, {}, {}
        for part in range(1, int(rng.integers(2, 5))):
            v = rng.random((r, r)) < rng.uniform(0.0, 0.3)
            c = np.zeros((r, r, 2), np.float32)
            c[v] = rng.uniform(0, 10, (int(v.sum()), 2)).astype(np.float32)
            parts_valid[part] = v
            parts_coords[part] = c
            parts_query[part] = rng.random((r, r)) < 0.5
        atlas = UvAtlas(r, 16, 16, parts_coords, parts_valid)
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            out = inpaint_nn(atlas, UvQueryMask(r, parts_query))
        for part, q in parts_query.items():
            if parts_valid[part].any():
                holes += int((q & ~out.valid[part]).sum())
    _report(
        3,
        "zero unfilled query texels in any part with at least one source",
        holes == 0,
        "100 fixtures",
    )


def test_criterion_4_ablation_directions():
    cover_drops = []
    for seed in range(5):
        spec = sample_spec(
            seed, placement="affine", angle_range=(20, 60), texture="stripes", uv_step=2.0 / 256
        )
        pair = generate(spec)
        args = (pair.garment, pair.garment_dp, pair.garment_mask, pair.person_dp, pair.gt_mask, 256)
        gt = pair.gt_mask.bits
        full = warp_garment(*args, use_inpaint=True)
        holey = warp_garment(*args, use_inpaint=False)
        cover_drops.append(
            float(full.validity.bits[gt].mean()) - float(holey.validity.bits[gt].mean())
        )
    inpaint_ok = all(d > 0 for d in cover_drops)

    err_gaps = []
    for seed in range(5):
        spec = sample_spec(
            seed + 10, placement="affine", angle_range=(20, 60), texture="stripes", uv_step=2.0 / 256
        )
        pair = generate(spec)
        args = (pair.garment, pair.garment_dp, pair.garment_mask, pair.person_dp, pair.gt_mask, 64)
        grid = warp_garment(*args, use_grid=True)
        rgb = warp_garment(*args, use_grid=False)
        inside = pair.gt_mask.bits & grid.validity.bits
        err_grid = float(np.abs(grid.image.pixels - pair.gt_warp.pixels)[inside].mean())
        err_rgb = float(np.abs(rgb.image.pixels - pair.gt_warp.pixels)[inside].mean())
        err_gaps.append(err_rgb - err_grid)
    grid_ok = all(g > 0 for g in err_gaps)
    _report(
        4,
        "disabling inpainting shrinks coverage; disabling grid warping raises color error at R=64",
        inpaint_ok and grid_ok,
        f"min coverage drop {min(cover_drops):.3f}, min error gap {min(err_gaps):.4f}",
    )


def test_criterion_5_loss_oracles():
    rng = np.random.default_rng(7)
    uniform_ce = cross_entropy(LogitStack(np.zeros((25, 8, 8))), rng.integers(0, 25, (8, 8)))
    ce_ok = abs(uniform_ce - math.log(25)) <= 1e-9
    tv_ok = total_variation(np.full((8, 8), 0.4)) == 0.0
    bce_ok = abs(bce_loss(np.full((8, 8), 0.5), random_mask(rng, 8, 8)) - math.log(2)) <= 1e-9

    logits = LogitStack(rng.normal(size=(25, 8, 8)))
    target = rng.integers(0, 25, (8, 8))
    rel = abs(cross_entropy(logits, target) - scalar_cross_entropy(logits.values, target, False))
    rel /= abs(scalar_cross_entropy(logits.values, target, False))
    pred, tgt = rng.random((8, 8)), rng.random((8, 8))
    mask = random_mask(rng, 8, 8)
    l1_ref = math.fsum(
        abs(pred[y, x] - tgt[y, x]) for y in range(8) for x in range(8) if mask.bits[y, x]
    ) / int(mask.bits.sum())
    rel = max(rel, abs(l1_loss(pred, tgt, mask) - l1_ref) / abs(l1_ref))
    plane = rng.random((8, 8))
    tv_ref = math.fsum(
        abs(plane[y, x + 1] - plane[y, x]) for y in range(8) for x in range(7)
    ) / 56 + math.fsum(abs(plane[y + 1, x] - plane[y, x]) for y in range(7) for x in range(8)) / 56
    rel = max(rel, abs(total_variation(plane) - tv_ref) / abs(tv_ref))
    probs = rng.uniform(0.05, 0.95, (8, 8))
    bce_ref = math.fsum(
        -(float(mask.bits[y, x]) * math.log(probs[y, x]) + (1 - float(mask.bits[y, x])) * math.log(1 - probs[y, x]))
        for y in range(8)
        for x in range(8)
    ) / 64
    rel = max(rel, abs(bce_loss(probs, mask) - bce_ref) / abs(bce_ref))
    alpha = rng.random((8, 8))
    reg_ref = math.fsum(alpha[y, x] ** 2 for y in range(8) for x in range(8)) / 64
    rel = max(rel, abs(l2_mask_reg(alpha) - reg_ref) / abs(reg_ref))
    _report(
        5,
        "loss analytic values and scalar-oracle matches within 1e-9 relative",
        ce_ok and tv_ok and bce_ok and rel <= 1e-9,
        f"uniform CE dev {abs(uniform_ce - math.log(25)):.2e}, worst oracle rel {rel:.2e}",
    )


def test_criterion_6_metric_oracles():
    rng = np.random.default_rng(13)
    img = random_image(rng, 20, 16)
    ssim_ok = ssim(img, img) == 1.0
    a = np.zeros((8, 12), bool)
    b = np.zeros((8, 12), bool)
    a[2:6, 2:6] = True
    b[2:6, 4:8] = True
    m = random_mask(rng, 8, 8, 0.5)
    empty = BinaryMask.full(8, 8, False)
    miou_ok = (
        miou(m, m) == 1.0
        and miou(BinaryMask(a), BinaryMask(b)) == 1 / 3
        and miou(empty, empty) == 1.0
    )
    quarter_img = random_image(rng, 26, 26)
    union = np.zeros((26, 26), bool)
    union[5:13, 5:13] = True
    quarter = nm_ssim(quarter_img, quarter_img, BinaryMask(union), BinaryMask.full(26, 26, False))
    nm_ok = abs(quarter - 0.25) <= 1e-6
    _report(
        6,
        "ssim(x,x)=1 exactly, analytic mIoU exact, quarter-union NM fixture = 0.25",
        ssim_ok and miou_ok and nm_ok,
        f"nm quarter {quarter:.8f}",
    )


def test_criterion_7_thread_determinism(tmp_path):
    spec = sample_spec(9, placement="affine", angle_range=(60, 120), uv_step=2.0 / 256)
    pair = generate(spec)
    args = (pair.garment, pair.garment_dp, pair.garment_mask, pair.person_dp, pair.gt_mask, 256)
    one = warp_garment(*args, threads=1)
    eight = warp_garment(*args, threads=8)
    api_ok = np.array_equal(one.image.pixels, eight.image.pixels) and np.array_equal(
        one.validity.bits, eight.validity.bits
    )

    fix = tmp_path / "fix"
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec_to_dict(spec)))
    assert run(["synth", "--spec", str(spec_path), "--out-dir", str(fix)]) == 0
    blobs = {}
    for threads in ("1", "8"):
        out = tmp_path / f"o{threads}.png"
        val = tmp_path / f"v{threads}.png"
        code = run(
            [
                "warp",
                "--garment", str(fix / "garment.png"),
                "--garment-iuv", str(fix / "garment.iuv"),
                "--garment-mask", str(fix / "garment_mask.png"),
                "--person-iuv", str(fix / "person.iuv"),
                "--query-mask", str(fix / "gt_mask.png"),
                "--resolution", "256",
                "--threads", threads,
                "--out", str(out),
                "--out-validity", str(val),
            ]
        )
        assert code == 0
        blobs[threads] = (out.read_bytes(), val.read_bytes())
    cli_ok = blobs["1"] == blobs["8"]
    _report(7, "runs with --threads 1 and --threads 8 are bit-identical", api_ok and cli_ok)


def test_criterion_8_large_rotation_robustness():
    r = 128
    ious = []
    for seed in range(10):
        spec = sample_spec(
            seed + 100,
            placement="affine",
            angle_range=(60, 120),
            texture="gradient",
            uv_step=0.7 / r,
        )
        pair = generate(spec)
        coarse = warp_coarse_mask(pair.garment_mask, pair.garment_dp, pair.person_dp, r)
        query = refine_mask(coarse, RefineParams(close_radius=3, min_hole_area=64, smooth_radius=2))
        res = warp_garment(
            pair.garment, pair.garment_dp, pair.garment_mask, pair.person_dp, query, r
        )
        ious.append(miou(res.validity, pair.gt_mask))
    _report(
        8,
        "60-120 degree rotations keep pipeline mIoU vs ground truth >= 0.95",
        min(ious) >= 0.95,
        f"min IoU {min(ious):.4f}, mean {np.mean(ious):.4f} over 10 fixtures",
    )
