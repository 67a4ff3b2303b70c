"""Correspondence-based garment warping through body-surface UV charts."""

__version__ = "0.1.0"

from .errors import FormatError
from .rasters import (
    N_BODY_PARTS,
    N_CLASSES,
    BinaryMask,
    DensePoseMap,
    FlowField,
    RgbImage,
    bilinear_sample,
    flow_warp,
    mask_densepose,
    nearest_sample,
)
from .fileio import (
    load_flow,
    load_image,
    load_iuv,
    load_mask,
    save_flow,
    save_image,
    save_iuv,
    save_mask,
)
from .uv_atlas import (
    MissingSourceWarning,
    UvAtlas,
    UvQueryMask,
    inpaint_nn,
    project_mask_to_uv,
    scatter_coords,
    texel_indices,
)
from .warp import CoordGrid, WarpResult, build_coord_grid, gather, warp_coarse_mask, warp_garment
from .masks import (
    ARM_HAND_PARTS,
    BrushSpec,
    RefineParams,
    derive_arm_mask,
    free_form_mask,
    preprocess_person,
    refine_mask,
)
from .losses import (
    LogitStack,
    bce_loss,
    blend,
    cross_entropy,
    iuv_loss,
    l1_loss,
    l2_mask_reg,
    total_variation,
)
from .metrics import MetricReport, evaluate_pair, miou, nm_ssim, ssim, ssim_map, summarize
from .synth import (
    TEXTURES,
    PartSpec,
    SynthPair,
    SynthSpec,
    generate,
    sample_spec,
    spec_from_dict,
    spec_to_dict,
)

__all__ = [
    "__version__",
    "FormatError",
    "N_BODY_PARTS",
    "N_CLASSES",
    "BinaryMask",
    "DensePoseMap",
    "FlowField",
    "RgbImage",
    "bilinear_sample",
    "flow_warp",
    "mask_densepose",
    "nearest_sample",
    "load_flow",
    "load_image",
    "load_iuv",
    "load_mask",
    "save_flow",
    "save_image",
    "save_iuv",
    "save_mask",
    "MissingSourceWarning",
    "UvAtlas",
    "UvQueryMask",
    "inpaint_nn",
    "project_mask_to_uv",
    "scatter_coords",
    "texel_indices",
    "CoordGrid",
    "WarpResult",
    "build_coord_grid",
    "gather",
    "warp_coarse_mask",
    "warp_garment",
    "ARM_HAND_PARTS",
    "BrushSpec",
    "RefineParams",
    "derive_arm_mask",
    "free_form_mask",
    "preprocess_person",
    "refine_mask",
    "LogitStack",
    "bce_loss",
    "blend",
    "cross_entropy",
    "iuv_loss",
    "l1_loss",
    "l2_mask_reg",
    "total_variation",
    "MetricReport",
    "evaluate_pair",
    "miou",
    "nm_ssim",
    "ssim",
    "ssim_map",
    "summarize",
    "TEXTURES",
    "PartSpec",
    "SynthPair",
    "SynthSpec",
    "generate",
    "sample_spec",
    "spec_from_dict",
    "spec_to_dict",
]
