"""Python bindings for the sad C++ core."""

import torch as _torch  # loads the libtorch shared libraries

from ._core import (
    InferenceModel,
    SadError,
    apply_fog,
    bin_index,
    fov_crop_extent,
    generate_scene,
    loss_inv,
    loss_spf,
    miou,
    run_cli,
)

__all__ = [
    "InferenceModel",
    "SadError",
    "apply_fog",
    "bin_index",
    "fov_crop_extent",
    "generate_scene",
    "loss_inv",
    "loss_spf",
    "miou",
    "run_cli",
]
