"""Detector configuration and the public HOG descriptor operation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidRegion
from ..geometry import BoundingBox
from ..imaging import Image, bilinear_resize, crop_gray, to_gray_f64
from .backend import kernels


@dataclass(frozen=True)
class DetectorConfig:
    """Sliding-window detector hyperparameters.

    The window is square, divisible by cell_size, scanned at ``stride``
    pixels over a pyramid of ``pyramid_scale`` downscales. min_face (in
    original-image pixels) skips pyramid levels that would report
    smaller faces; 0 disables the filter. norm_eps regularises the
    block L2 norm, damping blocks at the gradient noise floor; the
    default is calibrated for the 0-255 pixel scale.
    """

    window: int = 64
    stride: int = 8
    pyramid_scale: float = 1.2
    score_threshold: float = 0.0
    nms_iou: float = 0.3
    cell_size: int = 8
    block_cells: int = 2
    bins: int = 9
    min_face: int = 0
    norm_eps: float = 400.0

    def __post_init__(self):
        if self.window < self.cell_size or self.window % self.cell_size != 0:
            raise ValueError("window must be a positive multiple of cell_size")
        if self.window // self.cell_size < self.block_cells:
            raise ValueError("window holds fewer cells than one block")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if self.pyramid_scale <= 1.0:
            raise ValueError("pyramid_scale must be > 1")
        if not 0.0 < self.nms_iou < 1.0:
            raise ValueError("nms_iou must be in (0, 1)")
        if self.bins < 2 or self.block_cells < 1 or self.min_face < 0 or self.norm_eps < 0:
            raise ValueError("bad hog parameters")

    def descriptor_length(self, size=None):
        cells = (size if size is not None else self.window) // self.cell_size
        per_side = cells - self.block_cells + 1
        return per_side * per_side * self.block_cells * self.block_cells * self.bins


@dataclass(frozen=True)
class HogDescriptor:
    """Block-normalised orientation histogram of a square window."""

    values: np.ndarray
    cells_x: int
    cells_y: int
    bins: int
    block_cells: int

    def __len__(self):
        return len(self.values)


def as_box(region) -> BoundingBox:
    """Coerce a (top, right, bottom, left) tuple or BoundingBox,
    mapping degenerate geometry to InvalidRegion."""
    if isinstance(region, BoundingBox):
        return region
    try:
        return BoundingBox(*region)
    except (TypeError, ValueError) as exc:
        raise InvalidRegion(str(exc)) from exc


def hog_of_plane(gray, config: DetectorConfig):
    """Raw lane call for a plane already at a cell-aligned square size."""
    return kernels.hog_descriptor(
        gray, config.cell_size, config.block_cells, config.bins, config.norm_eps
    )


def compute_hog(image: Image, region, config: DetectorConfig) -> HogDescriptor:
    """Descriptor of a crop, resampled to the canonical window size.

    The crop resizes to window x window via bilinear interpolation, so
    any valid region works regardless of its pixel size.
    """
    box = as_box(region)
    if not box.fits(image.width, image.height):
        raise InvalidRegion(f"region {box.as_tuple()} outside {image.width}x{image.height}")
    plane = bilinear_resize(crop_gray(to_gray_f64(image), box), config.window, config.window)
    values = hog_of_plane(plane, config)
    cells = config.window // config.cell_size
    return HogDescriptor(values=values, cells_x=cells, cells_y=cells,
                         bins=config.bins, block_cells=config.block_cells)
