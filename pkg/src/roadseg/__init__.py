"""Unsupervised road disparity transformation and damage segmentation."""
from .core import KITTI_RIG, DisparityMap, PixelCoord, RigConfig, RoadMask, rotate_point
from .moments import Moments, accumulate, merge
from .solver import (RoadModel, WCoefficients, compute_w, estimate, fallback_grid_solve,
                     fit_model, g_of_theta, solve_roll_angle)
from .transform import TransformedMap, road_disparity, transform_map
from .segmentation import SegmentationResult, clean_mask, segment
from .evaluation import PixelMetrics, delta_theta, pixel_metrics, sigma, v_disparity

__version__ = "0.1.0"

__all__ = [
    "KITTI_RIG", "DisparityMap", "PixelCoord", "RigConfig", "RoadMask", "rotate_point",
    "Moments", "accumulate", "merge",
    "RoadModel", "WCoefficients", "compute_w", "estimate", "fallback_grid_solve",
    "fit_model", "g_of_theta", "solve_roll_angle",
    "TransformedMap", "road_disparity", "transform_map",
    "SegmentationResult", "clean_mask", "segment",
    "PixelMetrics", "delta_theta", "pixel_metrics", "sigma", "v_disparity",
]
