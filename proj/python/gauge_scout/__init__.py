"""Meter localization with a pan-tilt-zoom camera.

Thin Python layer over the C++ core: scene simulation, the three detection
methods and the benchmark grid.
"""

import json

from ._gscout import (
    CameraConfig,
    GroundTruth,
    GscoutError,
    MeterShape,
    Method,
    PtzState,
    Region,
    RobotPose,
    Scene,
    SceneOptions,
    default_config_json,
    detect,
    extract_features,
    generate_scene,
    ground_truth,
    hough_circles,
    iou,
    load_scene,
    match_ratio,
    perturb_pose,
    point_zoom_command,
    read_png,
    render_view,
    run_cell,
    run_grid_csv,
    update_weights,
    write_png,
)

__all__ = [
    "CameraConfig",
    "GroundTruth",
    "GscoutError",
    "MeterShape",
    "Method",
    "PtzState",
    "Region",
    "RobotPose",
    "Scene",
    "SceneOptions",
    "default_config",
    "default_config_json",
    "detect",
    "extract_features",
    "generate_scene",
    "ground_truth",
    "hough_circles",
    "iou",
    "load_scene",
    "match_ratio",
    "perturb_pose",
    "point_zoom_command",
    "read_png",
    "render_view",
    "run_cell",
    "run_grid_csv",
    "update_weights",
    "write_png",
]


def default_config():
    """The default experiment config as a dict."""
    return json.loads(default_config_json())
