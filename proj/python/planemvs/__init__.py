"""Plane-prior PatchMatch multi-view stereo."""

from ._core import (
    CameraModel,
    DegeneracyError,
    DomainError,
    Error,
    InputError,
    InvariantError,
    default_config,
    default_scene_spec,
    epipolar_geo_cost,
    epipolar_line,
    evaluate_cloud,
    global_agg_cost,
    homography,
    likelihood_factors,
    neighborhood_curvature,
    ransac_plane_fit,
    read_depth_map,
    run_pipeline,
    select_hypothesis,
    smooth_term,
    synthesize,
)


def config_dict():
    """Default pipeline settings as {key: value-string}."""
    out = {}
    for line in default_config().splitlines():
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def small_scene_spec(width=64, height=48, cameras=3, seed=1):
    """The floor/wall fixture rescaled to a small image."""
    ratio = width / 320.0
    lines = []
    for line in default_scene_spec(seed).splitlines():
        key, _, value = (part.strip() for part in line.partition("="))
        if key == "width":
            value = str(width)
        elif key == "height":
            value = str(height)
        elif key == "focal":
            value = repr(float(value) * ratio)
        elif key == "cameras":
            value = str(cameras)
        elif key == "textureless_fraction":
            value = "0"
        elif key == "plane" and value.startswith("noise"):
            fields = value.split()
            fields[12] = repr(float(fields[12]) / ratio)
            value = " ".join(fields)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
