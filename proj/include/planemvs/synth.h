#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "planemvs/scene_io.h"

namespace planemvs {

enum class TextureKind { kNoise, kChecker, kFlat };

// Rectangle |u| <= half_u, |v| <= half_v on a one-sided plane through
// `center`; v_axis = normal x u_axis.
struct PlaneSpec {
  TextureKind texture = TextureKind::kNoise;
  Vec3 center = Vec3::Zero();
  Vec3 normal = Vec3(0, 0, 1);
  Vec3 u_axis = Vec3(1, 0, 0);
  double half_u = 1, half_v = 1;
  // noise: lattice cell size (scene units) and contrast; checker: square size.
  double scale = 0.05;
  double contrast = 1.0;
  // flat: base + ramp_u * u / half_u + ramp_v * v / half_v.
  double base = 0.5, ramp_u = 0.0, ramp_v = 0.0;
};

struct SyntheticSceneSpec {
  int width = 320, height = 240;
  double focal = 300;
  int camera_count = 5;
  double ring_radius = 4.5;
  double ring_height = 0.3;  // camera height above look_at
  double ring_span_deg = 24;
  Vec3 look_at = Vec3(0, 0.9, 0);
  double d_min = 1.5, d_max = 9.0;
  double noise_sigma = 0.0;  // per-view sensor noise
  double background = 0.0;
  // Minimum share of reference pixels on flat planes; 0 disables the check.
  double textureless_fraction = 0.0;
  uint64_t seed = 1;
  std::vector<PlaneSpec> planes;
};

struct SyntheticScene {
  SceneBundle bundle;                           // masks label the flat planes
  std::vector<std::vector<float>> gt_depth;     // per view, 0 where nothing is hit
  std::vector<std::vector<int16_t>> plane_ids;  // per view, -1 where nothing is hit
  PointCloud gt_cloud;
  std::vector<SegmentMask> gt_masks;
  double textureless_fraction = 0;  // reference view
};

// Analytic ray-plane renderer. Throws InputError when a camera sits behind a
// plane or the flat-pixel share misses the requested minimum.
SyntheticScene synth_scene(const SyntheticSceneSpec& spec);

SyntheticSceneSpec read_scene_spec(const std::filesystem::path& path);
SyntheticSceneSpec parse_scene_spec(const std::string& text, const std::string& origin);
std::string format_scene_spec(const SyntheticSceneSpec& spec);

// Floor (textured noise) meeting a flat shaded wall, 5 views.
SyntheticSceneSpec floor_wall_spec(uint64_t seed = 1);

// scene_io layout plus gt/<id>.dmb depths, gt/cloud.ply and scene.txt.
void save_synthetic(const SyntheticScene& scene, const SyntheticSceneSpec& spec,
                    const std::filesystem::path& dir);

}  // namespace planemvs
