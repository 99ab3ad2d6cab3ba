#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "planemvs/camera.h"
#include "planemvs/depth_map.h"
#include "planemvs/geometry.h"
#include "planemvs/rng.h"
#include "planemvs/synth.h"

namespace planemvs::testing {

// Rotation whose camera z axis points from eye to target (y down).
inline Mat3 look_rotation(const Vec3& eye, const Vec3& target) {
  const Vec3 z = (target - eye).normalized();
  Vec3 x = Vec3(0, -1, 0).cross(z);
  if (x.norm() < 1e-6) x = Vec3(1, 0, 0).cross(z);
  x.normalize();
  const Vec3 y = z.cross(x);
  Mat3 R;
  R.row(0) = x.transpose();
  R.row(1) = y.transpose();
  R.row(2) = z.transpose();
  return R;
}

inline CameraModel camera_at(const Vec3& eye, const Vec3& target, double f = 300, int w = 320, int h = 240,
                             double d_min = 0.5, double d_max = 20) {
  const Mat3 R = look_rotation(eye, target);
  return CameraModel(f, f, (w - 1) / 2.0, (h - 1) / 2.0, R, -R * eye, d_min, d_max);
}

// Camera on a sphere of radius 3..6 around a point near the origin.
inline CameraModel random_camera(CounterRng& rng) {
  const Vec3 target(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2));
  Vec3 dir = rng.unit_vector();
  const Vec3 eye = target + rng.uniform(3.0, 6.0) * dir;
  const double f = rng.uniform(200.0, 500.0);
  return camera_at(eye, target, f);
}

// A second camera displaced sideways from `ref` by 0.3..1 units, looking at the same point.
inline CameraModel neighbor_camera(const CameraModel& ref, CounterRng& rng) {
  const Vec3 c = ref.center();
  const Vec3 fwd = ref.R().row(2).transpose();
  const Vec3 target = c + 4.0 * fwd;
  Vec3 side = rng.unit_vector();
  side -= side.dot(fwd) * fwd;
  const Vec3 eye = c + rng.uniform(0.3, 1.0) * side.normalized();
  return camera_at(eye, target, ref.fx());
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("planemvs_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Relative paths of files that differ between two trees (or exist in only one).
// timings.txt is skipped.
inline std::vector<std::string> tree_differences(const std::filesystem::path& a, const std::filesystem::path& b,
                                                 size_t* compared = nullptr) {
  namespace fs = std::filesystem;
  std::vector<std::string> diff;
  size_t n = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file() || e.path().filename() == "timings.txt") continue;
    const fs::path rel = fs::relative(e.path(), a);
    ++n;
    if (!fs::exists(b / rel) || slurp(e.path()) != slurp(b / rel)) diff.push_back(rel.string());
  }
  for (const auto& e : fs::recursive_directory_iterator(b)) {
    if (e.is_regular_file() && !fs::exists(a / fs::relative(e.path(), b))) diff.push_back(fs::relative(e.path(), b).string());
  }
  if (compared) *compared = n;
  return diff;
}

// Down-scaled floor/wall fixture for fast end-to-end runs.
inline SyntheticSceneSpec small_floor_wall(int width = 96, int height = 72, int cameras = 3, uint64_t seed = 1) {
  SyntheticSceneSpec s = floor_wall_spec(seed);
  s.focal *= static_cast<double>(width) / s.width;
  s.width = width;
  s.height = height;
  s.camera_count = cameras;
  s.textureless_fraction = 0;
  // Keep the texture a few pixels wide at the lower resolution.
  for (PlaneSpec& pl : s.planes)
    if (pl.texture != TextureKind::kFlat) pl.scale *= 320.0 / width;
  return s;
}

// Ground-truth hypotheses of one synthetic view (depth 0 where nothing is hit).
inline DepthNormalMap gt_map(const SyntheticScene& scene, const SyntheticSceneSpec& spec, int view,
                             double depth_scale = 1.0) {
  const CameraModel& cam = scene.bundle.views[view].camera;
  DepthNormalMap m(spec.width, spec.height);
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) {
      const size_t i = static_cast<size_t>(y) * spec.width + x;
      const int id = scene.plane_ids[view][i];
      if (id < 0) continue;
      const Vec3 n = orient_towards_camera(cam.R() * spec.planes[id].normal.normalized(), cam.ray(Vec2(x, y)));
      m.set_hypothesis(x, y, {scene.gt_depth[view][i] * depth_scale, n});
      m.set_cost(x, y, 0.0f);
    }
  return m;
}

}  // namespace planemvs::testing
