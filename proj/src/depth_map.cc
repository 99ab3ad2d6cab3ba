#include "planemvs/depth_map.h"

#include <cmath>
#include <string>

#include "planemvs/errors.h"

namespace planemvs {

DepthNormalMap::DepthNormalMap(int width, int height)
    : width_(width), height_(height),
      depth_(static_cast<size_t>(width) * height, 0.0f),
      normal_(static_cast<size_t>(width) * height * 3, 0.0f),
      cost_(static_cast<size_t>(width) * height, static_cast<float>(kCostMax)),
      reliable_(static_cast<size_t>(width) * height, 0) {
  if (width <= 0 || height <= 0) throw DimensionError("depth map dimensions must be positive");
}

PlaneHypothesis DepthNormalMap::hypothesis(int x, int y) const {
  const size_t i = index(x, y);
  return {depth_[i], Vec3(normal_[3 * i], normal_[3 * i + 1], normal_[3 * i + 2])};
}

Vec3 DepthNormalMap::normal(int x, int y) const {
  const size_t i = index(x, y);
  return {normal_[3 * i], normal_[3 * i + 1], normal_[3 * i + 2]};
}

void DepthNormalMap::set_hypothesis(int x, int y, const PlaneHypothesis& h) {
  const size_t i = index(x, y);
  depth_[i] = static_cast<float>(h.depth);
  normal_[3 * i] = static_cast<float>(h.normal.x());
  normal_[3 * i + 1] = static_cast<float>(h.normal.y());
  normal_[3 * i + 2] = static_cast<float>(h.normal.z());
}

PlaneHypothesis quantize(const PlaneHypothesis& h) {
  return {static_cast<float>(h.depth),
          Vec3(static_cast<float>(h.normal.x()), static_cast<float>(h.normal.y()),
               static_cast<float>(h.normal.z()))};
}

void check_invariants(const DepthNormalMap& map, const CameraModel& cam) {
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      const float c = map.cost(x, y);
      if (!(c >= 0.0f && c <= kCostMax)) {
        throw InvariantError("cost out of range at (" + std::to_string(x) + "," + std::to_string(y) + ")");
      }
      const PlaneHypothesis h = map.hypothesis(x, y);
      if (h.depth == 0.0) continue;
      const std::string at = " at (" + std::to_string(x) + "," + std::to_string(y) + ")";
      // f32 storage bounds the normalization error near 1e-7.
      if (std::abs(h.normal.norm() - 1.0) > 1e-6) throw InvariantError("non-unit normal" + at);
      if (!(h.normal.dot(cam.ray({double(x), double(y)})) < 0.0)) throw InvariantError("normal faces away" + at);
      const double tol = 1e-6 * cam.d_max();
      if (h.depth < cam.d_min() - tol || h.depth > cam.d_max() + tol) throw InvariantError("depth out of range" + at);
    }
  }
}

}  // namespace planemvs
