#pragma once

#include <cstdint>
#include <vector>

#include "planemvs/geometry.h"

namespace planemvs {

// Upper bound of every photometric / aggregated matching cost (worst 1 - NCC).
inline constexpr double kCostMax = 2.0;

// Dense per-pixel plane hypotheses with matching costs and reliability flags.
// Storage is f32 (the on-disk precision); PlaneHypothesis values passed in
// are rounded on write, so a stored hypothesis reads back exactly.
class DepthNormalMap {
 public:
  DepthNormalMap() = default;
  DepthNormalMap(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  size_t size() const { return depth_.size(); }
  size_t index(int x, int y) const { return static_cast<size_t>(y) * width_ + x; }

  PlaneHypothesis hypothesis(int x, int y) const;
  void set_hypothesis(int x, int y, const PlaneHypothesis& h);

  float depth(int x, int y) const { return depth_[index(x, y)]; }
  Vec3 normal(int x, int y) const;
  float cost(int x, int y) const { return cost_[index(x, y)]; }
  void set_cost(int x, int y, float c) { cost_[index(x, y)] = c; }
  bool reliable(int x, int y) const { return reliable_[index(x, y)] != 0; }
  void set_reliable(int x, int y, bool r) { reliable_[index(x, y)] = r ? 1 : 0; }

  // Raw storage, row-major; normals are interleaved xyz.
  std::vector<float>& depths() { return depth_; }
  const std::vector<float>& depths() const { return depth_; }
  std::vector<float>& normals() { return normal_; }
  const std::vector<float>& normals() const { return normal_; }
  std::vector<float>& costs() { return cost_; }
  const std::vector<float>& costs() const { return cost_; }
  std::vector<uint8_t>& reliable_flags() { return reliable_; }
  const std::vector<uint8_t>& reliable_flags() const { return reliable_; }

  bool operator==(const DepthNormalMap& o) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> depth_;
  std::vector<float> normal_;
  std::vector<float> cost_;
  std::vector<uint8_t> reliable_;
};

// Round a hypothesis to map storage precision.
PlaneHypothesis quantize(const PlaneHypothesis& h);

// Throws InvariantError if a stored hypothesis breaks the PlaneHypothesis
// invariants (unit, camera-facing normal; depth in [d_min, d_max]) or a cost
// leaves [0, kCostMax]. Pixels with depth 0 are treated as empty and skipped.
void check_invariants(const DepthNormalMap& map, const CameraModel& cam);

}  // namespace planemvs
