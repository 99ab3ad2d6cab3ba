#pragma once

#include <optional>
#include <span>

#include "planemvs/camera.h"
#include "planemvs/depth_map.h"
#include "planemvs/geometry.h"

namespace planemvs {

struct ConsistencyParams {
  double tau_geo = 3.0;  // px
  double omega_geo = 5.0;
  double alpha_geo = 0.1;
  void validate() const;
};

// A neighboring view's current depth/normal estimate.
struct DepthView {
  const CameraModel* camera = nullptr;
  const DepthNormalMap* map = nullptr;
};

// Bilinear depth at a sub-pixel position; empty when outside the map or when
// any of the four taps is unset (depth <= 0).
std::optional<double> bilinear_depth(const DepthNormalMap& map, const Vec2& q);

// Truncated forward-backward reprojection distance in px, capped at tau_geo.
double reprojection_cost(const CameraModel& ref, const DepthView& src, const Vec2& pixel, double depth_ref,
                         const ConsistencyParams& params);

struct EpipolarGeoContext {
  Vec2 p = Vec2::Zero();      // reference pixel
  Vec2 p_H = Vec2::Zero();    // back-projected source pixel
  Vec2 q = Vec2::Zero();      // integer source pixel
  EpipolarLine line;          // epipolar line of q in the reference image
  double dist_p = 0;
  double dist_H = 0;
  double dist_sta = 0;
  Vec3 n_q = Vec3(0, 0, -1);  // source normal at q, in the reference camera frame
};

// Distances at or below this count as a pixel lying on the epipolar line.
inline constexpr double kOnLineTolerance = 1e-9;

double adaptive_threshold(const EpipolarGeoContext& ctx);

// Context for hypothesis `hyp` at reference pixel p against one source view;
// empty when the projection leaves the source image or the source has no depth there.
std::optional<EpipolarGeoContext> epipolar_context(const CameraModel& ref, const DepthView& src, const Vec2& p,
                                                   const PlaneHypothesis& hyp);

// Piecewise cost in [0, 2].
double epipolar_geo_cost(const EpipolarGeoContext& ctx, const Vec3& n_p, const Vec3& n_q,
                         const ConsistencyParams& params);
inline double epipolar_geo_cost(const EpipolarGeoContext& ctx, const Vec3& n_p, const ConsistencyParams& params) {
  return epipolar_geo_cost(ctx, n_p, ctx.n_q, params);
}

// Mean cost over the source views where a context exists; 2 when none does.
double multi_view_epipolar_cost(const CameraModel& ref, std::span<const DepthView> sources, const Vec2& p,
                                const PlaneHypothesis& hyp, const ConsistencyParams& params);

}  // namespace planemvs
