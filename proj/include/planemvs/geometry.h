#pragma once

#include <cmath>

#include "planemvs/camera.h"
#include "planemvs/types.h"

namespace planemvs {

// Per-pixel plane: depth along the pixel ray and a unit camera-frame normal.
struct PlaneHypothesis {
  double depth = 0;
  Vec3 normal = Vec3(0, 0, -1);
};

// Plane A x + B y + C z + d = 0 with unit (A, B, C), in the camera frame of
// the view being processed.
struct FittedPlane {
  Eigen::Vector4d coeffs = Eigen::Vector4d(0, 0, 1, 0);
  int inlier_count = 0;
  double rms_residual = 0;

  Vec3 normal() const { return coeffs.head<3>(); }
  double offset() const { return coeffs[3]; }
  double signed_distance(const Vec3& X) const { return coeffs.head<3>().dot(X) + coeffs[3]; }
};

// a x + b y + c = 0 with a^2 + b^2 = 1.
struct EpipolarLine {
  double a = 1, b = 0, c = 0;
  double distance(const Vec2& px) const { return std::abs(a * px.x() + b * px.y() + c); }
};

struct PlaneDepth {
  double depth = 0;
  bool in_range = false;
};

// Depth at `pixel` of the ray-plane intersection. Throws DegeneracyError when
// the ray is parallel to the plane; out-of-range depths are flagged, not thrown.
PlaneDepth plane_depth_at(const FittedPlane& plane, const Vec2& pixel, const CameraModel& cam);

// Plane through three points. Throws DegeneracyError for collinear input.
FittedPlane triangle_plane(const Vec3& v0, const Vec3& v1, const Vec3& v2);

// Camera-frame plane carried by a hypothesis living at `pixel`.
FittedPlane hypothesis_plane(const CameraModel& cam, const Vec2& pixel, const PlaneHypothesis& hyp);

// Flips n so that n . ray < 0.
Vec3 orient_towards_camera(const Vec3& n, const Vec3& ray);

// Hypothesis at `pixel` induced by a camera-frame plane; nullopt-like result
// (in_range == false) when the intersection is invalid or out of depth range.
struct PlaneSample {
  PlaneHypothesis hyp;
  bool valid = false;
};
PlaneSample plane_hypothesis_at(const FittedPlane& plane, const Vec2& pixel, const CameraModel& cam);

// Plane-induced homography mapping reference pixels to source pixels.
// Throws DegeneracyError when the plane passes through the source center.
Mat3 homography(const CameraModel& ref, const CameraModel& src, const PlaneHypothesis& hyp,
                const Vec2& pixel);

// Precomputed ref->src pair terms so per-hypothesis homographies cost a few flops.
class ViewPairGeometry {
 public:
  ViewPairGeometry() = default;
  ViewPairGeometry(const CameraModel& ref, const CameraModel& src);
  // Homography for the camera-frame plane n . X + d = 0. No degeneracy check.
  Mat3 homography(const Vec3& n, double d) const {
    return A_ - b_ * (n.transpose() * ref_K_inv_) / d;
  }
  // Src camera center expressed in the ref camera frame.
  const Vec3& src_center_in_ref() const { return src_center_; }
  const Mat3& R_rel() const { return R_rel_; }
  const Vec3& t_rel() const { return t_rel_; }

 private:
  Mat3 A_ = Mat3::Identity();
  Vec3 b_ = Vec3::Zero();
  Mat3 ref_K_inv_ = Mat3::Identity();
  Mat3 R_rel_ = Mat3::Identity();
  Vec3 t_rel_ = Vec3::Zero();
  Vec3 src_center_ = Vec3::Zero();
};

// Epipolar line in the reference image of a source pixel.
// Throws DegeneracyError when the camera centers coincide.
EpipolarLine epipolar_line(const CameraModel& ref, const CameraModel& src, const Vec2& pixel_in_src);

// Cosine of the angle between two normals. Throws DomainError for zero vectors.
double normal_similarity(const Vec3& n_p, const Vec3& n_q);

}  // namespace planemvs
