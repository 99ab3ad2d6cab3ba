#include "planemvs/geometry.h"

#include <algorithm>
#include <cmath>

#include "planemvs/errors.h"

namespace planemvs {

PlaneDepth plane_depth_at(const FittedPlane& plane, const Vec2& pixel, const CameraModel& cam) {
  const Vec3 r = cam.ray(pixel);
  const double denom = plane.coeffs.head<3>().dot(r);
  if (std::abs(denom) < 1e-12) throw DegeneracyError("plane_depth_at: ray parallel to plane");
  const double depth = -plane.coeffs[3] / denom;
  return {depth, cam.depth_in_range(depth)};
}

FittedPlane triangle_plane(const Vec3& v0, const Vec3& v1, const Vec3& v2) {
  const Vec3 e1 = v1 - v0;
  const Vec3 e2 = v2 - v0;
  const Vec3 n = e1.cross(e2);
  const double scale = std::max({e1.squaredNorm(), e2.squaredNorm(), (v2 - v1).squaredNorm()});
  if (!(n.norm() >= 1e-12 * scale) || scale == 0.0) {
    throw DegeneracyError("triangle_plane: collinear vertices");
  }
  const Vec3 u = n.normalized();
  FittedPlane p;
  p.coeffs << u, -u.dot(v0);
  p.inlier_count = 3;
  p.rms_residual = 0;
  return p;
}

FittedPlane hypothesis_plane(const CameraModel& cam, const Vec2& pixel, const PlaneHypothesis& hyp) {
  const Vec3 X = cam.ray(pixel) * hyp.depth;
  const Vec3 n = hyp.normal.normalized();
  FittedPlane p;
  p.coeffs << n, -n.dot(X);
  return p;
}

Vec3 orient_towards_camera(const Vec3& n, const Vec3& ray) {
  return n.dot(ray) > 0.0 ? Vec3(-n) : n;
}

PlaneSample plane_hypothesis_at(const FittedPlane& plane, const Vec2& pixel, const CameraModel& cam) {
  const Vec3 r = cam.ray(pixel);
  const double denom = plane.coeffs.head<3>().dot(r);
  if (std::abs(denom) < 1e-12) return {};
  const double depth = -plane.coeffs[3] / denom;
  if (!cam.depth_in_range(depth)) return {};
  return {{depth, orient_towards_camera(plane.normal(), r)}, true};
}

ViewPairGeometry::ViewPairGeometry(const CameraModel& ref, const CameraModel& src) {
  R_rel_ = src.R() * ref.R().transpose();
  t_rel_ = src.t() - R_rel_ * ref.t();
  A_ = src.K() * R_rel_ * ref.K_inv();
  b_ = src.K() * t_rel_;
  ref_K_inv_ = ref.K_inv();
  src_center_ = -R_rel_.transpose() * t_rel_;
}

Mat3 homography(const CameraModel& ref, const CameraModel& src, const PlaneHypothesis& hyp,
                const Vec2& pixel) {
  const FittedPlane plane = hypothesis_plane(ref, pixel, hyp);
  const ViewPairGeometry pair(ref, src);
  const Vec3 n = plane.normal();
  const double d = plane.offset();
  const double through_center = n.dot(pair.src_center_in_ref()) + d;
  if (std::abs(d) < 1e-12 || std::abs(through_center) < 1e-12 * std::max(1.0, std::abs(d))) {
    throw DegeneracyError("homography: plane passes through a camera center");
  }
  return pair.homography(n, d);
}

EpipolarLine epipolar_line(const CameraModel& ref, const CameraModel& src, const Vec2& pixel_in_src) {
  const Vec3 c_src = src.center();
  if ((c_src - ref.center()).norm() < 1e-12 * std::max(1.0, c_src.norm())) {
    throw DegeneracyError("epipolar_line: coincident camera centers");
  }
  // Epipole (homogeneous image of the src center) joined with the image of the
  // src ray's point at infinity.
  const Vec3 epipole = ref.M() * c_src + ref.p4();
  const Vec3 dir_world = src.R().transpose() * src.K_inv() *
                         Vec3(pixel_in_src.x(), pixel_in_src.y(), 1.0);
  const Vec3 vanishing = ref.M() * dir_world;
  const Vec3 l = epipole.cross(vanishing);
  const double s = std::hypot(l.x(), l.y());
  if (!(s > 0.0)) throw DegeneracyError("epipolar_line: undefined epipolar line");
  return {l.x() / s, l.y() / s, l.z() / s};
}

double normal_similarity(const Vec3& n_p, const Vec3& n_q) {
  const double a = n_p.norm();
  const double b = n_q.norm();
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("normal_similarity: zero-length normal");
  return std::clamp(n_p.dot(n_q) / (a * b), -1.0, 1.0);
}

}  // namespace planemvs
