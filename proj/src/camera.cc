#include "planemvs/camera.h"

#include <Eigen/LU>
#include <cmath>

#include "planemvs/errors.h"

namespace planemvs {

CameraModel::CameraModel(double fx, double fy, double cx, double cy, const Mat3& R,
                         const Vec3& t, double d_min, double d_max)
    : fx_(fx), fy_(fy), cx_(cx), cy_(cy), R_(R), t_(t), d_min_(d_min), d_max_(d_max) {
  if (!(fx > 0.0) || !(fy > 0.0)) throw DomainError("focal lengths must be positive");
  if (!(d_min > 0.0) || !(d_min < d_max)) throw DomainError("depth range must satisfy 0 < d_min < d_max");
  const double ortho = (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (!(ortho < 1e-9) || R.determinant() < 0.0) {
    throw DomainError("R is not a rotation matrix");
  }
  if (!t.allFinite() || !std::isfinite(cx) || !std::isfinite(cy)) {
    throw DomainError("camera parameters must be finite");
  }
  K_ << fx, 0, cx, 0, fy, cy, 0, 0, 1;
  K_inv_ << 1.0 / fx, 0, -cx / fx, 0, 1.0 / fy, -cy / fy, 0, 0, 1;
  M_ = K_ * R_;
  M_inv_ = R_.transpose() * K_inv_;
  p4_ = K_ * t_;
}

std::optional<Projection> project(const CameraModel& cam, const Vec3& X) {
  const Vec3 h = cam.M() * X + cam.p4();
  if (!(h.z() > 0.0)) return std::nullopt;
  return Projection{{h.x() / h.z(), h.y() / h.z()}, h.z()};
}

Vec3 back_project(const CameraModel& cam, const Vec2& pixel, double depth) {
  if (!(depth > 0.0)) throw DomainError("back_project: depth must be positive");
  const Vec3 h(depth * pixel.x(), depth * pixel.y(), depth);
  return cam.M_inv_ * (h - cam.p4_);
}

Vec3 back_project_camera(const CameraModel& cam, const Vec2& pixel, double depth) {
  if (!(depth > 0.0)) throw DomainError("back_project_camera: depth must be positive");
  return cam.ray(pixel) * depth;
}

}  // namespace planemvs
