#pragma once

#include <optional>

#include "planemvs/types.h"

namespace planemvs {

// Pinhole camera; R, t map world to camera coordinates (x right, y down, z forward).
class CameraModel {
 public:
  CameraModel() = default;
  // Throws DomainError when an invariant fails (fx, fy > 0, R a rotation,
  // 0 < d_min < d_max).
  CameraModel(double fx, double fy, double cx, double cy, const Mat3& R, const Vec3& t,
              double d_min, double d_max);

  double fx() const { return fx_; }
  double fy() const { return fy_; }
  double cx() const { return cx_; }
  double cy() const { return cy_; }
  const Mat3& R() const { return R_; }
  const Vec3& t() const { return t_; }
  const Mat3& K() const { return K_; }
  const Mat3& K_inv() const { return K_inv_; }
  // M = K R and p4 = K t: the projection matrix P = [M | p4].
  const Mat3& M() const { return M_; }
  const Vec3& p4() const { return p4_; }
  double d_min() const { return d_min_; }
  double d_max() const { return d_max_; }
  Vec3 center() const { return -R_.transpose() * t_; }

  bool depth_in_range(double d) const { return d >= d_min_ && d <= d_max_; }

  // Camera-frame direction with unit z through the pixel.
  Vec3 ray(const Vec2& px) const {
    return {(px.x() - cx_) / fx_, (px.y() - cy_) / fy_, 1.0};
  }
  Vec3 world_to_camera(const Vec3& X) const { return R_ * X + t_; }
  Vec3 camera_to_world(const Vec3& Xc) const { return R_.transpose() * (Xc - t_); }

 private:
  double fx_ = 1, fy_ = 1, cx_ = 0, cy_ = 0;
  Mat3 R_ = Mat3::Identity();
  Vec3 t_ = Vec3::Zero();
  Mat3 K_ = Mat3::Identity();
  Mat3 K_inv_ = Mat3::Identity();
  Mat3 M_ = Mat3::Identity();
  Mat3 M_inv_ = Mat3::Identity();
  Vec3 p4_ = Vec3::Zero();
  double d_min_ = 0.1, d_max_ = 10.0;

  friend Vec3 back_project(const CameraModel&, const Vec2&, double);
};

struct Projection {
  Vec2 pixel;
  double depth = 0;  // camera-frame z
};

// World point to pixel; empty when the point is not in front of the camera.
std::optional<Projection> project(const CameraModel& cam, const Vec3& X);

// World point X with M X + p4 = depth * (x, y, 1). Throws DomainError for depth <= 0.
Vec3 back_project(const CameraModel& cam, const Vec2& pixel, double depth);

// Camera-frame point depth * ((x - cx)/fx, (y - cy)/fy, 1).
Vec3 back_project_camera(const CameraModel& cam, const Vec2& pixel, double depth);

}  // namespace planemvs
