#include <gtest/gtest.h>

#include <cmath>

#include "planemvs/consistency.h"
#include "planemvs/errors.h"
#include "support.h"

namespace planemvs {
namespace {

constexpr int kW = 80, kH = 60;

// Two cameras looking down -z at the plane z = 0 from z = 5; the source is
// fronto-parallel, so its depth map is constant and bilinear lookups are exact.
struct Rig {
  CameraModel ref = testing::camera_at(Vec3(0.4, 0.1, 5), Vec3(0.4, 0.1, 0), 100, kW, kH, 0.5, 20);
  CameraModel src = testing::camera_at(Vec3(-0.3, 0, 5), Vec3(-0.3, 0, 0), 100, kW, kH, 0.5, 20);
  DepthNormalMap src_map{kW, kH};
  Rig() {
    const Vec3 n_src = src.R() * Vec3(0, 0, 1);
    for (int y = 0; y < kH; ++y)
      for (int x = 0; x < kW; ++x) src_map.set_hypothesis(x, y, {5.0, n_src.z() < 0 ? n_src : Vec3(-n_src)});
  }
  DepthView view() const { return {&src, &src_map}; }
  // Ref depth of the z = 0 plane at a pixel.
  double gt_depth(const Vec2& p) const {
    const Vec3 c = ref.center();
    const Vec3 dir = ref.R().transpose() * ref.ray(p);
    return -c.z() / dir.z();
  }
  Vec3 gt_normal_ref() const {
    const Vec3 n = ref.R() * Vec3(0, 0, 1);
    return n.z() < 0 ? n : Vec3(-n);
  }
};

TEST(Reprojection, ZeroOnConsistentFixture) {
  const Rig rig;
  ConsistencyParams params;
  for (const Vec2 p : {Vec2(40, 30), Vec2(12.5, 40.25), Vec2(60, 9)}) {
    EXPECT_NEAR(reprojection_cost(rig.ref, rig.view(), p, rig.gt_depth(p), params), 0.0, 1e-9);
  }
}

TEST(Reprojection, TruncatedWhenOccluded) {
  Rig rig;
  for (int y = 0; y < kH; ++y)
    for (int x = 0; x < kW; ++x) rig.src_map.set_hypothesis(x, y, {2.0, Vec3(0, 0, -1)});
  ConsistencyParams params;
  const Vec2 p(40, 30);
  EXPECT_EQ(reprojection_cost(rig.ref, rig.view(), p, rig.gt_depth(p), params), params.tau_geo);
  // Projection leaving the source image.
  EXPECT_EQ(reprojection_cost(rig.ref, rig.view(), Vec2(0, 0), 0.6, params), params.tau_geo);
  EXPECT_THROW(reprojection_cost(rig.ref, rig.view(), p, 0.0, params), DomainError);
}

TEST(BilinearDepth, InterpolatesAndRejectsHoles) {
  DepthNormalMap m(3, 3);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 3; ++x) m.set_hypothesis(x, y, {1.0 + x + 10.0 * y, Vec3(0, 0, -1)});
  EXPECT_NEAR(*bilinear_depth(m, Vec2(0.5, 0.5)), 6.5, 1e-12);
  EXPECT_NEAR(*bilinear_depth(m, Vec2(2, 2)), 23.0, 1e-12);
  EXPECT_FALSE(bilinear_depth(m, Vec2(2.01, 0)).has_value());
  m.set_hypothesis(1, 1, {0.0, Vec3(0, 0, -1)});
  EXPECT_FALSE(bilinear_depth(m, Vec2(0.5, 0.5)).has_value());
}

EpipolarGeoContext context(double dist_H, double dist_sta) {
  EpipolarGeoContext c;
  c.dist_H = dist_H;
  c.dist_sta = dist_sta;
  return c;
}

TEST(EpipolarCost, PiecewiseValues) {
  ConsistencyParams params;
  const Vec3 n(0, 0, -1);
  EXPECT_EQ(epipolar_geo_cost(context(0.0, 0.7), n, n, params), 0.0);
  EXPECT_EQ(epipolar_geo_cost(context(params.omega_geo * 0.7, 0.7), n, n, params), 2.0);
  EXPECT_EQ(epipolar_geo_cost(context(10.0, 0.7), n, n, params), 2.0);
  // Inside the band: D_H / D_sta + (1 - V_sim).
  const Vec3 m = Vec3(0.6, 0, -0.8);
  EXPECT_NEAR(epipolar_geo_cost(context(0.35, 0.7), n, m, params), 0.5 + (1 - 0.8), 1e-15);
  EXPECT_NEAR(epipolar_geo_cost(context(0.35, 0.7), n, n, params), 0.5, 1e-15);
  // Large normal disagreement is clipped to the cap.
  EXPECT_EQ(epipolar_geo_cost(context(3.0, 0.7), n, Vec3(0, 0, 1), params), 2.0);
}

TEST(EpipolarCost, AdaptiveThresholdBranches) {
  EpipolarGeoContext c;
  c.p = Vec2(3, 4);
  c.p_H = Vec2(5, 7);
  c.dist_H = std::hypot(2.0, 3.0);
  c.line = {0.6, 0.8, -5.0};
  c.dist_p = 0.25;
  EXPECT_EQ(adaptive_threshold(c), 0.25);
  c.dist_p = 0;
  const double ca = -5.0 / 0.6, cb = -5.0 / 0.8;
  const double expect = std::abs((ca * 2 - ca * 3) / std::sqrt(ca * ca + cb * cb + c.dist_H) * c.dist_H);
  EXPECT_NEAR(adaptive_threshold(c), expect, 1e-12);
  // Axis-aligned line: the c/a, c/b ratios are undefined, fall back to D_H.
  c.line = {1.0, 0.0, -3.0};
  EXPECT_EQ(adaptive_threshold(c), c.dist_H);
}

TEST(EpipolarCost, ContextOnRealGeometry) {
  const Rig rig;
  const Vec2 p(40, 30);
  const PlaneHypothesis h{rig.gt_depth(p), rig.gt_normal_ref()};
  const auto ctx = epipolar_context(rig.ref, rig.view(), p, h);
  ASSERT_TRUE(ctx.has_value());
  EXPECT_EQ(ctx->q.x(), std::round(ctx->q.x()));
  // q's epipolar line passes through p_H, and p_H lies within half a pixel's transfer of p.
  EXPECT_NEAR(ctx->line.distance(ctx->p_H), 0.0, 1e-9);
  EXPECT_LT(ctx->dist_H, 1.0);
  EXPECT_NEAR(ctx->n_q.dot(h.normal), 1.0, 1e-9);
  ConsistencyParams params;
  const double cost = epipolar_geo_cost(*ctx, h.normal, params);
  EXPECT_GE(cost, 0.0);
  EXPECT_LE(cost, 2.0);
  // A hypothesis far off the surface is inconsistent.
  const DepthView views[] = {rig.view()};
  EXPECT_EQ(multi_view_epipolar_cost(rig.ref, views, p, {0.6 * h.depth, h.normal}, params), 2.0);
  EXPECT_EQ(multi_view_epipolar_cost(rig.ref, {}, p, h, params), 2.0);
}

TEST(ConsistencyParams, Validation) {
  ConsistencyParams p;
  p.tau_geo = 0;
  EXPECT_THROW(p.validate(), DomainError);
  p = ConsistencyParams{};
  p.omega_geo = -1;
  EXPECT_THROW(p.validate(), DomainError);
}

}  // namespace
}  // namespace planemvs
