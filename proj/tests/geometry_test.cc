#include <gtest/gtest.h>

#include <cmath>

#include "planemvs/errors.h"
#include "planemvs/geometry.h"
#include "support.h"

namespace planemvs {
namespace {

using testing::neighbor_camera;
using testing::random_camera;

Vec2 random_pixel(CounterRng& rng, const CameraModel& cam) {
  return {rng.uniform(0.0, 2 * cam.cx()), rng.uniform(0.0, 2 * cam.cy())};
}

// Random hypothesis facing the camera with a normal at most ~60 degrees off the ray.
PlaneHypothesis random_hypothesis(CounterRng& rng, const CameraModel& cam, const Vec2& px) {
  const Vec3 ray = cam.ray(px).normalized();
  Vec3 n = -ray + 0.8 * rng.unit_vector();
  return {rng.uniform(2.0, 8.0), orient_towards_camera(n.normalized(), ray)};
}

TEST(Camera, RejectsBadIntrinsics) {
  EXPECT_THROW(CameraModel(0, 1, 0, 0, Mat3::Identity(), Vec3::Zero(), 1, 2), DomainError);
  EXPECT_THROW(CameraModel(1, 1, 0, 0, Mat3::Identity(), Vec3::Zero(), 2, 1), DomainError);
  EXPECT_THROW(CameraModel(1, 1, 0, 0, 2.0 * Mat3::Identity(), Vec3::Zero(), 1, 2), DomainError);
  EXPECT_THROW(back_project(CameraModel(), Vec2(0, 0), 0.0), DomainError);
}

TEST(Camera, BackProjectThenProjectIsIdentity) {
  CounterRng rng{11};
  for (int i = 0; i < 100; ++i) {
    const CameraModel cam = random_camera(rng);
    const Vec2 px = random_pixel(rng, cam);
    const double d = rng.uniform(0.5, 20.0);
    const Vec3 X = back_project(cam, px, d);
    // M X + p4 = d (x, y, 1)
    const Vec3 h = cam.M() * X + cam.p4();
    EXPECT_NEAR(h.z(), d, 1e-9 * d);
    const auto pr = project(cam, X);
    ASSERT_TRUE(pr.has_value());
    EXPECT_NEAR((pr->pixel - px).norm(), 0.0, 1e-9);
    EXPECT_NEAR(pr->depth, d, 1e-9 * d);
    EXPECT_NEAR((cam.world_to_camera(X) - back_project_camera(cam, px, d)).norm(), 0.0, 1e-9 * d);
  }
}

TEST(Camera, PointBehindCameraDoesNotProject) {
  const CameraModel cam = testing::camera_at(Vec3(0, 0, -5), Vec3::Zero());
  EXPECT_FALSE(project(cam, Vec3(0, 0, -10)).has_value());
  EXPECT_TRUE(project(cam, Vec3(0, 0, 0)).has_value());
}

TEST(Geometry, PlaneRoundTrip) {
  CounterRng rng{12};
  for (int i = 0; i < 100; ++i) {
    const CameraModel cam = random_camera(rng);
    const Vec2 px = random_pixel(rng, cam);
    const PlaneHypothesis h = random_hypothesis(rng, cam, px);
    const FittedPlane plane = hypothesis_plane(cam, px, h);
    EXPECT_NEAR(plane.normal().norm(), 1.0, 1e-12);
    EXPECT_NEAR(plane.signed_distance(back_project_camera(cam, px, h.depth)), 0.0, 1e-9);
    const PlaneDepth pd = plane_depth_at(plane, px, cam);
    EXPECT_NEAR(pd.depth, h.depth, 1e-9 * h.depth);
    const PlaneSample s = plane_hypothesis_at(plane, px, cam);
    ASSERT_TRUE(s.valid);
    EXPECT_NEAR(s.hyp.depth, h.depth, 1e-9 * h.depth);
    EXPECT_NEAR((s.hyp.normal - h.normal).norm(), 0.0, 1e-9);
    // Other pixels of the same plane stay on it.
    const Vec2 other = random_pixel(rng, cam);
    const PlaneDepth od = plane_depth_at(plane, other, cam);
    if (od.depth > 0) EXPECT_NEAR(plane.signed_distance(back_project_camera(cam, other, od.depth)), 0.0, 1e-9 * od.depth);
  }
}

TEST(Geometry, TrianglePlaneContainsVertices) {
  CounterRng rng{13};
  for (int i = 0; i < 100; ++i) {
    const Vec3 a = rng.unit_vector() * 3, b = rng.unit_vector() * 3, c = rng.unit_vector() * 3;
    const FittedPlane p = triangle_plane(a, b, c);
    EXPECT_NEAR(p.signed_distance(a), 0.0, 1e-9);
    EXPECT_NEAR(p.signed_distance(b), 0.0, 1e-9);
    EXPECT_NEAR(p.signed_distance(c), 0.0, 1e-9);
  }
  EXPECT_THROW(triangle_plane(Vec3(0, 0, 1), Vec3(1, 1, 1), Vec3(2, 2, 1)), DegeneracyError);
}

TEST(Geometry, ParallelRayIsDegenerate) {
  const CameraModel cam = testing::camera_at(Vec3(0, 0, -5), Vec3::Zero());
  FittedPlane p;
  p.coeffs = Eigen::Vector4d(1, 0, 0, -1);  // x = 1, contains the principal ray direction
  EXPECT_THROW(plane_depth_at(p, Vec2(cam.cx(), cam.cy()), cam), DegeneracyError);
}

TEST(Geometry, HomographyWarpMatchesPointTransfer) {
  CounterRng rng{14};
  for (int i = 0; i < 100; ++i) {
    const CameraModel ref = random_camera(rng);
    const CameraModel src = neighbor_camera(ref, rng);
    const Vec2 px = random_pixel(rng, ref);
    const PlaneHypothesis h = random_hypothesis(rng, ref, px);
    const FittedPlane plane = hypothesis_plane(ref, px, h);
    const Mat3 H = homography(ref, src, h, px);
    const ViewPairGeometry pair(ref, src);
    const Mat3 H2 = pair.homography(plane.normal(), plane.offset());
    for (int k = 0; k < 4; ++k) {
      const Vec2 q = px + Vec2(rng.uniform(-10, 10), rng.uniform(-10, 10));
      const PlaneDepth pd = plane_depth_at(plane, q, ref);
      ASSERT_GT(pd.depth, 0);
      const auto proj = project(src, back_project(ref, q, pd.depth));
      ASSERT_TRUE(proj.has_value());
      const Vec3 w = H * Vec3(q.x(), q.y(), 1);
      const Vec3 w2 = H2 * Vec3(q.x(), q.y(), 1);
      EXPECT_NEAR((w.hnormalized() - proj->pixel).norm(), 0.0, 1e-6);
      EXPECT_NEAR((w2.hnormalized() - proj->pixel).norm(), 0.0, 1e-6);
    }
  }
}

TEST(Geometry, EpipolarIncidence) {
  CounterRng rng{15};
  for (int i = 0; i < 100; ++i) {
    const CameraModel ref = random_camera(rng);
    const CameraModel src = neighbor_camera(ref, rng);
    const Vec2 q = random_pixel(rng, src);
    const EpipolarLine l = epipolar_line(ref, src, q);
    EXPECT_NEAR(l.a * l.a + l.b * l.b, 1.0, 1e-12);
    // Two depths along the same source ray land on the same reference line.
    for (double d : {rng.uniform(1.0, 4.0), rng.uniform(4.0, 12.0)}) {
      const auto pr = project(ref, back_project(src, q, d));
      if (!pr) continue;
      EXPECT_NEAR(l.distance(pr->pixel), 0.0, 1e-9);
    }
  }
}

TEST(Geometry, EpipolarLineNeedsDistinctCenters) {
  const CameraModel a = testing::camera_at(Vec3(0, 0, -5), Vec3::Zero());
  EXPECT_THROW(epipolar_line(a, a, Vec2(10, 10)), DegeneracyError);
}

TEST(Geometry, NormalSimilarity) {
  EXPECT_DOUBLE_EQ(normal_similarity(Vec3(0, 0, 1), Vec3(0, 0, 2)), 1.0);
  EXPECT_NEAR(normal_similarity(Vec3(1, 0, 0), Vec3(0, 1, 0)), 0.0, 1e-15);
  EXPECT_NEAR(normal_similarity(Vec3(1, 0, 0), Vec3(-1, 0, 0)), -1.0, 1e-15);
  EXPECT_THROW(normal_similarity(Vec3::Zero(), Vec3(0, 0, 1)), DomainError);
}

TEST(Geometry, OrientTowardsCamera) {
  const Vec3 ray(0.1, 0.2, 1.0);
  EXPECT_LT(orient_towards_camera(Vec3(0, 0, 1), ray).dot(ray), 0);
  EXPECT_LT(orient_towards_camera(Vec3(0, 0, -1), ray).dot(ray), 0);
}

}  // namespace
}  // namespace planemvs
