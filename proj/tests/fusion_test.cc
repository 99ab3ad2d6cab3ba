#include <gtest/gtest.h>

#include "planemvs/errors.h"
#include "planemvs/fusion.h"
#include "support.h"

namespace planemvs {
namespace {

PointCloud cloud_of(const std::vector<Vec3>& pts) {
  PointCloud c;
  for (const auto& p : pts) c.points.push_back({p, Vec3(0, 0, 1), {0, 0, 0}});
  return c;
}

// O(n^2) reference for completeness / accuracy.
CloudMetrics brute_metrics(const PointCloud& est, const PointCloud& gt, double tau) {
  auto covered = [&](const PointCloud& a, const PointCloud& b) {
    size_t n = 0;
    for (const auto& p : a.points) {
      bool hit = false;
      for (const auto& q : b.points) hit |= (p.position - q.position).norm() <= tau;
      n += hit;
    }
    return a.empty() ? 0.0 : 100.0 * n / a.size();
  };
  CloudMetrics m;
  m.completeness = covered(gt, est);
  m.accuracy = covered(est, gt);
  m.f1 = m.completeness + m.accuracy > 0 ? 2 * m.completeness * m.accuracy / (m.completeness + m.accuracy) : 0.0;
  return m;
}

TEST(EvaluateCloud, MatchesBruteForce) {
  CounterRng rng{51};
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Vec3> a(400), b(300);
    for (auto& p : a) p = Vec3(rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 0.2));
    for (auto& p : b) p = Vec3(rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 0.2));
    const double tau = rng.uniform(0.02, 0.08);
    const CloudMetrics got = evaluate_cloud(cloud_of(a), cloud_of(b), tau);
    const CloudMetrics want = brute_metrics(cloud_of(a), cloud_of(b), tau);
    EXPECT_NEAR(got.completeness, want.completeness, 1e-9);
    EXPECT_NEAR(got.accuracy, want.accuracy, 1e-9);
    EXPECT_NEAR(got.f1, want.f1, 1e-9);
    EXPECT_EQ(got.tau, tau);
  }
}

TEST(EvaluateCloud, SimpleCases) {
  const std::vector<Vec3> g = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)};
  CloudMetrics m = evaluate_cloud(cloud_of(g), cloud_of(g), 0.01);
  EXPECT_EQ(m.completeness, 100.0);
  EXPECT_EQ(m.accuracy, 100.0);
  EXPECT_EQ(m.f1, 100.0);
  m = evaluate_cloud(cloud_of({g[0], g[1]}), cloud_of(g), 0.01);
  EXPECT_EQ(m.completeness, 50.0);
  EXPECT_EQ(m.accuracy, 100.0);
  EXPECT_NEAR(m.f1, 200.0 / 3.0, 1e-12);
  m = evaluate_cloud(PointCloud{}, cloud_of(g), 0.01);
  EXPECT_EQ(m.completeness, 0.0);
  EXPECT_EQ(m.f1, 0.0);
  EXPECT_THROW(evaluate_cloud(cloud_of(g), PointCloud{}, 0.01), InputError);
  EXPECT_THROW(evaluate_cloud(cloud_of(g), cloud_of(g), 0.0), DomainError);
}

TEST(EvaluateDepth, FractionsAndRegions) {
  DepthNormalMap est(4, 1);
  const float gt[4] = {1.0f, 2.0f, 4.0f, 0.0f};
  est.set_hypothesis(0, 0, {1.005, Vec3(0, 0, -1)});
  est.set_hypothesis(1, 0, {2.1, Vec3(0, 0, -1)});
  // pixel 2 left empty: counts as a miss with relative error 1
  const DepthMetrics all = evaluate_depth(est, gt, 0.01);
  EXPECT_EQ(all.count, 3u);
  EXPECT_NEAR(all.fraction_within, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(all.mean_abs_rel_error, (0.005 + 0.05 + 1.0) / 3.0, 1e-6);
  const uint8_t region[4] = {0, 1, 0, 1};
  const DepthMetrics r = evaluate_depth(est, gt, 0.1, region);
  EXPECT_EQ(r.count, 1u);
  EXPECT_EQ(r.fraction_within, 1.0);
  const float two[2] = {1, 1};
  EXPECT_THROW(evaluate_depth(est, two, 0.01), DimensionError);
  const float none[4] = {0, 0, 0, 0};
  EXPECT_THROW(evaluate_depth(est, none, 0.01), InputError);
}

TEST(Fuse, GroundTruthMapsGiveSurfacePoints) {
  const SyntheticSceneSpec spec = testing::small_floor_wall(48, 36, 3);
  const SyntheticScene scene = synth_scene(spec);
  std::vector<DepthNormalMap> maps;
  std::vector<CameraModel> cams;
  std::vector<ImageBuffer> images;
  size_t pixels = 0;
  for (int v = 0; v < 3; ++v) {
    maps.push_back(testing::gt_map(scene, spec, v));
    cams.push_back(scene.bundle.views[v].camera);
    images.push_back(scene.bundle.views[v].image);
    pixels += maps.back().size();
  }
  FusionParams params;
  const PointCloud cloud = fuse(maps, cams, params, images);
  ASSERT_GT(cloud.size(), 500u);
  EXPECT_LE(cloud.size(), pixels / 3);
  for (const auto& p : cloud.points) {
    double best = 1e9;
    for (const auto& pl : spec.planes) best = std::min(best, std::abs(pl.normal.normalized().dot(p.position - pl.center)));
    ASSERT_LT(best, 0.02);
  }
  // The ground-truth cloud is one sample per pixel, about 0.1 units apart here.
  const CloudMetrics m = evaluate_cloud(cloud, scene.gt_cloud, 0.25);
  EXPECT_GT(m.accuracy, 99.0);

  params.min_consistent = 3;  // more agreeing views than exist
  EXPECT_TRUE(fuse(maps, cams, params).empty());
  EXPECT_THROW(fuse(maps, std::span<const CameraModel>(cams.data(), 2), params), DimensionError);
}

TEST(Fuse, DisagreeingViewsProduceNothing) {
  const SyntheticSceneSpec spec = testing::small_floor_wall(48, 36, 3);
  const SyntheticScene scene = synth_scene(spec);
  std::vector<DepthNormalMap> maps;
  std::vector<CameraModel> cams;
  for (int v = 0; v < 3; ++v) {
    maps.push_back(testing::gt_map(scene, spec, v, 1.0 + 0.05 * v));
    cams.push_back(scene.bundle.views[v].camera);
  }
  EXPECT_TRUE(fuse(maps, cams, FusionParams{}).empty());
}

}  // namespace
}  // namespace planemvs
