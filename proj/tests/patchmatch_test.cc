#include <gtest/gtest.h>

#include "planemvs/errors.h"
#include "planemvs/patchmatch.h"
#include "support.h"

namespace planemvs {
namespace {

TEST(MultiViewCost, WeightedMean) {
  const double m[3] = {0.2, 0.6, 2.0};
  const double w[3] = {1.0, 3.0, 0.0};
  const MultiViewCost c = multi_view_cost(m, w);
  EXPECT_NEAR(c.value, (0.2 + 1.8) / 4.0, 1e-15);
  EXPECT_FALSE(c.all_occluded);
  const double z[3] = {0, 0, 0};
  const MultiViewCost o = multi_view_cost(m, z);
  EXPECT_EQ(o.value, kCostMax);
  EXPECT_TRUE(o.all_occluded);
}

TEST(ViewWeights, FromBestCostPerView) {
  PatchMatchConfig cfg;
  const std::vector<std::vector<double>> rows = {{0.3, 2.0, 0.9}, {0.6, 2.0, 0.1}};
  const auto w = view_weights(rows, cfg);
  ASSERT_EQ(w.size(), 3u);
  EXPECT_NEAR(w[0], std::exp(-0.3 / cfg.view_weight_scale), 1e-15);
  EXPECT_EQ(w[1], 0.0);
  EXPECT_NEAR(w[2], std::exp(-0.1 / cfg.view_weight_scale), 1e-15);
}

TEST(RefPatch, SamplingAndFlatness) {
  std::vector<float> px(40 * 30);
  for (size_t i = 0; i < px.size(); ++i) px[i] = static_cast<float>((i * 7919) % 101) / 100.0f;
  const ImageBuffer img(40, 30, 1, px);
  PatchMatchConfig cfg;
  const RefPatch inner = make_ref_patch(img, 20, 15, cfg);
  EXPECT_EQ(inner.value.size(), 25u);
  EXPECT_TRUE(inner.textured);
  const RefPatch corner = make_ref_patch(img, 0, 0, cfg);
  EXPECT_EQ(corner.value.size(), 9u);
  const ImageBuffer flat(40, 30, 1, std::vector<float>(40 * 30, 0.5f));
  EXPECT_FALSE(make_ref_patch(flat, 20, 15, cfg).textured);
}

constexpr int W = 96, H = 72;

struct Fixture {
  SyntheticSceneSpec spec = testing::small_floor_wall(W, H, 3);
  SyntheticScene scene = synth_scene(spec);
  std::vector<std::shared_ptr<const ImageBuffer>> gray = gray_images(scene.bundle);
  DepthNormalMap gt = testing::gt_map(scene, spec, 0);
};

TEST(Photometric, GroundTruthBeatsWrongDepthOnTexture) {
  const Fixture f;
  const MatchingContext ctx = make_context(f.scene.bundle, 0, f.gray);
  PatchMatchConfig cfg;
  int n = 0, better = 0;
  double sum_gt = 0;
  for (int y = 6; y < H - 6; y += 3)
    for (int x = 6; x < W - 6; x += 3) {
      if (f.scene.plane_ids[0][size_t(y) * W + x] != 0) continue;  // floor
      const RefPatch patch = make_ref_patch(*ctx.ref_image, x, y, cfg);
      const auto m_gt = photometric_costs(patch, ctx, f.gt.hypothesis(x, y), cfg);
      PlaneHypothesis wrong = f.gt.hypothesis(x, y);
      wrong.depth *= 1.1;
      const auto m_wrong = photometric_costs(patch, ctx, wrong, cfg);
      for (size_t j = 0; j < m_gt.size(); ++j) {
        if (m_gt[j] >= kCostMax) continue;
        ++n;
        sum_gt += m_gt[j];
        better += m_gt[j] < m_wrong[j];
      }
    }
  ASSERT_GT(n, 50);
  EXPECT_LT(sum_gt / n, 0.25);  // oblique floor, bilinear resampling
  EXPECT_GE(better, 0.95 * n);
}

TEST(Photometric, InvariantToAffineIntensityChange) {
  const Fixture f;
  SceneBundle b = f.scene.bundle;
  std::vector<float> px = b.views[1].image.data();
  for (float& v : px) v = 0.1f + 0.5f * v;
  b.views[1].image = ImageBuffer(W, H, 1, px);
  const auto g0 = f.gray;
  const auto g1 = gray_images(b);
  const MatchingContext c0 = make_context(f.scene.bundle, 0, g0);
  const MatchingContext c1 = make_context(b, 0, g1);
  PatchMatchConfig cfg;
  const RefPatch patch = make_ref_patch(*c0.ref_image, 45, 60, cfg);
  const PlaneHypothesis h = f.gt.hypothesis(45, 60);
  for (size_t j = 0; j < c0.sources.size(); ++j) {
    if (c0.sources[j].view_index != 1) continue;
    EXPECT_NEAR(photometric_cost(patch, c0.ref_camera, c0.sources[j], h, cfg),
                photometric_cost(patch, c1.ref_camera, c1.sources[j], h, cfg), 1e-5);
  }
}

TEST(RandomInit, RespectsInvariants) {
  const Fixture f;
  const CameraModel& cam = f.scene.bundle.views[0].camera;
  const DepthNormalMap a = random_init(cam, W, H, 3);
  EXPECT_EQ(a, random_init(cam, W, H, 3));
  EXPECT_NE(a, random_init(cam, W, H, 4));
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      EXPECT_TRUE(cam.depth_in_range(a.depth(x, y)));
      EXPECT_LT(a.normal(x, y).dot(cam.ray(Vec2(x, y))), 0);
      EXPECT_NEAR(a.normal(x, y).norm(), 1.0, 1e-6);
    }
  EXPECT_NO_THROW(check_invariants(a, cam));
}

TEST(PatchMatch, ObjectiveNeverIncreases) {
  const Fixture f;
  const MatchingContext ctx = make_context(f.scene.bundle, 0, f.gray);
  PatchMatchConfig cfg;
  const PatchMatchEngine engine(ctx, cfg);
  PatchMatchState st = engine.evaluate(random_init(ctx.ref_camera, W, H, 0));
  for (int it = 0; it < 3; ++it) {
    const PatchMatchState next = engine.iterate(st, it);
    for (size_t i = 0; i < st.objective.size(); ++i) ASSERT_LE(next.objective[i], st.objective[i]);
    st = next;
  }
}

TEST(PatchMatch, DeterministicAcrossWorkerCounts) {
  const Fixture f;
  const MatchingContext ctx = make_context(f.scene.bundle, 0, f.gray);
  PatchMatchConfig cfg;
  cfg.iterations = 3;
  cfg.rng_seed = 17;
  const DepthNormalMap a = run_patchmatch(ctx, cfg);
  cfg.workers = 4;
  const DepthNormalMap b = run_patchmatch(ctx, cfg);
  EXPECT_EQ(a, b);
  EXPECT_NO_THROW(check_invariants(a, ctx.ref_camera));
}

TEST(PatchMatch, RecoversTexturedFloor) {
  const Fixture f;
  const MatchingContext ctx = make_context(f.scene.bundle, 0, f.gray);
  const DepthNormalMap m = run_patchmatch(ctx, PatchMatchConfig{});
  int n = 0, ok = 0;
  for (int y = 5; y < H - 5; ++y)
    for (int x = 5; x < W - 5; ++x) {
      if (f.scene.plane_ids[0][size_t(y) * W + x] != 0) continue;
      const double g = f.gt.depth(x, y);
      ++n;
      ok += std::abs(m.depth(x, y) - g) <= 0.01 * g;
    }
  ASSERT_GT(n, 100);
  EXPECT_GT(static_cast<double>(ok) / n, 0.8);
}

TEST(PatchMatchConfig, Validation) {
  PatchMatchConfig c;
  c.patch_step = 0;
  EXPECT_THROW(c.validate(), DomainError);
  c = PatchMatchConfig{};
  c.iterations = -1;
  EXPECT_THROW(c.validate(), DomainError);
}

}  // namespace
}  // namespace planemvs
