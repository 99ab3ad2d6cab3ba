#include <gtest/gtest.h>

#include "planemvs/errors.h"
#include "planemvs/synth.h"
#include "support.h"

namespace planemvs {
namespace {

TEST(Synth, FloorWallFixtureProperties) {
  const SyntheticSceneSpec spec = floor_wall_spec(1);
  const SyntheticScene s = synth_scene(spec);
  ASSERT_EQ(s.bundle.views.size(), 5u);
  EXPECT_EQ(s.bundle.views[0].image.width(), 320);
  EXPECT_EQ(s.bundle.views[0].image.height(), 240);
  EXPECT_GE(s.textureless_fraction, 0.3);
  EXPECT_NO_THROW(s.bundle.validate());
  for (size_t v = 0; v < 5; ++v) {
    const CameraModel& cam = s.bundle.views[v].camera;
    const auto& labels = s.bundle.views[v].mask->labels();
    for (int y = 0; y < 240; y += 7)
      for (int x = 0; x < 320; x += 7) {
        const size_t i = static_cast<size_t>(y) * 320 + x;
        const int id = s.plane_ids[v][i];
        if (id < 0) {
          EXPECT_EQ(s.gt_depth[v][i], 0.0f);
          continue;
        }
        // The GT point lies on its plane and in the camera's depth range.
        const PlaneSpec& pl = spec.planes[id];
        const Vec3 X = back_project(cam, Vec2(x, y), s.gt_depth[v][i]);
        EXPECT_NEAR(pl.normal.normalized().dot(X - pl.center), 0.0, 1e-5);
        EXPECT_TRUE(cam.depth_in_range(s.gt_depth[v][i]));
        EXPECT_EQ(labels[i] != 0, pl.texture == TextureKind::kFlat);
      }
  }
}

TEST(Synth, DeterministicPerSeed) {
  const SyntheticSceneSpec a = testing::small_floor_wall(40, 30, 3, 5);
  const SyntheticScene s1 = synth_scene(a), s2 = synth_scene(a);
  EXPECT_EQ(s1.bundle.views[1].image.data(), s2.bundle.views[1].image.data());
  EXPECT_EQ(s1.gt_depth, s2.gt_depth);
  const SyntheticScene s3 = synth_scene(testing::small_floor_wall(40, 30, 3, 6));
  EXPECT_NE(s1.bundle.views[1].image.data(), s3.bundle.views[1].image.data());
  // Geometry does not depend on the texture seed.
  EXPECT_EQ(s1.gt_depth, s3.gt_depth);
}

TEST(Synth, SensorNoiseIsKeyedAndBounded) {
  SyntheticSceneSpec a = testing::small_floor_wall(40, 30, 3);
  a.noise_sigma = 0.05;
  const SyntheticScene s = synth_scene(a);
  for (float v : s.bundle.views[0].image.data()) {
    ASSERT_GE(v, 0.0f);
    ASSERT_LE(v, 1.0f);
  }
  EXPECT_EQ(synth_scene(a).bundle.views[0].image.data(), s.bundle.views[0].image.data());
}

TEST(Synth, GroundTruthCloudLiesOnPlanes) {
  const SyntheticSceneSpec spec = testing::small_floor_wall(40, 30, 3);
  const SyntheticScene s = synth_scene(spec);
  ASSERT_FALSE(s.gt_cloud.empty());
  for (const auto& p : s.gt_cloud.points) {
    double best = 1e9;
    for (const auto& pl : spec.planes) best = std::min(best, std::abs(pl.normal.normalized().dot(p.position - pl.center)));
    ASSERT_LT(best, 1e-5);
  }
}

TEST(Synth, RejectsInvalidSpecs) {
  SyntheticSceneSpec a = testing::small_floor_wall(40, 30, 3);
  a.textureless_fraction = 0.99;
  EXPECT_THROW(synth_scene(a), InputError);
  SyntheticSceneSpec b = testing::small_floor_wall(40, 30, 3);
  b.planes[1].normal = -b.planes[1].normal;  // wall now faces away from every camera
  EXPECT_THROW(synth_scene(b), InputError);
}

}  // namespace
}  // namespace planemvs
