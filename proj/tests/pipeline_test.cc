#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>

#include "planemvs/errors.h"
#include "planemvs/pipeline.h"
#include "support.h"

namespace planemvs {
namespace {

namespace fs = std::filesystem;

PipelineConfig quick_config() {
  PipelineConfig c;
  c.patchmatch.iterations = 2;
  c.geometric_iterations = 1;
  c.seed = 3;
  return c;
}

fs::path small_scene_dir() {
  static const fs::path dir = [] {
    const fs::path d = testing::temp_dir("pipeline_scene");
    const SyntheticSceneSpec spec = testing::small_floor_wall(64, 48, 3, 2);
    save_synthetic(synth_scene(spec), spec, d);
    return d;
  }();
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PLANEMVS_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Pipeline, ArtifactsIdenticalAcrossRunsAndWorkers) {
  PipelineConfig cfg = quick_config();
  const fs::path a = testing::temp_dir("pipe_a"), b = testing::temp_dir("pipe_b"), c = testing::temp_dir("pipe_c");
  const PipelineResult r = run_pipeline(cfg, small_scene_dir(), a);
  run_pipeline(cfg, small_scene_dir(), b);
  cfg.workers = 8;
  run_pipeline(cfg, small_scene_dir(), c);
  size_t n = 0;
  EXPECT_TRUE(testing::tree_differences(a, b, &n).empty());
  EXPECT_GT(n, 10u);
  EXPECT_TRUE(testing::tree_differences(a, c).empty());
  ASSERT_TRUE(r.metrics.has_value());
  EXPECT_TRUE(fs::exists(a / "cloud.ply"));
  EXPECT_TRUE(fs::exists(a / "metrics.json"));
  ASSERT_EQ(r.final_maps.size(), 3u);
  for (size_t v = 0; v < 3; ++v) EXPECT_EQ(read_final_maps(a, 3)[v], r.final_maps[v]);
}

TEST(Pipeline, StagesComposeToFullRun) {
  const PipelineConfig cfg = quick_config();
  const SceneBundle scene = load_scene(small_scene_dir());
  const auto gt = load_ground_truth(small_scene_dir(), scene);
  const PipelineResult full = run_pipeline_stages(scene, gt, cfg);
  const auto raw = estimate_raw_depth(scene, cfg);
  EXPECT_EQ(raw, full.raw);
  const auto priors = build_priors(scene, raw, cfg);
  const auto agg = aggregate_views(scene, raw, priors, cfg);
  std::vector<DepthNormalMap> updated;
  for (const auto& v : agg) updated.push_back(v.map);
  EXPECT_EQ(geometric_refine(scene, updated, cfg), full.final_maps);
  // Reusing the raw maps skips only the first stage.
  const PipelineResult again = run_pipeline_stages(scene, gt, cfg, &raw);
  EXPECT_EQ(again.final_maps, full.final_maps);
}

TEST(Pipeline, PriorsDisabledLeaveNoCandidates) {
  PipelineConfig cfg = quick_config();
  cfg.enable_tp = cfg.enable_sp = false;
  const SceneBundle scene = load_scene(small_scene_dir());
  const PipelineResult r = run_pipeline_stages(scene, std::nullopt, cfg);
  EXPECT_FALSE(r.metrics.has_value());
  for (const auto& a : r.aggregated)
    for (uint8_t l : a.labels) ASSERT_EQ(l, uint8_t(CandidateSource::kRaw));
}

TEST(Ablation, RowTable) {
  const auto& rows = ablation_rows();
  ASSERT_EQ(rows.size(), 12u);
  const auto sel = select_rows({"full", "wo_sp", "plain"});
  ASSERT_EQ(sel.size(), 3u);
  EXPECT_TRUE(sel[0].tp && sel[0].sp && sel[0].gcec && sel[0].gia);
  EXPECT_FALSE(sel[1].sp);
  EXPECT_FALSE(sel[2].tp || sel[2].sp || sel[2].gcec || sel[2].gia);
  EXPECT_THROW(select_rows({"nope"}), InputError);
  const PipelineConfig c = with_toggles(PipelineConfig{}, sel[1]);
  EXPECT_TRUE(c.enable_tp && !c.enable_sp);
}

TEST(Cli, StageCommandsMatchPipelineCommand) {
  const std::string scene = small_scene_dir().string();
  const fs::path whole = testing::temp_dir("cli_whole"), staged = testing::temp_dir("cli_staged");
  const std::string common = " --scene " + scene + " --seed 3 --iters 2";
  ASSERT_EQ(run_cli("pipeline" + common + " --out " + whole.string()), 0);
  for (const char* stage : {"depth", "prior", "aggregate", "fuse", "eval"}) {
    ASSERT_EQ(run_cli(std::string(stage) + common + " --out " + staged.string()), 0) << stage;
  }
  EXPECT_EQ(testing::slurp(whole / "cloud.ply"), testing::slurp(staged / "cloud.ply"));
  EXPECT_EQ(testing::slurp(whole / "final" / "0000.dmb"), testing::slurp(staged / "final" / "0000.dmb"));
}

TEST(Cli, ExitCodes) {
  const fs::path out = testing::temp_dir("cli_codes");
  const std::string scene = small_scene_dir().string();
  EXPECT_EQ(run_cli("pipeline --scene " + (out / "missing").string() + " --out " + out.string()), 2);
  EXPECT_EQ(run_cli("pipeline --scene " + scene + " --out " + out.string() + " --tau-lambda 0.1"), 2);
  EXPECT_EQ(run_cli("pipeline --scene " + scene + " --out " + out.string() + " --iters x"), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("ablation --scene " + scene + " --out " + out.string() + " --rows nope"), 2);
  const fs::path broken = testing::temp_dir("cli_broken");
  fs::copy(small_scene_dir(), broken, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  std::ofstream(broken / "cams.txt") << "garbage\n";
  EXPECT_EQ(run_cli("depth --scene " + broken.string() + " --out " + out.string()), 2);
  const fs::path spec = out / "spec.txt";
  std::ofstream(spec) << format_scene_spec(testing::small_floor_wall(32, 24, 2));
  EXPECT_EQ(run_cli("synth --spec " + spec.string() + " --out " + (out / "s").string()), 0);
  EXPECT_TRUE(fs::exists(out / "s" / "scene.txt"));
}

}  // namespace
}  // namespace planemvs
