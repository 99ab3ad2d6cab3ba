#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "planemvs/errors.h"
#include "planemvs/pipeline.h"
#include "planemvs/synth.h"

namespace fs = std::filesystem;
using namespace planemvs;

namespace {

struct CommonArgs {
  std::string scene;
  std::string out;
  std::string config;
  std::optional<uint64_t> seed;
  std::optional<int> iters, workers;
  std::optional<double> tau_lambda, omega_geo, alpha_geo, p1, p2;
  bool no_tp = false, no_sp = false, no_gcec = false, no_gia = false;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool needs_scene = true) {
  if (needs_scene) cmd->add_option("--scene", a.scene, "Scene directory")->required();
  cmd->add_option("--out", a.out, "Output directory")->required();
  cmd->add_option("--config", a.config, "key=value settings file");
  cmd->add_option("--seed", a.seed, "Random seed");
  cmd->add_option("--iters", a.iters, "PatchMatch iterations");
  cmd->add_option("--workers", a.workers, "Worker threads (results do not depend on it)");
  cmd->add_option("--tau-lambda", a.tau_lambda, "Curvature retention threshold");
  cmd->add_option("--omega-geo", a.omega_geo, "Epipolar range multiplier");
  cmd->add_option("--alpha-geo", a.alpha_geo, "Geometric cost weight");
  cmd->add_option("--p1", a.p1, "Triangulation prior penalty");
  cmd->add_option("--p2", a.p2, "Raw estimate penalty");
  cmd->add_flag("--no-tp", a.no_tp, "Disable the triangulation prior");
  cmd->add_flag("--no-sp", a.no_sp, "Disable the mask-guided plane prior");
  cmd->add_flag("--no-gcec", a.no_gcec, "Use reprojection instead of the epipolar geometric cost");
  cmd->add_flag("--no-gia", a.no_gia, "Select candidates with the baseline aggregation cost");
}

PipelineConfig make_config(const CommonArgs& a) {
  PipelineConfig cfg = a.config.empty() ? PipelineConfig{} : read_pipeline_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (a.iters) cfg.patchmatch.iterations = *a.iters;
  if (a.workers) cfg.workers = *a.workers;
  if (a.tau_lambda) cfg.prior.tau_lambda = *a.tau_lambda;
  if (a.omega_geo) cfg.consistency.omega_geo = *a.omega_geo;
  if (a.alpha_geo) cfg.consistency.alpha_geo = cfg.aggregation.alpha_geo = *a.alpha_geo;
  if (a.p1) cfg.aggregation.p1 = *a.p1;
  if (a.p2) cfg.aggregation.p2 = *a.p2;
  if (a.no_tp) cfg.enable_tp = false;
  if (a.no_sp) cfg.enable_sp = false;
  if (a.no_gcec) cfg.enable_gcec = false;
  if (a.no_gia) cfg.enable_gia = false;
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw InputError(std::string("invalid configuration: ") + e.what());
  }
  return cfg;
}

void print_metrics(const PipelineMetrics& m) {
  std::cout << "depth within threshold: " << m.depth_all.fraction_within << "\n";
  if (m.depth_textureless) std::cout << "textureless within threshold: " << m.depth_textureless->fraction_within << "\n";
  if (m.cloud) {
    std::cout << "cloud completeness " << m.cloud->completeness << " accuracy " << m.cloud->accuracy << " f1 "
              << m.cloud->f1 << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plane-prior PatchMatch multi-view stereo"};
  app.require_subcommand(1);

  std::string synth_spec, synth_out;
  std::optional<uint64_t> synth_seed;
  auto* synth = app.add_subcommand("synth", "Render a synthetic plane scene with ground truth");
  synth->add_option("--spec", synth_spec, "Scene spec (key=value); default: floor + shaded wall");
  synth->add_option("--out", synth_out, "Output scene directory")->required();
  synth->add_option("--seed", synth_seed, "Texture/noise seed");

  CommonArgs depth_a, prior_a, agg_a, fuse_a, eval_a, pipe_a, abl_a;
  auto* depth = app.add_subcommand("depth", "Raw PatchMatch depth for every view");
  add_common(depth, depth_a);
  auto* prior = app.add_subcommand("prior", "Triangulation and mask-guided priors from raw depth");
  add_common(prior, prior_a);
  auto* aggregate = app.add_subcommand("aggregate", "Sequential candidate update and final geometric pass");
  add_common(aggregate, agg_a);
  auto* fusecmd = app.add_subcommand("fuse", "Fuse final depth maps into a point cloud");
  add_common(fusecmd, fuse_a);
  auto* evalcmd = app.add_subcommand("eval", "Compare final depth maps and cloud with ground truth");
  add_common(evalcmd, eval_a);
  auto* pipeline = app.add_subcommand("pipeline", "Run all stages");
  add_common(pipeline, pipe_a);
  std::vector<std::string> rows{"baseline", "wo_tp_gcec", "wo_tp_gia", "wo_sp_gcec", "wo_sp_gia", "wo_gia_gcec",
                                "wo_tp",    "wo_sp",      "wo_gcec",   "wo_gia",     "full"};
  auto* ablation = app.add_subcommand("ablation", "Run toggle rows and tabulate metrics");
  add_common(ablation, abl_a);
  ablation->add_option("--rows", rows, "Rows to run (comma separated)")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) {
      SyntheticSceneSpec spec = synth_spec.empty() ? floor_wall_spec() : read_scene_spec(synth_spec);
      if (synth_seed) spec.seed = *synth_seed;
      const SyntheticScene scene = synth_scene(spec);
      save_synthetic(scene, spec, synth_out);
      std::cout << "wrote " << scene.bundle.views.size() << " views to " << synth_out << " (textureless share "
                << scene.textureless_fraction << ")\n";
    } else if (*depth) {
      const PipelineConfig cfg = make_config(depth_a);
      const SceneBundle scene = load_scene(depth_a.scene);
      write_config(cfg, depth_a.out);
      write_raw_maps(estimate_raw_depth(scene, cfg), depth_a.out);
    } else if (*prior) {
      const PipelineConfig cfg = make_config(prior_a);
      const SceneBundle scene = load_scene(prior_a.scene);
      const auto raw = read_raw_maps(prior_a.out, scene.views.size());
      std::vector<std::string> warnings;
      write_priors(build_priors(scene, raw, cfg, &warnings), prior_a.out);
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    } else if (*aggregate) {
      const PipelineConfig cfg = make_config(agg_a);
      const SceneBundle scene = load_scene(agg_a.scene);
      const auto raw = read_raw_maps(agg_a.out, scene.views.size());
      const auto priors = read_priors(agg_a.out, scene.views.size());
      const auto agg = aggregate_views(scene, raw, priors, cfg);
      write_aggregation(agg, agg_a.out);
      std::vector<DepthNormalMap> updated;
      for (const auto& a : agg) updated.push_back(a.map);
      write_final_maps(geometric_refine(scene, updated, cfg), agg_a.out);
    } else if (*fusecmd) {
      const PipelineConfig cfg = make_config(fuse_a);
      const SceneBundle scene = load_scene(fuse_a.scene);
      const PointCloud cloud = fuse_views(scene, read_final_maps(fuse_a.out, scene.views.size()), cfg);
      write_ply(cloud, fs::path(fuse_a.out) / "cloud.ply");
      std::cout << "fused " << cloud.size() << " points\n";
    } else if (*evalcmd) {
      const PipelineConfig cfg = make_config(eval_a);
      const SceneBundle scene = load_scene(eval_a.scene);
      const auto gt = load_ground_truth(eval_a.scene, scene);
      if (!gt) throw InputError("no ground truth under " + (fs::path(eval_a.scene) / "gt").string());
      const fs::path cloud_path = fs::path(eval_a.out) / "cloud.ply";
      const PointCloud cloud = fs::exists(cloud_path) ? read_ply(cloud_path) : PointCloud{};
      const PipelineMetrics m = compute_metrics(scene, *gt, read_final_maps(eval_a.out, scene.views.size()), cloud, cfg);
      write_metrics(m, eval_a.out);
      print_metrics(m);
    } else if (*pipeline) {
      const PipelineConfig cfg = make_config(pipe_a);
      const PipelineResult r = run_pipeline(cfg, pipe_a.scene, pipe_a.out);
      if (r.metrics) print_metrics(*r.metrics);
    } else if (*ablation) {
      const PipelineConfig cfg = make_config(abl_a);
      const AblationReport report = run_ablation(cfg, abl_a.scene, select_rows(rows), abl_a.out);
      report.write_table(std::cout);
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
