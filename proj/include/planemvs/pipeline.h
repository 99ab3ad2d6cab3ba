#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "planemvs/aggregation.h"
#include "planemvs/config.h"
#include "planemvs/fusion.h"
#include "planemvs/patchmatch.h"
#include "planemvs/prior.h"
#include "planemvs/scene_io.h"

namespace planemvs {

struct PipelineConfig {
  bool enable_tp = true;
  bool enable_sp = true;
  bool enable_gcec = true;
  bool enable_gia = true;
  uint64_t seed = 0;
  int workers = 1;
  PatchMatchConfig patchmatch;
  PriorParams prior;
  ConsistencyParams consistency;  // alpha_geo is shared with aggregation
  AggregationParams aggregation;
  BaselineAggParams baseline;
  int geometric_iterations = 2;
  FusionParams fusion;
  double eval_tau = 0.02;             // scene units
  double eval_depth_threshold = 0.01;  // relative

  void validate() const;
  // Every setting except workers as "key = value" lines, in a fixed order.
  // Output never depends on the worker count.
  std::string to_text() const;
  // Applies key=value overrides; unknown keys raise ParseError.
  void apply(const std::vector<KeyValue>& kvs, const std::string& origin);
  bool any_prior() const { return enable_tp || enable_sp; }
};

PipelineConfig read_pipeline_config(const std::filesystem::path& path);

struct ViewPriors {
  PriorMap tri;
  PriorMap sam;
  std::vector<RegionFit> regions;
};

struct ViewAggregation {
  DepthNormalMap map;
  std::vector<float> L;
  std::vector<uint8_t> labels;  // CandidateSource per pixel
};

struct StageTiming {
  std::string stage;
  double seconds = 0;
};

// Ground truth stored next to a synthetic scene: gt/<id>.dmb and gt/cloud.ply.
struct GroundTruth {
  std::vector<std::vector<float>> depth;
  std::optional<PointCloud> cloud;
};
std::optional<GroundTruth> load_ground_truth(const std::filesystem::path& scene_dir, const SceneBundle& scene);

struct PipelineMetrics {
  // Pooled over all views.
  DepthMetrics depth_all;
  std::optional<DepthMetrics> depth_textureless;  // mask pixels (label != 0)
  // Reference view only.
  DepthMetrics ref_depth_all;
  std::optional<DepthMetrics> ref_depth_textureless;
  std::optional<CloudMetrics> cloud;
  size_t cloud_points = 0;
};

struct PipelineResult {
  std::vector<DepthNormalMap> raw;
  std::vector<ViewPriors> priors;
  std::vector<ViewAggregation> aggregated;
  std::vector<DepthNormalMap> final_maps;
  PointCloud cloud;
  std::optional<PipelineMetrics> metrics;
  std::vector<StageTiming> timings;
  std::vector<std::string> warnings;
};

// Stages, usable on their own.
std::vector<DepthNormalMap> estimate_raw_depth(const SceneBundle& scene, const PipelineConfig& cfg);
std::vector<ViewPriors> build_priors(const SceneBundle& scene, const std::vector<DepthNormalMap>& raw,
                                     const PipelineConfig& cfg, std::vector<std::string>* warnings = nullptr);
std::vector<ViewAggregation> aggregate_views(const SceneBundle& scene, const std::vector<DepthNormalMap>& raw,
                                             const std::vector<ViewPriors>& priors, const PipelineConfig& cfg);
std::vector<DepthNormalMap> geometric_refine(const SceneBundle& scene, const std::vector<DepthNormalMap>& maps,
                                             const PipelineConfig& cfg);
PointCloud fuse_views(const SceneBundle& scene, const std::vector<DepthNormalMap>& maps, const PipelineConfig& cfg);
PipelineMetrics compute_metrics(const SceneBundle& scene, const GroundTruth& gt,
                                const std::vector<DepthNormalMap>& maps, const PointCloud& cloud,
                                const PipelineConfig& cfg);

// Runs every stage; `raw` short-circuits the first one when provided.
PipelineResult run_pipeline_stages(const SceneBundle& scene, const std::optional<GroundTruth>& gt,
                                   const PipelineConfig& cfg, const std::vector<DepthNormalMap>* raw = nullptr);

// Artifact layout under an output directory.
void write_raw_maps(const std::vector<DepthNormalMap>& raw, const std::filesystem::path& out);
std::vector<DepthNormalMap> read_raw_maps(const std::filesystem::path& out, size_t views);
void write_priors(const std::vector<ViewPriors>& priors, const std::filesystem::path& out);
std::vector<ViewPriors> read_priors(const std::filesystem::path& out, size_t views);
void write_aggregation(const std::vector<ViewAggregation>& agg, const std::filesystem::path& out);
void write_final_maps(const std::vector<DepthNormalMap>& maps, const std::filesystem::path& out);
std::vector<DepthNormalMap> read_final_maps(const std::filesystem::path& out, size_t views);
void write_metrics(const PipelineMetrics& m, const std::filesystem::path& out);
void write_timings(const std::vector<StageTiming>& t, const std::filesystem::path& out);
void write_config(const PipelineConfig& cfg, const std::filesystem::path& out);

// Full run with artifacts written under `out`.
PipelineResult run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& scene_dir,
                            const std::filesystem::path& out);

struct AblationRow {
  std::string name;
  bool tp, sp, gcec, gia;
};

// The eleven toggle rows of the ablation table plus "plain" (all off).
const std::vector<AblationRow>& ablation_rows();
// Rows by name; throws InputError for unknown names.
std::vector<AblationRow> select_rows(const std::vector<std::string>& names);
PipelineConfig with_toggles(PipelineConfig cfg, const AblationRow& row);

struct AblationEntry {
  AblationRow row;
  PipelineMetrics metrics;
};

struct AblationReport {
  std::vector<AblationEntry> entries;
  void write_table(std::ostream& os) const;
};

// Raw depth is shared by every row. Each row's artifacts go to out/rows/<name>;
// the table to out/ablation.txt and out/ablation.json. Requires ground truth.
AblationReport run_ablation(const PipelineConfig& cfg, const std::filesystem::path& scene_dir,
                            const std::vector<AblationRow>& rows, const std::filesystem::path& out);

}  // namespace planemvs
