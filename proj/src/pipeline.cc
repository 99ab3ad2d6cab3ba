#include "planemvs/pipeline.h"

#include <charconv>
#include <chrono>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "planemvs/errors.h"
#include "planemvs/rng.h"

namespace fs = std::filesystem;

namespace planemvs {

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

struct Field {
  const char* key;
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const KeyValue&, const std::string&)> set;
};

template <typename Acc>
Field real(const char* key, Acc acc) {
  return {key, [acc](const PipelineConfig& c) { return fmt(acc(const_cast<PipelineConfig&>(c))); },
          [acc](PipelineConfig& c, const KeyValue& kv, const std::string& o) { acc(c) = to_double(kv, o); }};
}

template <typename Acc>
Field integer(const char* key, Acc acc) {
  return {key, [acc](const PipelineConfig& c) { return std::to_string(acc(const_cast<PipelineConfig&>(c))); },
          [acc](PipelineConfig& c, const KeyValue& kv, const std::string& o) {
            acc(c) = static_cast<std::remove_reference_t<decltype(acc(c))>>(to_int(kv, o));
          }};
}

template <typename Acc>
Field flag(const char* key, Acc acc) {
  return {key, [acc](const PipelineConfig& c) { return std::string(acc(const_cast<PipelineConfig&>(c)) ? "true" : "false"); },
          [acc](PipelineConfig& c, const KeyValue& kv, const std::string& o) { acc(c) = to_bool(kv, o); }};
}

#define PM_ACC(expr) [](PipelineConfig& c) -> auto& { return c.expr; }

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      flag("enable_tp", PM_ACC(enable_tp)),
      flag("enable_sp", PM_ACC(enable_sp)),
      flag("enable_gcec", PM_ACC(enable_gcec)),
      flag("enable_gia", PM_ACC(enable_gia)),
      integer("seed", PM_ACC(seed)),
      integer("workers", PM_ACC(workers)),
      integer("patchmatch.patch_radius", PM_ACC(patchmatch.patch_radius)),
      integer("patchmatch.patch_step", PM_ACC(patchmatch.patch_step)),
      real("patchmatch.sigma_spatial", PM_ACC(patchmatch.ncc_sigma_spatial)),
      real("patchmatch.sigma_color", PM_ACC(patchmatch.ncc_sigma_color)),
      integer("patchmatch.iterations", PM_ACC(patchmatch.iterations)),
      real("patchmatch.perturbation_fraction", PM_ACC(patchmatch.perturbation_fraction)),
      real("patchmatch.view_weight_scale", PM_ACC(patchmatch.view_weight_scale)),
      real("prior.sparsify_cost_threshold", PM_ACC(prior.sparsify_cost_threshold)),
      real("prior.tau_lambda", PM_ACC(prior.tau_lambda)),
      integer("prior.knn", PM_ACC(prior.knn)),
      integer("prior.ransac_iters", PM_ACC(prior.ransac_iters)),
      real("prior.ransac_inlier_tol", PM_ACC(prior.ransac_inlier_tol)),
      real("prior.ransac_relative_tol", PM_ACC(prior.ransac_relative_tol)),
      real("prior.min_inlier_fraction", PM_ACC(prior.min_inlier_fraction)),
      real("geo.tau_geo", PM_ACC(consistency.tau_geo)),
      real("geo.omega_geo", PM_ACC(consistency.omega_geo)),
      real("geo.alpha_geo", PM_ACC(consistency.alpha_geo)),
      real("agg.p1", PM_ACC(aggregation.p1)),
      real("agg.p2", PM_ACC(aggregation.p2)),
      real("baseline.alpha", PM_ACC(baseline.alpha)),
      real("baseline.gamma", PM_ACC(baseline.gamma)),
      real("baseline.lambda_d", PM_ACC(baseline.lambda_d)),
      real("baseline.lambda_n", PM_ACC(baseline.lambda_n)),
      integer("geometric_iterations", PM_ACC(geometric_iterations)),
      integer("fusion.min_consistent", PM_ACC(fusion.min_consistent)),
      real("fusion.tol_rel", PM_ACC(fusion.tol_rel)),
      real("fusion.tol_px", PM_ACC(fusion.tol_px)),
      real("eval.tau", PM_ACC(eval_tau)),
      real("eval.depth_threshold", PM_ACC(eval_depth_threshold)),
  };
  return f;
}

#undef PM_ACC

uint64_t view_seed(uint64_t seed, uint64_t stream, int view) {
  return splitmix64(splitmix64(seed ^ splitmix64(stream)) + static_cast<uint64_t>(view));
}

constexpr uint64_t kRawStream = 0x4001;
constexpr uint64_t kSamStream = 0x4002;
constexpr uint64_t kFinalStream = 0x4003;

PatchMatchConfig view_pm(const PipelineConfig& cfg, uint64_t stream, int view) {
  PatchMatchConfig pm = cfg.patchmatch;
  pm.rng_seed = view_seed(cfg.seed, stream, view);
  pm.workers = cfg.workers;
  return pm;
}

std::vector<DepthView> source_views(const SceneBundle& scene, const std::vector<DepthNormalMap>& maps, int v) {
  std::vector<DepthView> out;
  for (int j : scene.neighbors[v]) out.push_back({&scene.views[j].camera, &maps[j]});
  return out;
}

fs::path stem_path(const fs::path& dir, int v, const std::string& suffix = "") {
  return dir / (view_stem(v) + suffix);
}

class Stopwatch {
 public:
  Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

struct Pool {
  size_t count = 0, within = 0;
  double err = 0;
  void add(const std::vector<float>& est, const std::vector<float>& gt, double thr, const SegmentMask* region) {
    for (size_t i = 0; i < gt.size(); ++i) {
      if (!(gt[i] > 0) || (region && region->labels()[i] == 0)) continue;
      const double e = std::abs(static_cast<double>(est[i]) - gt[i]) / gt[i];
      ++count;
      within += e <= thr ? 1 : 0;
      err += e;
    }
  }
  std::optional<DepthMetrics> result() const {
    if (count == 0) return std::nullopt;
    return DepthMetrics{static_cast<double>(within) / count, err / count, count};
  }
};

nlohmann::ordered_json depth_json(const DepthMetrics& m) {
  return {{"fraction_within", m.fraction_within}, {"mean_abs_rel_error", m.mean_abs_rel_error}, {"count", m.count}};
}

void depth_lines(std::ostream& os, const std::string& prefix, const DepthMetrics& m) {
  os << prefix << ".fraction_within = " << fmt(m.fraction_within) << "\n";
  os << prefix << ".mean_abs_rel_error = " << fmt(m.mean_abs_rel_error) << "\n";
  os << prefix << ".count = " << m.count << "\n";
}

std::ofstream open_text(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write " + p.string());
  return out;
}

}  // namespace

void PipelineConfig::validate() const {
  patchmatch.validate();
  prior.validate();
  consistency.validate();
  aggregation.validate();
  baseline.validate();
  if (workers < 1) throw DomainError("workers must be >= 1");
  if (geometric_iterations < 0) throw DomainError("geometric_iterations must be >= 0");
  if (fusion.min_consistent < 1 || !(fusion.tol_rel > 0) || !(fusion.tol_px > 0)) {
    throw DomainError("fusion parameters out of range");
  }
  if (!(eval_tau > 0) || !(eval_depth_threshold > 0)) throw DomainError("evaluation thresholds must be positive");
}

std::string PipelineConfig::to_text() const {
  std::ostringstream os;
  for (const Field& f : fields()) {
    if (f.key == std::string("workers")) continue;
    PipelineConfig copy = *this;
    copy.aggregation.alpha_geo = consistency.alpha_geo;
    os << f.key << " = " << f.get(copy) << "\n";
  }
  return os.str();
}

void PipelineConfig::apply(const std::vector<KeyValue>& kvs, const std::string& origin) {
  for (const KeyValue& kv : kvs) {
    bool found = false;
    for (const Field& f : fields()) {
      if (kv.key == f.key) {
        f.set(*this, kv, origin);
        found = true;
        break;
      }
    }
    if (!found) throw ParseError(origin, kv.line, "unknown setting '" + kv.key + "'");
  }
  aggregation.alpha_geo = consistency.alpha_geo;
}

PipelineConfig read_pipeline_config(const fs::path& path) {
  PipelineConfig cfg;
  cfg.apply(read_key_values(path), path.string());
  return cfg;
}

std::optional<GroundTruth> load_ground_truth(const fs::path& scene_dir, const SceneBundle& scene) {
  const fs::path gt_dir = scene_dir / "gt";
  if (!fs::is_directory(gt_dir)) return std::nullopt;
  GroundTruth gt;
  for (size_t v = 0; v < scene.views.size(); ++v) {
    const fs::path p = stem_path(gt_dir, static_cast<int>(v), ".dmb");
    if (!fs::exists(p)) return std::nullopt;
    ScalarMap m = read_map_file(p, "DMB1", 1);
    if (m.width != scene.views[v].image.width() || m.height != scene.views[v].image.height()) {
      throw DimensionError("ground-truth depth " + p.string() + " does not match its image");
    }
    gt.depth.push_back(std::move(m.values));
  }
  if (fs::exists(gt_dir / "cloud.ply")) gt.cloud = read_ply(gt_dir / "cloud.ply");
  return gt;
}

std::vector<DepthNormalMap> estimate_raw_depth(const SceneBundle& scene, const PipelineConfig& cfg) {
  const auto gray = gray_images(scene);
  std::vector<DepthNormalMap> out;
  for (int v = 0; v < static_cast<int>(scene.views.size()); ++v) {
    const MatchingContext ctx = make_context(scene, v, gray);
    DepthNormalMap map = run_patchmatch(ctx, view_pm(cfg, kRawStream, v));
    for (int y = 0; y < map.height(); ++y) {
      for (int x = 0; x < map.width(); ++x) map.set_reliable(x, y, map.cost(x, y) <= cfg.prior.sparsify_cost_threshold);
    }
    out.push_back(std::move(map));
  }
  return out;
}

std::vector<ViewPriors> build_priors(const SceneBundle& scene, const std::vector<DepthNormalMap>& raw,
                                     const PipelineConfig& cfg, std::vector<std::string>* warnings) {
  std::vector<ViewPriors> out(scene.views.size());
  PriorParams pp = cfg.prior;
  pp.workers = cfg.workers;
  bool warned = false;
  for (size_t v = 0; v < scene.views.size(); ++v) {
    const View& view = scene.views[v];
    const int w = raw[v].width(), h = raw[v].height();
    out[v].tri = PriorMap(w, h);
    out[v].sam = PriorMap(w, h);
    if (cfg.enable_tp) out[v].tri = delaunay_prior(sparsify(raw[v], view.camera, pp), view.camera, w, h);
    if (cfg.enable_sp) {
      if (view.mask) {
        SamPrior sam = build_sam_prior(*view.mask, raw[v], view.camera, pp, view_seed(cfg.seed, kSamStream, static_cast<int>(v)));
        out[v].sam = std::move(sam.map);
        out[v].regions = std::move(sam.regions);
      } else if (!warned) {
        warned = true;
        if (warnings) warnings->push_back("mask prior enabled but the scene has no masks; skipped");
      }
    }
  }
  return out;
}

std::vector<ViewAggregation> aggregate_views(const SceneBundle& scene, const std::vector<DepthNormalMap>& raw,
                                             const std::vector<ViewPriors>& priors, const PipelineConfig& cfg) {
  std::vector<ViewAggregation> out(scene.views.size());
  const auto gray = gray_images(scene);
  SequentialPassOptions opts;
  opts.global_aggregation = cfg.enable_gia;
  opts.geo = cfg.enable_gcec ? GeoCostKind::kEpipolar : GeoCostKind::kReprojection;
  opts.agg = cfg.aggregation;
  opts.agg.alpha_geo = cfg.consistency.alpha_geo;
  opts.baseline = cfg.baseline;
  opts.consistency = cfg.consistency;
  for (int v = 0; v < static_cast<int>(scene.views.size()); ++v) {
    if (!cfg.any_prior()) {
      // No candidates beyond the raw estimate: the pass would return it unchanged.
      out[v].map = raw[v];
      out[v].L = raw[v].costs();
      out[v].labels.assign(raw[v].size(), static_cast<uint8_t>(CandidateSource::kRaw));
      continue;
    }
    const MatchingContext ctx = make_context(scene, v, gray);
    const std::vector<DepthView> sources = source_views(scene, raw, v);
    const PriorCandidateSet cand = assemble_candidates(raw[v], priors[v].tri, priors[v].sam);
    SequentialPassResult r = sequential_pass(ctx, cand, sources, view_pm(cfg, kRawStream, v), opts);
    out[v].map = std::move(r.map);
    out[v].L.assign(r.state.L.begin(), r.state.L.end());
    out[v].labels = std::move(r.state.source);
  }
  return out;
}

std::vector<DepthNormalMap> geometric_refine(const SceneBundle& scene, const std::vector<DepthNormalMap>& maps,
                                             const PipelineConfig& cfg) {
  if (cfg.geometric_iterations == 0) return maps;
  const auto gray = gray_images(scene);
  std::vector<DepthNormalMap> out;
  for (int v = 0; v < static_cast<int>(scene.views.size()); ++v) {
    const MatchingContext ctx = make_context(scene, v, gray);
    const std::vector<DepthView> sources = source_views(scene, maps, v);
    out.push_back(final_geometric_pass(ctx, maps[v], sources, view_pm(cfg, kFinalStream, v), cfg.consistency,
                                       cfg.geometric_iterations)
                      .map);
  }
  return out;
}

PointCloud fuse_views(const SceneBundle& scene, const std::vector<DepthNormalMap>& maps, const PipelineConfig& cfg) {
  std::vector<CameraModel> cams;
  std::vector<ImageBuffer> images;
  for (const View& v : scene.views) {
    cams.push_back(v.camera);
    images.push_back(v.image);
  }
  return fuse(maps, cams, cfg.fusion, images);
}

PipelineMetrics compute_metrics(const SceneBundle& scene, const GroundTruth& gt, const std::vector<DepthNormalMap>& maps,
                                const PointCloud& cloud, const PipelineConfig& cfg) {
  PipelineMetrics m;
  Pool all, flat;
  const double thr = cfg.eval_depth_threshold;
  for (size_t v = 0; v < maps.size(); ++v) {
    const SegmentMask* mask = scene.views[v].mask ? &*scene.views[v].mask : nullptr;
    all.add(maps[v].depths(), gt.depth[v], thr, nullptr);
    if (mask) flat.add(maps[v].depths(), gt.depth[v], thr, mask);
    if (static_cast<int>(v) == scene.reference_index) {
      Pool r, rf;
      r.add(maps[v].depths(), gt.depth[v], thr, nullptr);
      if (!r.result()) throw InputError("reference view has no valid ground-truth depth");
      m.ref_depth_all = *r.result();
      if (mask) {
        rf.add(maps[v].depths(), gt.depth[v], thr, mask);
        m.ref_depth_textureless = rf.result();
      }
    }
  }
  if (!all.result()) throw InputError("no valid ground-truth depth");
  m.depth_all = *all.result();
  m.depth_textureless = flat.result();
  m.cloud_points = cloud.size();
  if (gt.cloud && !gt.cloud->empty()) m.cloud = evaluate_cloud(cloud, *gt.cloud, cfg.eval_tau);
  return m;
}

PipelineResult run_pipeline_stages(const SceneBundle& scene, const std::optional<GroundTruth>& gt,
                                   const PipelineConfig& cfg, const std::vector<DepthNormalMap>* raw) {
  cfg.validate();
  PipelineResult r;
  {
    Stopwatch sw;
    r.raw = raw ? *raw : estimate_raw_depth(scene, cfg);
    r.timings.push_back({"raw_depth", raw ? 0.0 : sw.seconds()});
  }
  {
    Stopwatch sw;
    r.priors = build_priors(scene, r.raw, cfg, &r.warnings);
    r.timings.push_back({"priors", sw.seconds()});
  }
  {
    Stopwatch sw;
    r.aggregated = aggregate_views(scene, r.raw, r.priors, cfg);
    r.timings.push_back({"aggregation", sw.seconds()});
  }
  {
    Stopwatch sw;
    std::vector<DepthNormalMap> updated;
    for (const auto& a : r.aggregated) updated.push_back(a.map);
    r.final_maps = geometric_refine(scene, updated, cfg);
    r.timings.push_back({"geometric_pass", sw.seconds()});
  }
  {
    Stopwatch sw;
    r.cloud = fuse_views(scene, r.final_maps, cfg);
    r.timings.push_back({"fusion", sw.seconds()});
  }
  if (gt) {
    Stopwatch sw;
    r.metrics = compute_metrics(scene, *gt, r.final_maps, r.cloud, cfg);
    r.timings.push_back({"metrics", sw.seconds()});
  }
  return r;
}

void write_raw_maps(const std::vector<DepthNormalMap>& raw, const fs::path& out) {
  for (size_t v = 0; v < raw.size(); ++v) write_depth_map(raw[v], stem_path(out / "depth" / "raw", static_cast<int>(v)));
}

std::vector<DepthNormalMap> read_raw_maps(const fs::path& out, size_t views) {
  std::vector<DepthNormalMap> maps;
  for (size_t v = 0; v < views; ++v) maps.push_back(read_depth_map(stem_path(out / "depth" / "raw", static_cast<int>(v))));
  return maps;
}

void write_priors(const std::vector<ViewPriors>& priors, const fs::path& out) {
  std::ofstream report = open_text(out / "prior" / "regions.txt");
  for (size_t v = 0; v < priors.size(); ++v) {
    write_prior_map(priors[v].tri, stem_path(out / "prior" / "tri", static_cast<int>(v)));
    write_prior_map(priors[v].sam, stem_path(out / "prior" / "sam", static_cast<int>(v)));
    for (const RegionFit& f : priors[v].regions) {
      report << "view " << v << " region " << f.region << " members " << f.member_count << " surviving "
             << f.surviving_points << " inlier_fraction " << fmt(f.ransac.inlier_fraction) << " accepted "
             << (f.fitted ? 1 : 0) << "\n";
    }
  }
}

std::vector<ViewPriors> read_priors(const fs::path& out, size_t views) {
  std::vector<ViewPriors> priors(views);
  for (size_t v = 0; v < views; ++v) {
    priors[v].tri = read_prior_map(stem_path(out / "prior" / "tri", static_cast<int>(v)));
    priors[v].sam = read_prior_map(stem_path(out / "prior" / "sam", static_cast<int>(v)));
  }
  return priors;
}

void write_aggregation(const std::vector<ViewAggregation>& agg, const fs::path& out) {
  for (size_t v = 0; v < agg.size(); ++v) {
    const fs::path dir = out / "aggregate";
    const int id = static_cast<int>(v);
    write_depth_map(agg[v].map, stem_path(dir, id));
    write_map_file(stem_path(dir, id, "_L.cmb"), "CMB1", agg[v].map.width(), agg[v].map.height(), agg[v].L, 1);
    write_label_image(agg[v].labels, agg[v].map.width(), agg[v].map.height(), stem_path(dir, id, "_labels.pgm"));
  }
}

void write_final_maps(const std::vector<DepthNormalMap>& maps, const fs::path& out) {
  for (size_t v = 0; v < maps.size(); ++v) write_depth_map(maps[v], stem_path(out / "final", static_cast<int>(v)));
}

std::vector<DepthNormalMap> read_final_maps(const fs::path& out, size_t views) {
  std::vector<DepthNormalMap> maps;
  for (size_t v = 0; v < views; ++v) maps.push_back(read_depth_map(stem_path(out / "final", static_cast<int>(v))));
  return maps;
}

void write_metrics(const PipelineMetrics& m, const fs::path& out) {
  std::ofstream txt = open_text(out / "metrics.txt");
  depth_lines(txt, "depth", m.depth_all);
  if (m.depth_textureless) depth_lines(txt, "depth_textureless", *m.depth_textureless);
  depth_lines(txt, "ref_depth", m.ref_depth_all);
  if (m.ref_depth_textureless) depth_lines(txt, "ref_depth_textureless", *m.ref_depth_textureless);
  txt << "cloud.points = " << m.cloud_points << "\n";
  nlohmann::ordered_json j;
  j["depth"] = depth_json(m.depth_all);
  if (m.depth_textureless) j["depth_textureless"] = depth_json(*m.depth_textureless);
  j["ref_depth"] = depth_json(m.ref_depth_all);
  if (m.ref_depth_textureless) j["ref_depth_textureless"] = depth_json(*m.ref_depth_textureless);
  j["cloud"]["points"] = m.cloud_points;
  if (m.cloud) {
    txt << "cloud.tau = " << fmt(m.cloud->tau) << "\ncloud.completeness = " << fmt(m.cloud->completeness)
        << "\ncloud.accuracy = " << fmt(m.cloud->accuracy) << "\ncloud.f1 = " << fmt(m.cloud->f1) << "\n";
    j["cloud"]["tau"] = m.cloud->tau;
    j["cloud"]["completeness"] = m.cloud->completeness;
    j["cloud"]["accuracy"] = m.cloud->accuracy;
    j["cloud"]["f1"] = m.cloud->f1;
  }
  open_text(out / "metrics.json") << j.dump(2) << "\n";
}

void write_timings(const std::vector<StageTiming>& t, const fs::path& out) {
  std::ofstream os = open_text(out / "timings.txt");
  double total = 0;
  for (const StageTiming& s : t) {
    os << s.stage << " = " << std::fixed << std::setprecision(3) << s.seconds << "\n";
    total += s.seconds;
  }
  os << "total = " << std::fixed << std::setprecision(3) << total << "\n";
}

void write_config(const PipelineConfig& cfg, const fs::path& out) { open_text(out / "config.txt") << cfg.to_text(); }

namespace {

void write_stage_artifacts(const PipelineResult& r, const fs::path& out, bool with_raw) {
  if (with_raw) write_raw_maps(r.raw, out);
  write_priors(r.priors, out);
  write_aggregation(r.aggregated, out);
  write_final_maps(r.final_maps, out);
  write_ply(r.cloud, out / "cloud.ply");
  if (r.metrics) write_metrics(*r.metrics, out);
  write_timings(r.timings, out);
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg, const fs::path& scene_dir, const fs::path& out) {
  cfg.validate();
  const SceneBundle scene = load_scene(scene_dir);
  const auto gt = load_ground_truth(scene_dir, scene);
  fs::create_directories(out);
  write_config(cfg, out);
  PipelineResult r = run_pipeline_stages(scene, gt, cfg);
  for (const std::string& w : r.warnings) std::cerr << "warning: " << w << "\n";
  write_stage_artifacts(r, out, true);
  return r;
}

const std::vector<AblationRow>& ablation_rows() {
  static const std::vector<AblationRow> rows = {
      {"baseline", true, false, false, false},  {"wo_tp_gcec", false, true, false, true},
      {"wo_tp_gia", false, true, true, false},  {"wo_sp_gcec", true, false, false, true},
      {"wo_sp_gia", true, false, true, false},  {"wo_gia_gcec", true, true, false, false},
      {"wo_tp", false, true, true, true},       {"wo_sp", true, false, true, true},
      {"wo_gcec", true, true, false, true},     {"wo_gia", true, true, true, false},
      {"full", true, true, true, true},         {"plain", false, false, false, false},
  };
  return rows;
}

std::vector<AblationRow> select_rows(const std::vector<std::string>& names) {
  std::vector<AblationRow> out;
  for (const std::string& n : names) {
    bool found = false;
    for (const AblationRow& r : ablation_rows()) {
      if (r.name == n) {
        out.push_back(r);
        found = true;
      }
    }
    if (!found) throw InputError("unknown ablation row '" + n + "'");
  }
  return out;
}

PipelineConfig with_toggles(PipelineConfig cfg, const AblationRow& row) {
  cfg.enable_tp = row.tp;
  cfg.enable_sp = row.sp;
  cfg.enable_gcec = row.gcec;
  cfg.enable_gia = row.gia;
  return cfg;
}

void AblationReport::write_table(std::ostream& os) const {
  os << std::left << std::setw(12) << "row" << " TP SP GCEC GIA " << std::right << std::setw(13) << "completeness"
     << std::setw(10) << "accuracy" << std::setw(8) << "f1" << std::setw(13) << "textureless" << std::setw(8) << "depth"
     << "\n";
  for (const AblationEntry& e : entries) {
    auto mark = [](bool b) { return b ? "x" : "-"; };
    os << std::left << std::setw(12) << e.row.name << "  " << mark(e.row.tp) << "  " << mark(e.row.sp) << "    "
       << mark(e.row.gcec) << "   " << mark(e.row.gia) << " " << std::right << std::fixed << std::setprecision(2);
    if (e.metrics.cloud) {
      os << std::setw(13) << e.metrics.cloud->completeness << std::setw(10) << e.metrics.cloud->accuracy << std::setw(8)
         << e.metrics.cloud->f1;
    } else {
      os << std::setw(13) << "n/a" << std::setw(10) << "n/a" << std::setw(8) << "n/a";
    }
    os << std::setprecision(4) << std::setw(13)
       << (e.metrics.depth_textureless ? e.metrics.depth_textureless->fraction_within : 0.0) << std::setw(8)
       << e.metrics.depth_all.fraction_within << "\n";
    os.unsetf(std::ios::fixed);
  }
}

AblationReport run_ablation(const PipelineConfig& cfg, const fs::path& scene_dir, const std::vector<AblationRow>& rows,
                            const fs::path& out) {
  cfg.validate();
  const SceneBundle scene = load_scene(scene_dir);
  const auto gt = load_ground_truth(scene_dir, scene);
  if (!gt) throw InputError("ablation needs ground truth under " + (scene_dir / "gt").string());
  fs::create_directories(out);
  write_config(cfg, out);
  Stopwatch sw;
  const std::vector<DepthNormalMap> raw = estimate_raw_depth(scene, cfg);
  const double raw_seconds = sw.seconds();
  write_raw_maps(raw, out);
  AblationReport report;
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const AblationRow& row : rows) {
    const PipelineConfig rc = with_toggles(cfg, row);
    PipelineResult r = run_pipeline_stages(scene, gt, rc, &raw);
    r.timings.front().seconds = raw_seconds;
    for (const std::string& w : r.warnings) std::cerr << "warning: " << row.name << ": " << w << "\n";
    const fs::path dir = out / "rows" / row.name;
    write_config(rc, dir);
    write_stage_artifacts(r, dir, false);
    report.entries.push_back({row, *r.metrics});
    nlohmann::ordered_json e;
    e["row"] = row.name;
    e["tp"] = row.tp;
    e["sp"] = row.sp;
    e["gcec"] = row.gcec;
    e["gia"] = row.gia;
    if (r.metrics->cloud) {
      e["completeness"] = r.metrics->cloud->completeness;
      e["accuracy"] = r.metrics->cloud->accuracy;
      e["f1"] = r.metrics->cloud->f1;
    }
    e["depth_fraction_within"] = r.metrics->depth_all.fraction_within;
    if (r.metrics->depth_textureless) e["textureless_fraction_within"] = r.metrics->depth_textureless->fraction_within;
    j.push_back(e);
  }
  std::ofstream txt = open_text(out / "ablation.txt");
  report.write_table(txt);
  open_text(out / "ablation.json") << j.dump(2) << "\n";
  return report;
}

}  // namespace planemvs
