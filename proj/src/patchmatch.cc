#include "planemvs/patchmatch.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "planemvs/errors.h"
#include "planemvs/parallel.h"
#include "planemvs/rng.h"

namespace planemvs {

namespace {

// RNG stream tags.
constexpr uint64_t kInitStream = 0x1001;
constexpr uint64_t kRefineStream = 0x1002;

Vec3 random_facing_normal(CounterRng& rng, const Vec3& ray) {
  return orient_towards_camera(rng.unit_vector(), ray);
}

}  // namespace

void PatchMatchConfig::validate() const {
  if (patch_radius < 1) throw DomainError("patch_radius must be >= 1");
  if (patch_step < 1) throw DomainError("patch_step must be >= 1");
  if (iterations < 1) throw DomainError("iterations must be >= 1");
  if (!(ncc_sigma_spatial > 0) || !(ncc_sigma_color > 0)) throw DomainError("NCC sigmas must be positive");
  if (!(view_weight_scale > 0)) throw DomainError("view_weight_scale must be positive");
  if (!(perturbation_fraction >= 0)) throw DomainError("perturbation_fraction must be >= 0");
}

MultiViewCost multi_view_cost(std::span<const double> m, std::span<const double> w) {
  if (m.size() != w.size()) throw DimensionError("multi_view_cost: cost/weight length mismatch");
  double num = 0, den = 0;
  for (size_t j = 0; j < m.size(); ++j) {
    if (w[j] < 0) throw DomainError("multi_view_cost: negative weight");
    num += w[j] * m[j];
    den += w[j];
  }
  if (!(den > 0)) return {kCostMax, true};
  return {num / den, false};
}

RefPatch make_ref_patch(const ImageBuffer& ref, int x, int y, const PatchMatchConfig& cfg) {
  RefPatch p;
  p.x = x;
  p.y = y;
  const int kmax = cfg.patch_radius / cfg.patch_step;
  const double center = ref.at(x, y);
  const double inv_s = 1.0 / (2.0 * cfg.ncc_sigma_spatial * cfg.ncc_sigma_spatial);
  const double inv_c = 1.0 / (2.0 * cfg.ncc_sigma_color * cfg.ncc_sigma_color);
  const size_t cap = static_cast<size_t>((2 * kmax + 1) * (2 * kmax + 1));
  p.dx.reserve(cap);
  p.dy.reserve(cap);
  p.value.reserve(cap);
  p.weight.reserve(cap);
  double sw = 0, swv = 0;
  for (int ky = -kmax; ky <= kmax; ++ky) {
    for (int kx = -kmax; kx <= kmax; ++kx) {
      const int dx = kx * cfg.patch_step;
      const int dy = ky * cfg.patch_step;
      const int sx = x + dx;
      const int sy = y + dy;
      if (sx < 0 || sy < 0 || sx >= ref.width() || sy >= ref.height()) continue;
      const double v = ref.at(sx, sy);
      const double dv = v - center;
      const double w = std::exp(-(dx * dx + dy * dy) * inv_s) * std::exp(-dv * dv * inv_c);
      p.dx.push_back(dx);
      p.dy.push_back(dy);
      p.value.push_back(v);
      p.weight.push_back(w);
      sw += w;
      swv += w * v;
    }
  }
  p.weight_sum = sw;
  p.mean = swv / sw;
  double var = 0;
  for (size_t k = 0; k < p.value.size(); ++k) {
    const double d = p.value[k] - p.mean;
    var += p.weight[k] * d * d;
  }
  p.var = var;
  p.textured = p.value.size() >= 3 && var > 1e-10 * sw;
  return p;
}

std::vector<std::shared_ptr<const ImageBuffer>> gray_images(const SceneBundle& scene) {
  std::vector<std::shared_ptr<const ImageBuffer>> out;
  out.reserve(scene.views.size());
  for (const View& v : scene.views) out.push_back(std::make_shared<const ImageBuffer>(v.image.to_gray()));
  return out;
}

MatchingContext make_context(const SceneBundle& scene, int ref_index,
                             const std::vector<std::shared_ptr<const ImageBuffer>>& gray) {
  MatchingContext ctx;
  ctx.ref_index = ref_index;
  ctx.ref_image = gray.at(ref_index);
  ctx.ref_camera = scene.views.at(ref_index).camera;
  for (int j : scene.neighbors.at(ref_index)) {
    ctx.sources.push_back({gray.at(j), scene.views[j].camera,
                           ViewPairGeometry(ctx.ref_camera, scene.views[j].camera), j});
  }
  return ctx;
}

double photometric_cost(const RefPatch& patch, const CameraModel& ref_cam, const SourceView& src,
                        const PlaneHypothesis& hyp, const PatchMatchConfig&) {
  if (!patch.textured) return kCostMax;
  const FittedPlane plane = hypothesis_plane(ref_cam, {double(patch.x), double(patch.y)}, hyp);
  const double d = plane.offset();
  if (!(std::abs(d) > 1e-12)) return kCostMax;
  const Mat3 H = src.pair.homography(plane.normal(), d);
  const Vec3 base = H * Vec3(patch.x, patch.y, 1.0);
  const Vec3 col_x = H.col(0);
  const Vec3 col_y = H.col(1);
  const ImageBuffer& img = *src.image;
  double sws = 0, swss = 0, cov = 0;
  for (size_t k = 0; k < patch.value.size(); ++k) {
    const Vec3 h = base + patch.dx[k] * col_x + patch.dy[k] * col_y;
    if (!(h.z() > 0)) return kCostMax;
    const double u = h.x() / h.z();
    const double v = h.y() / h.z();
    if (!img.contains(u, v)) return kCostMax;
    const double s = img.bilinear(u, v);
    const double w = patch.weight[k];
    sws += w * s;
    swss += w * s * s;
    cov += w * (patch.value[k] - patch.mean) * s;
  }
  const double var_s = swss - sws * sws / patch.weight_sum;
  if (!(var_s > 1e-10 * patch.weight_sum)) return kCostMax;
  const double ncc = cov / std::sqrt(patch.var * var_s);
  return std::clamp(1.0 - ncc, 0.0, kCostMax);
}

std::vector<double> photometric_costs(const RefPatch& patch, const MatchingContext& ctx,
                                      const PlaneHypothesis& hyp, const PatchMatchConfig& cfg) {
  std::vector<double> m(ctx.sources.size());
  for (size_t j = 0; j < m.size(); ++j) m[j] = photometric_cost(patch, ctx.ref_camera, ctx.sources[j], hyp, cfg);
  return m;
}

std::vector<double> view_weights(std::span<const std::vector<double>> rows, const PatchMatchConfig& cfg) {
  if (rows.empty()) return {};
  std::vector<double> best(rows.front().size(), kCostMax);
  for (const auto& r : rows) {
    for (size_t j = 0; j < r.size(); ++j) best[j] = std::min(best[j], r[j]);
  }
  std::vector<double> w(best.size());
  for (size_t j = 0; j < w.size(); ++j) w[j] = best[j] < kCostMax ? std::exp(-best[j] / cfg.view_weight_scale) : 0.0;
  return w;
}

DepthNormalMap random_init(const CameraModel& cam, int width, int height, uint64_t seed) {
  DepthNormalMap map(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      CounterRng rng{seed, kInitStream, uint64_t(x), uint64_t(y)};
      const Vec3 ray = cam.ray({double(x), double(y)});
      PlaneHypothesis h;
      h.depth = rng.uniform(cam.d_min(), cam.d_max());
      h.normal = random_facing_normal(rng, ray);
      map.set_hypothesis(x, y, quantize(h));
    }
  }
  return map;
}

PatchMatchEngine::PatchMatchEngine(const MatchingContext& ctx, const PatchMatchConfig& cfg, ExtraCost extra)
    : ctx_(ctx), cfg_(cfg), extra_(std::move(extra)) {
  cfg_.validate();
}

double PatchMatchEngine::score(const std::vector<double>& row, const std::vector<double>& w, int x, int y,
                               const PlaneHypothesis& h, double* photometric) const {
  const double ph = multi_view_cost(row, w).value;
  if (photometric) *photometric = ph;
  return extra_ ? ph + extra_(x, y, h) : ph;
}

PatchMatchState PatchMatchEngine::evaluate(const DepthNormalMap& map) const {
  PatchMatchState st{map, std::vector<float>(map.size())};
  parallel_for(0, map.height(), cfg_.workers, [&](int y) {
    for (int x = 0; x < map.width(); ++x) {
      const RefPatch patch = make_ref_patch(*ctx_.ref_image, x, y, cfg_);
      const PlaneHypothesis h = map.hypothesis(x, y);
      const std::vector<std::vector<double>> rows{photometric_costs(patch, ctx_, h, cfg_)};
      const std::vector<double> w = view_weights(rows, cfg_);
      double ph = 0;
      const double total = score(rows[0], w, x, y, h, &ph);
      st.map.set_cost(x, y, static_cast<float>(ph));
      st.objective[st.map.index(x, y)] = static_cast<float>(total);
    }
  });
  return st;
}

void PatchMatchEngine::update_pixel(const PatchMatchState& snap, PatchMatchState& out, int x, int y,
                                    int iteration) const {
  const DepthNormalMap& map = snap.map;
  const CameraModel& cam = ctx_.ref_camera;
  const Vec2 px(x, y);
  const Vec3 ray = cam.ray(px);
  const RefPatch patch = make_ref_patch(*ctx_.ref_image, x, y, cfg_);

  std::vector<PlaneHypothesis> cand;
  cand.reserve(12);
  cand.push_back(map.hypothesis(x, y));
  static constexpr int kOffsets[8][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}, {-1, -1}, {1, -1}, {-1, 1}, {1, 1}};
  for (const auto& o : kOffsets) {
    const int qx = x + o[0];
    const int qy = y + o[1];
    if (qx < 0 || qy < 0 || qx >= map.width() || qy >= map.height()) continue;
    const PlaneHypothesis hq = map.hypothesis(qx, qy);
    const PlaneSample moved = plane_hypothesis_at(hypothesis_plane(cam, {double(qx), double(qy)}, hq), px, cam);
    cand.push_back(quantize(moved.valid ? moved.hyp : PlaneHypothesis{hq.depth, orient_towards_camera(hq.normal, ray)}));
  }

  std::vector<std::vector<double>> rows;
  rows.reserve(12);
  for (const auto& h : cand) rows.push_back(photometric_costs(patch, ctx_, h, cfg_));
  const std::vector<double> w = view_weights(rows, cfg_);

  const size_t idx = map.index(x, y);
  PlaneHypothesis best = cand[0];
  double best_cost = snap.objective[idx];
  double best_ph = map.cost(x, y);
  auto consider = [&](const PlaneHypothesis& h, const std::vector<double>& row) {
    double ph = 0;
    const double c = score(row, w, x, y, h, &ph);
    if (c < best_cost) {
      best = h;
      best_cost = c;
      best_ph = ph;
    }
  };
  for (size_t c = 0; c < cand.size(); ++c) consider(cand[c], rows[c]);

  // Refinement around the propagation winner.
  CounterRng rng{cfg_.rng_seed, kRefineStream, uint64_t(iteration), uint64_t(x), uint64_t(y)};
  const double scale = cfg_.perturbation_fraction * std::pow(0.5, iteration);
  PlaneHypothesis by_depth = best;
  by_depth.depth = std::clamp(best.depth * (1.0 + scale * rng.uniform(-1.0, 1.0)), cam.d_min(), cam.d_max());
  PlaneHypothesis by_normal = best;
  const Vec3 tilted = best.normal + 2.0 * scale * rng.unit_vector();
  by_normal.normal = tilted.norm() > 1e-9 ? orient_towards_camera(tilted.normalized(), ray) : best.normal;
  PlaneHypothesis fresh;
  fresh.depth = rng.uniform(cam.d_min(), cam.d_max());
  fresh.normal = random_facing_normal(rng, ray);
  for (const PlaneHypothesis& h : {quantize(by_depth), quantize(by_normal), quantize(fresh)}) {
    consider(h, photometric_costs(patch, ctx_, h, cfg_));
  }

  out.map.set_hypothesis(x, y, best);
  out.map.set_cost(x, y, static_cast<float>(best_ph));
  out.objective[idx] = static_cast<float>(best_cost);
}

PatchMatchState PatchMatchEngine::iterate(const PatchMatchState& state, int iteration) const {
  PatchMatchState out = state;
  for (int color = 0; color < 2; ++color) {
    const PatchMatchState snap = out;
    parallel_for(0, out.map.height(), cfg_.workers, [&](int y) {
      for (int x = (y + color) % 2; x < out.map.width(); x += 2) update_pixel(snap, out, x, y, iteration);
    });
  }
  return out;
}

DepthNormalMap evaluate_costs(const DepthNormalMap& map, const MatchingContext& ctx, const PatchMatchConfig& cfg) {
  return PatchMatchEngine(ctx, cfg).evaluate(map).map;
}

DepthNormalMap propagate_refine(const DepthNormalMap& map, const MatchingContext& ctx,
                                const PatchMatchConfig& cfg, int iteration) {
  const PatchMatchEngine engine(ctx, cfg);
  return engine.iterate({map, map.costs()}, iteration).map;
}

DepthNormalMap run_patchmatch(const MatchingContext& ctx, const PatchMatchConfig& cfg) {
  const PatchMatchEngine engine(ctx, cfg);
  PatchMatchState st = engine.evaluate(random_init(ctx.ref_camera, ctx.width(), ctx.height(), cfg.rng_seed));
  for (int it = 0; it < cfg.iterations; ++it) st = engine.iterate(st, it);
  return st.map;
}

}  // namespace planemvs
