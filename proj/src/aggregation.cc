#include "planemvs/aggregation.h"

#include <algorithm>
#include <cmath>

#include "planemvs/errors.h"
#include "planemvs/parallel.h"

namespace planemvs {

void AggregationParams::validate() const {
  if (!(alpha_geo >= 0)) throw DomainError("alpha_geo must be non-negative");
  if (!(p1 < p2)) throw DomainError("P1 must be smaller than P2");
}

void BaselineAggParams::validate() const {
  if (!(alpha > 0 && gamma > 0 && lambda_d > 0 && lambda_n > 0)) {
    throw DomainError("baseline aggregation parameters must be positive");
  }
}

double smooth_term(std::span<const double> values) {
  if (values.size() > 4) throw DomainError("smooth_term takes at most 4 values");
  double mn = 0, sum = 0;
  bool first = true;
  for (double v : values) {
    if (!(v >= 0) || !std::isfinite(v)) throw DomainError("smooth_term: values must be finite and non-negative");
    mn = first ? v : std::min(mn, v);
    first = false;
    sum += v;
  }
  if (values.empty() || sum == 0.0) return 0.0;
  return mn / sum;
}

double global_agg_cost(double cost_ph, double cost_geo, double l_smooth, const AggregationParams& params) {
  return cost_ph + params.alpha_geo * cost_geo + l_smooth;
}

LikelihoodFactors likelihood_factors(double cost_ph, double cost_geo, double l_smooth, const AggregationParams& params) {
  return {std::exp(-cost_ph), std::exp(-params.alpha_geo * cost_geo), std::exp(-l_smooth)};
}

Selection select_hypothesis(std::optional<double> l_sam, std::optional<double> l_tri, double l_raw,
                            const AggregationParams& params) {
  Selection best{CandidateSource::kRaw, l_raw, l_raw + params.p2};
  // Visiting in reverse preference order with <= lets SAM win ties.
  if (l_tri && *l_tri + params.p1 <= best.total) best = {CandidateSource::kTri, *l_tri, *l_tri + params.p1};
  if (l_sam && *l_sam <= best.total) best = {CandidateSource::kSam, *l_sam, *l_sam};
  return best;
}

double baseline_acmp_cost(double cost_mph, const PlaneHypothesis& hyp, const PlaneHypothesis& prior,
                          const BaselineAggParams& params) {
  const double rel = (hyp.depth - prior.depth) / prior.depth;
  const double c = std::clamp(hyp.normal.dot(prior.normal), -1.0, 1.0);
  const double ang = std::acos(c);
  const double term = std::exp(-rel / (2.0 * params.lambda_d)) * std::exp(-ang * ang / (2.0 * params.lambda_n));
  return cost_mph * cost_mph / params.alpha - std::log(params.gamma + term);
}

CandidateCostGrid::CandidateCostGrid(int w, int h)
    : width(w), height(h), raw(size_t(w) * h, 0.0), tri(size_t(w) * h, 0.0), sam(size_t(w) * h, 0.0),
      has_tri(size_t(w) * h, 0), has_sam(size_t(w) * h, 0) {}

AggregationState aggregate_recurrence(const CandidateCostGrid& grid, const AggregationParams& params) {
  AggregationState st;
  st.width = grid.width;
  st.height = grid.height;
  const size_t n = static_cast<size_t>(grid.width) * grid.height;
  st.L.assign(n, 0.0);
  st.visited.assign(n, 0);
  st.source.assign(n, 0);
  static constexpr int kNeighbors[4][2] = {{-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      double nb[4];
      int k = 0;
      for (const auto& o : kNeighbors) {
        const int qx = x + o[0], qy = y + o[1];
        if (qx < 0 || qy < 0 || qx >= grid.width) continue;
        nb[k++] = st.L[grid.index(qx, qy)];
      }
      const double smooth = smooth_term(std::span<const double>(nb, k));
      const size_t i = grid.index(x, y);
      std::optional<double> ls, lt;
      if (grid.has_sam[i]) ls = grid.sam[i] + smooth;
      if (grid.has_tri[i]) lt = grid.tri[i] + smooth;
      const Selection s = select_hypothesis(ls, lt, grid.raw[i] + smooth, params);
      st.L[i] = s.L;
      st.source[i] = static_cast<uint8_t>(s.source);
      st.visited[i] = 1;
    }
  }
  return st;
}

double candidate_geo_cost(const CameraModel& ref, std::span<const DepthView> sources, const Vec2& p,
                          const PlaneHypothesis& hyp, GeoCostKind kind, const ConsistencyParams& params) {
  if (kind == GeoCostKind::kEpipolar) return multi_view_epipolar_cost(ref, sources, p, hyp, params);
  if (sources.empty()) return 2.0;
  double sum = 0;
  for (const DepthView& s : sources) sum += reprojection_cost(ref, s, p, hyp.depth, params);
  return 2.0 * (sum / sources.size()) / params.tau_geo;
}

SequentialPassResult sequential_pass(const MatchingContext& ctx, const PriorCandidateSet& cand,
                                     std::span<const DepthView> sources, const PatchMatchConfig& cfg,
                                     const SequentialPassOptions& opts) {
  opts.agg.validate();
  opts.baseline.validate();
  opts.consistency.validate();
  const int w = cand.width(), h = cand.height();
  if (w != ctx.width() || h != ctx.height()) throw DimensionError("sequential_pass: candidate set size differs from image");
  SequentialPassResult res;
  res.costs = CandidateCostGrid(w, h);
  CandidateCostGrid& g = res.costs;
  res.ph_raw.assign(size_t(w) * h, 0.0f);
  res.ph_tri.assign(size_t(w) * h, 0.0f);
  res.ph_sam.assign(size_t(w) * h, 0.0f);
  const CameraModel& cam = ctx.ref_camera;
  const double alpha = opts.agg.alpha_geo;

  // Candidate scoring is independent per pixel; only the recurrence is sequential.
  std::vector<uint8_t> baseline_pick(size_t(w) * h, 0);
  parallel_for(0, h, cfg.workers, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const size_t i = g.index(x, y);
      const Vec2 px(x, y);
      const RefPatch patch = make_ref_patch(*ctx.ref_image, x, y, cfg);
      std::vector<PlaneHypothesis> hyps{cand.raw.hypothesis(x, y)};
      const bool tri = cand.tri.has(x, y), sam = cand.sam.has(x, y);
      if (tri) hyps.push_back(cand.tri.at(x, y));
      if (sam) hyps.push_back(cand.sam.at(x, y));
      std::vector<std::vector<double>> rows;
      for (const auto& hh : hyps) rows.push_back(photometric_costs(patch, ctx, hh, cfg));
      const std::vector<double> wts = view_weights(rows, cfg);
      std::vector<double> ph(hyps.size()), match(hyps.size());
      for (size_t c = 0; c < hyps.size(); ++c) {
        ph[c] = multi_view_cost(rows[c], wts).value;
        match[c] = ph[c] + alpha * candidate_geo_cost(cam, sources, px, hyps[c], opts.geo, opts.consistency);
      }
      size_t c = 0;
      g.raw[i] = match[c];
      res.ph_raw[i] = static_cast<float>(ph[c++]);
      if (tri) {
        g.has_tri[i] = 1;
        g.tri[i] = match[c];
        res.ph_tri[i] = static_cast<float>(ph[c++]);
      }
      if (sam) {
        g.has_sam[i] = 1;
        g.sam[i] = match[c];
        res.ph_sam[i] = static_cast<float>(ph[c++]);
      }
      if (!opts.global_aggregation && hyps.size() > 1) {
        const PlaneHypothesis& prior = hyps.back();
        size_t best = 0;
        double best_cost = 0;
        for (size_t k = 0; k < hyps.size(); ++k) {
          const double v = baseline_acmp_cost(match[k], hyps[k], prior, opts.baseline);
          if (k == 0 || v < best_cost) {
            best = k;
            best_cost = v;
          }
        }
        const CandidateSource src = best == 0 ? CandidateSource::kRaw
                                    : (best == 1 && tri) ? CandidateSource::kTri
                                                         : CandidateSource::kSam;
        baseline_pick[i] = static_cast<uint8_t>(src);
      }
    }
  });

  if (opts.global_aggregation) {
    res.state = aggregate_recurrence(g, opts.agg);
  } else {
    res.state.width = w;
    res.state.height = h;
    res.state.source = baseline_pick;
    res.state.visited.assign(size_t(w) * h, 1);
    res.state.L.resize(size_t(w) * h);
    for (size_t i = 0; i < res.state.L.size(); ++i) {
      const auto s = static_cast<CandidateSource>(baseline_pick[i]);
      res.state.L[i] = (s == CandidateSource::kRaw ? g.raw[i] : s == CandidateSource::kTri ? g.tri[i] : g.sam[i]);
    }
  }

  res.map = cand.raw;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t i = g.index(x, y);
      switch (static_cast<CandidateSource>(res.state.source[i])) {
        case CandidateSource::kRaw:
          break;  // raw hypothesis, cost and flag unchanged
        case CandidateSource::kTri:
          res.map.set_hypothesis(x, y, cand.tri.at(x, y));
          res.map.set_cost(x, y, res.ph_tri[i]);
          break;
        case CandidateSource::kSam:
          res.map.set_hypothesis(x, y, cand.sam.at(x, y));
          res.map.set_cost(x, y, res.ph_sam[i]);
          break;
      }
    }
  }
  return res;
}

PatchMatchState final_geometric_pass(const MatchingContext& ctx, const DepthNormalMap& map,
                                     std::span<const DepthView> sources, const PatchMatchConfig& cfg,
                                     const ConsistencyParams& params, int iterations) {
  params.validate();
  const CameraModel& cam = ctx.ref_camera;
  const double alpha = params.alpha_geo;
  ExtraCost extra = [&](int x, int y, const PlaneHypothesis& hyp) {
    double sum = 0;
    for (const DepthView& s : sources) sum += reprojection_cost(cam, s, {double(x), double(y)}, hyp.depth, params);
    return alpha * sum;
  };
  const PatchMatchEngine engine(ctx, cfg, extra);
  PatchMatchState st = engine.evaluate(map);
  // Continue the perturbation schedule where the raw estimate stopped.
  for (int it = 0; it < iterations; ++it) st = engine.iterate(st, cfg.iterations + it);
  return st;
}

}  // namespace planemvs
