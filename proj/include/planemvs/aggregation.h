#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "planemvs/consistency.h"
#include "planemvs/patchmatch.h"
#include "planemvs/prior.h"

namespace planemvs {

struct AggregationParams {
  double alpha_geo = 0.1;
  double p1 = 0.2;   // triangulation prior penalty
  double p2 = 0.66;  // raw estimate penalty
  void validate() const;
};

struct BaselineAggParams {
  double alpha = 4.0;
  double gamma = 0.5;
  double lambda_d = 0.25;  // relative depth
  double lambda_n = 0.2;   // rad
  void validate() const;
};

// min / sum over the available neighbor values; 0 when none or the sum is 0.
double smooth_term(std::span<const double> neighbor_L);

double global_agg_cost(double cost_ph, double cost_geo, double l_smooth, const AggregationParams& params);

// The three factors whose product is exp(-global_agg_cost).
struct LikelihoodFactors {
  double photometric = 1;   // exp(-Cost_ph)
  double prior = 1;         // exp(-alpha_geo * Cost_geo)
  double aggregation = 1;   // exp(-L_smooth)
  double product() const { return photometric * prior * aggregation; }
};
LikelihoodFactors likelihood_factors(double cost_ph, double cost_geo, double l_smooth, const AggregationParams& params);

enum class CandidateSource : uint8_t { kRaw = 0, kTri = 1, kSam = 2 };

struct Selection {
  CandidateSource source = CandidateSource::kRaw;
  double L = 0;      // un-penalized cost of the winner
  double total = 0;  // penalized cost the argmin was taken over
};

// argmin {L_sam, L_tri + P1, L_raw + P2}; ties prefer SAM, then TRI.
Selection select_hypothesis(std::optional<double> l_sam, std::optional<double> l_tri, double l_raw,
                            const AggregationParams& params);

// Cost_mph^2 / alpha - log(gamma + exp(-(d_i - d_p) / (2 lambda_d)) * exp(-acos^2(n_i . n_p) / (2 lambda_n)))
// with the depth difference taken relative to d_p.
double baseline_acmp_cost(double cost_mph, const PlaneHypothesis& hyp, const PlaneHypothesis& prior,
                          const BaselineAggParams& params);

// Per-pixel matching costs (Cost_ph + alpha_geo * Cost_geo) of the candidates.
struct CandidateCostGrid {
  int width = 0, height = 0;
  std::vector<double> raw, tri, sam;
  std::vector<uint8_t> has_tri, has_sam;
  CandidateCostGrid() = default;
  CandidateCostGrid(int w, int h);
  size_t index(int x, int y) const { return static_cast<size_t>(y) * width + x; }
};

struct AggregationState {
  int width = 0, height = 0;
  std::vector<double> L;
  std::vector<uint8_t> visited;
  std::vector<uint8_t> source;  // CandidateSource per pixel
};

// The raster recurrence over precomputed matching costs: neighbors left,
// top-left, top and top-right feed smooth_term.
AggregationState aggregate_recurrence(const CandidateCostGrid& grid, const AggregationParams& params);

enum class GeoCostKind { kEpipolar, kReprojection };

struct SequentialPassOptions {
  bool global_aggregation = true;  // false: select by baseline_acmp_cost
  GeoCostKind geo = GeoCostKind::kEpipolar;
  AggregationParams agg;
  BaselineAggParams baseline;
  ConsistencyParams consistency;
};

struct SequentialPassResult {
  DepthNormalMap map;
  AggregationState state;
  CandidateCostGrid costs;
  std::vector<float> ph_raw, ph_tri, ph_sam;  // photometric parts
};

// Geometric cost of a hypothesis against source depth estimates, in [0, 2].
double candidate_geo_cost(const CameraModel& ref, std::span<const DepthView> sources, const Vec2& p,
                          const PlaneHypothesis& hyp, GeoCostKind kind, const ConsistencyParams& params);

SequentialPassResult sequential_pass(const MatchingContext& ctx, const PriorCandidateSet& candidates,
                                     std::span<const DepthView> sources, const PatchMatchConfig& cfg,
                                     const SequentialPassOptions& opts);

// PatchMatch iterations with objective Cost_ph + alpha_geo * sum_j reprojection_cost_j.
// The returned map keeps Cost_ph as its cost; the full objective comes alongside.
PatchMatchState final_geometric_pass(const MatchingContext& ctx, const DepthNormalMap& map,
                                     std::span<const DepthView> sources, const PatchMatchConfig& cfg,
                                     const ConsistencyParams& params, int iterations = 2);

}  // namespace planemvs
