#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "planemvs/camera.h"
#include "planemvs/depth_map.h"
#include "planemvs/geometry.h"
#include "planemvs/image.h"

namespace planemvs {

struct PriorParams {
  double sparsify_cost_threshold = 0.3;
  double tau_lambda = 0.5;
  int knn = 20;
  int ransac_iters = 512;
  // Absolute tolerance for direct ransac_plane_fit calls.
  double ransac_inlier_tol = 0.01;
  // build_sam_prior uses this fraction of the region's median depth instead.
  double ransac_relative_tol = 0.005;
  double min_inlier_fraction = 0.15;
  int workers = 1;
  void validate() const;
};

struct SparsePoint {
  PixelCoord pixel;
  double depth = 0;
  Vec3 point;  // camera frame
  float cost = 0;
};
using SparsePointSet = std::vector<SparsePoint>;

// Per-pixel optional plane hypotheses, kept in double precision (files hold f32).
struct PriorMap {
  int width = 0, height = 0;
  std::vector<PlaneHypothesis> hyps;
  std::vector<uint8_t> present;

  PriorMap() = default;
  PriorMap(int w, int h) : width(w), height(h), hyps(size_t(w) * h), present(size_t(w) * h, 0) {}
  size_t index(int x, int y) const { return static_cast<size_t>(y) * width + x; }
  bool has(int x, int y) const { return present[index(x, y)] != 0; }
  const PlaneHypothesis& at(int x, int y) const { return hyps[index(x, y)]; }
  void set(int x, int y, const PlaneHypothesis& h) {
    hyps[index(x, y)] = h;
    present[index(x, y)] = 1;
  }
  size_t count() const;
};

// Pixels with cost <= threshold (and a positive depth), raster order.
SparsePointSet sparsify(const DepthNormalMap& map, const CameraModel& cam, const PriorParams& params);

// Piecewise-planar interpolation over the Delaunay triangulation of the sparse
// pixels. Pixels on a triangle's boundary count as covered; the first triangle
// reaching a pixel wins.
PriorMap delaunay_prior(const SparsePointSet& sparse, const CameraModel& cam, int width, int height);

struct CurvatureEstimate {
  Vec3 eigenvalues = Vec3::Zero();  // descending
  double curvature = 0;             // lambda1 / (lambda1 + lambda2 + lambda3)
  bool degenerate = false;          // zero covariance
};

class KdTree;

// Covariance of the query plus its knn nearest other points.
CurvatureEstimate pca_curvature(const std::vector<Vec3>& points, int query, int knn);
CurvatureEstimate pca_curvature(const std::vector<Vec3>& points, const KdTree& tree, int query, int knn);
// Curvature of an explicit neighborhood.
CurvatureEstimate neighborhood_curvature(const std::vector<Vec3>& neighborhood);

struct RansacResult {
  FittedPlane plane;
  double inlier_fraction = 0;
  bool accepted = false;  // inlier_fraction >= min_inlier_fraction
};

// Least-squares plane (centroid + smallest principal axis), offset >= 0.
FittedPlane fit_plane_least_squares(const std::vector<Vec3>& points);

// Throws DomainError for fewer than 3 points and DegeneracyError when no
// sampled triple spans a plane.
RansacResult ransac_plane_fit(const std::vector<Vec3>& points, const PriorParams& params, uint64_t seed,
                              double inlier_tol);
inline RansacResult ransac_plane_fit(const std::vector<Vec3>& points, const PriorParams& params, uint64_t seed) {
  return ransac_plane_fit(points, params, seed, params.ransac_inlier_tol);
}

struct RegionFit {
  uint16_t region = 0;
  int member_count = 0;
  int surviving_points = 0;
  bool fitted = false;
  RansacResult ransac;
};

struct SamPrior {
  PriorMap map;
  std::vector<RegionFit> regions;
};

SamPrior build_sam_prior(const SegmentMask& mask, const DepthNormalMap& map, const CameraModel& cam,
                         const PriorParams& params, uint64_t seed);

struct PriorCandidateSet {
  DepthNormalMap raw;
  PriorMap tri;
  PriorMap sam;
  int width() const { return raw.width(); }
  int height() const { return raw.height(); }
};

// Throws DimensionError when the maps disagree in size. Empty priors are
// expanded to all-absent maps.
PriorCandidateSet assemble_candidates(const DepthNormalMap& raw, const PriorMap& tri, const PriorMap& sam);

// DMB1 depths (0 = absent) and NMB1 normals next to `base`.
void write_prior_map(const PriorMap& prior, const std::filesystem::path& base);
PriorMap read_prior_map(const std::filesystem::path& base);

}  // namespace planemvs
