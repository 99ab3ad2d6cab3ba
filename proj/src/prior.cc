#include "planemvs/prior.h"

#include <algorithm>
#include <Eigen/Eigenvalues>

#include "planemvs/delaunay.h"
#include "planemvs/errors.h"
#include "planemvs/kdtree.h"
#include "planemvs/parallel.h"
#include "planemvs/rng.h"
#include "planemvs/scene_io.h"

namespace planemvs {

namespace {
constexpr uint64_t kRansacStream = 0x3001;
}

void PriorParams::validate() const {
  if (!(tau_lambda > 1.0 / 3.0 && tau_lambda <= 1.0)) throw DomainError("tau_lambda must lie in (1/3, 1]");
  if (knn < 4) throw DomainError("knn must be >= 4");
  if (ransac_iters < 1) throw DomainError("ransac_iters must be >= 1");
  if (!(ransac_inlier_tol > 0) || !(ransac_relative_tol > 0)) throw DomainError("RANSAC tolerance must be positive");
  if (!(min_inlier_fraction >= 0 && min_inlier_fraction <= 1)) throw DomainError("min_inlier_fraction must lie in [0, 1]");
}

size_t PriorMap::count() const {
  return static_cast<size_t>(std::count(present.begin(), present.end(), uint8_t{1}));
}

SparsePointSet sparsify(const DepthNormalMap& map, const CameraModel& cam, const PriorParams& params) {
  SparsePointSet out;
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      const double d = map.depth(x, y);
      if (!(d > 0) || map.cost(x, y) > params.sparsify_cost_threshold) continue;
      out.push_back({{x, y}, d, back_project_camera(cam, {double(x), double(y)}, d), map.cost(x, y)});
    }
  }
  return out;
}

PriorMap delaunay_prior(const SparsePointSet& sparse, const CameraModel& cam, int width, int height) {
  PriorMap prior(width, height);
  if (sparse.size() < 3) return prior;
  std::vector<IntPoint> pts;
  pts.reserve(sparse.size());
  for (const SparsePoint& s : sparse) pts.push_back({s.pixel.x, s.pixel.y});
  const DelaunayTriangulation tri(pts);
  for (const auto& t : tri.triangles()) {
    const IntPoint &a = pts[t[0]], &b = pts[t[1]], &c = pts[t[2]];
    if (orient2d(a, b, c) <= 0) continue;
    FittedPlane plane;
    try {
      plane = triangle_plane(sparse[t[0]].point, sparse[t[1]].point, sparse[t[2]].point);
    } catch (const DegeneracyError&) {
      continue;
    }
    const int x0 = static_cast<int>(std::max<int64_t>(0, std::min({a.x, b.x, c.x})));
    const int x1 = static_cast<int>(std::min<int64_t>(width - 1, std::max({a.x, b.x, c.x})));
    const int y0 = static_cast<int>(std::max<int64_t>(0, std::min({a.y, b.y, c.y})));
    const int y1 = static_cast<int>(std::min<int64_t>(height - 1, std::max({a.y, b.y, c.y})));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (prior.has(x, y)) continue;
        const IntPoint p{x, y};
        if (orient2d(a, b, p) < 0 || orient2d(b, c, p) < 0 || orient2d(c, a, p) < 0) continue;
        const PlaneSample s = plane_hypothesis_at(plane, {double(x), double(y)}, cam);
        if (s.valid) prior.set(x, y, s.hyp);
      }
    }
  }
  return prior;
}

CurvatureEstimate neighborhood_curvature(const std::vector<Vec3>& nb) {
  CurvatureEstimate est;
  if (nb.empty()) {
    est.degenerate = true;
    return est;
  }
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : nb) mean += p;
  mean /= static_cast<double>(nb.size());
  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : nb) cov += (p - mean) * (p - mean).transpose();
  cov /= static_cast<double>(nb.size());
  if (cov.isZero(0.0)) {
    est.degenerate = true;
    return est;
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  Vec3 ev = es.eigenvalues().reverse();
  // Eigenvalues at round-off level relative to the largest are zero.
  for (int i = 1; i < 3; ++i) {
    if (std::abs(ev[i]) <= 1e-12 * ev[0]) ev[i] = 0.0;
  }
  est.eigenvalues = ev;
  est.curvature = ev[0] / ev.sum();
  return est;
}

CurvatureEstimate pca_curvature(const std::vector<Vec3>& points, const KdTree& tree, int query, int knn) {
  if (query < 0 || query >= static_cast<int>(points.size())) throw DomainError("pca_curvature: bad query index");
  if (static_cast<int>(points.size()) < knn + 1) throw DomainError("pca_curvature: fewer than knn + 1 points");
  std::vector<int> idx = tree.knn(points[query], knn + 1);
  // The query itself is always part of the neighborhood.
  if (std::find(idx.begin(), idx.end(), query) == idx.end()) idx.back() = query;
  std::vector<Vec3> nb;
  nb.reserve(idx.size());
  for (int i : idx) nb.push_back(points[i]);
  return neighborhood_curvature(nb);
}

CurvatureEstimate pca_curvature(const std::vector<Vec3>& points, int query, int knn) {
  const KdTree tree(points);
  return pca_curvature(points, tree, query, knn);
}

FittedPlane fit_plane_least_squares(const std::vector<Vec3>& points) {
  if (points.size() < 3) throw DomainError("plane fit needs at least 3 points");
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : points) cov += (p - mean) * (p - mean).transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  if (es.eigenvalues()[1] <= 1e-15 * std::max(1e-300, es.eigenvalues()[2])) {
    throw DegeneracyError("plane fit: points are collinear");
  }
  Vec3 n = es.eigenvectors().col(0).normalized();
  double d = -n.dot(mean);
  if (d < 0) {
    n = -n;
    d = -d;
  }
  FittedPlane plane;
  plane.coeffs << n, d;
  double ss = 0;
  for (const Vec3& p : points) ss += plane.signed_distance(p) * plane.signed_distance(p);
  plane.inlier_count = static_cast<int>(points.size());
  plane.rms_residual = std::sqrt(ss / points.size());
  return plane;
}

RansacResult ransac_plane_fit(const std::vector<Vec3>& points, const PriorParams& params, uint64_t seed,
                              double tol) {
  const int n = static_cast<int>(points.size());
  if (n < 3) throw DomainError("ransac_plane_fit needs at least 3 points");
  if (!(tol > 0)) throw DomainError("ransac_plane_fit: tolerance must be positive");
  CounterRng rng{seed, kRansacStream};
  int best_count = -1;
  FittedPlane best;
  for (int it = 0; it < params.ransac_iters; ++it) {
    const int i = static_cast<int>(rng.below(n));
    int j = static_cast<int>(rng.below(n - 1));
    if (j >= i) ++j;
    int k = static_cast<int>(rng.below(n - 2));
    if (k >= std::min(i, j)) ++k;
    if (k >= std::max(i, j)) ++k;
    FittedPlane cand;
    try {
      cand = triangle_plane(points[i], points[j], points[k]);
    } catch (const DegeneracyError&) {
      continue;
    }
    int count = 0;
    for (const Vec3& p : points) count += std::abs(cand.signed_distance(p)) <= tol ? 1 : 0;
    if (count > best_count) {
      best_count = count;
      best = cand;
    }
  }
  if (best_count < 0) throw DegeneracyError("ransac_plane_fit: every sample was degenerate");

  // Least-squares refinement over the consensus set until it stops changing.
  std::vector<char> member(n, 0);
  for (int i = 0; i < n; ++i) member[i] = std::abs(best.signed_distance(points[i])) <= tol;
  FittedPlane plane = best;
  for (int round = 0; round < 5; ++round) {
    std::vector<Vec3> inliers;
    for (int i = 0; i < n; ++i) {
      if (member[i]) inliers.push_back(points[i]);
    }
    if (inliers.size() < 3) break;
    try {
      plane = fit_plane_least_squares(inliers);
    } catch (const DegeneracyError&) {
      break;
    }
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      const char m = std::abs(plane.signed_distance(points[i])) <= tol;
      changed |= m != member[i];
      member[i] = m;
    }
    if (!changed) break;
  }
  if (plane.offset() < 0) plane.coeffs = -plane.coeffs;
  double ss = 0;
  int count = 0;
  for (int i = 0; i < n; ++i) {
    if (!member[i]) continue;
    ++count;
    ss += plane.signed_distance(points[i]) * plane.signed_distance(points[i]);
  }
  plane.inlier_count = count;
  plane.rms_residual = count > 0 ? std::sqrt(ss / count) : 0.0;
  RansacResult r;
  r.plane = plane;
  r.inlier_fraction = static_cast<double>(count) / n;
  r.accepted = r.inlier_fraction >= params.min_inlier_fraction;
  return r;
}

SamPrior build_sam_prior(const SegmentMask& mask, const DepthNormalMap& map, const CameraModel& cam,
                         const PriorParams& params, uint64_t seed) {
  if (mask.width() != map.width() || mask.height() != map.height()) {
    throw DimensionError("build_sam_prior: mask and depth map sizes differ");
  }
  params.validate();
  SamPrior out;
  out.map = PriorMap(map.width(), map.height());
  const auto& ids = mask.region_ids();
  out.regions.resize(ids.size());
  std::vector<std::vector<std::pair<PixelCoord, PlaneHypothesis>>> fills(ids.size());

  parallel_for(0, static_cast<int>(ids.size()), params.workers, [&](int r) {
    const uint16_t k = ids[r];
    RegionFit& fit = out.regions[r];
    fit.region = k;
    const auto& members = mask.members(k);
    fit.member_count = static_cast<int>(members.size());
    std::vector<Vec3> pts;
    std::vector<double> depths;
    for (const PixelCoord& p : members) {
      const double d = map.depth(p.x, p.y);
      if (!(d > 0)) continue;
      pts.push_back(back_project_camera(cam, {double(p.x), double(p.y)}, d));
      depths.push_back(d);
    }
    if (static_cast<int>(pts.size()) < std::max(3, params.knn + 1)) return;
    const KdTree tree(pts);
    std::vector<Vec3> survivors;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
      const CurvatureEstimate c = pca_curvature(pts, tree, i, params.knn);
      if (!c.degenerate && c.curvature >= params.tau_lambda) survivors.push_back(pts[i]);
    }
    fit.surviving_points = static_cast<int>(survivors.size());
    if (survivors.size() < 3) return;
    std::nth_element(depths.begin(), depths.begin() + depths.size() / 2, depths.end());
    const double tol = params.ransac_relative_tol * depths[depths.size() / 2];
    try {
      fit.ransac = ransac_plane_fit(survivors, params, splitmix64(seed ^ splitmix64(k)), tol);
    } catch (const DegeneracyError&) {
      return;
    }
    if (!fit.ransac.accepted) return;
    fit.fitted = true;
    for (const PixelCoord& p : members) {
      const PlaneSample s = plane_hypothesis_at(fit.ransac.plane, {double(p.x), double(p.y)}, cam);
      if (s.valid) fills[r].push_back({p, s.hyp});
    }
  });
  for (const auto& f : fills) {
    for (const auto& [p, h] : f) out.map.set(p.x, p.y, h);
  }
  return out;
}

PriorCandidateSet assemble_candidates(const DepthNormalMap& raw, const PriorMap& tri, const PriorMap& sam) {
  PriorCandidateSet set;
  set.raw = raw;
  auto fit = [&](const PriorMap& m, const char* name) {
    if (m.width == 0 && m.height == 0) return PriorMap(raw.width(), raw.height());
    if (m.width != raw.width() || m.height != raw.height()) {
      throw DimensionError(std::string("assemble_candidates: ") + name + " prior size differs from raw map");
    }
    return m;
  };
  set.tri = fit(tri, "triangulation");
  set.sam = fit(sam, "mask");
  return set;
}

void write_prior_map(const PriorMap& prior, const std::filesystem::path& base) {
  std::vector<float> d(prior.hyps.size(), 0.0f), n(prior.hyps.size() * 3, 0.0f);
  for (size_t i = 0; i < prior.hyps.size(); ++i) {
    if (!prior.present[i]) continue;
    d[i] = static_cast<float>(prior.hyps[i].depth);
    for (int c = 0; c < 3; ++c) n[3 * i + c] = static_cast<float>(prior.hyps[i].normal[c]);
  }
  auto with = [&](const char* ext) {
    std::filesystem::path p = base;
    p += ext;
    return p;
  };
  write_map_file(with(".dmb"), "DMB1", prior.width, prior.height, d, 1);
  write_map_file(with(".nmb"), "NMB1", prior.width, prior.height, n, 3);
}

PriorMap read_prior_map(const std::filesystem::path& base) {
  auto with = [&](const char* ext) {
    std::filesystem::path p = base;
    p += ext;
    return p;
  };
  const ScalarMap d = read_map_file(with(".dmb"), "DMB1", 1);
  const ScalarMap n = read_map_file(with(".nmb"), "NMB1", 3);
  if (d.width != n.width || d.height != n.height) throw DimensionError("prior depth/normal sizes differ");
  PriorMap prior(d.width, d.height);
  for (size_t i = 0; i < d.values.size(); ++i) {
    if (!(d.values[i] > 0)) continue;
    prior.hyps[i] = {d.values[i], Vec3(n.values[3 * i], n.values[3 * i + 1], n.values[3 * i + 2])};
    prior.present[i] = 1;
  }
  return prior;
}

}  // namespace planemvs
