#include "planemvs/fusion.h"

#include <cmath>
#include <unordered_map>

#include "planemvs/errors.h"

namespace planemvs {

PointCloud fuse(std::span<const DepthNormalMap> maps, std::span<const CameraModel> cams, const FusionParams& params,
                std::span<const ImageBuffer> images) {
  if (maps.size() != cams.size()) throw DimensionError("fuse: one camera per depth map required");
  if (!images.empty() && images.size() != maps.size()) throw DimensionError("fuse: one image per depth map required");
  PointCloud cloud;
  const size_t n = maps.size();
  std::vector<std::vector<uint8_t>> consumed(n);
  for (size_t v = 0; v < n; ++v) consumed[v].assign(maps[v].size(), 0);

  std::vector<std::pair<size_t, size_t>> agree;
  for (size_t i = 0; i < n; ++i) {
    const DepthNormalMap& mi = maps[i];
    for (int y = 0; y < mi.height(); ++y) {
      for (int x = 0; x < mi.width(); ++x) {
        const size_t pi = mi.index(x, y);
        const double d = mi.depth(x, y);
        if (consumed[i][pi] || !(d > 0)) continue;
        const Vec2 p(x, y);
        const Vec3 X = back_project(cams[i], p, d);
        Vec3 sum = X;
        Vec3 nsum = cams[i].R().transpose() * mi.normal(x, y);
        agree.clear();
        for (size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          const DepthNormalMap& mj = maps[j];
          const auto pr = project(cams[j], X);
          if (!pr) continue;
          const double qx = std::round(pr->pixel.x()), qy = std::round(pr->pixel.y());
          if (qx < 0 || qy < 0 || qx > mj.width() - 1 || qy > mj.height() - 1) continue;
          const int ix = static_cast<int>(qx), iy = static_cast<int>(qy);
          const size_t qi = mj.index(ix, iy);
          const double dj = mj.depth(ix, iy);
          if (consumed[j][qi] || !(dj > 0)) continue;
          if (std::abs(pr->depth - dj) / dj > params.tol_rel) continue;
          const Vec3 Y = back_project(cams[j], {qx, qy}, dj);
          const auto back = project(cams[i], Y);
          if (!back || (back->pixel - p).norm() > params.tol_px) continue;
          agree.push_back({j, qi});
          sum += Y;
          nsum += cams[j].R().transpose() * mj.normal(ix, iy);
        }
        if (static_cast<int>(agree.size()) < params.min_consistent) continue;
        consumed[i][pi] = 1;
        for (const auto& [j, qi] : agree) consumed[j][qi] = 1;
        PointRecord rec;
        rec.position = sum / static_cast<double>(agree.size() + 1);
        rec.normal = nsum.norm() > 0 ? Vec3(nsum.normalized()) : Vec3(0, 0, 1);
        if (!images.empty()) {
          const ImageBuffer& im = images[i];
          for (int c = 0; c < 3; ++c) {
            const float v = im.at(x, y, im.channels() == 3 ? c : 0);
            rec.color[c] = static_cast<uint8_t>(std::lround(v * 255.0f));
          }
        }
        cloud.points.push_back(rec);
      }
    }
  }
  return cloud;
}

namespace {

struct CellKey {
  int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  size_t operator()(const CellKey& k) const {
    uint64_t h = static_cast<uint64_t>(k.x) * 0x9e3779b97f4a7c15ULL;
    h ^= static_cast<uint64_t>(k.y) * 0xc2b2ae3d27d4eb4fULL + (h << 6) + (h >> 2);
    h ^= static_cast<uint64_t>(k.z) * 0x165667b19e3779f9ULL + (h << 6) + (h >> 2);
    return static_cast<size_t>(h);
  }
};

class VoxelGrid {
 public:
  VoxelGrid(const PointCloud& cloud, double cell) : cloud_(cloud), cell_(cell) {
    for (size_t i = 0; i < cloud.size(); ++i) cells_[key(cloud.points[i].position)].push_back(i);
  }

  bool any_within(const Vec3& q, double tau) const {
    const CellKey k = key(q);
    const double t2 = tau * tau;
    for (int64_t dx = -1; dx <= 1; ++dx) {
      for (int64_t dy = -1; dy <= 1; ++dy) {
        for (int64_t dz = -1; dz <= 1; ++dz) {
          const auto it = cells_.find({k.x + dx, k.y + dy, k.z + dz});
          if (it == cells_.end()) continue;
          for (size_t i : it->second) {
            if ((cloud_.points[i].position - q).squaredNorm() <= t2) return true;
          }
        }
      }
    }
    return false;
  }

 private:
  CellKey key(const Vec3& p) const {
    return {static_cast<int64_t>(std::floor(p.x() / cell_)), static_cast<int64_t>(std::floor(p.y() / cell_)),
            static_cast<int64_t>(std::floor(p.z() / cell_))};
  }
  const PointCloud& cloud_;
  double cell_;
  std::unordered_map<CellKey, std::vector<size_t>, CellHash> cells_;
};

double share_within(const PointCloud& from, const VoxelGrid& to, double tau) {
  size_t hit = 0;
  for (const PointRecord& p : from.points) hit += to.any_within(p.position, tau) ? 1 : 0;
  return 100.0 * static_cast<double>(hit) / static_cast<double>(from.size());
}

}  // namespace

CloudMetrics evaluate_cloud(const PointCloud& est, const PointCloud& gt, double tau) {
  if (!(tau > 0)) throw DomainError("evaluate_cloud: tau must be positive");
  if (gt.empty()) throw InputError("evaluate_cloud: ground-truth cloud is empty, metrics undefined");
  CloudMetrics m;
  m.tau = tau;
  if (est.empty()) return m;
  const VoxelGrid gt_grid(gt, tau), est_grid(est, tau);
  m.accuracy = share_within(est, gt_grid, tau);
  m.completeness = share_within(gt, est_grid, tau);
  m.f1 = m.accuracy + m.completeness > 0 ? 2.0 * m.accuracy * m.completeness / (m.accuracy + m.completeness) : 0.0;
  return m;
}

DepthMetrics evaluate_depth(const DepthNormalMap& est, std::span<const float> gt, double rel_threshold,
                            std::span<const uint8_t> region) {
  if (gt.size() != est.size()) throw DimensionError("evaluate_depth: GT size differs from estimate");
  if (!region.empty() && region.size() != est.size()) throw DimensionError("evaluate_depth: region size differs");
  DepthMetrics m;
  size_t within = 0;
  double err = 0;
  for (size_t i = 0; i < gt.size(); ++i) {
    if (!(gt[i] > 0) || (!region.empty() && !region[i])) continue;
    const double e = std::abs(static_cast<double>(est.depths()[i]) - gt[i]) / gt[i];
    ++m.count;
    within += e <= rel_threshold ? 1 : 0;
    err += e;
  }
  if (m.count == 0) throw InputError("evaluate_depth: no valid ground-truth pixels");
  m.fraction_within = static_cast<double>(within) / m.count;
  m.mean_abs_rel_error = err / m.count;
  return m;
}

}  // namespace planemvs
