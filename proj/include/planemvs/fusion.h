#pragma once

#include <span>
#include <vector>

#include "planemvs/depth_map.h"
#include "planemvs/image.h"
#include "planemvs/scene_io.h"

namespace planemvs {

struct FusionParams {
  int min_consistent = 2;
  double tol_rel = 0.01;
  double tol_px = 2.0;
};

// Views are visited in order, pixels in raster order. A pixel yields a point
// when at least min_consistent other views agree; the point averages the
// pixel's own back-projection with the agreeing ones, and every pixel taking
// part is consumed. `images` (optional, one per view) supplies colors.
PointCloud fuse(std::span<const DepthNormalMap> maps, std::span<const CameraModel> cams, const FusionParams& params,
                std::span<const ImageBuffer> images = {});

struct CloudMetrics {
  double completeness = 0;  // % of GT points with an estimate within tau
  double accuracy = 0;      // % of estimated points within tau of GT
  double f1 = 0;
  double tau = 0;
};

// Throws InputError for an empty GT cloud and DomainError for tau <= 0.
CloudMetrics evaluate_cloud(const PointCloud& est, const PointCloud& gt, double tau);

struct DepthMetrics {
  double fraction_within = 0;
  double mean_abs_rel_error = 0;
  size_t count = 0;  // valid GT pixels considered
};

// Over pixels with GT depth > 0 (and region[i] != 0 when a region is given).
// Throws DimensionError on size mismatch and InputError when no pixel is valid.
DepthMetrics evaluate_depth(const DepthNormalMap& est, std::span<const float> gt_depth, double rel_threshold,
                            std::span<const uint8_t> region = {});

}  // namespace planemvs
