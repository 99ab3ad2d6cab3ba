#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "planemvs/depth_map.h"
#include "planemvs/geometry.h"
#include "planemvs/image.h"
#include "planemvs/scene_io.h"

namespace planemvs {

struct PatchMatchConfig {
  int patch_radius = 5;
  // Samples sit at multiples of patch_step within the radius: 5x5 = 25
  // samples for radius 5, step 2.
  int patch_step = 2;
  double ncc_sigma_spatial = 5.0;
  double ncc_sigma_color = 0.1;
  int iterations = 6;
  // Initial relative scale of the depth/normal perturbations; halves every iteration.
  double perturbation_fraction = 0.2;
  // w_j = exp(-m_j_best / view_weight_scale).
  double view_weight_scale = 0.3;
  uint64_t rng_seed = 0;
  // Parallelism bound; never changes results.
  int workers = 1;

  void validate() const;
};

// Per-source-view photometric costs m_j in [0, 2] with view selection weights w_j >= 0.
struct PhotometricCostTerms {
  std::vector<double> m;
  std::vector<double> w;
};

struct MultiViewCost {
  double value = kCostMax;
  bool all_occluded = true;
};

// Cost_ph = sum_j w_j m_j / sum_j w_j; all weights zero -> cap, all_occluded.
MultiViewCost multi_view_cost(std::span<const double> m, std::span<const double> w);
inline MultiViewCost multi_view_cost(const PhotometricCostTerms& t) { return multi_view_cost(t.m, t.w); }

// Bilaterally weighted reference patch around an integer pixel. Samples that
// fall outside the reference image are dropped.
struct RefPatch {
  int x = 0, y = 0;
  std::vector<int> dx, dy;
  std::vector<double> value, weight;
  double weight_sum = 0;
  double mean = 0;
  double var = 0;  // weighted, unnormalized: sum w (v - mean)^2
  bool textured = false;
};

RefPatch make_ref_patch(const ImageBuffer& ref_gray, int x, int y, const PatchMatchConfig& cfg);

struct SourceView {
  std::shared_ptr<const ImageBuffer> image;  // gray
  CameraModel camera;
  ViewPairGeometry pair;
  int view_index = -1;
};

// Reference view plus its source views, grayscale.
struct MatchingContext {
  std::shared_ptr<const ImageBuffer> ref_image;
  CameraModel ref_camera;
  int ref_index = -1;
  std::vector<SourceView> sources;

  int width() const { return ref_image->width(); }
  int height() const { return ref_image->height(); }
};

// Grayscale copies of every view (shared by contexts).
std::vector<std::shared_ptr<const ImageBuffer>> gray_images(const SceneBundle& scene);
MatchingContext make_context(const SceneBundle& scene, int ref_index,
                             const std::vector<std::shared_ptr<const ImageBuffer>>& gray);

// m_j = 1 - NCC between the reference patch and its homography warp into the
// source; 2 when the warp leaves the source image or either patch is flat.
double photometric_cost(const RefPatch& patch, const CameraModel& ref_cam, const SourceView& src,
                        const PlaneHypothesis& hyp, const PatchMatchConfig& cfg);

// Per-view costs of one hypothesis at the patch's pixel.
std::vector<double> photometric_costs(const RefPatch& patch, const MatchingContext& ctx,
                                      const PlaneHypothesis& hyp, const PatchMatchConfig& cfg);

// Weights from the best per-view cost over a candidate set; views where every
// candidate hit the cap get weight 0.
std::vector<double> view_weights(std::span<const std::vector<double>> rows, const PatchMatchConfig& cfg);

// Uniform depths in [d_min, d_max] and camera-facing unit normals, keyed by
// (seed, x, y). Costs are set to the cap until evaluated.
DepthNormalMap random_init(const CameraModel& cam, int width, int height, uint64_t seed);

// Optional additive term evaluated for every candidate (the geometric pass).
using ExtraCost = std::function<double(int x, int y, const PlaneHypothesis& hyp)>;

// Map plus the objective each pixel's incumbent was accepted with. For plain
// PatchMatch objective == map cost; with an extra term the map keeps Cost_ph.
struct PatchMatchState {
  DepthNormalMap map;
  std::vector<float> objective;
};

class PatchMatchEngine {
 public:
  PatchMatchEngine(const MatchingContext& ctx, const PatchMatchConfig& cfg, ExtraCost extra = {});

  // Scores every pixel's incumbent from scratch.
  PatchMatchState evaluate(const DepthNormalMap& map) const;
  // One red/black checkerboard iteration; objective never increases.
  PatchMatchState iterate(const PatchMatchState& state, int iteration) const;

 private:
  void update_pixel(const PatchMatchState& snapshot, PatchMatchState& out, int x, int y,
                    int iteration) const;
  double score(const std::vector<double>& row, const std::vector<double>& w, int x, int y,
               const PlaneHypothesis& h, double* photometric) const;

  const MatchingContext& ctx_;
  PatchMatchConfig cfg_;
  ExtraCost extra_;
};

// Scores a freshly initialized map (costs in place).
DepthNormalMap evaluate_costs(const DepthNormalMap& map, const MatchingContext& ctx,
                              const PatchMatchConfig& cfg);

// One full propagation + refinement iteration (iteration index keys the RNG
// and the perturbation scale).
DepthNormalMap propagate_refine(const DepthNormalMap& map, const MatchingContext& ctx,
                                const PatchMatchConfig& cfg, int iteration = 0);

// random_init + evaluation + cfg.iterations iterations.
DepthNormalMap run_patchmatch(const MatchingContext& ctx, const PatchMatchConfig& cfg);

}  // namespace planemvs
