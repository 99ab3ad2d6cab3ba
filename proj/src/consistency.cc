#include "planemvs/consistency.h"

#include <algorithm>
#include <cmath>

#include "planemvs/errors.h"

namespace planemvs {

void ConsistencyParams::validate() const {
  if (!(tau_geo > 0)) throw DomainError("tau_geo must be positive");
  if (!(omega_geo > 0)) throw DomainError("omega_geo must be positive");
  if (!(alpha_geo >= 0)) throw DomainError("alpha_geo must be non-negative");
}

std::optional<double> bilinear_depth(const DepthNormalMap& map, const Vec2& q) {
  if (!(q.x() >= 0 && q.y() >= 0 && q.x() <= map.width() - 1 && q.y() <= map.height() - 1)) return std::nullopt;
  const int x0 = std::min(static_cast<int>(q.x()), map.width() - 2);
  const int y0 = std::min(static_cast<int>(q.y()), map.height() - 2);
  const double fx = q.x() - x0, fy = q.y() - y0;
  const double d00 = map.depth(x0, y0), d10 = map.depth(x0 + 1, y0);
  const double d01 = map.depth(x0, y0 + 1), d11 = map.depth(x0 + 1, y0 + 1);
  if (!(d00 > 0 && d10 > 0 && d01 > 0 && d11 > 0)) return std::nullopt;
  return (d00 * (1 - fx) + d10 * fx) * (1 - fy) + (d01 * (1 - fx) + d11 * fx) * fy;
}

double reprojection_cost(const CameraModel& ref, const DepthView& src, const Vec2& pixel, double depth_ref,
                         const ConsistencyParams& params) {
  if (!(depth_ref > 0)) throw DomainError("reprojection_cost: depth must be positive");
  const auto fwd = project(*src.camera, back_project(ref, pixel, depth_ref));
  if (!fwd) return params.tau_geo;
  const auto d_src = bilinear_depth(*src.map, fwd->pixel);
  if (!d_src) return params.tau_geo;
  const auto back = project(ref, back_project(*src.camera, fwd->pixel, *d_src));
  if (!back) return params.tau_geo;
  return std::min((back->pixel - pixel).norm(), params.tau_geo);
}

double adaptive_threshold(const EpipolarGeoContext& ctx) {
  if (ctx.dist_p > kOnLineTolerance) return ctx.dist_p;
  const double a = ctx.line.a, b = ctx.line.b, c = ctx.line.c;
  if (std::abs(a) < 1e-12 || std::abs(b) < 1e-12) return ctx.dist_H;
  const double ca = c / a, cb = c / b;
  const double x1 = ctx.p.x(), y1 = ctx.p.y(), x2 = ctx.p_H.x(), y2 = ctx.p_H.y();
  const double num = ca * (x2 - x1) - ca * (y2 - y1);
  return std::abs(num / std::sqrt(ca * ca + cb * cb + ctx.dist_H) * ctx.dist_H);
}

std::optional<EpipolarGeoContext> epipolar_context(const CameraModel& ref, const DepthView& src, const Vec2& p,
                                                   const PlaneHypothesis& hyp) {
  const CameraModel& sc = *src.camera;
  const DepthNormalMap& sm = *src.map;
  const auto fwd = project(sc, back_project(ref, p, hyp.depth));
  if (!fwd) return std::nullopt;
  const double qx = std::round(fwd->pixel.x()), qy = std::round(fwd->pixel.y());
  if (!(qx >= 0 && qy >= 0 && qx <= sm.width() - 1 && qy <= sm.height() - 1)) return std::nullopt;
  const int ix = static_cast<int>(qx), iy = static_cast<int>(qy);
  const double d_q = sm.depth(ix, iy);
  if (!(d_q > 0)) return std::nullopt;
  EpipolarGeoContext ctx;
  ctx.p = p;
  ctx.q = Vec2(qx, qy);
  const auto back = project(ref, back_project(sc, ctx.q, d_q));
  if (!back) return std::nullopt;
  ctx.p_H = back->pixel;
  ctx.line = epipolar_line(ref, sc, ctx.q);
  ctx.dist_p = ctx.line.distance(p);
  ctx.dist_H = (ctx.p_H - p).norm();
  ctx.dist_sta = adaptive_threshold(ctx);
  ctx.n_q = ref.R() * (sc.R().transpose() * sm.normal(ix, iy));
  return ctx;
}

double epipolar_geo_cost(const EpipolarGeoContext& ctx, const Vec3& n_p, const Vec3& n_q,
                         const ConsistencyParams& params) {
  const double v = normal_similarity(n_p, n_q);
  if (ctx.dist_sta == 0.0) return ctx.dist_H == 0.0 ? std::clamp(1.0 - v, 0.0, 2.0) : 2.0;
  if (ctx.dist_H < params.omega_geo * ctx.dist_sta) {
    return std::clamp(ctx.dist_H / ctx.dist_sta + (1.0 - v), 0.0, 2.0);
  }
  return 2.0;
}

double multi_view_epipolar_cost(const CameraModel& ref, std::span<const DepthView> sources, const Vec2& p,
                                const PlaneHypothesis& hyp, const ConsistencyParams& params) {
  double sum = 0;
  int used = 0;
  for (const DepthView& s : sources) {
    const auto ctx = epipolar_context(ref, s, p, hyp);
    if (!ctx) continue;
    sum += epipolar_geo_cost(*ctx, hyp.normal, params);
    ++used;
  }
  return used > 0 ? sum / used : 2.0;
}

}  // namespace planemvs
