#include "planemvs/synth.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "planemvs/config.h"
#include "planemvs/errors.h"
#include "planemvs/rng.h"

namespace fs = std::filesystem;

namespace planemvs {

namespace {

constexpr uint64_t kTextureStream = 0x2001;
constexpr uint64_t kSensorStream = 0x2002;

double lattice(uint64_t seed, int plane, long long i, long long j) {
  CounterRng rng{seed, kTextureStream, uint64_t(plane), uint64_t(i), uint64_t(j)};
  return rng.uniform();
}

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

double value_noise(uint64_t seed, int plane, double u, double v) {
  const double fu = std::floor(u), fv = std::floor(v);
  const long long i = static_cast<long long>(fu), j = static_cast<long long>(fv);
  const double a = smooth(u - fu), b = smooth(v - fv);
  const double v00 = lattice(seed, plane, i, j), v10 = lattice(seed, plane, i + 1, j);
  const double v01 = lattice(seed, plane, i, j + 1), v11 = lattice(seed, plane, i + 1, j + 1);
  return (v00 * (1 - a) + v10 * a) * (1 - b) + (v01 * (1 - a) + v11 * a) * b;
}

struct PlaneFrame {
  Vec3 n, u, v;
};

PlaneFrame frame_of(const PlaneSpec& p) {
  const Vec3 n = p.normal.normalized();
  const Vec3 u = (p.u_axis - p.u_axis.dot(n) * n).normalized();
  return {n, u, n.cross(u)};
}

double texture_at(const PlaneSpec& p, int idx, uint64_t seed, double u, double v) {
  switch (p.texture) {
    case TextureKind::kNoise: {
      const double s = p.scale;
      const double n = 0.65 * value_noise(seed, idx, u / s, v / s) +
                       0.35 * value_noise(seed, idx + 1000, 2.0 * u / s, 2.0 * v / s);
      return std::clamp(0.5 + p.contrast * (n - 0.5) * 1.8, 0.0, 1.0);
    }
    case TextureKind::kChecker: {
      const long long a = static_cast<long long>(std::floor(u / p.scale));
      const long long b = static_cast<long long>(std::floor(v / p.scale));
      return ((a + b) % 2 == 0) ? 0.5 + 0.4 * p.contrast : 0.5 - 0.4 * p.contrast;
    }
    case TextureKind::kFlat:
      return std::clamp(p.base + p.ramp_u * u / p.half_u + p.ramp_v * v / p.half_v, 0.0, 1.0);
  }
  return 0.0;
}

struct Hit {
  int plane = -1;
  double depth = 0;
  double u = 0, v = 0;
};

Hit trace(const SyntheticSceneSpec& spec, const std::vector<PlaneFrame>& frames, const CameraModel& cam,
          const Vec3& center, double x, double y) {
  const Vec3 dir = cam.R().transpose() * cam.ray({x, y});  // camera-frame z == 1
  Hit best;
  for (size_t k = 0; k < spec.planes.size(); ++k) {
    const PlaneSpec& p = spec.planes[k];
    const PlaneFrame& f = frames[k];
    const double denom = f.n.dot(dir);
    if (!(denom < -1e-12)) continue;  // one-sided: only front faces
    const double t = f.n.dot(p.center - center) / denom;
    if (!(t > 0)) continue;
    const Vec3 X = center + t * dir;
    const double u = f.u.dot(X - p.center), v = f.v.dot(X - p.center);
    if (std::abs(u) > p.half_u || std::abs(v) > p.half_v) continue;
    if (best.plane < 0 || t < best.depth) best = {static_cast<int>(k), t, u, v};
  }
  return best;
}

Mat3 look_at_rotation(const Vec3& eye, const Vec3& target) {
  const Vec3 f = (target - eye).normalized();
  const Vec3 up(0, 1, 0);
  Vec3 down = -(up - up.dot(f) * f);
  down.normalize();
  const Vec3 right = down.cross(f);
  Mat3 R;
  R.row(0) = right;
  R.row(1) = down;
  R.row(2) = f;
  return R;
}

const char* texture_name(TextureKind t) {
  switch (t) {
    case TextureKind::kNoise: return "noise";
    case TextureKind::kChecker: return "checker";
    case TextureKind::kFlat: return "flat";
  }
  return "noise";
}

}  // namespace

SyntheticScene synth_scene(const SyntheticSceneSpec& spec) {
  if (spec.camera_count < 2) throw InputError("synthetic scene needs at least 2 cameras");
  if (spec.width < 2 || spec.height < 2 || !(spec.focal > 0)) throw InputError("bad image geometry");
  if (spec.planes.empty()) throw InputError("synthetic scene has no planes");
  std::vector<PlaneFrame> frames;
  for (const PlaneSpec& p : spec.planes) frames.push_back(frame_of(p));

  SyntheticScene out;
  const int n = spec.camera_count;
  const double step = n > 1 ? spec.ring_span_deg / (n - 1) : 0.0;
  // View 0 sits in the middle of the arc, then alternate outwards.
  std::vector<double> angles{0.0};
  for (int k = 1; static_cast<int>(angles.size()) < n; ++k) {
    const double a = std::ceil(k / 2.0) * step * (k % 2 == 1 ? -1.0 : 1.0);
    angles.push_back(a * std::numbers::pi / 180.0);
  }
  for (int i = 0; i < n; ++i) {
    const Vec3 eye = spec.look_at + Vec3(spec.ring_radius * std::sin(angles[i]), spec.ring_height,
                                         spec.ring_radius * std::cos(angles[i]));
    for (size_t k = 0; k < spec.planes.size(); ++k) {
      if (frames[k].n.dot(eye - spec.planes[k].center) <= 0) {
        throw InputError("camera " + std::to_string(i) + " lies behind plane " + std::to_string(k));
      }
    }
    const Mat3 R = look_at_rotation(eye, spec.look_at);
    const CameraModel cam(spec.focal, spec.focal, (spec.width - 1) / 2.0, (spec.height - 1) / 2.0, R,
                          -R * eye, spec.d_min, spec.d_max);

    std::vector<float> pixels(static_cast<size_t>(spec.width) * spec.height);
    std::vector<float> depth(pixels.size(), 0.0f);
    std::vector<int16_t> ids(pixels.size(), -1);
    std::vector<uint16_t> labels(pixels.size(), 0);
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        const size_t idx = static_cast<size_t>(y) * spec.width + x;
        const Hit h = trace(spec, frames, cam, eye, x, y);
        if (h.plane >= 0) {
          depth[idx] = static_cast<float>(h.depth);
          ids[idx] = static_cast<int16_t>(h.plane);
          if (spec.planes[h.plane].texture == TextureKind::kFlat) labels[idx] = static_cast<uint16_t>(h.plane + 1);
        }
        // 2x2 supersampled shading; geometry stays at the pixel center.
        double acc = 0;
        for (int s = 0; s < 4; ++s) {
          const Hit hs = trace(spec, frames, cam, eye, x - 0.25 + 0.5 * (s % 2), y - 0.25 + 0.5 * (s / 2));
          acc += hs.plane >= 0 ? texture_at(spec.planes[hs.plane], hs.plane, spec.seed, hs.u, hs.v) : spec.background;
        }
        double value = acc / 4.0;
        if (spec.noise_sigma > 0) {
          CounterRng rng{spec.seed, kSensorStream, uint64_t(i), uint64_t(x), uint64_t(y)};
          value += spec.noise_sigma * rng.normal();
        }
        pixels[idx] = static_cast<float>(std::clamp(value, 0.0, 1.0));
      }
    }
    View v{ImageBuffer(spec.width, spec.height, 1, std::move(pixels)), cam, SegmentMask(spec.width, spec.height, labels)};
    out.gt_masks.push_back(*v.mask);
    out.bundle.views.push_back(std::move(v));
    out.gt_depth.push_back(std::move(depth));
    out.plane_ids.push_back(std::move(ids));
  }
  out.bundle.reference_index = 0;
  out.bundle.neighbors.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j != i) out.bundle.neighbors[i].push_back(j);
    }
  }
  out.bundle.validate();

  size_t flat = 0;
  for (uint16_t l : out.gt_masks[0].labels()) flat += l != 0 ? 1 : 0;
  out.textureless_fraction = static_cast<double>(flat) / out.gt_masks[0].labels().size();
  if (spec.textureless_fraction > 0 && out.textureless_fraction < spec.textureless_fraction) {
    throw InputError("textureless share " + std::to_string(out.textureless_fraction) + " below requested " +
                     std::to_string(spec.textureless_fraction));
  }

  for (int i = 0; i < n; ++i) {
    const CameraModel& cam = out.bundle.views[i].camera;
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        const size_t idx = static_cast<size_t>(y) * spec.width + x;
        if (out.plane_ids[i][idx] < 0) continue;
        PointRecord p;
        p.position = back_project(cam, {double(x), double(y)}, out.gt_depth[i][idx]);
        p.normal = frames[out.plane_ids[i][idx]].n;
        const uint8_t g = static_cast<uint8_t>(std::lround(out.bundle.views[i].image.at(x, y) * 255.0f));
        p.color = {g, g, g};
        out.gt_cloud.points.push_back(p);
      }
    }
  }
  return out;
}

SyntheticSceneSpec floor_wall_spec(uint64_t seed) {
  SyntheticSceneSpec s;
  s.seed = seed;
  PlaneSpec floor;
  floor.texture = TextureKind::kNoise;
  floor.center = Vec3(0, 0, 3.0);
  floor.normal = Vec3(0, 1, 0);
  floor.u_axis = Vec3(1, 0, 0);
  floor.half_u = 8;
  floor.half_v = 3.0;
  floor.scale = 0.04;
  PlaneSpec wall;
  wall.texture = TextureKind::kFlat;
  wall.center = Vec3(0, 3.0, 0);
  wall.normal = Vec3(0, 0, 1);
  wall.u_axis = Vec3(1, 0, 0);
  wall.half_u = 8;
  wall.half_v = 3.0;
  wall.base = 0.55;
  wall.ramp_u = 0.09;
  wall.ramp_v = 0.03;
  s.planes = {floor, wall};
  s.ring_height = 1.5;
  s.look_at = Vec3(0, 0.4, 0);
  s.noise_sigma = 0;
  s.textureless_fraction = 0.3;
  return s;
}

SyntheticSceneSpec parse_scene_spec(const std::string& text, const std::string& origin) {
  SyntheticSceneSpec s;
  s.planes.clear();
  for (const KeyValue& kv : parse_key_values(text, origin)) {
    if (kv.key == "width") s.width = static_cast<int>(to_int(kv, origin));
    else if (kv.key == "height") s.height = static_cast<int>(to_int(kv, origin));
    else if (kv.key == "focal") s.focal = to_double(kv, origin);
    else if (kv.key == "cameras") s.camera_count = static_cast<int>(to_int(kv, origin));
    else if (kv.key == "ring_radius") s.ring_radius = to_double(kv, origin);
    else if (kv.key == "ring_height") s.ring_height = to_double(kv, origin);
    else if (kv.key == "ring_span_deg") s.ring_span_deg = to_double(kv, origin);
    else if (kv.key == "look_at") {
      const auto v = to_doubles(kv, origin, 3);
      s.look_at = Vec3(v[0], v[1], v[2]);
    } else if (kv.key == "d_min") s.d_min = to_double(kv, origin);
    else if (kv.key == "d_max") s.d_max = to_double(kv, origin);
    else if (kv.key == "noise_sigma") s.noise_sigma = to_double(kv, origin);
    else if (kv.key == "background") s.background = to_double(kv, origin);
    else if (kv.key == "textureless_fraction") s.textureless_fraction = to_double(kv, origin);
    else if (kv.key == "seed") s.seed = static_cast<uint64_t>(to_int(kv, origin));
    else if (kv.key == "plane") {
      // plane = <kind> cx cy cz nx ny nz ux uy uz half_u half_v [params...]
      std::istringstream ss(kv.value);
      std::string kind;
      ss >> kind;
      PlaneSpec p;
      if (kind == "noise") p.texture = TextureKind::kNoise;
      else if (kind == "checker") p.texture = TextureKind::kChecker;
      else if (kind == "flat") p.texture = TextureKind::kFlat;
      else throw ParseError(origin, kv.line, "unknown texture kind '" + kind + "'");
      std::string rest;
      std::getline(ss, rest);
      const auto v = to_doubles({kv.key, rest, kv.line}, origin);
      const size_t extra = p.texture == TextureKind::kFlat ? 3 : 2;
      if (v.size() != 11 && v.size() != 11 + extra) {
        throw ParseError(origin, kv.line, "plane: expected 11 geometry numbers plus " + std::to_string(extra) + " optional texture parameters");
      }
      p.center = Vec3(v[0], v[1], v[2]);
      p.normal = Vec3(v[3], v[4], v[5]);
      p.u_axis = Vec3(v[6], v[7], v[8]);
      p.half_u = v[9];
      p.half_v = v[10];
      if (v.size() > 11) {
        if (p.texture == TextureKind::kFlat) {
          p.base = v[11];
          p.ramp_u = v[12];
          p.ramp_v = v[13];
        } else {
          p.scale = v[11];
          p.contrast = v[12];
        }
      }
      if (!(p.normal.norm() > 0) || !(p.half_u > 0) || !(p.half_v > 0)) {
        throw ParseError(origin, kv.line, "plane: degenerate geometry");
      }
      s.planes.push_back(p);
    } else {
      throw ParseError(origin, kv.line, "unknown key '" + kv.key + "'");
    }
  }
  return s;
}

SyntheticSceneSpec read_scene_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene_spec(ss.str(), path.string());
}

std::string format_scene_spec(const SyntheticSceneSpec& s) {
  std::ostringstream o;
  o << std::setprecision(17);
  o << "width = " << s.width << "\nheight = " << s.height << "\nfocal = " << s.focal
    << "\ncameras = " << s.camera_count << "\nring_radius = " << s.ring_radius
    << "\nring_height = " << s.ring_height << "\nring_span_deg = " << s.ring_span_deg
    << "\nlook_at = " << s.look_at.x() << " " << s.look_at.y() << " " << s.look_at.z()
    << "\nd_min = " << s.d_min << "\nd_max = " << s.d_max << "\nnoise_sigma = " << s.noise_sigma
    << "\nbackground = " << s.background << "\ntextureless_fraction = " << s.textureless_fraction
    << "\nseed = " << s.seed << "\n";
  for (const PlaneSpec& p : s.planes) {
    o << "plane = " << texture_name(p.texture);
    for (const Vec3* v : {&p.center, &p.normal, &p.u_axis}) o << " " << v->x() << " " << v->y() << " " << v->z();
    o << " " << p.half_u << " " << p.half_v;
    if (p.texture == TextureKind::kFlat) o << " " << p.base << " " << p.ramp_u << " " << p.ramp_v;
    else o << " " << p.scale << " " << p.contrast;
    o << "\n";
  }
  return o.str();
}

void save_synthetic(const SyntheticScene& scene, const SyntheticSceneSpec& spec, const fs::path& dir) {
  save_scene(scene.bundle, dir);
  const int w = scene.bundle.views[0].image.width();
  const int h = scene.bundle.views[0].image.height();
  for (size_t i = 0; i < scene.gt_depth.size(); ++i) {
    write_map_file(dir / "gt" / (view_stem(static_cast<int>(i)) + ".dmb"), "DMB1", w, h, scene.gt_depth[i], 1);
  }
  write_ply(scene.gt_cloud, dir / "gt" / "cloud.ply");
  std::ofstream(dir / "scene.txt") << format_scene_spec(spec);
}

}  // namespace planemvs
