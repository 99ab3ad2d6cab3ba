#include "planemvs/scene_io.h"

#include <png.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "planemvs/errors.h"

namespace fs = std::filesystem;

namespace planemvs {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

// Lines with comments stripped, paired with 1-based line numbers.
std::vector<std::pair<int, std::string>> content_lines(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::vector<std::pair<int, std::string>> lines;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    lines.emplace_back(n, line);
  }
  return lines;
}

std::vector<double> parse_numbers(const fs::path& file, int line_no, const std::string& line,
                                  size_t expected, const char* what) {
  std::istringstream ss(line);
  std::vector<double> v;
  std::string tok;
  while (ss >> tok) {
    try {
      size_t used = 0;
      v.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ParseError(file.string(), line_no, std::string("bad number '") + tok + "' in " + what);
    }
  }
  if (v.size() != expected) {
    throw ParseError(file.string(), line_no, std::string(what) + ": expected " +
                                                 std::to_string(expected) + " numbers, got " +
                                                 std::to_string(v.size()));
  }
  return v;
}

std::map<int, fs::path> files_by_id(const fs::path& dir, std::initializer_list<const char*> exts) {
  std::map<int, fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    bool ok = false;
    for (const char* e : exts) ok = ok || ext == e;
    if (!ok) continue;
    const std::string stem = entry.path().stem().string();
    if (stem.empty() || stem.find_first_not_of("0123456789") != std::string::npos) continue;
    out[std::stoi(stem)] = entry.path();
  }
  return out;
}

struct RawRaster {
  int width = 0, height = 0, channels = 0, maxval = 0;
  std::vector<uint16_t> samples;
};

void skip_pnm_space(std::istream& in) {
  while (true) {
    int c = in.peek();
    if (c == '#') {
      std::string dummy;
      std::getline(in, dummy);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

RawRaster read_pnm(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  RawRaster r;
  if (magic == "P5") r.channels = 1;
  else if (magic == "P6") r.channels = 3;
  else throw FormatError(path.string() + ": not a binary PGM/PPM");
  skip_pnm_space(in);
  in >> r.width;
  skip_pnm_space(in);
  in >> r.height;
  skip_pnm_space(in);
  in >> r.maxval;
  if (!in || r.width <= 0 || r.height <= 0 || r.maxval <= 0 || r.maxval > 65535) {
    throw FormatError(path.string() + ": bad PNM header");
  }
  in.get();
  const size_t n = static_cast<size_t>(r.width) * r.height * r.channels;
  const int bytes = r.maxval > 255 ? 2 : 1;
  std::vector<unsigned char> buf(n * bytes);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<size_t>(in.gcount()) != buf.size()) throw LengthError(path.string() + ": truncated pixel data");
  r.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    r.samples[i] = bytes == 2 ? static_cast<uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1]) : buf[i];
  }
  return r;
}

RawRaster read_png(const fs::path& path) {
  FILE* fp = std::fopen(path.string().c_str(), "rb");
  if (!fp) throw InputError("cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    std::fclose(fp);
    throw InputError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw FormatError(path.string() + ": invalid PNG");
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);
  png_read_update_info(png, info);
  RawRaster r;
  r.width = static_cast<int>(png_get_image_width(png, info));
  r.height = static_cast<int>(png_get_image_height(png, info));
  r.channels = png_get_channels(png, info);
  const int out_depth = png_get_bit_depth(png, info);
  r.maxval = out_depth == 16 ? 65535 : 255;
  const size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<unsigned char> buf(rowbytes * r.height);
  std::vector<png_bytep> rows(r.height);
  for (int y = 0; y < r.height; ++y) rows[y] = buf.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  if (r.channels != 1 && r.channels != 3) throw FormatError(path.string() + ": unsupported PNG layout");
  const size_t n = static_cast<size_t>(r.width) * r.height * r.channels;
  r.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    if (out_depth == 16) {
      uint16_t v;
      std::memcpy(&v, &buf[(i / (r.width * r.channels)) * rowbytes + 2 * (i % (r.width * r.channels))], 2);
      r.samples[i] = v;
    } else {
      r.samples[i] = buf[(i / (r.width * r.channels)) * rowbytes + (i % (r.width * r.channels))];
    }
  }
  return r;
}

RawRaster read_raster(const fs::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".png") return read_png(path);
  return read_pnm(path);
}

void write_pnm(const fs::path& path, int width, int height, int channels, int maxval,
               const std::vector<uint16_t>& samples) {
  std::ofstream out = open_out(path);
  out << (channels == 1 ? "P5" : "P6") << "\n" << width << " " << height << "\n" << maxval << "\n";
  std::vector<unsigned char> buf;
  buf.reserve(samples.size() * 2);
  for (uint16_t s : samples) {
    if (maxval > 255) buf.push_back(static_cast<unsigned char>(s >> 8));
    buf.push_back(static_cast<unsigned char>(s & 0xff));
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

void SceneBundle::validate() const {
  const int n = static_cast<int>(views.size());
  if (n == 0) throw InputError("scene has no views");
  if (reference_index < 0 || reference_index >= n) throw InputError("reference index out of range");
  if (static_cast<int>(neighbors.size()) != n) throw InputError("neighbor lists do not cover every view");
  for (int i = 0; i < n; ++i) {
    for (int j : neighbors[i]) {
      if (j < 0 || j >= n || j == i) throw InputError("invalid neighbor " + std::to_string(j) + " for view " + std::to_string(i));
    }
    const View& v = views[i];
    if (v.mask && (v.mask->width() != v.image.width() || v.mask->height() != v.image.height())) {
      throw DimensionError("mask size does not match image for view " + std::to_string(i));
    }
  }
  if (neighbor_indices().empty()) throw InputError("reference view has no neighbors");
}

std::vector<CameraModel> read_cameras(const fs::path& path) {
  const auto lines = content_lines(path);
  if (lines.size() % 5 != 0) {
    const int bad = lines.empty() ? 1 : lines.back().first;
    throw ParseError(path.string(), bad, "incomplete camera block (expected 5 lines per view)");
  }
  std::vector<CameraModel> cams;
  for (size_t b = 0; b < lines.size(); b += 5) {
    const auto id = parse_numbers(path, lines[b].first, lines[b].second, 1, "view id");
    if (static_cast<int>(id[0]) != static_cast<int>(cams.size()) || id[0] != std::floor(id[0])) {
      throw ParseError(path.string(), lines[b].first, "view ids must be 0..N-1 in order");
    }
    const auto k = parse_numbers(path, lines[b + 1].first, lines[b + 1].second, 4, "intrinsics");
    const auto r = parse_numbers(path, lines[b + 2].first, lines[b + 2].second, 9, "rotation");
    const auto t = parse_numbers(path, lines[b + 3].first, lines[b + 3].second, 3, "translation");
    const auto d = parse_numbers(path, lines[b + 4].first, lines[b + 4].second, 2, "depth range");
    Mat3 R;
    R << r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8];
    try {
      cams.emplace_back(k[0], k[1], k[2], k[3], R, Vec3(t[0], t[1], t[2]), d[0], d[1]);
    } catch (const DomainError& e) {
      throw ParseError(path.string(), lines[b].first, e.what());
    }
  }
  return cams;
}

void write_cameras(const std::vector<CameraModel>& cams, const fs::path& path) {
  std::ofstream out = open_out(path);
  out << std::setprecision(17);
  for (size_t i = 0; i < cams.size(); ++i) {
    const CameraModel& c = cams[i];
    out << i << "\n" << c.fx() << " " << c.fy() << " " << c.cx() << " " << c.cy() << "\n";
    for (int r = 0; r < 3; ++r) {
      for (int col = 0; col < 3; ++col) out << c.R()(r, col) << ((r == 2 && col == 2) ? "\n" : " ");
    }
    out << c.t().x() << " " << c.t().y() << " " << c.t().z() << "\n";
    out << c.d_min() << " " << c.d_max() << "\n";
  }
}

std::vector<std::vector<int>> read_pairs(const fs::path& path, int num_views, int* reference_index) {
  const auto lines = content_lines(path);
  if (lines.empty()) throw ParseError(path.string(), 1, "empty pair file");
  const auto count = parse_numbers(path, lines[0].first, lines[0].second, 1, "reference count");
  const int nref = static_cast<int>(count[0]);
  if (nref < 1 || static_cast<int>(lines.size()) != nref + 1) {
    throw ParseError(path.string(), lines[0].first, "reference count does not match entries");
  }
  std::vector<std::vector<int>> neighbors(num_views);
  for (int e = 0; e < nref; ++e) {
    const auto& [line_no, text] = lines[e + 1];
    std::istringstream ss(text);
    std::vector<double> v;
    double x;
    while (ss >> x) v.push_back(x);
    if (!ss.eof() || v.size() < 2 || v.size() != static_cast<size_t>(v[1]) + 2) {
      throw ParseError(path.string(), line_no, "expected '<ref> <k> <n1> ... <nk>'");
    }
    const int ref = static_cast<int>(v[0]);
    if (ref < 0 || ref >= num_views) throw ParseError(path.string(), line_no, "reference id out of range");
    if (reference_index && e == 0) *reference_index = ref;
    for (size_t i = 2; i < v.size(); ++i) {
      const int n = static_cast<int>(v[i]);
      if (n < 0 || n >= num_views || n == ref) throw ParseError(path.string(), line_no, "neighbor id out of range");
      neighbors[ref].push_back(n);
    }
  }
  return neighbors;
}

void write_pairs(const std::vector<std::vector<int>>& neighbors, int reference_index, const fs::path& path) {
  std::ofstream out = open_out(path);
  int count = 0;
  for (const auto& n : neighbors) count += n.empty() ? 0 : 1;
  out << count << "\n";
  auto emit = [&](int i) {
    if (neighbors[i].empty()) return;
    out << i << " " << neighbors[i].size();
    for (int n : neighbors[i]) out << " " << n;
    out << "\n";
  };
  emit(reference_index);
  for (int i = 0; i < static_cast<int>(neighbors.size()); ++i) {
    if (i != reference_index) emit(i);
  }
}

ImageBuffer read_image(const fs::path& path) {
  const RawRaster r = read_raster(path);
  std::vector<float> data(r.samples.size());
  const float inv = 1.0f / static_cast<float>(r.maxval);
  for (size_t i = 0; i < data.size(); ++i) data[i] = std::min(1.0f, r.samples[i] * inv);
  return ImageBuffer(r.width, r.height, r.channels, std::move(data));
}

void write_image(const ImageBuffer& image, const fs::path& path, int bits) {
  const int maxval = bits == 16 ? 65535 : 255;
  std::vector<uint16_t> s(image.data().size());
  for (size_t i = 0; i < s.size(); ++i) {
    s[i] = static_cast<uint16_t>(std::lround(std::clamp(image.data()[i], 0.0f, 1.0f) * maxval));
  }
  write_pnm(path, image.width(), image.height(), image.channels(), maxval, s);
}

SegmentMask read_mask(const fs::path& path) {
  const RawRaster r = read_raster(path);
  if (r.channels != 1) throw FormatError(path.string() + ": mask must be single-channel");
  return SegmentMask(r.width, r.height, r.samples);
}

void write_mask(const SegmentMask& mask, const fs::path& path) {
  write_pnm(path, mask.width(), mask.height(), 1, 65535, mask.labels());
}

void write_label_image(const std::vector<uint8_t>& labels, int width, int height, const fs::path& path) {
  if (labels.size() != static_cast<size_t>(width) * height) throw DimensionError("label image size mismatch");
  write_pnm(path, width, height, 1, 255, std::vector<uint16_t>(labels.begin(), labels.end()));
}

std::string view_stem(int id) {
  std::ostringstream ss;
  ss << std::setw(4) << std::setfill('0') << id;
  return ss.str();
}

SceneBundle load_scene(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError("scene directory not found: " + dir.string());
  SceneBundle scene;
  const auto cams = read_cameras(dir / "cams.txt");
  const int n = static_cast<int>(cams.size());
  const auto images = files_by_id(dir / "images", {".pgm", ".ppm", ".png"});
  const auto masks = files_by_id(dir / "masks", {".pgm", ".png"});
  for (int i = 0; i < n; ++i) {
    const auto it = images.find(i);
    if (it == images.end()) throw InputError("missing image for view " + std::to_string(i));
    View v{read_image(it->second), cams[i], std::nullopt};
    if (const auto m = masks.find(i); m != masks.end()) {
      v.mask = read_mask(m->second);
      if (v.mask->width() != v.image.width() || v.mask->height() != v.image.height()) {
        throw DimensionError("mask " + m->second.string() + " does not match its image size");
      }
    }
    scene.views.push_back(std::move(v));
  }
  scene.neighbors = read_pairs(dir / "pair.txt", n, &scene.reference_index);
  scene.validate();
  return scene;
}

void save_scene(const SceneBundle& scene, const fs::path& dir, int image_bits) {
  fs::create_directories(dir / "images");
  std::vector<CameraModel> cams;
  for (size_t i = 0; i < scene.views.size(); ++i) {
    const View& v = scene.views[i];
    const char* ext = v.image.channels() == 3 ? ".ppm" : ".pgm";
    write_image(v.image, dir / "images" / (view_stem(static_cast<int>(i)) + ext), image_bits);
    if (v.mask) write_mask(*v.mask, dir / "masks" / (view_stem(static_cast<int>(i)) + ".pgm"));
    cams.push_back(v.camera);
  }
  write_cameras(cams, dir / "cams.txt");
  write_pairs(scene.neighbors, scene.reference_index, dir / "pair.txt");
}

void write_map_file(const fs::path& path, const char magic[4], int width, int height,
                    const std::vector<float>& values, int channels) {
  if (values.size() != static_cast<size_t>(width) * height * channels) {
    throw DimensionError("map data does not match its dimensions");
  }
  std::ofstream out = open_out(path);
  out.write(magic, 4);
  put<uint32_t>(out, static_cast<uint32_t>(width));
  put<uint32_t>(out, static_cast<uint32_t>(height));
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(float)));
}

ScalarMap read_map_file(const fs::path& path, const char magic[4], int channels) {
  std::ifstream in = open_in(path);
  char m[4];
  in.read(m, 4);
  if (in.gcount() != 4 || std::memcmp(m, magic, 4) != 0) {
    throw FormatError(path.string() + ": bad magic (expected " + std::string(magic, 4) + ")");
  }
  uint32_t w = 0, h = 0;
  in.read(reinterpret_cast<char*>(&w), 4);
  in.read(reinterpret_cast<char*>(&h), 4);
  if (!in) throw LengthError(path.string() + ": truncated header");
  ScalarMap map{static_cast<int>(w), static_cast<int>(h), {}};
  const size_t n = static_cast<size_t>(w) * h * channels;
  map.values.resize(n);
  in.read(reinterpret_cast<char*>(map.values.data()), static_cast<std::streamsize>(n * sizeof(float)));
  if (static_cast<size_t>(in.gcount()) != n * sizeof(float)) {
    throw LengthError(path.string() + ": header claims " + std::to_string(w) + "x" + std::to_string(h) +
                      " but data is " + std::to_string(in.gcount() / sizeof(float)) + " floats");
  }
  if (in.peek() != std::char_traits<char>::eof()) throw LengthError(path.string() + ": trailing data");
  return map;
}

namespace {
fs::path with_suffix(const fs::path& base, const char* ext) { return fs::path(base.string() + ext); }
}  // namespace

void write_depth_map(const DepthNormalMap& map, const fs::path& base) {
  write_map_file(with_suffix(base, ".dmb"), "DMB1", map.width(), map.height(), map.depths(), 1);
  write_map_file(with_suffix(base, ".nmb"), "NMB1", map.width(), map.height(), map.normals(), 3);
  write_map_file(with_suffix(base, ".cmb"), "CMB1", map.width(), map.height(), map.costs(), 1);
  std::ofstream out = open_out(with_suffix(base, ".rmb"));
  out.write("RMB1", 4);
  put<uint32_t>(out, static_cast<uint32_t>(map.width()));
  put<uint32_t>(out, static_cast<uint32_t>(map.height()));
  out.write(reinterpret_cast<const char*>(map.reliable_flags().data()),
            static_cast<std::streamsize>(map.reliable_flags().size()));
}

DepthNormalMap read_depth_map(const fs::path& base) {
  ScalarMap d = read_map_file(with_suffix(base, ".dmb"), "DMB1", 1);
  ScalarMap n = read_map_file(with_suffix(base, ".nmb"), "NMB1", 3);
  ScalarMap c = read_map_file(with_suffix(base, ".cmb"), "CMB1", 1);
  if (n.width != d.width || n.height != d.height || c.width != d.width || c.height != d.height) {
    throw DimensionError(base.string() + ": depth/normal/cost maps disagree in size");
  }
  DepthNormalMap map(d.width, d.height);
  map.depths() = std::move(d.values);
  map.normals() = std::move(n.values);
  map.costs() = std::move(c.values);
  const fs::path rpath = with_suffix(base, ".rmb");
  if (fs::exists(rpath)) {
    std::ifstream in = open_in(rpath);
    char m[4];
    uint32_t w = 0, h = 0;
    in.read(m, 4);
    if (in.gcount() != 4 || std::memcmp(m, "RMB1", 4) != 0) throw FormatError(rpath.string() + ": bad magic");
    in.read(reinterpret_cast<char*>(&w), 4);
    in.read(reinterpret_cast<char*>(&h), 4);
    if (static_cast<int>(w) != map.width() || static_cast<int>(h) != map.height()) {
      throw DimensionError(rpath.string() + ": size mismatch");
    }
    in.read(reinterpret_cast<char*>(map.reliable_flags().data()),
            static_cast<std::streamsize>(map.reliable_flags().size()));
    if (static_cast<size_t>(in.gcount()) != map.reliable_flags().size()) throw LengthError(rpath.string() + ": truncated");
  }
  return map;
}

void write_ply(const PointCloud& cloud, const fs::path& path) {
  for (size_t i = 0; i < cloud.points.size(); ++i) {
    const auto& p = cloud.points[i];
    if (!p.position.allFinite() || !p.normal.allFinite()) {
      throw DomainError("write_ply: non-finite coordinate at point " + std::to_string(i));
    }
  }
  std::ofstream out = open_out(path);
  out << "ply\nformat binary_little_endian 1.0\nelement vertex " << cloud.points.size()
      << "\nproperty float x\nproperty float y\nproperty float z\n"
         "property float nx\nproperty float ny\nproperty float nz\n"
         "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  for (const auto& p : cloud.points) {
    for (int k = 0; k < 3; ++k) put<float>(out, static_cast<float>(p.position[k]));
    for (int k = 0; k < 3; ++k) put<float>(out, static_cast<float>(p.normal[k]));
    out.write(reinterpret_cast<const char*>(p.color.data()), 3);
  }
}

PointCloud read_ply(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  size_t count = 0;
  bool binary = false;
  while (std::getline(in, line)) {
    if (line.rfind("format binary_little_endian", 0) == 0) binary = true;
    if (line.rfind("element vertex", 0) == 0) count = std::stoull(line.substr(15));
    if (line == "end_header") break;
  }
  if (!binary || line != "end_header") throw FormatError(path.string() + ": unsupported PLY");
  PointCloud cloud;
  cloud.points.resize(count);
  for (auto& p : cloud.points) {
    float f[6];
    in.read(reinterpret_cast<char*>(f), sizeof(f));
    in.read(reinterpret_cast<char*>(p.color.data()), 3);
    if (!in) throw LengthError(path.string() + ": truncated vertex data");
    p.position = Vec3(f[0], f[1], f[2]);
    p.normal = Vec3(f[3], f[4], f[5]);
  }
  return cloud;
}

}  // namespace planemvs
