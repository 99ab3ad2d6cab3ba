#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "planemvs/camera.h"
#include "planemvs/depth_map.h"
#include "planemvs/image.h"

namespace planemvs {

struct View {
  ImageBuffer image;
  CameraModel camera;
  std::optional<SegmentMask> mask;
};

struct SceneBundle {
  std::vector<View> views;
  int reference_index = 0;
  // Source views for every view, indexed like `views` (from pair.txt).
  std::vector<std::vector<int>> neighbors;

  const std::vector<int>& neighbor_indices() const { return neighbors.at(reference_index); }
  // Throws InputError when indices or dimensions are inconsistent.
  void validate() const;
};

struct PointRecord {
  Vec3 position;
  Vec3 normal;
  std::array<uint8_t, 3> color{0, 0, 0};
};

struct PointCloud {
  std::vector<PointRecord> points;
  size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// Directory layout: images/<id>.{pgm,ppm,png}, cams.txt, pair.txt and an
// optional masks/<id>.{pgm,png} (16-bit labels). Ids are 0..N-1.
// Zero-padded view file stem ("0003").
std::string view_stem(int id);

SceneBundle load_scene(const std::filesystem::path& dir);
void save_scene(const SceneBundle& scene, const std::filesystem::path& dir, int image_bits = 8);

std::vector<CameraModel> read_cameras(const std::filesystem::path& path);
void write_cameras(const std::vector<CameraModel>& cams, const std::filesystem::path& path);
std::vector<std::vector<int>> read_pairs(const std::filesystem::path& path, int num_views,
                                         int* reference_index = nullptr);
void write_pairs(const std::vector<std::vector<int>>& neighbors, int reference_index,
                 const std::filesystem::path& path);

// PGM/PPM (8 or 16 bit) and PNG readers; PGM/PPM writer.
ImageBuffer read_image(const std::filesystem::path& path);
void write_image(const ImageBuffer& image, const std::filesystem::path& path, int bits = 8);
SegmentMask read_mask(const std::filesystem::path& path);
void write_mask(const SegmentMask& mask, const std::filesystem::path& path);
// 8-bit label image (e.g. per-pixel hypothesis source).
void write_label_image(const std::vector<uint8_t>& labels, int width, int height,
                       const std::filesystem::path& path);

// Binary little-endian map files: "DMB1" depths, "NMB1" xyz normals,
// "CMB1" costs (u32 width, u32 height, then f32 data), plus "RMB1" u8
// reliability flags. write_depth_map writes all four next to `base`
// (<base>.dmb/.nmb/.cmb/.rmb).
void write_depth_map(const DepthNormalMap& map, const std::filesystem::path& base);
DepthNormalMap read_depth_map(const std::filesystem::path& base);

struct ScalarMap {
  int width = 0;
  int height = 0;
  std::vector<float> values;  // channels * width * height
};
void write_map_file(const std::filesystem::path& path, const char magic[4], int width, int height,
                    const std::vector<float>& values, int channels);
ScalarMap read_map_file(const std::filesystem::path& path, const char magic[4], int channels);

// Binary little-endian PLY with float x y z nx ny nz and uchar red green blue.
// Throws DomainError naming the first non-finite point.
void write_ply(const PointCloud& cloud, const std::filesystem::path& path);
PointCloud read_ply(const std::filesystem::path& path);

}  // namespace planemvs
