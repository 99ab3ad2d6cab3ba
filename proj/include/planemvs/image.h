#pragma once

#include <cstdint>
#include <vector>

namespace planemvs {

// Row-major intensity image with values in [0,1]; 1 (gray) or 3 (RGB) channels.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height, int channels);
  ImageBuffer(int width, int height, int channels, std::vector<float> data);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  const std::vector<float>& data() const { return data_; }

  float at(int x, int y, int c = 0) const {
    return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }
  float& at(int x, int y, int c = 0) {
    return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }

  // Luminance image (copy for gray input).
  ImageBuffer to_gray() const;

  // Bilinear sample of channel 0; caller guarantees 0 <= x <= w-1, 0 <= y <= h-1.
  float bilinear(double x, double y) const;

  bool contains(double x, double y) const {
    return x >= 0.0 && y >= 0.0 && x <= width_ - 1 && y <= height_ - 1;
  }

 private:
  void validate() const;

  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<float> data_;
};

struct PixelCoord {
  int x = 0;
  int y = 0;
  bool operator==(const PixelCoord&) const = default;
};

// Region labels: 0 = background, k > 0 = region k.
class SegmentMask {
 public:
  SegmentMask() = default;
  SegmentMask(int width, int height, std::vector<uint16_t> labels);

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<uint16_t>& labels() const { return labels_; }
  uint16_t label(int x, int y) const { return labels_[static_cast<size_t>(y) * width_ + x]; }

  // Region ids in ascending order, background excluded.
  const std::vector<uint16_t>& region_ids() const { return region_ids_; }
  // Member pixels of region k in raster order; empty if k is not present.
  const std::vector<PixelCoord>& members(uint16_t k) const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<uint16_t> labels_;
  std::vector<uint16_t> region_ids_;
  std::vector<std::vector<PixelCoord>> region_index_;  // indexed by position in region_ids_
};

}  // namespace planemvs
