#include "planemvs/image.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "planemvs/errors.h"

namespace planemvs {

ImageBuffer::ImageBuffer(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels),
      data_(static_cast<size_t>(width) * height * channels, 0.0f) {
  validate();
}

ImageBuffer::ImageBuffer(int width, int height, int channels, std::vector<float> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  validate();
}

void ImageBuffer::validate() const {
  if (width_ <= 0 || height_ <= 0) throw DimensionError("image dimensions must be positive");
  if (channels_ != 1 && channels_ != 3) throw DimensionError("image must have 1 or 3 channels");
  if (data_.size() != static_cast<size_t>(width_) * height_ * channels_) {
    throw DimensionError("image data length " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(width_) + "x" +
                         std::to_string(height_) + "x" + std::to_string(channels_));
  }
  for (size_t i = 0; i < data_.size(); ++i) {
    const float v = data_[i];
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
      throw DomainError("image value out of [0,1] at index " + std::to_string(i));
    }
  }
}

ImageBuffer ImageBuffer::to_gray() const {
  if (channels_ == 1) return *this;
  std::vector<float> gray(static_cast<size_t>(width_) * height_);
  for (size_t i = 0; i < gray.size(); ++i) {
    const float* p = &data_[i * 3];
    gray[i] = std::clamp(0.299f * p[0] + 0.587f * p[1] + 0.114f * p[2], 0.0f, 1.0f);
  }
  return ImageBuffer(width_, height_, 1, std::move(gray));
}

float ImageBuffer::bilinear(double x, double y) const {
  const int x0 = std::min(static_cast<int>(x), width_ - 2 < 0 ? 0 : width_ - 2);
  const int y0 = std::min(static_cast<int>(y), height_ - 2 < 0 ? 0 : height_ - 2);
  const float fx = static_cast<float>(x - x0);
  const float fy = static_cast<float>(y - y0);
  const int x1 = std::min(x0 + 1, width_ - 1);
  const int y1 = std::min(y0 + 1, height_ - 1);
  const float* row0 = &data_[static_cast<size_t>(y0) * width_ * channels_];
  const float* row1 = &data_[static_cast<size_t>(y1) * width_ * channels_];
  const float top = row0[x0 * channels_] + fx * (row0[x1 * channels_] - row0[x0 * channels_]);
  const float bot = row1[x0 * channels_] + fx * (row1[x1 * channels_] - row1[x0 * channels_]);
  return top + fy * (bot - top);
}

SegmentMask::SegmentMask(int width, int height, std::vector<uint16_t> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
  if (width_ <= 0 || height_ <= 0) throw DimensionError("mask dimensions must be positive");
  if (labels_.size() != static_cast<size_t>(width_) * height_) {
    throw DimensionError("mask label count does not match dimensions");
  }
  std::map<uint16_t, std::vector<PixelCoord>> regions;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const uint16_t k = label(x, y);
      if (k != 0) regions[k].push_back({x, y});
    }
  }
  for (auto& [k, px] : regions) {
    region_ids_.push_back(k);
    region_index_.push_back(std::move(px));
  }
}

const std::vector<PixelCoord>& SegmentMask::members(uint16_t k) const {
  static const std::vector<PixelCoord> kEmpty;
  const auto it = std::lower_bound(region_ids_.begin(), region_ids_.end(), k);
  if (it == region_ids_.end() || *it != k) return kEmpty;
  return region_index_[static_cast<size_t>(it - region_ids_.begin())];
}

}  // namespace planemvs
