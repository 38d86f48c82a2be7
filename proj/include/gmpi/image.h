// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cassert>
#include <span>
#include <vector>

namespace gmpi {

/// Dense row-major image with interleaved channels, stored in linear double
/// precision. Pixel (x, y) is the sample whose center sits at integer
/// coordinates (x, y).
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, double fill = 0.0)
      : width_(width),
        height_(height),
        channels_(channels),
        data_(static_cast<size_t>(width) * height * channels, fill) {
    assert(width >= 0 && height >= 0 && channels >= 0);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  size_t size() const { return data_.size(); }

  size_t index(int x, int y, int c = 0) const {
    return (static_cast<size_t>(y) * width_ + x) * channels_ + c;
  }

  double& operator()(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  double operator()(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  std::span<double> pixel(int x, int y) { return {data_.data() + index(x, y), static_cast<size_t>(channels_)}; }
  std::span<const double> pixel(int x, int y) const {
    return {data_.data() + index(x, y), static_cast<size_t>(channels_)};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

}  // namespace gmpi
