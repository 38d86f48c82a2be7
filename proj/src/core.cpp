// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

#include "gmpi/core.h"

#include <cmath>
#include <string>

#include <Eigen/LU>

namespace gmpi {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::InvalidRange: return "invalid-range";
    case ErrorKind::DegenerateRange: return "degenerate-range";
    case ErrorKind::PlaneBehindCamera: return "plane-behind-camera";
    case ErrorKind::SingularIntrinsics: return "singular-intrinsics";
    case ErrorKind::EmptyPlaneList: return "empty-plane-list";
    case ErrorKind::DegenerateMask: return "degenerate-mask";
    case ErrorKind::MissingResolution: return "missing-resolution";
    case ErrorKind::ZeroVariance: return "zero-variance";
    case ErrorKind::InvalidConfig: return "invalid-config";
    case ErrorKind::InvalidContainer: return "invalid-container";
    case ErrorKind::UnknownKind: return "unknown-kind";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

Eigen::Matrix3d CameraIntrinsics::K() const {
  Eigen::Matrix3d k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

Eigen::Matrix3d CameraIntrinsics::K_inverse() const {
  validate();
  Eigen::Matrix3d k;
  k << 1.0 / fx, 0.0, -cx / fx, 0.0, 1.0 / fy, -cy / fy, 0.0, 0.0, 1.0;
  return k;
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy))
    throw Error(ErrorKind::SingularIntrinsics, "focal lengths must be positive and finite");
  if (!std::isfinite(cx) || !std::isfinite(cy))
    throw Error(ErrorKind::SingularIntrinsics, "principal point must be finite");
  if (width <= 0 || height <= 0) throw Error(ErrorKind::InvalidArgument, "image size must be positive");
}

CameraIntrinsics CameraIntrinsics::resized(int new_width, int new_height) const {
  const double sx = static_cast<double>(new_width) / width;
  const double sy = static_cast<double>(new_height) / height;
  // Pixel centers at integers: the continuous edge at -0.5 stays fixed.
  return {fx * sx, fy * sy, (cx + 0.5) * sx - 0.5, (cy + 0.5) * sy - 0.5, new_width, new_height};
}

CameraIntrinsics CameraIntrinsics::from_fov(int width, int height, double fov_x_radians) {
  const double f = 0.5 * width / std::tan(0.5 * fov_x_radians);
  return {f, f, 0.5 * (width - 1), 0.5 * (height - 1), width, height};
}

CameraPose::CameraPose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation.allFinite() || !translation.allFinite())
    throw Error(ErrorKind::InvalidArgument, "pose contains non-finite values");
  const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho > 1e-6) throw Error(ErrorKind::InvalidArgument, "rotation is not orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > 1e-6)
    throw Error(ErrorKind::InvalidArgument, "rotation determinant is not +1");
}

bool CameraPose::is_identity() const {
  return rotation_ == Eigen::Matrix3d::Identity() && translation_ == Eigen::Vector3d::Zero();
}

CameraPose CameraPose::inverse() const {
  CameraPose inv;
  inv.rotation_ = rotation_.transpose();
  inv.translation_ = -(rotation_.transpose() * translation_);
  return inv;
}

std::array<double, 16> CameraPose::flattened() const {
  std::array<double, 16> out{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out[r * 4 + c] = rotation_(r, c);
    out[r * 4 + 3] = translation_(r);
  }
  out[15] = 1.0;
  return out;
}

namespace {

void check_unit_interval(const Image& img, const std::string& what) {
  for (double v : img.data()) {
    if (!(v >= 0.0 && v <= 1.0))
      throw Error(ErrorKind::InvalidRange, what + " has samples outside [0,1]");
  }
}

}  // namespace

MultiplaneImage::MultiplaneImage(Image color, std::vector<Image> alphas, std::vector<double> depths,
                                 double near, double far, std::optional<Image> background)
    : color_(std::move(color)),
      alphas_(std::move(alphas)),
      depths_(std::move(depths)),
      near_(near),
      far_(far),
      background_(std::move(background)) {
  if (alphas_.empty()) throw Error(ErrorKind::InvalidArgument, "plane count must be at least 1");
  if (color_.channels() != 3 || color_.empty())
    throw Error(ErrorKind::InvalidArgument, "color must be a non-empty 3-channel image");
  if (alphas_.size() != depths_.size())
    throw Error(ErrorKind::InvalidArgument, "alpha map count differs from depth count");
  for (size_t i = 0; i < alphas_.size(); ++i) {
    const Image& a = alphas_[i];
    if (a.width() != color_.width() || a.height() != color_.height() || a.channels() != 1)
      throw Error(ErrorKind::InvalidArgument,
                  "alpha map " + std::to_string(i) + " does not match the color resolution");
  }
  if (!(near_ > 0.0) || !(near_ <= far_) || !std::isfinite(far_))
    throw Error(ErrorKind::InvalidRange, "near/far must satisfy 0 < near <= far");
  for (size_t i = 0; i < depths_.size(); ++i) {
    if (!std::isfinite(depths_[i]) || depths_[i] <= 0.0)
      throw Error(ErrorKind::InvalidRange, "plane depths must be positive");
    if (i > 0 && !(depths_[i] > depths_[i - 1]))
      throw Error(ErrorKind::InvalidRange, "plane depths must be strictly increasing");
  }
  if (depths_.front() < near_ || depths_.back() > far_)
    throw Error(ErrorKind::InvalidRange, "plane depths must lie within [near, far]");
  check_unit_interval(color_, "color");
  for (size_t i = 0; i < alphas_.size(); ++i) check_unit_interval(alphas_[i], "alpha map " + std::to_string(i));
  if (background_) {
    if (!background_->same_shape(color_))
      throw Error(ErrorKind::InvalidArgument, "background must match the color image shape");
    check_unit_interval(*background_, "background");
  }
}

const Image& MultiplaneImage::plane_color(size_t plane) const {
  if (background_ && plane + 1 == alphas_.size()) return *background_;
  return color_;
}

std::vector<double> place_planes_disparity(int count, double near, double far) {
  if (count < 1) throw Error(ErrorKind::InvalidArgument, "plane count must be at least 1");
  if (!(near > 0.0) || !(near < far) || !std::isfinite(far))
    throw Error(ErrorKind::InvalidRange, "need 0 < near < far");
  std::vector<double> depths(static_cast<size_t>(count));
  depths.front() = near;
  if (count == 1) return depths;
  const double inv_near = 1.0 / near;
  const double inv_far = 1.0 / far;
  for (int i = 1; i + 1 < count; ++i) {
    const double t = static_cast<double>(i) / (count - 1);
    depths[static_cast<size_t>(i)] = 1.0 / (inv_near + t * (inv_far - inv_near));
  }
  depths.back() = far;
  return depths;
}

double normalize_depth(double depth, double first, double last) {
  if (first == last) {
    if (depth != first) throw Error(ErrorKind::DegenerateRange, "single-plane range only admits its own depth");
    return 0.0;
  }
  if (!(first < last)) throw Error(ErrorKind::DegenerateRange, "first depth must precede last depth");
  if (depth < first || depth > last) throw Error(ErrorKind::InvalidRange, "depth outside [first, last]");
  return (depth - first) / (last - first);
}

}  // namespace gmpi
