// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "gmpi/error.h"
#include "gmpi/image.h"

namespace gmpi {

/// Pinhole intrinsics in pixel units. Pixel centers sit on integer coordinates.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  Eigen::Matrix3d K() const;
  Eigen::Matrix3d K_inverse() const;

  /// Throws SingularIntrinsics unless fx, fy > 0 and the image is non-empty.
  void validate() const;

  /// Same field of view at another resolution.
  CameraIntrinsics resized(int new_width, int new_height) const;

  /// Intrinsics with the principal point at the image center and the given
  /// horizontal field of view.
  static CameraIntrinsics from_fov(int width, int height, double fov_x_radians);

  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

/// Rigid transform taking target-camera coordinates to canonical-camera
/// coordinates: X_cano = rotation * X_tgt + translation.
class CameraPose {
 public:
  CameraPose() = default;

  /// Throws InvalidArgument unless rotation is orthonormal with det +1 (1e-6).
  CameraPose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  static CameraPose identity() { return {}; }

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  bool is_identity() const;
  CameraPose inverse() const;
  Eigen::Vector3d apply(const Eigen::Vector3d& target_point) const {
    return rotation_ * target_point + translation_;
  }

  /// Row-major flattening of the 4x4 matrix [R t; 0 0 0 1].
  std::array<double, 16> flattened() const;

 private:
  Eigen::Matrix3d rotation_ = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation_ = Eigen::Vector3d::Zero();
};

/// Plane n^T X = b expressed in target-camera coordinates.
struct PlaneGeometry {
  Eigen::Vector3d normal{0.0, 0.0, 1.0};
  double b = 1.0;
};

/// Shared color image, L alpha maps and their fronto-parallel depths, measured
/// along the canonical camera's z axis. Plane 0 is the nearest. An optional
/// background image replaces the shared color on the last plane.
class MultiplaneImage {
 public:
  /// Validates every invariant; violations throw InvalidArgument or
  /// InvalidRange with a message naming the failed invariant.
  MultiplaneImage(Image color, std::vector<Image> alphas, std::vector<double> depths, double near,
                  double far, std::optional<Image> background = std::nullopt);

  const Image& color() const { return color_; }
  const std::vector<Image>& alphas() const { return alphas_; }
  const Image& alpha(size_t plane) const { return alphas_.at(plane); }
  const std::vector<double>& depths() const { return depths_; }
  double depth(size_t plane) const { return depths_.at(plane); }
  double near() const { return near_; }
  double far() const { return far_; }
  const std::optional<Image>& background() const { return background_; }

  size_t plane_count() const { return alphas_.size(); }
  int width() const { return color_.width(); }
  int height() const { return color_.height(); }

  /// Color texture carried by the given plane.
  const Image& plane_color(size_t plane) const;

 private:
  Image color_;
  std::vector<Image> alphas_;
  std::vector<double> depths_;
  double near_;
  double far_;
  std::optional<Image> background_;
};

/// L depths whose inverses are evenly spaced between 1/near and 1/far.
/// A single plane sits at near.
std::vector<double> place_planes_disparity(int count, double near, double far);

/// (d - first) / (last - first). When first == last (one plane) the result
/// is 0 by convention.
double normalize_depth(double depth, double first, double last);

/// Depth already mapped to [0, 1] by normalize_depth. Only constructible from
/// it, so embedding functions cannot receive raw scene depth by mistake.
class NormalizedDepth {
 public:
  static NormalizedDepth of(double depth, double first, double last) {
    return NormalizedDepth(normalize_depth(depth, first, last));
  }
  double value() const { return value_; }

 private:
  explicit NormalizedDepth(double v) : value_(v) {}
  double value_;
};

}  // namespace gmpi
