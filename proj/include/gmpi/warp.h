// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include <Eigen/Core>

#include "gmpi/core.h"
#include "gmpi/image.h"

namespace gmpi {

/// Maps homogeneous target pixels [x', y', 1] to canonical pixels [x, y, 1].
class Homography {
 public:
  Homography() = default;
  /// Throws InvalidArgument when |det| <= 1e-12 after scaling to unit norm.
  explicit Homography(const Eigen::Matrix3d& matrix);

  const Eigen::Matrix3d& matrix() const { return matrix_; }
  bool is_identity() const { return matrix_ == Eigen::Matrix3d::Identity(); }

  Eigen::Vector2d apply(const Eigen::Vector2d& target_pixel) const;
  Homography inverse() const;

 private:
  Eigen::Matrix3d matrix_ = Eigen::Matrix3d::Identity();
};

/// How samples outside [0, W-1] x [0, H-1] are treated.
enum class Border {
  Zero,   // empty space: the sample is 0
  Clamp,  // coordinates are clamped to the image edge
};

struct WarpedPlane {
  Image color;
  Image alpha;
};

/// Canonical plane z = depth expressed in target-camera coordinates.
/// Throws PlaneBehindCamera when the resulting b <= 0.
PlaneGeometry plane_in_target_frame(double depth, const CameraPose& target_to_canonical);

/// Plane-induced homography for target pixel -> canonical pixel.
Homography plane_homography(const CameraIntrinsics& canonical, const CameraIntrinsics& target,
                            const CameraPose& target_to_canonical, const PlaneGeometry& plane);

/// Bilinear interpolation at continuous pixel coordinates `p`.
void bilinear_sample(const Image& image, const Eigen::Vector2d& p, Border border, std::span<double> out);

/// Bilinear taps for one sample point; weights of taps that fall outside the
/// image under Border::Zero are zero.
struct BilinearTaps {
  int x[4];
  int y[4];
  double w[4];
};
BilinearTaps bilinear_taps(int width, int height, const Eigen::Vector2d& p, Border border);

/// Resamples the shared color (clamped border) and alpha map `plane`
/// (zero border) onto a target image of the given size.
WarpedPlane warp_plane(const MultiplaneImage& mpi, size_t plane, const Homography& h, int out_width,
                       int out_height);

}  // namespace gmpi
