// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

#include "gmpi/warp.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>
#include <Eigen/LU>

#include "gmpi/parallel.h"

namespace gmpi {

Homography::Homography(const Eigen::Matrix3d& matrix) : matrix_(matrix) {
  const double norm = matrix.norm();
  if (!matrix.allFinite() || norm == 0.0 || std::abs((matrix / norm).determinant()) <= 1e-12)
    throw Error(ErrorKind::InvalidArgument, "homography is singular");
}

Eigen::Vector2d Homography::apply(const Eigen::Vector2d& target_pixel) const {
  const Eigen::Vector3d p = matrix_ * target_pixel.homogeneous();
  return p.hnormalized();
}

Homography Homography::inverse() const { return Homography(matrix_.inverse()); }

PlaneGeometry plane_in_target_frame(double depth, const CameraPose& target_to_canonical) {
  // e3^T (R X_t + t) = depth  <=>  (R^T e3)^T X_t = depth - t_z
  PlaneGeometry plane;
  plane.normal = target_to_canonical.rotation().transpose().col(2);
  plane.normal.normalize();
  plane.b = depth - target_to_canonical.translation().z();
  if (!(plane.b > 0.0)) throw Error(ErrorKind::PlaneBehindCamera, "plane at depth " + std::to_string(depth) + " is behind the target camera");
  return plane;
}

Homography plane_homography(const CameraIntrinsics& canonical, const CameraIntrinsics& target,
                            const CameraPose& target_to_canonical, const PlaneGeometry& plane) {
  canonical.validate();
  target.validate();
  if (!(plane.b > 0.0)) throw Error(ErrorKind::PlaneBehindCamera, "plane offset must be positive");
  if (target_to_canonical.is_identity() && canonical == target) return Homography();
  // A target ray point X_t on the plane satisfies n^T X_t / b = 1, so
  // X_cano = R X_t + t = (R + t n^T / b) X_t.
  const Eigen::Matrix3d m = target_to_canonical.rotation() +
                            target_to_canonical.translation() * plane.normal.transpose() / plane.b;
  return Homography(canonical.K() * m * target.K_inverse());
}

BilinearTaps bilinear_taps(int width, int height, const Eigen::Vector2d& p, Border border) {
  BilinearTaps taps{};
  double x = p.x();
  double y = p.y();
  const double max_x = width - 1;
  const double max_y = height - 1;
  if (!std::isfinite(x) || !std::isfinite(y)) return taps;
  if (border == Border::Zero) {
    if (x < 0.0 || y < 0.0 || x > max_x || y > max_y) return taps;
  } else {
    x = std::clamp(x, 0.0, max_x);
    y = std::clamp(y, 0.0, max_y);
  }
  int x0 = static_cast<int>(std::floor(x));
  int y0 = static_cast<int>(std::floor(y));
  x0 = std::min(x0, std::max(width - 2, 0));
  y0 = std::min(y0, std::max(height - 2, 0));
  const int x1 = std::min(x0 + 1, width - 1);
  const int y1 = std::min(y0 + 1, height - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  taps.x[0] = x0, taps.y[0] = y0, taps.w[0] = (1.0 - fx) * (1.0 - fy);
  taps.x[1] = x1, taps.y[1] = y0, taps.w[1] = fx * (1.0 - fy);
  taps.x[2] = x0, taps.y[2] = y1, taps.w[2] = (1.0 - fx) * fy;
  taps.x[3] = x1, taps.y[3] = y1, taps.w[3] = fx * fy;
  return taps;
}

void bilinear_sample(const Image& image, const Eigen::Vector2d& p, Border border, std::span<double> out) {
  const BilinearTaps taps = bilinear_taps(image.width(), image.height(), p, border);
  std::fill(out.begin(), out.end(), 0.0);
  for (int k = 0; k < 4; ++k) {
    if (taps.w[k] == 0.0) continue;
    const auto src = image.pixel(taps.x[k], taps.y[k]);
    for (size_t c = 0; c < out.size(); ++c) out[c] += taps.w[k] * src[c];
  }
}

WarpedPlane warp_plane(const MultiplaneImage& mpi, size_t plane, const Homography& h, int out_width,
                       int out_height) {
  const Image& color = mpi.plane_color(plane);
  const Image& alpha = mpi.alpha(plane);
  if (h.is_identity() && out_width == mpi.width() && out_height == mpi.height()) return {color, alpha};

  WarpedPlane out{Image(out_width, out_height, 3), Image(out_width, out_height, 1)};
  parallel_for(static_cast<size_t>(out_height), [&](size_t row) {
    const int y = static_cast<int>(row);
    for (int x = 0; x < out_width; ++x) {
      const Eigen::Vector3d q = h.matrix() * Eigen::Vector3d(x, y, 1.0);
      // Rays that meet the plane behind the canonical camera carry nothing.
      if (!(q.z() > 0.0)) continue;
      const Eigen::Vector2d p = q.hnormalized();
      bilinear_sample(alpha, p, Border::Zero, out.alpha.pixel(x, y));
      bilinear_sample(color, p, Border::Clamp, out.color.pixel(x, y));
    }
  });
  return out;
}

}  // namespace gmpi
