// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

#include "gmpi/shading.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>

#include "gmpi/composite.h"

namespace gmpi {

void ShadingParams::validate() const {
  if (!(ambient >= 0.0) || !(diffuse >= 0.0))
    throw Error(ErrorKind::InvalidArgument, "shading coefficients must be non-negative");
  if (std::abs(light_dir.norm() - 1.0) > 1e-9) throw Error(ErrorKind::InvalidArgument, "light direction must be unit length");
}

Image normal_map(const Image& depth, const CameraIntrinsics& intrinsics) {
  intrinsics.validate();
  if (depth.channels() != 1) throw Error(ErrorKind::InvalidArgument, "depth map must have one channel");
  const int w = depth.width();
  const int h = depth.height();
  auto point = [&](int x, int y) {
    const double z = depth(x, y);
    return Eigen::Vector3d(z * (x - intrinsics.cx) / intrinsics.fx, z * (y - intrinsics.cy) / intrinsics.fy, z);
  };
  Image normals(w, h, 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int xl = std::max(x - 1, 0), xr = std::min(x + 1, w - 1);
      const int yu = std::max(y - 1, 0), yd = std::min(y + 1, h - 1);
      Eigen::Vector3d du = point(xr, y) - point(xl, y);
      Eigen::Vector3d dv = point(x, yd) - point(x, yu);
      if (xr == xl) du = Eigen::Vector3d::UnitX();
      if (yd == yu) dv = Eigen::Vector3d::UnitY();
      Eigen::Vector3d n = du.cross(dv);
      const double len = n.norm();
      if (!(len > 0.0) || !std::isfinite(len)) {
        n = Eigen::Vector3d::UnitZ();
      } else {
        n /= len;
        if (n.dot(point(x, y)) < 0.0) n = -n;
      }
      for (int c = 0; c < 3; ++c) normals(x, y, c) = n[c];
    }
  }
  return normals;
}

Image apply_shading(const Image& color, const Image& normals, const ShadingParams& params) {
  params.validate();
  if (normals.width() != color.width() || normals.height() != color.height() || normals.channels() != 3)
    throw Error(ErrorKind::InvalidArgument, "normal map does not match the color image");
  Image out(color.width(), color.height(), color.channels());
  for (int y = 0; y < color.height(); ++y) {
    for (int x = 0; x < color.width(); ++x) {
      const auto n = normals.pixel(x, y);
      const double lambert = params.light_dir.x() * n[0] + params.light_dir.y() * n[1] + params.light_dir.z() * n[2];
      const double gain = params.ambient + params.diffuse * std::max(0.0, lambert);
      for (int c = 0; c < color.channels(); ++c) out(x, y, c) = std::clamp(color(x, y, c) * gain, 0.0, 1.0);
    }
  }
  return out;
}

LightAngles sample_light_angles(std::mt19937_64& rng) {
  std::normal_distribution<double> horizontal(0.0, 0.2);
  std::normal_distribution<double> vertical(0.2, 0.05);
  LightAngles a;
  a.horizontal = horizontal(rng);
  a.vertical = vertical(rng);
  return a;
}

Eigen::Vector3d light_direction(const LightAngles& angles) {
  const double cv = std::cos(angles.vertical);
  return Eigen::Vector3d(cv * std::sin(angles.horizontal), std::sin(angles.vertical), cv * std::cos(angles.horizontal))
      .normalized();
}

Eigen::Vector3d sample_lighting(std::mt19937_64& rng) { return light_direction(sample_light_angles(rng)); }

ShadingCoefficients shading_schedule(long iteration) {
  if (iteration < 0) throw Error(ErrorKind::InvalidArgument, "iteration must be non-negative");
  if (iteration <= 1000) return {1.0, 0.0};
  if (iteration >= 2000) return {0.9, 0.1};
  const double t = static_cast<double>(iteration - 1000) / 1000.0;
  return {std::lerp(1.0, 0.9, t), std::lerp(0.0, 0.1, t)};
}

namespace {

struct Moments {
  double mean;
  double stddev;
};

Moments masked_moments(const Image& img, const std::vector<bool>& mask, size_t count) {
  double sum = 0.0;
  for (size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) sum += img.data()[i];
  const double mean = sum / static_cast<double>(count);
  double sq = 0.0;
  for (size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) sq += (img.data()[i] - mean) * (img.data()[i] - mean);
  return {mean, std::sqrt(sq / static_cast<double>(count))};
}

}  // namespace

double normalized_depth_mse(const Image& pred, const Image& ref, const std::vector<bool>& mask) {
  if (!pred.same_shape(ref) || pred.channels() != 1 || mask.size() != pred.size())
    throw Error(ErrorKind::InvalidArgument, "depth maps and mask must share one-channel shape");
  const auto count = static_cast<size_t>(std::count(mask.begin(), mask.end(), true));
  if (count < 2) throw Error(ErrorKind::DegenerateMask, "mask selects fewer than two pixels");
  const Moments p = masked_moments(pred, mask, count);
  const Moments r = masked_moments(ref, mask, count);
  if (!(p.stddev > 0.0) || !(r.stddev > 0.0)) throw Error(ErrorKind::DegenerateMask, "depth has zero variance under the mask");
  double sum = 0.0;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    const double d = (pred.data()[i] - p.mean) / p.stddev - (ref.data()[i] - r.mean) / r.stddev;
    sum += d * d;
  }
  return sum / static_cast<double>(count);
}

MultiplaneImage shade_mpi(const MultiplaneImage& mpi, const CameraIntrinsics& canonical, const ShadingParams& params) {
  std::vector<WarpedPlane> planes;
  planes.reserve(mpi.plane_count());
  for (size_t i = 0; i < mpi.plane_count(); ++i) planes.push_back({mpi.plane_color(i), mpi.alpha(i)});
  const RenderOutput composite = over_composite(planes, std::span<const double>(mpi.depths()));
  // Residual transmittance sees the far bound, keeping depth positive.
  Image depth = *composite.depth;
  for (size_t i = 0; i < depth.size(); ++i) depth.data()[i] += composite.transmittance.data()[i] * mpi.far();
  const bool same_size = canonical.width == mpi.width() && canonical.height == mpi.height();
  const Image normals = normal_map(depth, same_size ? canonical : canonical.resized(mpi.width(), mpi.height()));
  return MultiplaneImage(apply_shading(mpi.color(), normals, params), mpi.alphas(), mpi.depths(), mpi.near(),
                         mpi.far(), mpi.background());
}

}  // namespace gmpi
