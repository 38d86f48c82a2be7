// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

#include "gmpi/synth.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Geometry>

#include "gmpi/composite.h"

namespace gmpi {

SceneKind parse_scene_kind(std::string_view name) {
  if (name == "layered-disks") return SceneKind::LayeredDisks;
  if (name == "checker-card") return SceneKind::CheckerCard;
  if (name == "sphere-billboards") return SceneKind::SphereBillboards;
  throw Error(ErrorKind::UnknownKind, "unknown scene kind '" + std::string(name) + "'");
}

std::string_view scene_kind_name(SceneKind kind) {
  switch (kind) {
    case SceneKind::LayeredDisks: return "layered-disks";
    case SceneKind::CheckerCard: return "checker-card";
    case SceneKind::SphereBillboards: return "sphere-billboards";
  }
  return "unknown";
}

namespace {

using Rgb = std::array<double, 3>;

Rgb random_color(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.15, 0.95);
  return {u(rng), u(rng), u(rng)};
}

void fill_pixel(Image& img, int x, int y, const Rgb& c) {
  for (int k = 0; k < 3; ++k) img(x, y, k) = c[static_cast<size_t>(k)];
}

SynthScene layered_disks(const SceneParams& p, const CameraIntrinsics& k, std::mt19937_64& rng) {
  std::vector<Disk> disks = p.disks;
  if (disks.empty()) {
    const double s = p.size;
    disks = {{0.35 * s, 0.5 * s, 0.12 * s, 1.0}, {0.65 * s, 0.5 * s, 0.12 * s, 1.1}};
  }
  std::sort(disks.begin(), disks.end(), [](const Disk& a, const Disk& b) { return a.depth < b.depth; });
  for (size_t i = 0; i < disks.size(); ++i) {
    if (disks[i].depth < p.near || !(disks[i].depth < p.far))
      throw Error(ErrorKind::InvalidConfig, "disk depths must lie in [near, far)");
    if (i > 0 && !(disks[i].depth > disks[i - 1].depth))
      throw Error(ErrorKind::InvalidConfig, "disk depths must be distinct");
  }

  const int n = p.size;
  std::vector<Image> alphas;
  std::vector<double> depths;
  std::vector<Rgb> colors;
  for (const Disk& d : disks) {
    Image a(n, n, 1);
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x)
        a(x, y) = std::clamp(d.radius - std::hypot(x - d.center_x, y - d.center_y) + 0.5, 0.0, 1.0);
    alphas.push_back(std::move(a));
    depths.push_back(d.depth);
    colors.push_back(random_color(rng));
  }
  // Opaque backdrop plane at far with a vertical gradient.
  const Rgb sky = random_color(rng);
  Image background(n, n, 3);
  for (int y = 0; y < n; ++y) {
    const double shade = 0.6 + 0.4 * y / std::max(1, n - 1);
    for (int x = 0; x < n; ++x) fill_pixel(background, x, y, {sky[0] * shade, sky[1] * shade, sky[2] * shade});
  }
  alphas.emplace_back(n, n, 1, 1.0);
  depths.push_back(p.far);

  // The shared color is what the canonical camera sees.
  std::vector<WarpedPlane> layers;
  for (size_t i = 0; i < disks.size(); ++i) {
    Image c(n, n, 3);
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) fill_pixel(c, x, y, colors[i]);
    layers.push_back({std::move(c), alphas[i]});
  }
  layers.push_back({background, alphas.back()});
  Image color = over_composite(layers).color;
  for (double& v : color.data()) v = std::clamp(v, 0.0, 1.0);

  Image depth(n, n, 1, p.far);
  std::vector<bool> mask(static_cast<size_t>(n) * n, false);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      for (const Disk& d : disks) {
        if (std::hypot(x - d.center_x, y - d.center_y) <= d.radius) {
          depth(x, y) = d.depth;
          mask[static_cast<size_t>(y) * n + x] = true;
          break;
        }
      }
    }
  }
  return {MultiplaneImage(std::move(color), std::move(alphas), std::move(depths), p.near, p.far, std::move(background)),
          k, std::move(depth), std::move(mask)};
}

SynthScene checker_card(const SceneParams& p, const CameraIntrinsics& k, std::mt19937_64& rng) {
  const int n = p.size;
  if (p.checker_cells < 1) throw Error(ErrorKind::InvalidConfig, "checker_cells must be positive");
  const Rgb a = random_color(rng);
  const Rgb b = {1.0 - a[0], 1.0 - a[1], 1.0 - a[2]};
  Image color(n, n, 3);
  const double cell = static_cast<double>(n) / p.checker_cells;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      fill_pixel(color, x, y, ((static_cast<int>(x / cell) + static_cast<int>(y / cell)) % 2) ? a : b);
  const double card_depth = 0.5 * (p.near + p.far);
  std::vector<Image> alphas{Image(n, n, 1, 1.0)};
  return {MultiplaneImage(std::move(color), std::move(alphas), {card_depth}, p.near, p.far), k,
          Image(n, n, 1, card_depth), std::vector<bool>(static_cast<size_t>(n) * n, true)};
}

SynthScene sphere_billboards(const SceneParams& p, const CameraIntrinsics& k, std::mt19937_64& rng) {
  const int n = p.size;
  const std::vector<double> depths = place_planes_disparity(p.planes, p.near, p.far);
  const Eigen::Vector3d center(0.0, 0.0, 0.5 * (p.near + p.far));
  const double radius = p.sphere_radius_frac * (p.far - p.near);
  const double soft = p.sphere_softness_frac * (p.far - p.near);
  if (!(radius > 0.0) || !(soft > 0.0)) throw Error(ErrorKind::InvalidConfig, "sphere radius and softness must be positive");
  const Eigen::Matrix3d k_inv = k.K_inverse();

  std::vector<Image> alphas;
  for (double d : depths) {
    Image a(n, n, 1);
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        const Eigen::Vector3d point = d * (k_inv * Eigen::Vector3d(x, y, 1.0));
        a(x, y) = std::clamp(0.5 + (radius - (point - center).norm()) / (2.0 * soft), 0.0, 1.0);
      }
    }
    alphas.push_back(std::move(a));
  }

  const Rgb base = random_color(rng);
  const Eigen::Vector3d light = Eigen::Vector3d(-0.3, -0.4, -1.0).normalized();
  Image color(n, n, 3);
  Image depth(n, n, 1, p.far);
  std::vector<bool> mask(static_cast<size_t>(n) * n, false);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const Eigen::Vector3d v = k_inv * Eigen::Vector3d(x, y, 1.0);
      const double vc = v.dot(center);
      const double disc = vc * vc - v.squaredNorm() * (center.squaredNorm() - radius * radius);
      double gain = 0.6;
      if (disc >= 0.0) {
        const double lambda = (vc - std::sqrt(disc)) / v.squaredNorm();
        const Eigen::Vector3d hit = lambda * v;
        const Eigen::Vector3d normal = (hit - center).normalized();
        gain = 0.35 + 0.65 * std::max(0.0, normal.dot(light));
        depth(x, y) = hit.z();
        mask[static_cast<size_t>(y) * n + x] = true;
      }
      fill_pixel(color, x, y, {base[0] * gain, base[1] * gain, base[2] * gain});
    }
  }
  return {MultiplaneImage(std::move(color), std::move(alphas), depths, p.near, p.far), k, std::move(depth),
          std::move(mask)};
}

}  // namespace

SynthScene synth_scene(SceneKind kind, const SceneParams& params, uint64_t seed) {
  if (params.size < 2) throw Error(ErrorKind::InvalidConfig, "scene size must be at least 2");
  if (!(params.near > 0.0) || !(params.near < params.far)) throw Error(ErrorKind::InvalidConfig, "need 0 < near < far");
  if (!(params.fov_degrees > 0.0 && params.fov_degrees < 180.0)) throw Error(ErrorKind::InvalidConfig, "fov must be in (0, 180)");
  const CameraIntrinsics k =
      CameraIntrinsics::from_fov(params.size, params.size, params.fov_degrees * std::numbers::pi / 180.0);
  std::mt19937_64 rng(seed);
  switch (kind) {
    case SceneKind::LayeredDisks: return layered_disks(params, k, rng);
    case SceneKind::CheckerCard: return checker_card(params, k, rng);
    case SceneKind::SphereBillboards: return sphere_billboards(params, k, rng);
  }
  throw Error(ErrorKind::UnknownKind, "unknown scene kind");
}

MultiplaneImage random_mpi(std::mt19937_64& rng, int size, int planes, double near, double far, double alpha_lo,
                           double alpha_hi) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> alpha(alpha_lo, alpha_hi);
  Image color(size, size, 3);
  for (double& v : color.data()) v = unit(rng);
  std::vector<Image> alphas;
  for (int i = 0; i < planes; ++i) {
    Image a(size, size, 1);
    for (double& v : a.data()) v = alpha(rng);
    alphas.push_back(std::move(a));
  }
  return MultiplaneImage(std::move(color), std::move(alphas), place_planes_disparity(planes, near, far), near, far);
}

CameraPose random_pose(std::mt19937_64& rng, double max_angle, double max_translation) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, max_angle);
  std::uniform_real_distribution<double> shift(-max_translation, max_translation);
  Eigen::Vector3d axis(gauss(rng), gauss(rng), gauss(rng));
  axis.normalize();
  const Eigen::Matrix3d r = Eigen::AngleAxisd(angle(rng), axis).toRotationMatrix();
  const Eigen::Vector3d t(shift(rng), shift(rng), shift(rng));
  return CameraPose(r, t);
}

}  // namespace gmpi
