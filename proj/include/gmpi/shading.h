// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>

#include <Eigen/Core>

#include "gmpi/core.h"
#include "gmpi/image.h"

namespace gmpi {

struct ShadingParams {
  double ambient = 1.0;  // k_a
  double diffuse = 0.0;  // k_d
  Eigen::Vector3d light_dir{0.0, 0.0, 1.0};

  void validate() const;
};

/// Per-pixel unit normals of the surface seen through `intrinsics`.
///
/// Pixels are back-projected to X = depth * K^-1 [u, v, 1]^T, tangents are
/// central differences of X (one-sided at the border) and the normal is their
/// cross product. Normals are oriented along the viewing ray (n . X > 0), so a
/// fronto-parallel surface yields (0, 0, 1).
Image normal_map(const Image& depth, const CameraIntrinsics& intrinsics);

/// C * (k_a + k_d * max(0, l . n)), clamped to [0, 1].
Image apply_shading(const Image& color, const Image& normals, const ShadingParams& params);

struct LightAngles {
  double horizontal = 0.0;  // radians
  double vertical = 0.0;    // radians
};

/// l_h ~ N(0, 0.2), l_v ~ N(0.2, 0.05).
LightAngles sample_light_angles(std::mt19937_64& rng);

/// (cos v sin h, sin v, cos v cos h): zero angles give the frontal light (0, 0, 1).
Eigen::Vector3d light_direction(const LightAngles& angles);

Eigen::Vector3d sample_lighting(std::mt19937_64& rng);

struct ShadingCoefficients {
  double ambient;
  double diffuse;
};

/// Ambient/diffuse warm-up: (1, 0) through iteration 1000, a linear ramp over
/// 1001..2000, then (0.9, 0.1).
ShadingCoefficients shading_schedule(long iteration);

/// Mean squared difference of the two maps after standardizing each to zero
/// mean and unit variance over the masked pixels.
double normalized_depth_mse(const Image& pred, const Image& ref, const std::vector<bool>& mask);

/// Canonical-frame shading of the MPI's color: normals come from the depth
/// composited from the canonical alpha maps.
MultiplaneImage shade_mpi(const MultiplaneImage& mpi, const CameraIntrinsics& canonical, const ShadingParams& params);

}  // namespace gmpi
