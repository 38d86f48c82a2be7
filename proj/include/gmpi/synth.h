// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "gmpi/core.h"

namespace gmpi {

enum class SceneKind { LayeredDisks, CheckerCard, SphereBillboards };

/// Accepts "layered-disks", "checker-card", "sphere-billboards".
SceneKind parse_scene_kind(std::string_view name);
std::string_view scene_kind_name(SceneKind kind);

struct Disk {
  double center_x;  // canonical pixel coordinates
  double center_y;
  double radius;  // pixels
  double depth;
};

struct SceneParams {
  int size = 128;
  int planes = 64;  // sphere-billboards only
  double near = 1.0;
  double far = 2.0;
  double fov_degrees = 40.0;
  /// layered-disks: empty selects two disks at depths 1.0 and 1.1, left and
  /// right of center. A background plane always sits at `far`.
  std::vector<Disk> disks;
  int checker_cells = 8;            // checker-card
  double sphere_radius_frac = 0.35; // sphere radius as a fraction of (far - near)
  double sphere_softness_frac = 0.05;
};

/// Procedural MPI with its per-pixel ground-truth depth (nearest surface
/// along each canonical ray) and a mask of pixels that hit an object rather
/// than the backdrop.
struct SynthScene {
  MultiplaneImage mpi;
  CameraIntrinsics intrinsics;
  Image depth;
  std::vector<bool> object_mask;
};

SynthScene synth_scene(SceneKind kind, const SceneParams& params, uint64_t seed);

/// Random MPI with uniform color in [0,1], alphas uniform in
/// [alpha_lo, alpha_hi] and disparity-spaced planes.
MultiplaneImage random_mpi(std::mt19937_64& rng, int size, int planes, double near, double far,
                           double alpha_lo = 0.0, double alpha_hi = 1.0);

/// Rotation about a uniformly random axis by an angle in [0, max_angle] and a
/// translation uniform in the cube of half-width max_translation.
CameraPose random_pose(std::mt19937_64& rng, double max_angle, double max_translation);

}  // namespace gmpi
