// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gmpi/core.h"

namespace gmpi {

// Container directory:
//   manifest.json   format "gmpi-mpi", version 1, planes, width, height,
//                   depths, near, far, intrinsics {fx, fy, cx, cy},
//                   canonical_pose {rotation (9, row-major), translation (3)},
//                   bit_depth (8 or 16), color, alphas[], background (optional)
//   color.png       RGB
//   alpha_000.png   gray, one per plane, nearest first
//   background.png  RGB, optional color of the last plane
// README.md documents the format byte for byte.

inline constexpr const char* kManifestName = "manifest.json";
inline constexpr int kContainerVersion = 1;

struct SaveOptions {
  int bit_depth = 8;  // 8 or 16
  CameraPose canonical_pose = CameraPose::identity();
};

struct LoadedMpi {
  MultiplaneImage mpi;
  CameraIntrinsics intrinsics;
  CameraPose canonical_pose;
  int bit_depth;
};

/// Creates `dir` if needed and writes the manifest and PNG files.
void save_mpi(const MultiplaneImage& mpi, const CameraIntrinsics& intrinsics, const std::string& dir,
              const SaveOptions& options = {});

/// Throws InvalidContainer naming the problem: missing or malformed
/// manifest, missing files, size or count mismatches, or a violated MPI
/// invariant such as non-increasing depths. Io errors are reported as Io.
LoadedMpi load_mpi(const std::string& dir);

/// Zero-padded alpha file name for the given plane.
std::string alpha_file_name(size_t plane, size_t plane_count);

// Trajectory file (JSON):
//   {"format": "gmpi-trajectory", "version": 1,
//    "poses": [{"label": str, "rotation": [9], "translation": [3]}, ...],
//    "generator": {"kind": "orbit", "yaw_deg": [lo, hi], "pitch_deg": [lo, hi],
//                  "count": n, "center_depth": z}}      (generator optional)
// Each pose maps target-camera points into the canonical frame:
// X_canonical = R * X_target + t.

struct TrajectoryPose {
  std::string label;
  CameraPose pose;
};

struct OrbitSpec {
  double yaw_min = 0.0, yaw_max = 0.0;      // radians
  double pitch_min = 0.0, pitch_max = 0.0;  // radians
  int count = 1;
  double center_depth = 1.0;
};

struct Trajectory {
  std::vector<TrajectoryPose> poses;
  std::optional<OrbitSpec> generator;
};

/// Poses on an arc around (0, 0, center_depth): camera i has yaw and pitch
/// evenly spaced over the ranges and looks at the center. A single pose
/// uses the middle of each range. Throws InvalidArgument for count < 1 and
/// InvalidRange for reversed ranges or a non-positive center depth.
Trajectory orbit_trajectory(const OrbitSpec& spec);

/// Yaw about the camera y axis, then pitch about x: R = R_y(yaw) * R_x(pitch).
CameraPose orbit_pose(double yaw, double pitch, double center_depth);

void save_trajectory(const Trajectory& trajectory, const std::string& path);
/// Throws InvalidContainer on malformed files or non-orthonormal rotations.
Trajectory load_trajectory(const std::string& path);

}  // namespace gmpi
