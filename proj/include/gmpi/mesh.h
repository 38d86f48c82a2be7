// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gmpi/core.h"

namespace gmpi {

/// Pinhole back-projection applied to index-space coordinates: (u, v) are
/// pixel coordinates and z is depth.
struct FrustumMapping {
  double fx, fy, cx, cy;
};

/// Scalar field on an nx * ny * nz lattice. Index (i, j, k) sits at
/// origin + spacing * (i, j, k); with a frustum mapping that point is
/// (u, v, z) and is back-projected into the camera frame.
struct OccupancyVolume {
  int nx = 0, ny = 0, nz = 0;
  std::vector<double> values;  // i fastest, then j, then k
  Eigen::Vector3d spacing{1.0, 1.0, 1.0};
  Eigen::Vector3d origin{0.0, 0.0, 0.0};
  std::optional<FrustumMapping> frustum;

  OccupancyVolume() = default;
  OccupancyVolume(int nx, int ny, int nz, double fill = 0.0);

  size_t index(int i, int j, int k) const {
    return (static_cast<size_t>(k) * ny + j) * nx + i;
  }
  double& at(int i, int j, int k) { return values[index(i, j, k)]; }
  double at(int i, int j, int k) const { return values[index(i, j, k)]; }

  /// Lattice coordinates (possibly fractional) to scene coordinates.
  Eigen::Vector3d to_world(const Eigen::Vector3d& lattice) const;
};

struct OccupancyGrid {
  int x = 64;
  int y = 64;
  int z = 64;
  /// Surround the sampled grid with one layer of zeros so that iso-surfaces
  /// close at the volume boundary.
  bool pad = true;
};

/// Alpha at pixel (u, v) and depth z: bilinear in the plane, linear between
/// the bracketing planes, 0 outside [d_1, d_L] and outside the image.
double occupancy_at(const MultiplaneImage& mpi, double u, double v, double z);

/// Samples the alpha stack on a frustum-aligned grid: x and y span the pixel
/// range [0, W-1] x [0, H-1], z spans [d_1, d_L]. Throws InvalidArgument for
/// grids smaller than 2 along any axis.
OccupancyVolume build_occupancy(const MultiplaneImage& mpi, const CameraIntrinsics& intrinsics,
                                const OccupancyGrid& grid);

struct TriangleMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> triangles;

  bool empty() const { return triangles.empty(); }
  /// Throws InvalidArgument on out-of-range indices.
  void validate() const;
};

/// Throws InvalidArgument unless 0 < iso < 1. Vertices shared between cells
/// are welded; cells are visited with i fastest, then j, then k.
TriangleMesh marching_cubes(const OccupancyVolume& volume, double iso = 0.5);

/// Moves each vertex toward the centroid of its edge neighbors by `factor`,
/// `iterations` times. Connectivity is untouched.
TriangleMesh laplacian_smooth(const TriangleMesh& mesh, int iterations, double factor = 0.5);

double surface_area(const TriangleMesh& mesh);
double min_triangle_area(const TriangleMesh& mesh);
/// Every undirected edge is used by exactly two triangles.
bool is_watertight(const TriangleMesh& mesh);
/// V - E + F.
long euler_characteristic(const TriangleMesh& mesh);

void write_obj(const TriangleMesh& mesh, std::ostream& out);
void export_obj(const TriangleMesh& mesh, const std::string& path);
/// Reads `v` and `f` records; other records are ignored. Face entries may be
/// `i`, `i/t` or `i/t/n`.
TriangleMesh read_obj(std::istream& in);
TriangleMesh import_obj(const std::string& path);

}  // namespace gmpi
