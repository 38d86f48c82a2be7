// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "gmpi/mesh.h"
#include "gmpi/synth.h"
#include "oracles.h"

namespace gmpi {
namespace {

// Soft sphere indicator: 0.5 exactly on the radius, linear across a shell.
OccupancyVolume sphere_volume(int n, double radius, const Eigen::Vector3d& center, double shell = 2.0) {
  OccupancyVolume vol(n, n, n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double r = (Eigen::Vector3d(i, j, k) - center).norm();
        vol.at(i, j, k) = std::clamp(0.5 + (radius - r) / (2.0 * shell), 0.0, 1.0);
      }
  return vol;
}

double trilinear_value(const OccupancyVolume& vol, const Eigen::Vector3d& p) {
  const int i = std::min(static_cast<int>(std::floor(p.x())), vol.nx - 2);
  const int j = std::min(static_cast<int>(std::floor(p.y())), vol.ny - 2);
  const int k = std::min(static_cast<int>(std::floor(p.z())), vol.nz - 2);
  const double fx = p.x() - i, fy = p.y() - j, fz = p.z() - k;
  double v = 0.0;
  for (int dz = 0; dz < 2; ++dz)
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx)
        v += (dx ? fx : 1 - fx) * (dy ? fy : 1 - fy) * (dz ? fz : 1 - fz) * vol.at(i + dx, j + dy, k + dz);
  return v;
}

TEST(MarchingCubes, UniformBelowIsoIsEmpty) {
  const OccupancyVolume vol(8, 8, 8, 0.3);
  const TriangleMesh m = marching_cubes(vol, 0.5);
  EXPECT_TRUE(m.empty());
  EXPECT_TRUE(m.vertices.empty());
  EXPECT_TRUE(marching_cubes(OccupancyVolume(8, 8, 8, 0.9)).empty());
}

TEST(MarchingCubes, SingleVoxelIsClosed) {
  OccupancyVolume vol(3, 3, 3);
  vol.at(1, 1, 1) = 1.0;
  const TriangleMesh m = marching_cubes(vol, 0.5);
  EXPECT_EQ(m.vertices.size(), 6u);
  EXPECT_EQ(m.triangles.size(), 8u);
  EXPECT_TRUE(is_watertight(m));
  EXPECT_EQ(euler_characteristic(m), 2);
  for (const auto& v : m.vertices) EXPECT_NEAR((v - Eigen::Vector3d(1, 1, 1)).lpNorm<1>(), 0.5, 1e-12);
}

TEST(MarchingCubes, AnalyticSphere) {
  const double r = 24.0;
  const auto start = std::chrono::steady_clock::now();
  const OccupancyVolume vol = sphere_volume(64, r, Eigen::Vector3d(31.5, 31.5, 31.5));
  const TriangleMesh m = marching_cubes(vol, 0.5);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(seconds, 5.0);
  EXPECT_TRUE(is_watertight(m));
  EXPECT_EQ(euler_characteristic(m), 2);
  const double area = surface_area(m);
  EXPECT_LE(std::abs(area / (4.0 * std::numbers::pi * r * r) - 1.0), 0.05) << area;
  EXPECT_GT(min_triangle_area(m), 1e-12);
  EXPECT_NO_THROW(m.validate());
}

TEST(MarchingCubes, VerticesInterpolateIso) {
  const OccupancyVolume vol = sphere_volume(20, 6.3, Eigen::Vector3d(9.2, 9.7, 10.1), 3.0);
  for (double iso : {0.3, 0.5, 0.8}) {
    const TriangleMesh m = marching_cubes(vol, iso);
    ASSERT_FALSE(m.empty());
    for (const auto& v : m.vertices) {
      int integral = 0;
      for (int a = 0; a < 3; ++a) integral += std::abs(v[a] - std::round(v[a])) < 1e-12;
      EXPECT_GE(integral, 2);
      EXPECT_NEAR(trilinear_value(vol, v), iso, 1e-6);
    }
  }
}

TEST(MarchingCubes, TranslationEquivariant) {
  OccupancyVolume vol = sphere_volume(16, 5.0, Eigen::Vector3d(7.5, 7.0, 8.0));
  const TriangleMesh a = marching_cubes(vol);
  vol.origin = {0.25, -3.0, 10.0};
  const TriangleMesh b = marching_cubes(vol);
  ASSERT_EQ(a.vertices.size(), b.vertices.size());
  EXPECT_EQ(a.triangles, b.triangles);
  for (size_t i = 0; i < a.vertices.size(); ++i)
    EXPECT_LE((b.vertices[i] - a.vertices[i] - vol.origin).norm(), 1e-9);
}

TEST(MarchingCubes, IsoOutsideUnitIntervalRejected) {
  const OccupancyVolume vol(4, 4, 4);
  EXPECT_THROW(marching_cubes(vol, 0.0), Error);
  EXPECT_THROW(marching_cubes(vol, 1.0), Error);
}

TEST(MarchingCubes, DeterministicOutput) {
  const OccupancyVolume vol = sphere_volume(24, 8.0, Eigen::Vector3d(11.0, 12.0, 11.5));
  const TriangleMesh a = marching_cubes(vol);
  const TriangleMesh b = marching_cubes(vol);
  EXPECT_EQ(a.vertices, b.vertices);
  EXPECT_EQ(a.triangles, b.triangles);
}

TEST(LaplacianSmooth, ZeroIterationsIsIdentity) {
  const TriangleMesh m = marching_cubes(sphere_volume(16, 5.0, Eigen::Vector3d(7.5, 7.5, 7.5)));
  const TriangleMesh s = laplacian_smooth(m, 0);
  EXPECT_EQ(s.vertices, m.vertices);
  EXPECT_EQ(s.triangles, m.triangles);
  EXPECT_THROW(laplacian_smooth(m, -1), Error);
}

TEST(LaplacianSmooth, ReducesRadialNoise) {
  const Eigen::Vector3d c(15.5, 15.5, 15.5);
  const double r = 10.0;
  TriangleMesh m = marching_cubes(sphere_volume(32, r, c));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> noise(0.0, 0.3);
  for (auto& v : m.vertices) v += (v - c).normalized() * noise(rng);
  auto rms = [&](const TriangleMesh& mesh) {
    double s = 0.0;
    for (const auto& v : mesh.vertices) s += std::pow((v - c).norm() - r, 2);
    return std::sqrt(s / static_cast<double>(mesh.vertices.size()));
  };
  const TriangleMesh s = laplacian_smooth(m, 10);
  EXPECT_LT(rms(s), rms(m));
  EXPECT_EQ(s.vertices.size(), m.vertices.size());
  EXPECT_EQ(s.triangles, m.triangles);
}

TEST(Obj, EmptyMeshWritesNothing) {
  std::ostringstream out;
  write_obj(TriangleMesh{}, out);
  EXPECT_EQ(out.str(), "");
  std::istringstream in(out.str());
  EXPECT_TRUE(read_obj(in).empty());
}

TEST(Obj, UnitTriangle) {
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.triangles = {{0, 1, 2}};
  std::ostringstream out;
  write_obj(m, out);
  EXPECT_EQ(out.str(), "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
}

TEST(Obj, SphereRoundTripExact) {
  const TriangleMesh m = laplacian_smooth(marching_cubes(sphere_volume(16, 5.0, Eigen::Vector3d(7.3, 7.5, 7.9))), 2);
  std::ostringstream out;
  write_obj(m, out);
  std::istringstream in(out.str());
  const TriangleMesh back = read_obj(in);
  EXPECT_EQ(back.vertices, m.vertices);
  EXPECT_EQ(back.triangles, m.triangles);
  std::ostringstream again;
  write_obj(back, again);
  EXPECT_EQ(again.str(), out.str());
}

TEST(Obj, ReaderAcceptsCommonVariants) {
  std::istringstream in(
      "# comment\n"
      "o thing\n"
      "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\n"
      "vn 0 0 1\n"
      "f 1/1/1 2//1 3\n"
      "f -4 -3 -1\n");
  const TriangleMesh m = read_obj(in);
  ASSERT_EQ(m.triangles.size(), 2u);
  EXPECT_EQ(m.triangles[0], (std::array<int, 3>{0, 1, 2}));
  EXPECT_EQ(m.triangles[1], (std::array<int, 3>{0, 1, 3}));
  std::istringstream bad("v 0 0 0\nf 1 2 3\n");
  EXPECT_THROW(read_obj(bad), Error);
}

TEST(Occupancy, SingleOpaquePlane) {
  const MultiplaneImage mpi(Image(8, 8, 3, 0.5), {Image(8, 8, 1, 1.0)}, {1.2}, 1.0, 2.0);
  const CameraIntrinsics k = CameraIntrinsics::from_fov(8, 8, 0.8);
  const OccupancyVolume vol = build_occupancy(mpi, k, {.x = 8, .y = 8, .z = 4, .pad = false});
  for (int j = 0; j < 8; ++j)
    for (int i = 0; i < 8; ++i) EXPECT_EQ(vol.at(i, j, 0), 1.0);
  EXPECT_EQ(occupancy_at(mpi, 3.0, 4.0, 1.2), 1.0);
  EXPECT_EQ(occupancy_at(mpi, 3.0, 4.0, 1.3), 0.0);
}

TEST(Occupancy, MidwayAveragesNeighbours) {
  const MultiplaneImage mpi(Image(4, 4, 3), {Image(4, 4, 1, 0.2), Image(4, 4, 1, 0.8)}, {1.0, 2.0}, 1.0, 2.0);
  EXPECT_NEAR(occupancy_at(mpi, 1.0, 2.0, 1.5), 0.5, 1e-15);
  EXPECT_NEAR(occupancy_at(mpi, 1.0, 2.0, 1.25), 0.35, 1e-15);
  EXPECT_EQ(occupancy_at(mpi, 1.0, 2.0, 0.99), 0.0);
  EXPECT_EQ(occupancy_at(mpi, 1.0, 2.0, 2.01), 0.0);
}

TEST(Occupancy, PlaneSlicesMatchBilinearSampling) {
  std::mt19937_64 rng(2);
  const MultiplaneImage mpi = random_mpi(rng, 16, 5, 1.0, 2.0);
  for (size_t p = 0; p < 5; ++p)
    for (int s = 0; s < 50; ++s) {
      std::uniform_real_distribution<double> u(0.0, 15.0);
      const double x = u(rng), y = u(rng);
      EXPECT_NEAR(occupancy_at(mpi, x, y, mpi.depth(p)), oracle::bilinear_zero(mpi.alpha(p), x, y), 1e-6);
    }
  const CameraIntrinsics k = CameraIntrinsics::from_fov(16, 16, 0.8);
  const OccupancyVolume vol = build_occupancy(mpi, k, {.x = 16, .y = 16, .z = 9});
  // Padded: one zero layer on every face, interior end slices on the end planes.
  EXPECT_EQ(vol.nx, 18);
  for (int j = 0; j < vol.ny; ++j)
    for (int i = 0; i < vol.nx; ++i) {
      EXPECT_EQ(vol.at(i, j, 0), 0.0);
      EXPECT_EQ(vol.at(i, j, vol.nz - 1), 0.0);
    }
  for (int j = 1; j <= 16; ++j)
    for (int i = 1; i <= 16; ++i) {
      EXPECT_NEAR(vol.at(i, j, 1), mpi.alpha(0)(i - 1, j - 1), 1e-12);
      EXPECT_NEAR(vol.at(i, j, vol.nz - 2), mpi.alpha(4)(i - 1, j - 1), 1e-12);
    }
  // Frustum mapping: the lattice point of pixel (u, v) at depth z lands on
  // the back-projected ray.
  const Eigen::Vector3d w = vol.to_world({5.0, 9.0, 1.0});
  EXPECT_NEAR(w.z(), 1.0, 1e-12);
  EXPECT_NEAR(w.x(), (4.0 - k.cx) / k.fx, 1e-12);
  EXPECT_NEAR(w.y(), (8.0 - k.cy) / k.fy, 1e-12);
}

TEST(Occupancy, Errors) {
  std::mt19937_64 rng(3);
  const MultiplaneImage mpi = random_mpi(rng, 8, 2, 1.0, 2.0);
  const CameraIntrinsics k = CameraIntrinsics::from_fov(8, 8, 0.8);
  EXPECT_THROW(build_occupancy(mpi, k, {.x = 8, .y = 8, .z = 1}), Error);
  EXPECT_THROW(build_occupancy(mpi, CameraIntrinsics::from_fov(16, 16, 0.8), {}), Error);
}

TEST(Occupancy, SphereSceneGivesClosedMesh) {
  const SynthScene scene = synth_scene(SceneKind::SphereBillboards, {.size = 64, .planes = 48}, 1);
  const OccupancyVolume vol = build_occupancy(scene.mpi, scene.intrinsics, {.x = 48, .y = 48, .z = 48});
  const TriangleMesh m = marching_cubes(vol, 0.5);
  EXPECT_FALSE(m.empty());
  EXPECT_TRUE(is_watertight(m));
}

}  // namespace
}  // namespace gmpi
