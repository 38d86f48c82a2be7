// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

#include "gmpi/mesh.h"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include <Eigen/Geometry>

#include "gmpi/parallel.h"
#include "gmpi/warp.h"

namespace gmpi {

namespace {
#include "mc_tables.inc"

constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 0, 1}, {0, 0, 1},
                               {0, 1, 0}, {1, 1, 0}, {1, 1, 1}, {0, 1, 1}};
constexpr int kEdge[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                              {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};
}  // namespace

OccupancyVolume::OccupancyVolume(int nx_, int ny_, int nz_, double fill) : nx(nx_), ny(ny_), nz(nz_) {
  if (nx < 0 || ny < 0 || nz < 0) throw Error(ErrorKind::InvalidArgument, "negative volume size");
  values.assign(static_cast<size_t>(nx) * ny * nz, fill);
}

Eigen::Vector3d OccupancyVolume::to_world(const Eigen::Vector3d& lattice) const {
  const Eigen::Vector3d p = origin + spacing.cwiseProduct(lattice);
  if (!frustum) return p;
  const double z = p.z();
  return {(p.x() - frustum->cx) * z / frustum->fx, (p.y() - frustum->cy) * z / frustum->fy, z};
}

double occupancy_at(const MultiplaneImage& mpi, double u, double v, double z) {
  const auto& d = mpi.depths();
  if (z < d.front() || z > d.back()) return 0.0;
  auto sample = [&](size_t plane) {
    double a = 0.0;
    bilinear_sample(mpi.alpha(plane), {u, v}, Border::Zero, std::span<double>(&a, 1));
    return a;
  };
  if (d.size() == 1) return sample(0);
  // First plane with depth >= z; bracket is [hi - 1, hi].
  size_t hi = static_cast<size_t>(std::lower_bound(d.begin(), d.end(), z) - d.begin());
  if (d[hi] == z) return sample(hi);
  const size_t lo = hi - 1;
  const double t = (z - d[lo]) / (d[hi] - d[lo]);
  return (1.0 - t) * sample(lo) + t * sample(hi);
}

OccupancyVolume build_occupancy(const MultiplaneImage& mpi, const CameraIntrinsics& intrinsics,
                                const OccupancyGrid& grid) {
  if (grid.x < 2 || grid.y < 2 || grid.z < 2) throw Error(ErrorKind::InvalidArgument, "occupancy grid needs at least 2 samples per axis");
  intrinsics.validate();
  if (intrinsics.width != mpi.width() || intrinsics.height != mpi.height())
    throw Error(ErrorKind::InvalidArgument, "intrinsics do not match the MPI resolution");

  const int pad = grid.pad ? 1 : 0;
  OccupancyVolume vol(grid.x + 2 * pad, grid.y + 2 * pad, grid.z + 2 * pad);
  const double first = mpi.depths().front();
  const double last = mpi.depths().back();
  const double z_extent = last > first ? last - first : mpi.far() - mpi.near();
  vol.spacing = {(mpi.width() - 1.0) / (grid.x - 1), (mpi.height() - 1.0) / (grid.y - 1), z_extent / (grid.z - 1)};
  vol.origin = {-pad * vol.spacing.x(), -pad * vol.spacing.y(), first - pad * vol.spacing.z()};
  vol.frustum = FrustumMapping{intrinsics.fx, intrinsics.fy, intrinsics.cx, intrinsics.cy};

  parallel_for(static_cast<size_t>(vol.nz), [&](size_t ks) {
    const int k = static_cast<int>(ks);
    // Interior end slices sit exactly on the first and last planes.
    double z = vol.origin.z() + k * vol.spacing.z();
    if (k == pad) z = first;
    if (k == pad + grid.z - 1 && last > first) z = last;
    for (int j = 0; j < vol.ny; ++j) {
      const double v = vol.origin.y() + j * vol.spacing.y();
      for (int i = 0; i < vol.nx; ++i) {
        const double u = vol.origin.x() + i * vol.spacing.x();
        vol.at(i, j, k) = std::clamp(occupancy_at(mpi, u, v, z), 0.0, 1.0);
      }
    }
  });
  return vol;
}

void TriangleMesh::validate() const {
  const auto n = static_cast<int>(vertices.size());
  for (const auto& t : triangles)
    for (int v : t)
      if (v < 0 || v >= n) throw Error(ErrorKind::InvalidArgument, "triangle index out of range");
}

namespace {

struct CellTriangle {
  std::array<uint64_t, 3> keys;
  std::array<Eigen::Vector3d, 3> lattice;
};

}  // namespace

TriangleMesh marching_cubes(const OccupancyVolume& volume, double iso) {
  if (!(iso > 0.0 && iso < 1.0)) throw Error(ErrorKind::InvalidArgument, "iso level must lie in (0, 1)");
  if (volume.values.size() != static_cast<size_t>(volume.nx) * volume.ny * volume.nz)
    throw Error(ErrorKind::InvalidArgument, "volume value count does not match its size");
  TriangleMesh mesh;
  if (volume.nx < 2 || volume.ny < 2 || volume.nz < 2) return mesh;

  // Vertex keys: 4 * corner + axis for edge crossings, 4 * corner + 3 for
  // crossings that land exactly on a corner.
  auto corner_id = [&](int i, int j, int k) { return static_cast<uint64_t>(volume.index(i, j, k)); };

  const size_t slabs = static_cast<size_t>(volume.nz - 1);
  std::vector<std::vector<CellTriangle>> per_slab(slabs);
  parallel_for(slabs, [&](size_t ks) {
    const int k = static_cast<int>(ks);
    auto& out = per_slab[ks];
    for (int j = 0; j + 1 < volume.ny; ++j) {
      for (int i = 0; i + 1 < volume.nx; ++i) {
        double val[8];
        int cube = 0;
        for (int c = 0; c < 8; ++c) {
          val[c] = volume.at(i + kCorner[c][0], j + kCorner[c][1], k + kCorner[c][2]);
          if (val[c] < iso) cube |= 1 << c;
        }
        const int edges = kEdgeTable[cube];
        if (edges == 0) continue;
        uint64_t key[12];
        Eigen::Vector3d pos[12];
        for (int e = 0; e < 12; ++e) {
          if (!(edges & (1 << e))) continue;
          int a = kEdge[e][0], b = kEdge[e][1];
          // Orient from the lower to the higher lattice corner so that
          // neighboring cells compute the identical crossing.
          if (kCorner[a][0] + kCorner[a][1] + kCorner[a][2] > kCorner[b][0] + kCorner[b][1] + kCorner[b][2]) std::swap(a, b);
          const Eigen::Vector3d pa(i + kCorner[a][0], j + kCorner[a][1], k + kCorner[a][2]);
          const Eigen::Vector3d pb(i + kCorner[b][0], j + kCorner[b][1], k + kCorner[b][2]);
          const double t = (iso - val[a]) / (val[b] - val[a]);
          const uint64_t ca = corner_id(static_cast<int>(pa.x()), static_cast<int>(pa.y()), static_cast<int>(pa.z()));
          const uint64_t cb = corner_id(static_cast<int>(pb.x()), static_cast<int>(pb.y()), static_cast<int>(pb.z()));
          if (t <= 0.0) {
            key[e] = 4 * ca + 3;
            pos[e] = pa;
          } else if (t >= 1.0) {
            key[e] = 4 * cb + 3;
            pos[e] = pb;
          } else {
            int axis = 0;
            while (pa[axis] == pb[axis]) ++axis;
            key[e] = 4 * ca + static_cast<uint64_t>(axis);
            pos[e] = pa + t * (pb - pa);
          }
        }
        for (const int* t = kTriTable[cube]; *t != -1; t += 3)
          out.push_back({{key[t[0]], key[t[1]], key[t[2]]}, {pos[t[0]], pos[t[1]], pos[t[2]]}});
      }
    }
  });

  std::unordered_map<uint64_t, int> welded;
  for (const auto& slab : per_slab) {
    for (const CellTriangle& tri : slab) {
      std::array<int, 3> idx;
      for (int v = 0; v < 3; ++v) {
        auto [it, inserted] = welded.try_emplace(tri.keys[static_cast<size_t>(v)], static_cast<int>(mesh.vertices.size()));
        if (inserted) mesh.vertices.push_back(volume.to_world(tri.lattice[static_cast<size_t>(v)]));
        idx[static_cast<size_t>(v)] = it->second;
      }
      // Collapsed by corner welding.
      if (idx[0] == idx[1] || idx[1] == idx[2] || idx[0] == idx[2]) continue;
      mesh.triangles.push_back(idx);
    }
  }
  return mesh;
}

TriangleMesh laplacian_smooth(const TriangleMesh& mesh, int iterations, double factor) {
  if (iterations < 0) throw Error(ErrorKind::InvalidArgument, "iterations must be non-negative");
  mesh.validate();
  TriangleMesh out = mesh;
  if (iterations == 0) return out;
  std::vector<std::vector<int>> neighbors(mesh.vertices.size());
  for (const auto& t : mesh.triangles)
    for (int e = 0; e < 3; ++e) {
      const int a = t[static_cast<size_t>(e)], b = t[static_cast<size_t>((e + 1) % 3)];
      neighbors[static_cast<size_t>(a)].push_back(b);
      neighbors[static_cast<size_t>(b)].push_back(a);
    }
  for (auto& n : neighbors) {
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
  }
  std::vector<Eigen::Vector3d> next(out.vertices.size());
  for (int it = 0; it < iterations; ++it) {
    for (size_t v = 0; v < out.vertices.size(); ++v) {
      if (neighbors[v].empty()) {
        next[v] = out.vertices[v];
        continue;
      }
      Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
      for (int n : neighbors[v]) centroid += out.vertices[static_cast<size_t>(n)];
      centroid /= static_cast<double>(neighbors[v].size());
      next[v] = out.vertices[v] + factor * (centroid - out.vertices[v]);
    }
    out.vertices.swap(next);
  }
  return out;
}

namespace {

double triangle_area(const TriangleMesh& mesh, const std::array<int, 3>& t) {
  const auto& a = mesh.vertices[static_cast<size_t>(t[0])];
  const auto& b = mesh.vertices[static_cast<size_t>(t[1])];
  const auto& c = mesh.vertices[static_cast<size_t>(t[2])];
  return 0.5 * (b - a).cross(c - a).norm();
}

std::map<std::pair<int, int>, int> edge_uses(const TriangleMesh& mesh) {
  std::map<std::pair<int, int>, int> uses;
  for (const auto& t : mesh.triangles)
    for (int e = 0; e < 3; ++e) {
      const int a = t[static_cast<size_t>(e)], b = t[static_cast<size_t>((e + 1) % 3)];
      ++uses[{std::min(a, b), std::max(a, b)}];
    }
  return uses;
}

}  // namespace

double surface_area(const TriangleMesh& mesh) {
  double area = 0.0;
  for (const auto& t : mesh.triangles) area += triangle_area(mesh, t);
  return area;
}

double min_triangle_area(const TriangleMesh& mesh) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& t : mesh.triangles) m = std::min(m, triangle_area(mesh, t));
  return m;
}

bool is_watertight(const TriangleMesh& mesh) {
  for (const auto& [edge, count] : edge_uses(mesh))
    if (count != 2) return false;
  return true;
}

long euler_characteristic(const TriangleMesh& mesh) {
  return static_cast<long>(mesh.vertices.size()) - static_cast<long>(edge_uses(mesh).size()) +
         static_cast<long>(mesh.triangles.size());
}

void write_obj(const TriangleMesh& mesh, std::ostream& out) {
  mesh.validate();
  char line[128];
  for (const auto& v : mesh.vertices) {
    std::snprintf(line, sizeof line, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out << line;
  }
  for (const auto& t : mesh.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

void export_obj(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  write_obj(mesh, file);
  if (!file) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

TriangleMesh read_obj(std::istream& in) {
  TriangleMesh mesh;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      Eigen::Vector3d v;
      if (!(ls >> v.x() >> v.y() >> v.z())) throw Error(ErrorKind::Io, "bad vertex on line " + std::to_string(line_no));
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string item;
      while (ls >> item) {
        const int i = std::stoi(item.substr(0, item.find('/')));
        idx.push_back(i < 0 ? static_cast<int>(mesh.vertices.size()) + i : i - 1);
      }
      if (idx.size() < 3) throw Error(ErrorKind::Io, "face with fewer than 3 vertices on line " + std::to_string(line_no));
      for (size_t k = 1; k + 1 < idx.size(); ++k) mesh.triangles.push_back({idx[0], idx[k], idx[k + 1]});
    }
  }
  mesh.validate();
  return mesh;
}

TriangleMesh import_obj(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  return read_obj(file);
}

}  // namespace gmpi
