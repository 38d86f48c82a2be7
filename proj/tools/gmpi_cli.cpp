// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

// gmpi: render, inspect and generate multiplane images from the command line.
// Exit codes: 0 success, 1 failure (including failed verification), 2 usage.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gmpi/composite.h"
#include "gmpi/container.h"
#include "gmpi/grad.h"
#include "gmpi/mesh.h"
#include "gmpi/parallel.h"
#include "gmpi/png_io.h"
#include "gmpi/shading.h"
#include "gmpi/synth.h"
#include "gmpi/toygen.h"

namespace fs = std::filesystem;
using namespace gmpi;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

double radians(double degrees) { return degrees * std::numbers::pi / 180.0; }

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string path_in(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void write_depth(const std::string& out_dir, const std::string& label, const Image& depth) {
  const auto [lo_it, hi_it] = std::minmax_element(depth.data().begin(), depth.data().end());
  const double lo = *lo_it, hi = *hi_it;
  const double scale = hi > lo ? 65535.0 / (hi - lo) : 0.0;
  Image normalized(depth.width(), depth.height(), 1);
  for (size_t k = 0; k < depth.size(); ++k) normalized.data()[k] = hi > lo ? (depth.data()[k] - lo) / (hi - lo) : 0.0;
  write_png(path_in(out_dir, label + "_depth.png"), normalized, 16);
  std::ofstream side(path_in(out_dir, label + "_depth.txt"));
  char buf[256];
  std::snprintf(buf, sizeof buf, "min %.17g\nmax %.17g\nscale %.17g\n", lo, hi, scale);
  side << buf;
  if (!side) throw Error(ErrorKind::Io, "failed writing depth sidecar for '" + label + "'");
}

Image encode_normals(const Image& normals) {
  Image out = normals;
  for (double& v : out.data()) v = 0.5 * (v + 1.0);
  return out;
}

// ---------------------------------------------------------------- render

struct RenderArgs {
  std::string mpi_dir, trajectory, out_dir;
  bool depth = false, normal = false, shaded = false;
  double ka = 0.9, kd = 0.1;
  double light_h = 0.0, light_v = 0.2 * 180.0 / std::numbers::pi;  // degrees
  std::vector<double> backdrop{0.0, 0.0, 0.0};
};

int cmd_render(const RenderArgs& a) {
  if (a.backdrop.size() != 3) throw UsageError("--backdrop takes three values");
  const LoadedMpi loaded = load_mpi(a.mpi_dir);
  const Trajectory traj = load_trajectory(a.trajectory);
  fs::create_directories(a.out_dir);
  const CameraPair cams{loaded.intrinsics, loaded.intrinsics};
  const std::array<double, 3> backdrop{a.backdrop[0], a.backdrop[1], a.backdrop[2]};

  std::optional<MultiplaneImage> shaded;
  if (a.shaded) {
    ShadingParams params{a.ka, a.kd, light_direction({radians(a.light_h), radians(a.light_v)})};
    params.validate();
    shaded = shade_mpi(loaded.mpi, loaded.intrinsics, params);
  }
  const bool need_depth = a.depth || a.normal;
  parallel_for(traj.poses.size(), [&](size_t i) {
    const TrajectoryPose& p = traj.poses[i];
    const RenderOutput out = render(loaded.mpi, cams, p.pose, {need_depth});
    write_png(path_in(a.out_dir, p.label + ".png"), over_backdrop(out, backdrop), 8);
    if (a.depth) write_depth(a.out_dir, p.label, *out.depth);
    if (a.normal) {
      Image d = *out.depth;
      for (size_t k = 0; k < d.size(); ++k) d.data()[k] += out.transmittance.data()[k] * loaded.mpi.far();
      write_png(path_in(a.out_dir, p.label + "_normal.png"), encode_normals(normal_map(d, loaded.intrinsics)), 8);
    }
    if (shaded) {
      const RenderOutput s = render(*shaded, cams, p.pose, {false});
      write_png(path_in(a.out_dir, p.label + "_shaded.png"), over_backdrop(s, backdrop), 8);
    }
  });
  std::cout << "rendered " << traj.poses.size() << " pose(s) to " << a.out_dir << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- orbit

struct OrbitArgs {
  std::vector<double> yaw{0.0, 0.0}, pitch{0.0, 0.0};
  int count = 1;
  double center_depth = 0.0;
  std::string mpi_dir, out;
};

int cmd_orbit(const OrbitArgs& a) {
  if (a.yaw.size() != 2 || a.pitch.size() != 2) throw UsageError("--yaw and --pitch take two values");
  double center = a.center_depth;
  if (center <= 0.0) {
    if (a.mpi_dir.empty()) throw UsageError("give --center-depth or --mpi");
    const LoadedMpi loaded = load_mpi(a.mpi_dir);
    center = 0.5 * (loaded.mpi.near() + loaded.mpi.far());
  }
  OrbitSpec spec{radians(a.yaw[0]), radians(a.yaw[1]), radians(a.pitch[0]), radians(a.pitch[1]), a.count, center};
  save_trajectory(orbit_trajectory(spec), a.out);
  std::cout << "wrote " << a.count << " pose(s) to " << a.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- gradcheck

int cmd_gradcheck(const GradCheckConfig& config) {
  const GradCheckResult result = run_gradient_check(config);
  std::printf("%-12s %10s %8s %8s %14s\n", "tensor", "checked", "skipped", "failed", "max_rel_error");
  for (const TensorError& t : result.tensors)
    std::printf("%-12s %10zu %8zu %8zu %14.3e\n", t.name.c_str(), t.checked, t.skipped, t.failures, t.max_rel_error);
  std::printf("tolerance %.1e: %s\n", config.fd.tolerance, result.passed ? "PASS" : "FAIL");
  return result.passed ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------- mesh

struct MeshArgs {
  std::string mpi_dir, out;
  std::vector<int> grid{64, 64, 64};
  double iso = 0.5;
  int smooth = 0;
  double smooth_factor = 0.5;
};

int cmd_mesh(const MeshArgs& a) {
  if (a.grid.size() != 3) throw UsageError("--grid takes three values");
  const LoadedMpi loaded = load_mpi(a.mpi_dir);
  const OccupancyVolume vol = build_occupancy(loaded.mpi, loaded.intrinsics, {a.grid[0], a.grid[1], a.grid[2], true});
  TriangleMesh mesh = marching_cubes(vol, a.iso);
  mesh = laplacian_smooth(mesh, a.smooth, a.smooth_factor);
  export_obj(mesh, a.out);
  if (mesh.empty()) std::cerr << "warning: iso level " << a.iso << " produced an empty mesh\n";
  std::cout << "wrote " << mesh.vertices.size() << " vertices, " << mesh.triangles.size() << " triangles to " << a.out
            << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- synth / toygen

struct SynthArgs {
  std::string kind = "layered-disks", out;
  SceneParams params;
  uint64_t seed = 0;
  int bit_depth = 8;
};

int cmd_synth(const SynthArgs& a) {
  const SynthScene scene = synth_scene(parse_scene_kind(a.kind), a.params, a.seed);
  save_mpi(scene.mpi, scene.intrinsics, a.out, {a.bit_depth, CameraPose::identity()});
  std::cout << "wrote " << a.kind << " (" << scene.mpi.plane_count() << " planes) to " << a.out << "\n";
  return kExitOk;
}

struct ToygenArgs {
  std::string config_file, out;
  ToyConfig config;
  uint64_t latent_seed = 0;
  double fov_degrees = 12.0;
  int bit_depth = 8;
};

int cmd_toygen(ToygenArgs a, const CLI::App& sub) {
  if (!a.config_file.empty()) {
    std::ifstream in(a.config_file);
    if (!in) throw Error(ErrorKind::InvalidConfig, "cannot open config '" + a.config_file + "'");
    ToyConfig from_file = parse_toy_config(in, ToyConfig{});
    // Flags given explicitly override the file.
    auto given = [&](const char* name) { return sub.count(name) > 0; };
    if (given("--planes")) from_file.planes = a.config.planes;
    if (given("--resolution")) from_file.resolution = a.config.resolution;
    if (given("--alpha-resolution")) from_file.alpha_resolution = a.config.alpha_resolution;
    if (given("--near")) from_file.near = a.config.near;
    if (given("--far")) from_file.far = a.config.far;
    if (given("--seed")) from_file.seed = a.config.seed;
    if (given("--psi")) from_file.psi = a.config.psi;
    if (given("--channel-base")) from_file.channel_base = a.config.channel_base;
    a.config = from_file;
  }
  a.config.validate();
  const ToyGenerator gen(a.config);
  const std::vector<double> z = toy_latent(a.latent_seed, a.config.latent_dim);
  const MultiplaneImage mpi = gen.generate(z);
  const CameraIntrinsics k = CameraIntrinsics::from_fov(a.config.resolution, a.config.resolution, radians(a.fov_degrees));
  save_mpi(mpi, k, a.out, {a.bit_depth, CameraPose::identity()});
  std::cout << "wrote toy MPI (" << mpi.plane_count() << " planes, " << a.config.resolution << "px) to " << a.out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gmpi: multiplane image rendering, geometry and toy generation"};
  app.require_subcommand(1);

  RenderArgs render_args;
  auto* render_cmd = app.add_subcommand("render", "Render one image per trajectory pose");
  render_cmd->add_option("--mpi", render_args.mpi_dir, "MPI container directory")->required();
  render_cmd->add_option("--trajectory", render_args.trajectory, "Trajectory JSON file")->required();
  render_cmd->add_option("--out", render_args.out_dir, "Output directory")->required();
  render_cmd->add_flag("--depth", render_args.depth, "Also write <label>_depth.png (16-bit) and <label>_depth.txt");
  render_cmd->add_flag("--normal", render_args.normal, "Also write <label>_normal.png");
  render_cmd->add_flag("--shaded", render_args.shaded, "Also write <label>_shaded.png");
  render_cmd->add_option("--ka", render_args.ka, "Ambient coefficient for --shaded")->capture_default_str();
  render_cmd->add_option("--kd", render_args.kd, "Diffuse coefficient for --shaded")->capture_default_str();
  render_cmd->add_option("--light-h", render_args.light_h, "Horizontal light angle, degrees")->capture_default_str();
  render_cmd->add_option("--light-v", render_args.light_v, "Vertical light angle, degrees")->capture_default_str();
  render_cmd->add_option("--backdrop", render_args.backdrop, "Backdrop color r g b in [0,1]")
      ->expected(3)
      ->delimiter(',');

  OrbitArgs orbit_args;
  auto* orbit_cmd = app.add_subcommand("orbit", "Write a look-at orbit trajectory");
  orbit_cmd->add_option("--yaw", orbit_args.yaw, "Yaw range lo,hi in degrees")->expected(2)->delimiter(',');
  orbit_cmd->add_option("--pitch", orbit_args.pitch, "Pitch range lo,hi in degrees")->expected(2)->delimiter(',');
  orbit_cmd->add_option("--count", orbit_args.count, "Number of poses")->capture_default_str();
  orbit_cmd->add_option("--center-depth", orbit_args.center_depth, "Depth of the orbit center");
  orbit_cmd->add_option("--mpi", orbit_args.mpi_dir, "Take the center depth (near+far)/2 from this container");
  orbit_cmd->add_option("--out", orbit_args.out, "Trajectory file to write")->required();

  GradCheckConfig grad_config;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Compare analytic render gradients with finite differences");
  grad_cmd->add_option("--seed", grad_config.seed, "Random seed")->capture_default_str();
  grad_cmd->add_option("--size", grad_config.size, "Image side length")->capture_default_str();
  grad_cmd->add_option("--planes", grad_config.planes, "Plane count")->capture_default_str();
  grad_cmd->add_option("--trials", grad_config.trials, "Number of random MPIs and poses")->capture_default_str();
  grad_cmd->add_flag("--canonical", grad_config.canonical_pose, "Render at the canonical pose");
  grad_cmd->add_flag("--inject-bug", grad_config.inject_bug, "Self-test: corrupt one analytic gradient");
  grad_cmd->add_option("--tolerance", grad_config.fd.tolerance, "Relative error tolerance")->capture_default_str();

  MeshArgs mesh_args;
  auto* mesh_cmd = app.add_subcommand("mesh", "Extract an iso-surface from the alpha stack as OBJ");
  mesh_cmd->add_option("--mpi", mesh_args.mpi_dir, "MPI container directory")->required();
  mesh_cmd->add_option("--grid", mesh_args.grid, "Grid samples x,y,z")->expected(3)->delimiter(',');
  mesh_cmd->add_option("--iso", mesh_args.iso, "Iso level in (0,1)")->capture_default_str();
  mesh_cmd->add_option("--smooth", mesh_args.smooth, "Laplacian smoothing iterations")->capture_default_str();
  mesh_cmd->add_option("--smooth-factor", mesh_args.smooth_factor, "Smoothing step")->capture_default_str();
  mesh_cmd->add_option("--out", mesh_args.out, "OBJ file to write")->required();

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Write a procedural test scene container");
  synth_cmd->add_option("--kind", synth_args.kind, "layered-disks | checker-card | sphere-billboards")->capture_default_str();
  synth_cmd->add_option("--size", synth_args.params.size, "Image side length")->capture_default_str();
  synth_cmd->add_option("--planes", synth_args.params.planes, "Plane count (sphere-billboards)")->capture_default_str();
  synth_cmd->add_option("--near", synth_args.params.near, "Near depth")->capture_default_str();
  synth_cmd->add_option("--far", synth_args.params.far, "Far depth")->capture_default_str();
  synth_cmd->add_option("--fov", synth_args.params.fov_degrees, "Horizontal field of view, degrees")->capture_default_str();
  synth_cmd->add_option("--seed", synth_args.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--bit-depth", synth_args.bit_depth, "PNG bit depth, 8 or 16")->capture_default_str();
  synth_cmd->add_option("--out", synth_args.out, "Container directory")->required();

  ToygenArgs toy_args;
  auto* toy_cmd = app.add_subcommand("toygen", "Generate an MPI with the seeded toy generator");
  toy_cmd->add_option("--config", toy_args.config_file, "key = value config file; flags override it");
  toy_cmd->add_option("--planes", toy_args.config.planes, "Plane count")->capture_default_str();
  toy_cmd->add_option("--resolution", toy_args.config.resolution, "Output resolution")->capture_default_str();
  toy_cmd->add_option("--alpha-resolution", toy_args.config.alpha_resolution, "Alpha branch resolution")->capture_default_str();
  toy_cmd->add_option("--near", toy_args.config.near, "Near depth")->capture_default_str();
  toy_cmd->add_option("--far", toy_args.config.far, "Far depth")->capture_default_str();
  toy_cmd->add_option("--seed", toy_args.config.seed, "Weight seed")->capture_default_str();
  toy_cmd->add_option("--latent-seed", toy_args.latent_seed, "Latent seed")->capture_default_str();
  toy_cmd->add_option("--psi", toy_args.config.psi, "Truncation in [0,1]")->capture_default_str();
  toy_cmd->add_option("--channel-base", toy_args.config.channel_base, "Channel base")->capture_default_str();
  toy_cmd->add_option("--fov", toy_args.fov_degrees, "Horizontal field of view, degrees")->capture_default_str();
  toy_cmd->add_option("--bit-depth", toy_args.bit_depth, "PNG bit depth, 8 or 16")->capture_default_str();
  toy_cmd->add_option("--out", toy_args.out, "Container directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*render_cmd) return cmd_render(render_args);
    if (*orbit_cmd) return cmd_orbit(orbit_args);
    if (*grad_cmd) return cmd_gradcheck(grad_config);
    if (*mesh_cmd) return cmd_mesh(mesh_args);
    if (*synth_cmd) return cmd_synth(synth_args);
    if (*toy_cmd) return cmd_toygen(toy_args, *toy_cmd);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const bool usage = e.kind() == ErrorKind::InvalidConfig || e.kind() == ErrorKind::UnknownKind;
    return usage ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
