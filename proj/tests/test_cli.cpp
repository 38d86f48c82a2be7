// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>

#include <sys/wait.h>

#include <Eigen/Geometry>
#include <json.hpp>

#include "gmpi/composite.h"
#include "gmpi/container.h"
#include "gmpi/mesh.h"
#include "gmpi/png_io.h"

namespace gmpi {
namespace {

namespace fs = std::filesystem;
constexpr double kDeg = std::numbers::pi / 180.0;

fs::path work_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  fs::path dir = fs::path(GMPI_TEST_TMP) / (std::string(info->test_suite_name()) + "." + info->name());
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

CliResult gmpi_cli(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + GMPI_CLI_PATH + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, slurp(out), slurp(err)};
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

TEST(Cli, UsageErrorsExitTwo) {
  const fs::path dir = work_dir();
  EXPECT_EQ(gmpi_cli("", dir).code, 2);
  EXPECT_EQ(gmpi_cli("frobnicate", dir).code, 2);
  EXPECT_EQ(gmpi_cli("render --mpi x", dir).code, 2);
  EXPECT_EQ(gmpi_cli("synth --kind teapot --out " + q(dir / "s"), dir).code, 2);
  EXPECT_EQ(gmpi_cli("orbit --yaw 1 --out " + q(dir / "t.json"), dir).code, 2);
  EXPECT_EQ(gmpi_cli("gradcheck --size notanumber", dir).code, 2);
  std::ofstream(dir / "bad.cfg") << "colour = 3\n";
  EXPECT_EQ(gmpi_cli("toygen --config " + q(dir / "bad.cfg") + " --out " + q(dir / "toy"), dir).code, 2);
  EXPECT_EQ(gmpi_cli("--help", dir).code, 0);
}

TEST(Cli, RuntimeFailuresExitOne) {
  const fs::path dir = work_dir();
  const CliResult r = gmpi_cli("render --mpi " + q(dir / "missing") + " --trajectory " + q(dir / "t.json") + " --out " +
                             q(dir / "frames"),
                         dir);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error"), std::string::npos);
  EXPECT_EQ(gmpi_cli("orbit --yaw 10,-10 --count 3 --center-depth 1.5 --out " + q(dir / "t.json"), dir).code, 1);
}

TEST(Cli, SynthAndRenderAreDeterministic) {
  const fs::path dir = work_dir();
  for (const char* sub : {"a", "b"}) {
    ASSERT_EQ(gmpi_cli("synth --kind checker-card --size 48 --seed 3 --out " + q(dir / sub), dir).code, 0);
    ASSERT_EQ(gmpi_cli("orbit --yaw -6,6 --pitch -2,2 --count 3 --mpi " + q(dir / sub) + " --out " +
                           q(dir / sub / "traj.json"),
                       dir)
                  .code,
              0);
    ASSERT_EQ(gmpi_cli(std::string("render --depth --normal --shaded --mpi ") + q(dir / sub) + " --trajectory " +
                           q(dir / sub / "traj.json") + " --out " + q(dir / sub / "frames"),
                       dir)
                  .code,
              0);
  }
  int files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
    if (!e.is_regular_file()) continue;
    const fs::path other = dir / "b" / fs::relative(e.path(), dir / "a");
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(slurp(e.path()), slurp(other)) << e.path();
    ++files;
  }
  // manifest, color, alphas, trajectory, 3 x (color, depth, depth sidecar, normal, shaded)
  EXPECT_GE(files, 3 + 15);
  EXPECT_EQ(read_png((dir / "a" / "frames" / "orbit_001_depth.png").string()).bit_depth, 16);
  const std::string sidecar = slurp(dir / "a" / "frames" / "orbit_001_depth.txt");
  EXPECT_NE(sidecar.find("min"), std::string::npos);
  EXPECT_NE(sidecar.find("max"), std::string::npos);
}

TEST(Cli, CanonicalRenderEqualsComposite) {
  const fs::path dir = work_dir();
  ASSERT_EQ(gmpi_cli("synth --kind layered-disks --size 64 --out " + q(dir / "scene"), dir).code, 0);
  ASSERT_EQ(gmpi_cli("orbit --count 1 --center-depth 1.5 --out " + q(dir / "t.json"), dir).code, 0);
  const Trajectory t = load_trajectory((dir / "t.json").string());
  ASSERT_EQ(t.poses.size(), 1u);
  EXPECT_TRUE(t.poses[0].pose.is_identity());
  ASSERT_EQ(gmpi_cli("render --mpi " + q(dir / "scene") + " --trajectory " + q(dir / "t.json") + " --out " +
                         q(dir / "frames"),
                     dir)
                .code,
            0);
  const LoadedMpi loaded = load_mpi((dir / "scene").string());
  std::vector<WarpedPlane> planes;
  for (size_t i = 0; i < loaded.mpi.plane_count(); ++i) planes.push_back({loaded.mpi.plane_color(i), loaded.mpi.alpha(i)});
  const Image expected = over_backdrop(over_composite(planes), {0.0, 0.0, 0.0});
  const PngImage got = read_png((dir / "frames" / (t.poses[0].label + ".png")).string());
  ASSERT_EQ(got.bit_depth, 8);
  ASSERT_TRUE(got.image.same_shape(expected));
  for (size_t k = 0; k < expected.size(); ++k)
    EXPECT_EQ(got.image.data()[k], std::round(std::clamp(expected.data()[k], 0.0, 1.0) * 255.0) / 255.0);
}

TEST(Cli, OrbitFileContents) {
  const fs::path dir = work_dir();
  ASSERT_EQ(gmpi_cli("orbit --yaw -10,10 --count 3 --center-depth 1.2 --out " + q(dir / "t.json"), dir).code, 0);
  const Trajectory t = load_trajectory((dir / "t.json").string());
  ASSERT_EQ(t.poses.size(), 3u);
  const double expected[3] = {-10 * kDeg, 0.0, 10 * kDeg};
  for (size_t i = 0; i < 3; ++i) {
    const Eigen::Matrix3d r = t.poses[i].pose.rotation();
    EXPECT_NEAR(std::atan2(r(0, 2), r(2, 2)), expected[i], 1e-12);
    EXPECT_LE((r.transpose() * r - Eigen::Matrix3d::Identity()).norm(), 1e-9);
  }
  ASSERT_TRUE(t.generator.has_value());
  EXPECT_EQ(t.generator->center_depth, 1.2);
}

// Renders a nine-yaw orbit of the two-disk scene and locates each disk by
// its flat color in the written frames.
TEST(Cli, OrbitParallaxMatchesPinhole) {
  const fs::path dir = work_dir();
  ASSERT_EQ(gmpi_cli("synth --kind layered-disks --size 128 --seed 2 --out " + q(dir / "scene"), dir).code, 0);
  ASSERT_EQ(gmpi_cli("orbit --yaw -8,8 --count 9 --mpi " + q(dir / "scene") + " --out " + q(dir / "t.json"), dir).code, 0);
  ASSERT_EQ(gmpi_cli("render --mpi " + q(dir / "scene") + " --trajectory " + q(dir / "t.json") + " --out " +
                         q(dir / "frames"),
                     dir)
                .code,
            0);
  const LoadedMpi scene = load_mpi((dir / "scene").string());
  const Trajectory t = load_trajectory((dir / "t.json").string());
  ASSERT_EQ(t.poses.size(), 9u);
  ASSERT_TRUE(t.generator.has_value());
  EXPECT_NEAR(t.generator->center_depth, 1.5, 1e-12);
  const CameraIntrinsics& k = scene.intrinsics;

  struct DiskRef {
    Eigen::Vector2d center;
    double depth;
    std::array<double, 3> color;
  };
  std::vector<DiskRef> disks;
  for (size_t i = 0; i < 2; ++i) {
    const Eigen::Vector2d c(i == 0 ? 0.35 * 128 : 0.65 * 128, 0.5 * 128);
    const int px = static_cast<int>(std::lround(c.x())), py = static_cast<int>(std::lround(c.y()));
    disks.push_back({c, scene.mpi.depth(i), {scene.mpi.color()(px, py, 0), scene.mpi.color()(px, py, 1), scene.mpi.color()(px, py, 2)}});
  }

  for (const TrajectoryPose& tp : t.poses) {
    const Image frame = read_png((dir / "frames" / (tp.label + ".png")).string()).image;
    for (const DiskRef& d : disks) {
      double sx = 0.0, sy = 0.0;
      int count = 0;
      for (int y = 0; y < frame.height(); ++y)
        for (int x = 0; x < frame.width(); ++x) {
          bool match = true;
          for (int c = 0; c < 3; ++c) match = match && std::abs(frame(x, y, c) - d.color[static_cast<size_t>(c)]) <= 1.5 / 255.0;
          if (!match) continue;
          sx += x;
          sy += y;
          ++count;
        }
      ASSERT_GT(count, 500) << tp.label;
      const Eigen::Vector3d canonical_point = d.depth * (k.K_inverse() * d.center.homogeneous());
      const Eigen::Vector3d target_point = tp.pose.inverse().apply(canonical_point);
      const Eigen::Vector2d expected = (k.K() * target_point).hnormalized();
      const Eigen::Vector2d measured(sx / count, sy / count);
      EXPECT_LE((measured - expected).norm(), 0.5) << tp.label << " depth " << d.depth << " measured "
                                                   << measured.transpose() << " expected " << expected.transpose();
    }
  }
}

TEST(Cli, GradcheckPassesAndSelfTestFails) {
  const fs::path dir = work_dir();
  const CliResult ok = gmpi_cli("gradcheck --trials 2", dir);
  EXPECT_EQ(ok.code, 0) << ok.out << ok.err;
  EXPECT_NE(ok.out.find("color"), std::string::npos);
  EXPECT_NE(ok.out.find("alpha[3]"), std::string::npos);
  EXPECT_NE(ok.out.find("PASS"), std::string::npos);
  const CliResult bad = gmpi_cli("gradcheck --inject-bug", dir);
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("FAIL"), std::string::npos);
}

TEST(Cli, MeshOfSphereSceneIsWatertight) {
  const fs::path dir = work_dir();
  ASSERT_EQ(gmpi_cli("synth --kind sphere-billboards --size 64 --planes 64 --out " + q(dir / "scene"), dir).code, 0);
  ASSERT_EQ(gmpi_cli("mesh --mpi " + q(dir / "scene") + " --grid 64,64,64 --out " + q(dir / "sphere.obj"), dir).code, 0);
  const TriangleMesh m = import_obj((dir / "sphere.obj").string());
  EXPECT_TRUE(is_watertight(m));
  EXPECT_EQ(euler_characteristic(m), 2);
  const double r = 0.35;
  EXPECT_LE(std::abs(surface_area(m) / (4.0 * std::numbers::pi * r * r) - 1.0), 0.05) << surface_area(m);

  // Zero smoothing iterations leave the file byte-identical.
  ASSERT_EQ(gmpi_cli("mesh --mpi " + q(dir / "scene") + " --grid 64,64,64 --smooth 0 --out " + q(dir / "s0.obj"), dir).code, 0);
  EXPECT_EQ(slurp(dir / "sphere.obj"), slurp(dir / "s0.obj"));
  ASSERT_EQ(gmpi_cli("mesh --mpi " + q(dir / "scene") + " --grid 64,64,64 --smooth 5 --out " + q(dir / "s5.obj"), dir).code, 0);
  EXPECT_NE(slurp(dir / "sphere.obj"), slurp(dir / "s5.obj"));
}

TEST(Cli, HighIsoOnFaintSceneGivesEmptyObj) {
  const fs::path dir = work_dir();
  std::vector<Image> alphas(4, Image(16, 16, 1, 0.3));
  save_mpi(MultiplaneImage(Image(16, 16, 3, 0.5), alphas, {1.0, 1.2, 1.5, 2.0}, 1.0, 2.0),
           CameraIntrinsics::from_fov(16, 16, 0.7), (dir / "faint").string());
  const CliResult r = gmpi_cli("mesh --mpi " + q(dir / "faint") + " --iso 0.99 --out " + q(dir / "empty.obj"), dir);
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  ASSERT_TRUE(fs::exists(dir / "empty.obj"));
  EXPECT_TRUE(import_obj((dir / "empty.obj").string()).empty());
}

TEST(Cli, ToygenPlaneCountsShareColor) {
  const fs::path dir = work_dir();
  for (const char* planes : {"32", "96"})
    ASSERT_EQ(gmpi_cli(std::string("toygen --resolution 64 --alpha-resolution 64 --seed 7 --planes ") + planes +
                           " --out " + q(dir / planes),
                       dir)
                  .code,
              0);
  EXPECT_EQ(slurp(dir / "32" / "color.png"), slurp(dir / "96" / "color.png"));
  EXPECT_EQ(load_mpi((dir / "32").string()).mpi.plane_count(), 32u);
  EXPECT_EQ(load_mpi((dir / "96").string()).mpi.plane_count(), 96u);
}

TEST(Cli, ToygenDefaultsAndConfigFile) {
  const fs::path dir = work_dir();
  ASSERT_EQ(gmpi_cli("toygen --out " + q(dir / "default"), dir).code, 0);
  const LoadedMpi d = load_mpi((dir / "default").string());
  EXPECT_EQ(d.mpi.plane_count(), 32u);
  EXPECT_EQ(d.mpi.width(), 256);
  EXPECT_EQ(d.mpi.near(), 0.95);
  EXPECT_EQ(d.mpi.far(), 1.12);

  std::ofstream(dir / "toy.cfg") << "planes = 6\nresolution = 32\nalpha_resolution = 16\nseed = 4\n";
  ASSERT_EQ(gmpi_cli("toygen --config " + q(dir / "toy.cfg") + " --planes 5 --out " + q(dir / "cfg"), dir).code, 0);
  const LoadedMpi c = load_mpi((dir / "cfg").string());
  EXPECT_EQ(c.mpi.plane_count(), 5u);
  EXPECT_EQ(c.mpi.width(), 32);
  ASSERT_EQ(gmpi_cli("toygen --config " + q(dir / "toy.cfg") + " --planes 5 --out " + q(dir / "cfg2"), dir).code, 0);
  EXPECT_EQ(slurp(dir / "cfg" / "alpha_002.png"), slurp(dir / "cfg2" / "alpha_002.png"));
}

}  // namespace
}  // namespace gmpi
