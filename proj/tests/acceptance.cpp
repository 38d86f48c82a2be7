// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <Eigen/Geometry>

#include "gmpi/composite.h"
#include "gmpi/container.h"
#include "gmpi/genstack.h"
#include "gmpi/grad.h"
#include "gmpi/mesh.h"
#include "gmpi/shading.h"
#include "gmpi/synth.h"
#include "gmpi/toygen.h"
#include "oracles.h"

namespace {

using namespace gmpi;

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kNear = 0.95;
constexpr double kFar = 1.12;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(const char* name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s  %-28s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

CameraPose bounded_pose(std::mt19937_64& rng, double max_angle, double max_translation) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Eigen::Vector3d axis = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng)).normalized();
  const Eigen::Vector3d dir = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng)).normalized();
  const Eigen::Matrix3d r = Eigen::AngleAxisd(max_angle * unit(rng), axis).toRotationMatrix();
  return CameraPose(r, dir * (max_translation * unit(rng)));
}

Outcome homography_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(2024);
  const MultiplaneImage mpi = random_mpi(rng, 8, 32, kNear, kFar);
  const CameraIntrinsics k = CameraIntrinsics::from_fov(256, 256, 12.0 * kDeg);
  std::uniform_real_distribution<double> pixel(0.0, 255.0);
  double worst = 0.0;
  long samples = 0;
  for (int p = 0; p < 50; ++p) {
    const CameraPose pose = bounded_pose(rng, 20.0 * kDeg, 0.2 * kNear);
    for (size_t i = 0; i < mpi.plane_count(); ++i) {
      const Homography h = plane_homography(k, k, pose, plane_in_target_frame(mpi.depth(i), pose));
      for (int s = 0; s < 1000; ++s) {
        const Eigen::Vector2d px(pixel(rng), pixel(rng));
        const Eigen::Vector2d expect = oracle::project_through_plane(k, k, pose, mpi.depth(i), px);
        worst = std::max(worst, (h.apply(px) - expect).norm());
        ++samples;
      }
    }
  }
  const double t = seconds_since(start);
  return {worst <= 1e-5 && t < 10.0, fmt("max err %.3g px over %.0f samples, %.2f s", worst, samples, t)};
}

Outcome identity_reduction() {
  std::mt19937_64 rng(7);
  const MultiplaneImage mpi = random_mpi(rng, 32, 8, kNear, kFar);
  const CameraIntrinsics k = CameraIntrinsics::from_fov(32, 32, 12.0 * kDeg);
  const RenderOutput r = render(mpi, {k, k}, CameraPose::identity());
  std::vector<WarpedPlane> planes;
  for (size_t i = 0; i < mpi.plane_count(); ++i) planes.push_back({mpi.plane_color(i), mpi.alpha(i)});
  const RenderOutput direct = over_composite(planes, std::span<const double>(mpi.depths()));
  const bool bitwise = r.color == direct.color && *r.depth == *direct.depth && r.transmittance == direct.transmittance;

  std::vector<Image> alphas = mpi.alphas();
  alphas[0] = Image(32, 32, 1, 1.0);
  const MultiplaneImage opaque(mpi.color(), alphas, mpi.depths(), kNear, kFar);
  const bool front = render(opaque, {k, k}, CameraPose::identity()).color == mpi.color();
  return {bitwise && front, std::string("bitwise composite ") + (bitwise ? "yes" : "no") + ", opaque front gives C " +
                                (front ? "yes" : "no")};
}

Outcome partition_of_unity() {
  std::mt19937_64 rng(11);
  const int counts[4] = {1, 2, 8, 32};
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    const int count = counts[s % 4];
    std::vector<WarpedPlane> planes;
    for (int i = 0; i < count; ++i)
      planes.push_back({Image(16, 16, 3), oracle::random_image(rng, 16, 16, 1)});
    const std::vector<double> ones(static_cast<size_t>(count), 1.0);
    const RenderOutput out = over_composite(planes, std::span<const double>(ones));
    for (size_t k = 0; k < out.transmittance.size(); ++k)
      worst = std::max(worst, std::abs(out.depth->data()[k] + out.transmittance.data()[k] - 1.0));
  }
  return {worst <= 1e-6, fmt("max |sum w + T - 1| = %.3g", worst)};
}

Outcome differentiability() {
  const auto start = Clock::now();
  double worst = 0.0;
  size_t checked = 0, skipped = 0;
  bool pass = true;
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    GradCheckConfig cfg;
    cfg.seed = seed;
    cfg.size = 8;
    cfg.planes = 4;
    cfg.fd.tolerance = 1e-3;
    const GradCheckResult r = run_gradient_check(cfg);
    pass = pass && r.passed;
    for (const TensorError& t : r.tensors) {
      worst = std::max(worst, t.max_rel_error);
      checked += t.checked;
      skipped += t.skipped;
    }
  }
  const double t = seconds_since(start);
  std::ostringstream d;
  d << "max rel err " << worst << ", " << checked << " checked, " << skipped << " kink-excluded, " << t << " s";
  return {pass && worst <= 1e-3 && t < 60.0, d.str()};
}

Outcome depth_to_alpha_round_trip() {
  const double near = 1.0, far = 2.0, range = far - near;
  const auto planes = place_planes_disparity(64, near, far);
  double half_gap = 0.0;
  for (size_t i = 1; i < planes.size(); ++i) half_gap = std::max(half_gap, 0.5 * (planes[i] - planes[i - 1]));
  Image depth(48, 48, 1);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 48; ++x)
      depth(x, y) = near + range * (0.35 + 0.3 * std::sin(0.17 * x + 0.3) * std::cos(0.11 * y));
  bool pass = true;
  std::ostringstream d;
  for (double frac : {0.3, 0.1, 0.05}) {
    const double eps = frac * range;
    const auto alphas = depth_to_alpha(depth, planes, eps);
    double worst = 0.0;
    for (int y = 0; y < 48; ++y)
      for (int x = 0; x < 48; ++x) {
        std::vector<double> a;
        for (const Image& img : alphas) a.push_back(img(x, y));
        worst = std::max(worst, std::abs(oracle::over_sum(planes, a) - depth(x, y)));
      }
    pass = pass && worst <= eps + half_gap;
    d << "eps " << frac << ": " << worst << " <= " << eps + half_gap << "; ";
  }
  return {pass, d.str()};
}

Eigen::Vector2d alpha_centroid(const Image& a) {
  double sum = 0.0, sx = 0.0, sy = 0.0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      sum += a(x, y);
      sx += a(x, y) * x;
      sy += a(x, y) * y;
    }
  return {sx / sum, sy / sum};
}

Outcome parallax_law() {
  const SynthScene scene = synth_scene(SceneKind::LayeredDisks, {.size = 128, .near = 1.0, .far = 2.0}, 1);
  const CameraPair cams{scene.intrinsics, scene.intrinsics};
  Eigen::Vector2d shift[2][2];
  double offsets[2] = {0.0, 0.0};
  int view = 0;
  for (double yaw : {5.0 * kDeg, -5.0 * kDeg}) {
    const CameraPose pose = orbit_pose(yaw, 0.0, 1.5);
    const ViewGeometry g = view_geometry(scene.mpi, cams, pose);
    // Motion of a point at infinity: the rotation-only homography.
    const Eigen::Matrix3d h_inf = cams.canonical.K() * pose.rotation() * cams.target.K_inverse();
    for (size_t i = 0; i < 2; ++i) {
      const WarpedPlane w = warp_plane(scene.mpi, i, g.homographies[i], 128, 128);
      const Eigen::Vector2d rotated = (h_inf.inverse() * alpha_centroid(scene.mpi.alpha(i)).homogeneous()).hnormalized();
      shift[view][i] = alpha_centroid(w.alpha) - rotated;
      offsets[i] = g.plane_offsets[i];
    }
    ++view;
  }
  const double near_parallax = (shift[0][0] - shift[1][0]).norm();
  const double far_parallax = (shift[0][1] - shift[1][1]).norm();
  const double ratio = near_parallax / far_parallax;
  const double expected = offsets[1] / offsets[0];
  const double rel = std::abs(ratio / expected - 1.0);
  return {near_parallax > far_parallax && rel <= 0.02,
          fmt("parallax ratio %.5f vs b_far/b_near %.5f (rel %.2g)", ratio, expected, rel)};
}

Outcome shading_schedule_values() {
  struct Spot {
    long it;
    double ka, kd;
  };
  const Spot spots[] = {{0, 1.0, 0.0}, {500, 1.0, 0.0}, {1000, 1.0, 0.0}, {1500, 0.95, 0.05}, {2000, 0.9, 0.1}, {5000, 0.9, 0.1}};
  double worst = 0.0;
  for (const Spot& s : spots) {
    const ShadingCoefficients c = shading_schedule(s.it);
    worst = std::max({worst, std::abs(c.ambient - s.ka), std::abs(c.diffuse - s.kd)});
  }
  bool linear = true;
  for (long it = 1001; it < 2000; ++it) {
    const ShadingCoefficients c = shading_schedule(it);
    const double t = (it - 1000) / 1000.0;
    linear = linear && std::abs(c.ambient - (1.0 - 0.1 * t)) <= 1e-12 && std::abs(c.diffuse - 0.1 * t) <= 1e-12;
  }
  const bool exact_ends = shading_schedule(500).ambient == 1.0 && shading_schedule(500).diffuse == 0.0 &&
                          shading_schedule(5000).ambient == 0.9 && shading_schedule(5000).diffuse == 0.1;
  return {worst <= 1e-12 && linear && exact_ends, fmt("max spot deviation %.3g", worst)};
}

Outcome loss_formulas() {
  const double f0 = nonsaturating_f(0.0);
  const bool at_zero = std::abs(f0 + std::numbers::ln2) <= 1e-12;
  const double hi = nonsaturating_f(1e4), lo = nonsaturating_f(-1e4);
  const bool stable = std::isfinite(hi) && std::isfinite(lo) && std::abs(hi) <= 1e-12 && std::abs(lo + 1e4) <= 1e-9;
  // Linear discriminator D(I) = w . I + c: the input gradient is w.
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> w(48), img(48);
    double logit = 0.3, norm_sq = 0.0;
    for (size_t i = 0; i < 48; ++i) {
      w[i] = n(rng);
      img[i] = n(rng);
      logit += w[i] * img[i];
      norm_sq += w[i] * w[i];
    }
    const std::vector<double> fake{n(rng)}, real{logit};
    const double base = gan_loss_terms(fake, real, std::vector<double>{0.0});
    const double with = gan_loss_terms(fake, real, std::vector<double>{norm_sq});
    worst = std::max(worst, std::abs((with - base) - 10.0 * norm_sq) / (10.0 * norm_sq));
  }
  const bool lambda_default = LossParams{}.lambda == 10.0;
  return {at_zero && stable && worst <= 1e-12 && lambda_default,
          fmt("f(0) = %.15f, f(-1e4) = %.6g, R1 rel dev %.3g", f0, lo, worst)};
}

Outcome truncation() {
  ToyConfig cfg;
  cfg.resolution = 16;
  cfg.alpha_resolution = 16;
  const ToyGenerator gen(cfg);
  const std::vector<double> omega = gen.mapping(toy_latent(3, cfg.latent_dim));
  const std::vector<double>& bar = gen.mean_style();
  const bool one = truncate_style(omega, bar, 1.0) == omega;
  const bool zero = truncate_style(omega, bar, 0.0) == bar;
  const auto a = truncate_style(omega, bar, 0.1);
  const auto b = truncate_style(omega, bar, 0.5);
  const auto c = truncate_style(omega, bar, 0.8);
  double worst = 0.0;
  for (size_t i = 0; i < omega.size(); ++i)
    worst = std::max(worst, std::abs((b[i] - a[i]) * 0.7 - (c[i] - a[i]) * 0.4));
  return {one && zero && worst <= 1e-12, fmt("collinearity residual %.3g", worst)};
}

Outcome marching_cubes_sphere() {
  const auto start = Clock::now();
  const double r = 24.0;
  OccupancyVolume vol(64, 64, 64);
  for (int k = 0; k < 64; ++k)
    for (int j = 0; j < 64; ++j)
      for (int i = 0; i < 64; ++i) {
        const double d = (Eigen::Vector3d(i, j, k) - Eigen::Vector3d(31.5, 31.5, 31.5)).norm();
        vol.at(i, j, k) = std::clamp(0.5 + (r - d) / 4.0, 0.0, 1.0);
      }
  const TriangleMesh m = marching_cubes(vol, 0.5);
  const double t = seconds_since(start);
  const double area = surface_area(m);
  const double rel = std::abs(area / (4.0 * std::numbers::pi * r * r) - 1.0);
  const bool closed = is_watertight(m);
  const long chi = euler_characteristic(m);
  std::ostringstream d;
  d << m.triangles.size() << " triangles, area rel err " << rel << ", watertight " << (closed ? "yes" : "no")
    << ", chi " << chi << ", " << t << " s";
  return {closed && chi == 2 && rel <= 0.05 && t < 5.0, d.str()};
}

Outcome plane_count_flexibility() {
  const ToyConfig cfg;  // 256 px, near/far 0.95/1.12
  const ToyGenerator gen(cfg);
  const auto z = toy_latent(42, cfg.latent_dim);
  const MultiplaneImage a = gen.generate(z, 32);
  const MultiplaneImage b = gen.generate(z, 96);
  const CameraIntrinsics k = CameraIntrinsics::from_fov(cfg.resolution, cfg.resolution, 12.0 * kDeg);
  const Image ra = render(a, {k, k}, CameraPose::identity()).color;
  const Image rb = render(b, {k, k}, CameraPose::identity()).color;
  double mad = 0.0;
  for (size_t i = 0; i < ra.size(); ++i) mad += std::abs(ra.data()[i] - rb.data()[i]);
  mad /= static_cast<double>(ra.size());
  const bool same_color = a.color() == b.color();
  return {same_color && mad <= 0.02,
          fmt("identical color %.0f, canonical render MAD %.4g", same_color ? 1.0 : 0.0, mad)};
}

Outcome channel_rule() {
  const bool ok = channel_dim(4) == 512 && channel_dim(256) == 128 && channel_dim(1024) == 32;
  return {ok, fmt("h=4 -> %.0f, h=256 -> %.0f, h=1024 -> %.0f", channel_dim(4), channel_dim(256), channel_dim(1024))};
}

Outcome suite_wall_clock() {
  const auto start = Clock::now();
  std::string suite = GMPI_SUITE;
  std::vector<std::string> binaries;
  for (size_t pos = 0; pos <= suite.size();) {
    const size_t end = std::min(suite.find('|', pos), suite.size());
    if (end > pos) binaries.push_back(suite.substr(pos, end - pos));
    pos = end + 1;
  }
  std::string failed;
  for (const std::string& bin : binaries) {
    const std::string cmd = "\"" + bin + "\" >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) failed += " " + bin.substr(bin.find_last_of('/') + 1);
  }
  const double t = seconds_since(start);
  std::ostringstream d;
  d << binaries.size() << " binaries in " << t << " s";
  if (!failed.empty()) d << ", failing:" << failed;
  return {failed.empty() && t < 180.0, d.str()};
}

}  // namespace

int main() {
  report("homography-oracle", homography_oracle);
  report("identity-reduction", identity_reduction);
  report("partition-of-unity", partition_of_unity);
  report("differentiability", differentiability);
  report("depth-to-alpha-round-trip", depth_to_alpha_round_trip);
  report("parallax-law", parallax_law);
  report("shading-schedule", shading_schedule_values);
  report("loss-formulas", loss_formulas);
  report("truncation", truncation);
  report("marching-cubes-sphere", marching_cubes_sphere);
  report("plane-count-flexibility", plane_count_flexibility);
  report("channel-rule", channel_rule);
  report("suite-wall-clock", suite_wall_clock);
  std::printf("%d of 13 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
