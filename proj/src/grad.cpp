// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

#include "gmpi/grad.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Geometry>

#include "gmpi/parallel.h"
#include "gmpi/synth.h"

namespace gmpi {

std::vector<PlaneGradient> composite_backward(std::span<const WarpedPlane> planes, const Image& upstream) {
  if (planes.empty()) throw Error(ErrorKind::EmptyPlaneList, "nothing to differentiate");
  const int width = planes.front().alpha.width();
  const int height = planes.front().alpha.height();
  if (upstream.width() != width || upstream.height() != height || upstream.channels() != 3)
    throw Error(ErrorKind::InvalidArgument, "upstream gradient must match the rendered image");

  const size_t count = planes.size();
  std::vector<PlaneGradient> grads(count);
  for (auto& g : grads) g = {Image(width, height, 3), Image(width, height, 1)};

  parallel_for(static_cast<size_t>(height), [&](size_t row) {
    const int y = static_cast<int>(row);
    std::vector<double> transmittance(count);
    for (int x = 0; x < width; ++x) {
      double t = 1.0;
      for (size_t i = 0; i < count; ++i) {
        transmittance[i] = t;
        t *= 1.0 - planes[i].alpha(x, y);
      }
      const auto g = upstream.pixel(x, y);
      double behind[3] = {0.0, 0.0, 0.0};
      for (size_t k = count; k-- > 0;) {
        const double a = planes[k].alpha(x, y);
        const auto c = planes[k].color.pixel(x, y);
        const double w = a * transmittance[k];
        double d_alpha = 0.0;
        for (int ch = 0; ch < 3; ++ch) {
          d_alpha += g[ch] * (c[ch] - behind[ch]);
          grads[k].color(x, y, ch) = g[ch] * w;
          behind[ch] = c[ch] * a + (1.0 - a) * behind[ch];
        }
        grads[k].alpha(x, y) = transmittance[k] * d_alpha;
      }
    }
  });
  return grads;
}

PlaneGradient warp_backward(const MultiplaneImage& mpi, size_t plane, const Homography& h,
                            const PlaneGradient& upstream) {
  const int out_width = upstream.alpha.width();
  const int out_height = upstream.alpha.height();
  if (upstream.color.width() != out_width || upstream.color.height() != out_height || upstream.color.channels() != 3 ||
      upstream.alpha.channels() != 1)
    throw Error(ErrorKind::InvalidArgument, "upstream plane gradients disagree in shape");
  if (plane >= mpi.plane_count()) throw Error(ErrorKind::InvalidArgument, "plane index out of range");
  if (h.is_identity() && out_width == mpi.width() && out_height == mpi.height()) return upstream;

  const int width = mpi.width();
  const int height = mpi.height();
  PlaneGradient out{Image(width, height, 3), Image(width, height, 1)};
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      const Eigen::Vector3d q = h.matrix() * Eigen::Vector3d(x, y, 1.0);
      if (!(q.z() > 0.0)) continue;
      const Eigen::Vector2d p = q.hnormalized();
      const double g_alpha = upstream.alpha(x, y);
      const BilinearTaps alpha_taps = bilinear_taps(width, height, p, Border::Zero);
      for (int k = 0; k < 4; ++k)
        if (alpha_taps.w[k] != 0.0) out.alpha(alpha_taps.x[k], alpha_taps.y[k]) += alpha_taps.w[k] * g_alpha;
      const auto g_color = upstream.color.pixel(x, y);
      const BilinearTaps color_taps = bilinear_taps(width, height, p, Border::Clamp);
      for (int k = 0; k < 4; ++k) {
        if (color_taps.w[k] == 0.0) continue;
        auto dst = out.color.pixel(color_taps.x[k], color_taps.y[k]);
        for (int c = 0; c < 3; ++c) dst[c] += color_taps.w[k] * g_color[c];
      }
    }
  }
  return out;
}

RenderGradients render_backward(const MultiplaneImage& mpi, const CameraPair& cams,
                                const CameraPose& target_to_canonical, const Image& upstream) {
  const ViewGeometry geometry = view_geometry(mpi, cams, target_to_canonical);
  const std::vector<WarpedPlane> warped = warp_all(mpi, cams, geometry);
  const std::vector<PlaneGradient> plane_grads = composite_backward(warped, upstream);

  // One buffer per plane, reduced in plane order: deterministic regardless of
  // how the planes were scheduled.
  std::vector<PlaneGradient> canonical(mpi.plane_count());
  parallel_for(mpi.plane_count(), [&](size_t i) {
    canonical[i] = warp_backward(mpi, i, geometry.homographies[i], plane_grads[i]);
  });

  RenderGradients grads;
  grads.d_color = Image(mpi.width(), mpi.height(), 3);
  if (mpi.background()) grads.d_background = Image(mpi.width(), mpi.height(), 3);
  for (size_t i = 0; i < mpi.plane_count(); ++i) {
    const bool is_background = mpi.background() && i + 1 == mpi.plane_count();
    Image& target = is_background ? *grads.d_background : grads.d_color;
    for (size_t k = 0; k < target.size(); ++k) target.data()[k] += canonical[i].color.data()[k];
    grads.d_alpha.push_back(std::move(canonical[i].alpha));
  }
  return grads;
}

KinkMask grid_line_kinks(const MultiplaneImage& mpi, const CameraPair& cams, const CameraPose& target_to_canonical,
                         double tolerance) {
  const ViewGeometry geometry = view_geometry(mpi, cams, target_to_canonical);
  const int width = mpi.width();
  const int height = mpi.height();
  const size_t pixels = static_cast<size_t>(width) * height;
  KinkMask mask{std::vector<bool>(pixels, false), std::vector<std::vector<bool>>(mpi.plane_count(), std::vector<bool>(pixels, false))};
  auto near_line = [tolerance](double v) { return std::abs(v - std::round(v)) < tolerance; };
  for (size_t i = 0; i < mpi.plane_count(); ++i) {
    for (int y = 0; y < cams.target.height; ++y) {
      for (int x = 0; x < cams.target.width; ++x) {
        const Eigen::Vector3d q = geometry.homographies[i].matrix() * Eigen::Vector3d(x, y, 1.0);
        if (!(q.z() > 0.0)) continue;
        const Eigen::Vector2d p = q.hnormalized();
        if (!near_line(p.x()) && !near_line(p.y())) continue;
        for (Border border : {Border::Zero, Border::Clamp}) {
          const BilinearTaps taps = bilinear_taps(width, height, p, border);
          for (int k = 0; k < 4; ++k) {
            if (taps.w[k] == 0.0 && border == Border::Zero) continue;
            const size_t idx = static_cast<size_t>(taps.y[k]) * width + taps.x[k];
            if (border == Border::Zero) mask.alpha[i][idx] = true;
            else mask.color[idx] = true;
          }
        }
      }
    }
  }
  return mask;
}

std::vector<double> flatten_parameters(const MultiplaneImage& mpi) {
  std::vector<double> params(mpi.color().data());
  for (const Image& a : mpi.alphas()) params.insert(params.end(), a.data().begin(), a.data().end());
  if (mpi.background()) params.insert(params.end(), mpi.background()->data().begin(), mpi.background()->data().end());
  return params;
}

MultiplaneImage with_parameters(const MultiplaneImage& like, std::span<const double> params) {
  size_t offset = 0;
  auto take = [&](const Image& shape) {
    Image img(shape.width(), shape.height(), shape.channels());
    if (offset + img.size() > params.size()) throw Error(ErrorKind::InvalidArgument, "parameter vector too short");
    std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(offset), img.size(), img.data().begin());
    offset += img.size();
    return img;
  };
  Image color = take(like.color());
  std::vector<Image> alphas;
  for (const Image& a : like.alphas()) alphas.push_back(take(a));
  std::optional<Image> background;
  if (like.background()) background = take(*like.background());
  if (offset != params.size()) throw Error(ErrorKind::InvalidArgument, "parameter vector too long");
  return MultiplaneImage(std::move(color), std::move(alphas), like.depths(), like.near(), like.far(),
                         std::move(background));
}

std::vector<double> flatten_gradients(const RenderGradients& grads) {
  std::vector<double> out(grads.d_color.data());
  for (const Image& a : grads.d_alpha) out.insert(out.end(), a.data().begin(), a.data().end());
  if (grads.d_background) out.insert(out.end(), grads.d_background->data().begin(), grads.d_background->data().end());
  return out;
}

std::vector<bool> flatten_kinks(const MultiplaneImage& mpi, const KinkMask& mask) {
  std::vector<bool> out;
  for (bool v : mask.color)
    for (int c = 0; c < 3; ++c) out.push_back(v);
  for (const auto& plane : mask.alpha) out.insert(out.end(), plane.begin(), plane.end());
  if (mpi.background()) out.resize(out.size() + mpi.background()->size(), false);
  return out;
}

FiniteDiffReport finite_diff_check(const std::function<double(std::span<const double>)>& forward,
                                   std::span<const double> params, std::span<const double> analytic,
                                   const FiniteDiffOptions& options, const std::function<bool(size_t)>& skip) {
  if (params.size() != analytic.size())
    throw Error(ErrorKind::InvalidArgument, "analytic gradient length differs from parameter count");
  FiniteDiffReport report;
  report.rel_errors.assign(params.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<double> probe(params.begin(), params.end());
  for (size_t i = 0; i < probe.size(); ++i) {
    if (skip && skip(i)) {
      ++report.skipped;
      continue;
    }
    const double saved = probe[i];
    probe[i] = saved + options.step;
    const double plus = forward(probe);
    probe[i] = saved - options.step;
    const double minus = forward(probe);
    probe[i] = saved;
    const double numeric = (plus - minus) / (2.0 * options.step);
    const double rel = std::abs(analytic[i] - numeric) / std::max(std::abs(numeric), options.floor);
    ++report.checked;
    report.rel_errors[i] = rel;
    report.max_rel_error = std::max(report.max_rel_error, rel);
    if (!(rel <= options.tolerance)) report.failures.push_back({i, analytic[i], numeric, rel});
  }
  return report;
}

GradCheckResult run_gradient_check(const GradCheckConfig& config) {
  if (config.size < 2 || config.planes < 1 || config.trials < 1)
    throw Error(ErrorKind::InvalidArgument, "gradient check needs size >= 2, planes >= 1, trials >= 1");
  std::mt19937_64 rng(config.seed);
  const double near = 1.0;
  const double far = 2.0;
  GradCheckResult result;
  result.tensors.push_back({"color"});
  for (int i = 0; i < config.planes; ++i) result.tensors.push_back({"alpha[" + std::to_string(i) + "]"});

  for (int trial = 0; trial < config.trials; ++trial) {
    // Interior alphas keep the +-h probes inside [0, 1].
    const MultiplaneImage mpi = random_mpi(rng, config.size, config.planes, near, far, 0.05, 0.95);
    const CameraIntrinsics k = CameraIntrinsics::from_fov(config.size, config.size, 0.8);
    const CameraPair cams{k, k};
    const CameraPose pose = config.canonical_pose ? CameraPose::identity() : random_pose(rng, 0.08, 0.05);
    const double n_out = static_cast<double>(config.size) * config.size * 3;
    const Image upstream(config.size, config.size, 3, 1.0 / n_out);

    auto loss = [&](std::span<const double> p) {
      const RenderOutput out = render(with_parameters(mpi, p), cams, pose, {.with_depth = false});
      double sum = 0.0;
      for (double v : out.color.data()) sum += v;
      return sum / n_out;
    };
    std::vector<double> analytic = flatten_gradients(render_backward(mpi, cams, pose, upstream));
    if (config.inject_bug) {
      const size_t start = mpi.color().size();
      for (size_t i = 0; i < mpi.alpha(0).size(); ++i) analytic[start + i] *= 1.5;
    }
    const std::vector<double> params = flatten_parameters(mpi);
    std::vector<bool> excluded;
    if (!config.canonical_pose) excluded = flatten_kinks(mpi, grid_line_kinks(mpi, cams, pose));
    const FiniteDiffReport report = finite_diff_check(loss, params, analytic, config.fd, [&](size_t i) {
      return !excluded.empty() && excluded[i];
    });

    // Attribute per-parameter outcomes to the tensor they belong to.
    auto tensor_of = [&](size_t i) -> size_t {
      if (i < mpi.color().size()) return 0;
      return 1 + (i - mpi.color().size()) / mpi.alpha(0).size();
    };
    for (size_t i = 0; i < params.size(); ++i) {
      TensorError& t = result.tensors[tensor_of(i)];
      const double rel = report.rel_errors[i];
      if (std::isnan(rel)) {
        ++t.skipped;
        continue;
      }
      ++t.checked;
      t.max_rel_error = std::max(t.max_rel_error, rel);
      if (!(rel <= config.fd.tolerance)) ++t.failures;
    }
    if (!report.passed()) result.passed = false;
  }
  return result;
}

}  // namespace gmpi
