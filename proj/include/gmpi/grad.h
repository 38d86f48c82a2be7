// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gmpi/composite.h"
#include "gmpi/core.h"
#include "gmpi/warp.h"

namespace gmpi {

/// Gradient of a scalar loss w.r.t. one warped plane (C'_i, alpha'_i).
struct PlaneGradient {
  Image color;  // W' x H' x 3
  Image alpha;  // W' x H' x 1
};

/// Gradients of the loss w.r.t. the MPI's learnable images. Plane depths and
/// the camera pose are fixed inputs and receive no gradient.
struct RenderGradients {
  Image d_color;                      // H x W x 3
  std::vector<Image> d_alpha;         // L maps, H x W x 1
  std::optional<Image> d_background;  // present iff the MPI has a background plane
};

/// Backward pass of the over operator, contracted with upstream dL/dI.
/// dI/dC'_i = w_i and dI/dalpha'_k = T_k (C'_k - S_k), where S_k is the
/// composite of the planes behind k.
std::vector<PlaneGradient> composite_backward(std::span<const WarpedPlane> planes, const Image& upstream);

/// Transposed bilinear resampling: scatters the upstream gradient of a warped
/// plane back onto the canonical color (clamped border) and alpha (zero
/// border) using the forward taps.
PlaneGradient warp_backward(const MultiplaneImage& mpi, size_t plane, const Homography& h,
                            const PlaneGradient& upstream);

/// dL/d(C, alpha_i) for L = <upstream, render(...).color>.
RenderGradients render_backward(const MultiplaneImage& mpi, const CameraPair& cams,
                                const CameraPose& target_to_canonical, const Image& upstream);

/// Canonical pixels that receive a bilinear tap from a target sample lying
/// within `tolerance` px of a pixel-grid line.
struct KinkMask {
  std::vector<bool> color;               // per canonical pixel
  std::vector<std::vector<bool>> alpha;  // per plane, per canonical pixel
};
KinkMask grid_line_kinks(const MultiplaneImage& mpi, const CameraPair& cams, const CameraPose& target_to_canonical,
                         double tolerance = 1e-3);

/// Color, then each alpha map, then the background (if any), in storage order.
std::vector<double> flatten_parameters(const MultiplaneImage& mpi);
MultiplaneImage with_parameters(const MultiplaneImage& like, std::span<const double> params);
std::vector<double> flatten_gradients(const RenderGradients& grads);
std::vector<bool> flatten_kinks(const MultiplaneImage& mpi, const KinkMask& mask);

struct FiniteDiffOptions {
  double step = 1e-4;
  double tolerance = 1e-3;
  double floor = 1e-6;  // denominator floor for near-zero gradients
};

struct FiniteDiffFailure {
  size_t index;
  double analytic;
  double numeric;
  double rel_error;
};

struct FiniteDiffReport {
  size_t checked = 0;
  size_t skipped = 0;
  double max_rel_error = 0.0;
  std::vector<double> rel_errors;  // per parameter, NaN where skipped
  std::vector<FiniteDiffFailure> failures;
  bool passed() const { return failures.empty(); }
};

/// Compares `analytic` against central differences of `forward` at `params`.
/// Relative error is |g_a - g_fd| / max(|g_fd|, floor).
FiniteDiffReport finite_diff_check(const std::function<double(std::span<const double>)>& forward,
                                   std::span<const double> params, std::span<const double> analytic,
                                   const FiniteDiffOptions& options = {},
                                   const std::function<bool(size_t)>& skip = {});

/// Randomized render-gradient verification used by the CLI and the
/// acceptance suite: mean-image loss on small random MPIs and poses.
struct GradCheckConfig {
  uint64_t seed = 1;
  int size = 8;
  int planes = 4;
  int trials = 1;
  bool canonical_pose = false;
  bool inject_bug = false;  // corrupts the analytic alpha gradient of plane 0
  FiniteDiffOptions fd;
};

struct TensorError {
  std::string name;
  double max_rel_error = 0.0;
  size_t checked = 0;
  size_t skipped = 0;
  size_t failures = 0;
};

struct GradCheckResult {
  std::vector<TensorError> tensors;
  bool passed = true;
};

GradCheckResult run_gradient_check(const GradCheckConfig& config);

}  // namespace gmpi
