// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gmpi/core.h"
#include "gmpi/image.h"

namespace gmpi {

/// dim_h = min(channel_base / h, 512).
int channel_dim(int resolution, int channel_base = 1 << 15);

bool is_power_of_two(int v);

/// Per-resolution feature maps F^h for h = 4, 8, ..., H.
struct FeaturePyramid {
  std::vector<Image> levels;

  int resolution(size_t level) const { return levels.at(level).width(); }
  /// Throws MissingResolution unless levels are square, start at 4 and double.
  void validate() const;
};

using Upsampler = std::function<Image(const Image&)>;

/// Bilinear resampling by an integer factor with half-pixel centers and
/// clamped edges. Linear in the input.
Image upsample_bilinear(const Image& image, int factor);
inline Image upsample2x(const Image& image) { return upsample_bilinear(image, 2); }

/// C^4 = R^4, C^h = R^h + UpSample(C^{h/2}); returns C^H.
Image accumulate_pyramid(std::span<const Image> residuals, const Upsampler& upsample = upsample2x);

double sigmoid(double x);

/// Accumulates alpha residuals up to H_alpha, squashes with a sigmoid, then
/// upsamples once to `final_resolution` when H_alpha < H.
Image alpha_pyramid(std::span<const Image> residuals, int final_resolution);

/// (F - mu) / (sigma + eps) per channel, statistics over spatial positions.
Image standardize_channels(const Image& feature, double eps = 1e-8);

/// f_Embed: normalized plane depth and style -> one value per channel.
using EmbedFn = std::function<std::vector<double>(NormalizedDepth, std::span<const double>)>;

/// Plane-aware feature: standardized F^h plus a per-channel embedding of the
/// plane's normalized depth and the style vector.
Image plane_feature(const Image& feature, NormalizedDepth depth, std::span<const double> omega, const EmbedFn& embed);

/// omega_bar + psi * (omega - omega_bar), psi in [0, 1].
std::vector<double> truncate_style(std::span<const double> omega, std::span<const double> omega_bar, double psi);

/// alpha_i = clamp((d_i - (depth - eps)) / (2 eps), 0, 1) per pixel.
std::vector<Image> depth_to_alpha(const Image& depth, std::span<const double> plane_depths, double epsilon);

/// Background plane color: per row, the mean of the left-most and right-most
/// `fraction` of columns fill those strips and the columns in between are
/// linearly interpolated.
Image background_fill(const Image& color, double fraction = 0.05);

/// Feature . standardize(pose_embedding), the pose-conditioned logit.
double projection_logit(std::span<const double> feature, std::span<const double> pose_embedding);

/// f(x) = -log(1 + exp(-x)), evaluated without overflow.
double nonsaturating_f(double x);

struct LossParams {
  double lambda = 10.0;
};

/// mean f(fake) + mean[f(real) + lambda * |grad|^2].
double gan_loss_terms(std::span<const double> fake_logits, std::span<const double> real_logits,
                      std::span<const double> grad_norms_sq, const LossParams& params = {});

}  // namespace gmpi
