// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

#include "gmpi/genstack.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace gmpi {

int channel_dim(int resolution, int channel_base) {
  if (resolution <= 0 || channel_base <= 0) throw Error(ErrorKind::InvalidArgument, "resolution and channel base must be positive");
  return std::min(channel_base / resolution, 512);
}

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

void FeaturePyramid::validate() const {
  if (levels.empty()) throw Error(ErrorKind::MissingResolution, "pyramid has no levels");
  for (size_t i = 0; i < levels.size(); ++i) {
    const int expected = 4 << i;
    if (levels[i].width() != expected || levels[i].height() != expected)
      throw Error(ErrorKind::MissingResolution, "expected a " + std::to_string(expected) + "x" +
                                                    std::to_string(expected) + " level at position " + std::to_string(i));
  }
}

Image upsample_bilinear(const Image& image, int factor) {
  if (factor < 1) throw Error(ErrorKind::InvalidArgument, "upsampling factor must be positive");
  const int w = image.width() * factor;
  const int h = image.height() * factor;
  Image out(w, h, image.channels());
  auto source = [factor](int i, int n, int& i0, int& i1, double& f) {
    const double s = std::clamp((i + 0.5) / factor - 0.5, 0.0, static_cast<double>(n - 1));
    i0 = static_cast<int>(std::floor(s));
    i1 = std::min(i0 + 1, n - 1);
    f = s - i0;
  };
  for (int y = 0; y < h; ++y) {
    int y0, y1;
    double fy;
    source(y, image.height(), y0, y1, fy);
    for (int x = 0; x < w; ++x) {
      int x0, x1;
      double fx;
      source(x, image.width(), x0, x1, fx);
      for (int c = 0; c < image.channels(); ++c) {
        const double top = (1.0 - fx) * image(x0, y0, c) + fx * image(x1, y0, c);
        const double bottom = (1.0 - fx) * image(x0, y1, c) + fx * image(x1, y1, c);
        out(x, y, c) = (1.0 - fy) * top + fy * bottom;
      }
    }
  }
  return out;
}

Image accumulate_pyramid(std::span<const Image> residuals, const Upsampler& upsample) {
  if (residuals.empty()) throw Error(ErrorKind::MissingResolution, "no residual at resolution 4");
  FeaturePyramid shape;
  shape.levels.assign(residuals.begin(), residuals.end());
  shape.validate();
  Image acc = residuals[0];
  for (size_t i = 1; i < residuals.size(); ++i) {
    Image up = upsample(acc);
    if (!up.same_shape(residuals[i])) throw Error(ErrorKind::InvalidArgument, "upsampler output does not match the next residual");
    for (size_t k = 0; k < up.size(); ++k) up.data()[k] += residuals[i].data()[k];
    acc = std::move(up);
  }
  return acc;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Image alpha_pyramid(std::span<const Image> residuals, int final_resolution) {
  Image acc = accumulate_pyramid(residuals);
  const int alpha_resolution = acc.width();
  if (!is_power_of_two(final_resolution)) throw Error(ErrorKind::InvalidArgument, "final resolution must be a power of two");
  if (alpha_resolution > final_resolution)
    throw Error(ErrorKind::InvalidArgument, "alpha resolution exceeds the final resolution");
  for (double& v : acc.data()) v = sigmoid(v);
  if (alpha_resolution == final_resolution) return acc;
  return upsample_bilinear(acc, final_resolution / alpha_resolution);
}

Image standardize_channels(const Image& feature, double eps) {
  const size_t pixels = static_cast<size_t>(feature.width()) * feature.height();
  const int channels = feature.channels();
  if (pixels == 0) throw Error(ErrorKind::InvalidArgument, "empty feature map");
  std::vector<double> mean(static_cast<size_t>(channels), 0.0);
  std::vector<double> var(static_cast<size_t>(channels), 0.0);
  const auto& d = feature.data();
  for (size_t p = 0; p < pixels; ++p)
    for (int c = 0; c < channels; ++c) mean[static_cast<size_t>(c)] += d[p * channels + c];
  for (double& m : mean) m /= static_cast<double>(pixels);
  for (size_t p = 0; p < pixels; ++p)
    for (int c = 0; c < channels; ++c) {
      const double diff = d[p * channels + c] - mean[static_cast<size_t>(c)];
      var[static_cast<size_t>(c)] += diff * diff;
    }
  Image out(feature.width(), feature.height(), channels);
  std::vector<double> inv(static_cast<size_t>(channels));
  for (int c = 0; c < channels; ++c)
    inv[static_cast<size_t>(c)] = 1.0 / (std::sqrt(var[static_cast<size_t>(c)] / static_cast<double>(pixels)) + eps);
  for (size_t p = 0; p < pixels; ++p)
    for (int c = 0; c < channels; ++c)
      out.data()[p * channels + c] = (d[p * channels + c] - mean[static_cast<size_t>(c)]) * inv[static_cast<size_t>(c)];
  return out;
}

Image plane_feature(const Image& feature, NormalizedDepth depth, std::span<const double> omega, const EmbedFn& embed) {
  const std::vector<double> e = embed(depth, omega);
  if (e.size() != static_cast<size_t>(feature.channels()))
    throw Error(ErrorKind::InvalidArgument, "embedding length must equal the channel count");
  Image out = standardize_channels(feature);
  const size_t channels = e.size();
  for (size_t k = 0; k < out.size(); ++k) out.data()[k] += e[k % channels];
  return out;
}

std::vector<double> truncate_style(std::span<const double> omega, std::span<const double> omega_bar, double psi) {
  if (omega.size() != omega_bar.size()) throw Error(ErrorKind::InvalidArgument, "style and mean style differ in length");
  if (!(psi >= 0.0 && psi <= 1.0)) throw Error(ErrorKind::InvalidArgument, "truncation psi must lie in [0, 1]");
  std::vector<double> out(omega.size());
  for (size_t i = 0; i < omega.size(); ++i) out[i] = psi * omega[i] + (1.0 - psi) * omega_bar[i];
  return out;
}

std::vector<Image> depth_to_alpha(const Image& depth, std::span<const double> plane_depths, double epsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be positive");
  if (depth.channels() != 1) throw Error(ErrorKind::InvalidArgument, "depth map must have one channel");
  std::vector<Image> alphas;
  alphas.reserve(plane_depths.size());
  for (double d : plane_depths) {
    Image a(depth.width(), depth.height(), 1);
    for (size_t k = 0; k < a.size(); ++k)
      a.data()[k] = std::min(1.0, std::max(0.0, (d - (depth.data()[k] - epsilon)) / (2.0 * epsilon)));
    alphas.push_back(std::move(a));
  }
  return alphas;
}

Image background_fill(const Image& color, double fraction) {
  const int w = color.width();
  const int strip = static_cast<int>(std::floor(w * fraction + 1e-9));
  if (strip < 1 || 2 * strip > w) throw Error(ErrorKind::InvalidArgument, "boundary strips must hold at least one column each");
  Image out(w, color.height(), color.channels());
  const int left_end = strip - 1;  // last column of the left strip
  const int right_begin = w - strip;
  for (int y = 0; y < color.height(); ++y) {
    for (int c = 0; c < color.channels(); ++c) {
      double left = 0.0, right = 0.0;
      for (int x = 0; x < strip; ++x) {
        left += color(x, y, c);
        right += color(right_begin + x, y, c);
      }
      left /= strip;
      right /= strip;
      for (int x = 0; x < w; ++x) {
        double v;
        if (x <= left_end) {
          v = left;
        } else if (x >= right_begin) {
          v = right;
        } else {
          const double t = static_cast<double>(x - left_end) / (right_begin - left_end);
          v = left + t * (right - left);
        }
        out(x, y, c) = v;
      }
    }
  }
  return out;
}

double projection_logit(std::span<const double> feature, std::span<const double> pose_embedding) {
  if (feature.size() != pose_embedding.size() || feature.empty())
    throw Error(ErrorKind::InvalidArgument, "feature and pose embedding must be non-empty and equally long");
  const double n = static_cast<double>(pose_embedding.size());
  double mean = 0.0;
  for (double v : pose_embedding) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : pose_embedding) var += (v - mean) * (v - mean);
  const double stddev = std::sqrt(var / n);
  if (!(stddev > 0.0)) throw Error(ErrorKind::ZeroVariance, "pose embedding has zero variance");
  double logit = 0.0;
  for (size_t i = 0; i < feature.size(); ++i) logit += feature[i] * (pose_embedding[i] - mean) / stddev;
  return logit;
}

double nonsaturating_f(double x) {
  // -softplus(-x) = -(max(-x, 0) + log1p(exp(-|x|)))
  return -(std::max(-x, 0.0) + std::log1p(std::exp(-std::abs(x))));
}

double gan_loss_terms(std::span<const double> fake_logits, std::span<const double> real_logits,
                      std::span<const double> grad_norms_sq, const LossParams& params) {
  if (fake_logits.empty() || real_logits.empty()) throw Error(ErrorKind::InvalidArgument, "need fake and real logits");
  if (real_logits.size() != grad_norms_sq.size())
    throw Error(ErrorKind::InvalidArgument, "one gradient norm per real sample");
  if (!(params.lambda >= 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be non-negative");
  double fake = 0.0;
  for (double x : fake_logits) fake += nonsaturating_f(x);
  double real = 0.0;
  for (size_t i = 0; i < real_logits.size(); ++i) real += nonsaturating_f(real_logits[i]) + params.lambda * grad_norms_sq[i];
  return fake / static_cast<double>(fake_logits.size()) + real / static_cast<double>(real_logits.size());
}

}  // namespace gmpi
