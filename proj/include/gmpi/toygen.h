// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "gmpi/core.h"
#include "gmpi/genstack.h"

namespace gmpi {

/// Toy generator configuration. Plane count is an inference-time choice: the
/// weights depend only on the remaining fields.
struct ToyConfig {
  int planes = 32;
  int resolution = 256;        // H
  int alpha_resolution = 256;  // H_alpha
  double near = 0.95;
  double far = 1.12;
  int channel_base = 1 << 15;
  uint64_t seed = 0;
  int latent_dim = 64;
  int style_dim = 64;
  double psi = 1.0;

  void validate() const;
};

/// Reads `key = value` lines ('#' starts a comment). Keys: planes,
/// resolution, alpha_resolution, near, far, channel_base, seed, latent_dim,
/// style_dim, psi. Unknown keys or malformed values throw InvalidConfig.
ToyConfig parse_toy_config(std::istream& in, ToyConfig defaults = {});
std::string format_toy_config(const ToyConfig& config);

/// Seeded random stand-ins for the mapping, synthesis, ToRGB, ToAlpha and
/// embedding networks, wired exactly like the layered generator: a color
/// pyramid, plane-aware features, a shared ToAlpha per resolution, and a
/// background fill on the last plane.
class ToyGenerator {
 public:
  explicit ToyGenerator(const ToyConfig& config);

  const ToyConfig& config() const { return config_; }

  std::vector<double> mapping(std::span<const double> z) const;
  const std::vector<double>& mean_style() const { return mean_style_; }
  FeaturePyramid synthesis(std::span<const double> omega) const;
  std::vector<double> embed(int level, NormalizedDepth depth, std::span<const double> omega) const;

  MultiplaneImage generate(std::span<const double> z) const;
  /// Same weights, different plane count.
  MultiplaneImage generate(std::span<const double> z, int planes) const;

 private:
  struct Level {
    int resolution;
    int channels;
    std::vector<double> freq_x, freq_y;          // per channel
    std::vector<double> amp_weights, phase_weights;  // channels x style_dim
    std::vector<double> to_rgb;                  // 3 x channels
    std::vector<double> to_alpha;                // channels
    double alpha_bias;
    std::vector<double> embed_depth;             // channels
    std::vector<double> embed_style;             // channels x style_dim
  };

  ToyConfig config_;
  std::vector<double> map1_, map2_;  // mapping MLP weights
  std::vector<Level> levels_;
  std::vector<double> mean_style_;
};

/// Standard-normal latent drawn from a seed.
std::vector<double> toy_latent(uint64_t seed, int dim);

MultiplaneImage toy_mpi_generate(std::span<const double> z, const ToyConfig& config);

/// Seeded pose-conditioned critic: a 16-d image feature from a 4x4 average
/// pool and a 16-d embedding of the flattened extrinsics, combined by
/// projection_logit.
class ToyDiscriminator {
 public:
  explicit ToyDiscriminator(uint64_t seed);
  std::array<double, 16> feature(const Image& image) const;
  std::array<double, 16> pose_embedding(const CameraPose& pose) const;
  double logit(const Image& image, const CameraPose& pose) const;

 private:
  std::vector<double> feature_weights_;  // 16 x 48
  std::vector<double> embed_weights_;    // 16 x 16
  std::vector<double> embed_bias_;       // 16
};

}  // namespace gmpi
