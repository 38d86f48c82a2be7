// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

#include "gmpi/toygen.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "gmpi/parallel.h"

namespace gmpi {

void ToyConfig::validate() const {
  if (planes < 1) throw Error(ErrorKind::InvalidConfig, "planes must be at least 1");
  if (!is_power_of_two(resolution) || resolution < 4) throw Error(ErrorKind::InvalidConfig, "resolution must be a power of two >= 4");
  if (!is_power_of_two(alpha_resolution) || alpha_resolution < 4 || alpha_resolution > resolution)
    throw Error(ErrorKind::InvalidConfig, "alpha_resolution must be a power of two in [4, resolution]");
  if (!(near > 0.0) || !(near < far)) throw Error(ErrorKind::InvalidConfig, "need 0 < near < far");
  if (channel_base < 4) throw Error(ErrorKind::InvalidConfig, "channel_base too small");
  if (channel_dim(resolution, channel_base) < 1) throw Error(ErrorKind::InvalidConfig, "channel_base leaves the top level without channels");
  if (latent_dim < 1 || style_dim < 1) throw Error(ErrorKind::InvalidConfig, "latent and style sizes must be positive");
  if (!(psi >= 0.0 && psi <= 1.0)) throw Error(ErrorKind::InvalidConfig, "psi must lie in [0, 1]");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  try {
    size_t used = 0;
    T value;
    if constexpr (std::is_floating_point_v<T>) value = static_cast<T>(std::stod(text, &used));
    else if constexpr (std::is_unsigned_v<T>) value = static_cast<T>(std::stoull(text, &used));
    else value = static_cast<T>(std::stoll(text, &used));
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw Error(ErrorKind::InvalidConfig, "bad value for '" + key + "': '" + text + "'");
  }
}

std::vector<double> gaussian(std::mt19937_64& rng, size_t n, double scale) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = g(rng) * scale;
  return v;
}

double leaky_relu(double x) { return x > 0.0 ? x : 0.2 * x; }

}  // namespace

ToyConfig parse_toy_config(std::istream& in, ToyConfig config) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "planes") config.planes = parse_number<int>(key, value);
    else if (key == "resolution") config.resolution = parse_number<int>(key, value);
    else if (key == "alpha_resolution") config.alpha_resolution = parse_number<int>(key, value);
    else if (key == "near") config.near = parse_number<double>(key, value);
    else if (key == "far") config.far = parse_number<double>(key, value);
    else if (key == "channel_base") config.channel_base = parse_number<int>(key, value);
    else if (key == "seed") config.seed = parse_number<uint64_t>(key, value);
    else if (key == "latent_dim") config.latent_dim = parse_number<int>(key, value);
    else if (key == "style_dim") config.style_dim = parse_number<int>(key, value);
    else if (key == "psi") config.psi = parse_number<double>(key, value);
    else throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  config.validate();
  return config;
}

std::string format_toy_config(const ToyConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "planes = " << c.planes << "\nresolution = " << c.resolution << "\nalpha_resolution = " << c.alpha_resolution
      << "\nnear = " << c.near << "\nfar = " << c.far << "\nchannel_base = " << c.channel_base << "\nseed = " << c.seed
      << "\nlatent_dim = " << c.latent_dim << "\nstyle_dim = " << c.style_dim << "\npsi = " << c.psi << "\n";
  return out.str();
}

ToyGenerator::ToyGenerator(const ToyConfig& config) : config_(config) {
  config_.validate();
  std::mt19937_64 rng(config_.seed);
  const auto latent = static_cast<size_t>(config_.latent_dim);
  const auto style = static_cast<size_t>(config_.style_dim);
  map1_ = gaussian(rng, style * latent, 1.0 / std::sqrt(static_cast<double>(latent)));
  map2_ = gaussian(rng, style * style, 1.0 / std::sqrt(static_cast<double>(style)));

  int alpha_levels = 0;
  for (int h = 4; h <= config_.alpha_resolution; h *= 2) ++alpha_levels;
  // Total depth slope of the alpha logits across [0, 1] normalized depth.
  const double depth_slope = 10.0 / alpha_levels;

  for (int h = 4; h <= config_.resolution; h *= 2) {
    Level lv;
    lv.resolution = h;
    lv.channels = channel_dim(h, config_.channel_base);
    const auto ch = static_cast<size_t>(lv.channels);
    std::uniform_real_distribution<double> freq(-0.5, 1.0);
    const double max_freq = std::max(1.0, h / 8.0);
    lv.freq_x.resize(ch);
    lv.freq_y.resize(ch);
    for (size_t c = 0; c < ch; ++c) {
      lv.freq_x[c] = freq(rng) * max_freq;
      lv.freq_y[c] = freq(rng) * max_freq;
    }
    lv.amp_weights = gaussian(rng, ch * style, 1.0 / std::sqrt(static_cast<double>(style)));
    lv.phase_weights = gaussian(rng, ch * style, 1.0 / std::sqrt(static_cast<double>(style)));
    const double level_gain = std::sqrt(4.0 / h);
    lv.to_rgb = gaussian(rng, 3 * ch, 1.5 * level_gain / std::sqrt(static_cast<double>(ch)));
    lv.to_alpha = gaussian(rng, ch, level_gain / std::sqrt(static_cast<double>(ch)));
    lv.alpha_bias = 0.0;
    // Depth embedding aligned with ToAlpha so alpha grows with plane depth.
    double abs_sum = 0.0;
    for (double w : lv.to_alpha) abs_sum += std::abs(w);
    lv.embed_depth.resize(ch);
    for (size_t c = 0; c < ch; ++c) lv.embed_depth[c] = std::copysign(depth_slope / abs_sum, lv.to_alpha[c]);
    lv.embed_style = gaussian(rng, ch * style, 0.1 / std::sqrt(static_cast<double>(style)));
    levels_.push_back(std::move(lv));
  }

  // omega_bar: mean style over a fixed batch of latents.
  std::mt19937_64 mean_rng(config_.seed ^ 0x9e3779b97f4a7c15ULL);
  mean_style_.assign(style, 0.0);
  const int batch = 256;
  for (int s = 0; s < batch; ++s) {
    const std::vector<double> z = gaussian(mean_rng, latent, 1.0);
    const std::vector<double> w = mapping(z);
    for (size_t k = 0; k < style; ++k) mean_style_[k] += w[k] / batch;
  }
}

std::vector<double> ToyGenerator::mapping(std::span<const double> z) const {
  const auto latent = static_cast<size_t>(config_.latent_dim);
  const auto style = static_cast<size_t>(config_.style_dim);
  if (z.size() != latent) throw Error(ErrorKind::InvalidArgument, "latent has the wrong length");
  std::vector<double> hidden(style, 0.0);
  for (size_t r = 0; r < style; ++r) {
    for (size_t c = 0; c < latent; ++c) hidden[r] += map1_[r * latent + c] * z[c];
    hidden[r] = leaky_relu(hidden[r]);
  }
  std::vector<double> omega(style, 0.0);
  for (size_t r = 0; r < style; ++r)
    for (size_t c = 0; c < style; ++c) omega[r] += map2_[r * style + c] * hidden[c];
  return omega;
}

FeaturePyramid ToyGenerator::synthesis(std::span<const double> omega) const {
  const auto style = static_cast<size_t>(config_.style_dim);
  if (omega.size() != style) throw Error(ErrorKind::InvalidArgument, "style has the wrong length");
  FeaturePyramid pyramid;
  for (const Level& lv : levels_) {
    const auto ch = static_cast<size_t>(lv.channels);
    std::vector<double> amp(ch), phase(ch);
    for (size_t c = 0; c < ch; ++c) {
      double a = 0.0, p = 0.0;
      for (size_t k = 0; k < style; ++k) {
        a += lv.amp_weights[c * style + k] * omega[k];
        p += lv.phase_weights[c * style + k] * omega[k];
      }
      amp[c] = 1.0 + 0.5 * std::tanh(a);
      phase[c] = std::numbers::pi * p;
    }
    const int h = lv.resolution;
    Image f(h, h, lv.channels);
    for (int y = 0; y < h; ++y) {
      const double v = (y + 0.5) / h;
      for (int x = 0; x < h; ++x) {
        const double u = (x + 0.5) / h;
        auto px = f.pixel(x, y);
        for (size_t c = 0; c < ch; ++c)
          px[c] = amp[c] * std::sin(2.0 * std::numbers::pi * (lv.freq_x[c] * u + lv.freq_y[c] * v) + phase[c]);
      }
    }
    pyramid.levels.push_back(std::move(f));
  }
  return pyramid;
}

std::vector<double> ToyGenerator::embed(int level, NormalizedDepth depth, std::span<const double> omega) const {
  const Level& lv = levels_.at(static_cast<size_t>(level));
  const auto style = static_cast<size_t>(config_.style_dim);
  if (omega.size() != style) throw Error(ErrorKind::InvalidArgument, "style has the wrong length");
  std::vector<double> e(static_cast<size_t>(lv.channels));
  for (size_t c = 0; c < e.size(); ++c) {
    double s = 0.0;
    for (size_t k = 0; k < style; ++k) s += lv.embed_style[c * style + k] * omega[k];
    e[c] = lv.embed_depth[c] * (depth.value() - 0.5) + s;
  }
  return e;
}

MultiplaneImage ToyGenerator::generate(std::span<const double> z) const { return generate(z, config_.planes); }

MultiplaneImage ToyGenerator::generate(std::span<const double> z, int planes) const {
  if (planes < 1) throw Error(ErrorKind::InvalidConfig, "planes must be at least 1");
  const std::vector<double> omega = truncate_style(mapping(z), mean_style_, config_.psi);
  const FeaturePyramid pyramid = synthesis(omega);

  std::vector<Image> rgb_residuals;
  for (size_t l = 0; l < levels_.size(); ++l) {
    const Level& lv = levels_[l];
    const Image& f = pyramid.levels[l];
    const auto ch = static_cast<size_t>(lv.channels);
    Image r(f.width(), f.height(), 3);
    for (int y = 0; y < f.height(); ++y)
      for (int x = 0; x < f.width(); ++x) {
        const auto px = f.pixel(x, y);
        for (size_t k = 0; k < 3; ++k) {
          double s = 0.0;
          for (size_t c = 0; c < ch; ++c) s += lv.to_rgb[k * ch + c] * px[c];
          r(x, y, static_cast<int>(k)) = s;
        }
      }
    rgb_residuals.push_back(std::move(r));
  }
  Image color = accumulate_pyramid(rgb_residuals);
  for (double& v : color.data()) v = sigmoid(v);

  const std::vector<double> depths = place_planes_disparity(planes, config_.near, config_.far);
  // Plane-aware features are standardize(F^h) + embed; the standardized part
  // is shared by every plane.
  std::vector<Image> standardized;
  for (size_t l = 0; l < levels_.size() && levels_[l].resolution <= config_.alpha_resolution; ++l)
    standardized.push_back(standardize_channels(pyramid.levels[l]));

  std::vector<Image> alphas(static_cast<size_t>(planes));
  parallel_for(static_cast<size_t>(planes), [&](size_t i) {
    const NormalizedDepth d = NormalizedDepth::of(depths[i], depths.front(), depths.back());
    std::vector<Image> residuals;
    for (size_t l = 0; l < standardized.size(); ++l) {
      const Level& lv = levels_[l];
      const auto ch = static_cast<size_t>(lv.channels);
      const std::vector<double> e = embed(static_cast<int>(l), d, omega);
      const Image& s = standardized[l];
      Image r(s.width(), s.height(), 1);
      for (int y = 0; y < s.height(); ++y)
        for (int x = 0; x < s.width(); ++x) {
          const auto px = s.pixel(x, y);
          double acc = lv.alpha_bias;
          for (size_t c = 0; c < ch; ++c) acc += lv.to_alpha[c] * (px[c] + e[c]);
          r(x, y) = acc;
        }
      residuals.push_back(std::move(r));
    }
    alphas[i] = alpha_pyramid(residuals, config_.resolution);
  });

  if (planes == 1) {
    alphas[0] = Image(config_.resolution, config_.resolution, 1, 1.0);
    return MultiplaneImage(std::move(color), std::move(alphas), depths, config_.near, config_.far);
  }
  // The farthest plane is an opaque backdrop colored from the image borders.
  alphas.back() = Image(config_.resolution, config_.resolution, 1, 1.0);
  Image background = background_fill(color);
  return MultiplaneImage(std::move(color), std::move(alphas), depths, config_.near, config_.far, std::move(background));
}

std::vector<double> toy_latent(uint64_t seed, int dim) {
  std::mt19937_64 rng(seed);
  return gaussian(rng, static_cast<size_t>(dim), 1.0);
}

MultiplaneImage toy_mpi_generate(std::span<const double> z, const ToyConfig& config) {
  return ToyGenerator(config).generate(z);
}

ToyDiscriminator::ToyDiscriminator(uint64_t seed) {
  std::mt19937_64 rng(seed);
  feature_weights_ = gaussian(rng, 16 * 48, 1.0 / std::sqrt(48.0));
  embed_weights_ = gaussian(rng, 16 * 16, 0.25);
  embed_bias_ = gaussian(rng, 16, 1.0);
}

std::array<double, 16> ToyDiscriminator::feature(const Image& image) const {
  if (image.channels() != 3 || image.width() < 4 || image.height() < 4)
    throw Error(ErrorKind::InvalidArgument, "discriminator expects an RGB image of at least 4x4");
  std::array<double, 48> pooled{};
  std::array<int, 16> counts{};
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x) {
      const int cell = (y * 4 / image.height()) * 4 + (x * 4 / image.width());
      ++counts[static_cast<size_t>(cell)];
      for (int c = 0; c < 3; ++c) pooled[static_cast<size_t>(cell * 3 + c)] += image(x, y, c);
    }
  for (size_t k = 0; k < 48; ++k) pooled[k] /= counts[k / 3];
  std::array<double, 16> out{};
  for (size_t r = 0; r < 16; ++r)
    for (size_t c = 0; c < 48; ++c) out[r] += feature_weights_[r * 48 + c] * pooled[c];
  return out;
}

std::array<double, 16> ToyDiscriminator::pose_embedding(const CameraPose& pose) const {
  const std::array<double, 16> v = pose.flattened();
  std::array<double, 16> out{};
  for (size_t r = 0; r < 16; ++r) {
    out[r] = embed_bias_[r];
    for (size_t c = 0; c < 16; ++c) out[r] += embed_weights_[r * 16 + c] * v[c];
  }
  return out;
}

double ToyDiscriminator::logit(const Image& image, const CameraPose& pose) const {
  const auto f = feature(image);
  const auto e = pose_embedding(pose);
  return projection_logit(f, e);
}

}  // namespace gmpi
