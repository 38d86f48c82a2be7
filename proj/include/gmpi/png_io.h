// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "gmpi/image.h"

namespace gmpi {

/// Writes a 1- or 3-channel image with values in [0, 1] as an 8- or 16-bit
/// PNG. Values are clamped and rounded to the nearest code.
void write_png(const std::string& path, const Image& image, int bit_depth = 8);

struct PngImage {
  Image image;  // values in [0, 1]
  int bit_depth;
};

/// Reads an 8- or 16-bit gray or RGB PNG (palette and alpha are rejected).
PngImage read_png(const std::string& path);

}  // namespace gmpi
