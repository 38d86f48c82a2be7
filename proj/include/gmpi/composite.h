// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "gmpi/core.h"
#include "gmpi/warp.h"

namespace gmpi {

struct RenderOutput {
  Image color;                 // W' x H' x 3
  std::optional<Image> depth;  // W' x H' x 1, sum_i b_i w_i
  Image transmittance;         // W' x H' x 1, prod_i (1 - alpha_i)
};

struct CameraPair {
  CameraIntrinsics canonical;
  CameraIntrinsics target;
};

struct RenderSettings {
  bool with_depth = true;
};

/// Front-to-back over operator. Planes must be ordered near to far. When
/// `values` is given (one scalar per plane) the same weights composite them
/// into the depth channel.
RenderOutput over_composite(std::span<const WarpedPlane> planes,
                            std::optional<std::span<const double>> values = std::nullopt);

/// Per-plane homographies and target-frame plane offsets b_i for a view.
struct ViewGeometry {
  std::vector<Homography> homographies;
  std::vector<double> plane_offsets;
};
ViewGeometry view_geometry(const MultiplaneImage& mpi, const CameraPair& cams, const CameraPose& target_to_canonical);

/// Warps every plane into the target view.
std::vector<WarpedPlane> warp_all(const MultiplaneImage& mpi, const CameraPair& cams, const ViewGeometry& geometry);

/// Renders the MPI from the target camera: warp each plane, then composite.
RenderOutput render(const MultiplaneImage& mpi, const CameraPair& cams, const CameraPose& target_to_canonical,
                    const RenderSettings& settings = {});

/// Composites a residual transmittance over a constant backdrop color.
Image over_backdrop(const RenderOutput& out, const std::array<double, 3>& backdrop);

}  // namespace gmpi
