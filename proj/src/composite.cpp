// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

#include "gmpi/composite.h"

#include "gmpi/parallel.h"

namespace gmpi {

RenderOutput over_composite(std::span<const WarpedPlane> planes, std::optional<std::span<const double>> values) {
  if (planes.empty()) throw Error(ErrorKind::EmptyPlaneList, "nothing to composite");
  const int width = planes.front().alpha.width();
  const int height = planes.front().alpha.height();
  for (const WarpedPlane& p : planes) {
    if (p.alpha.width() != width || p.alpha.height() != height || p.alpha.channels() != 1 ||
        p.color.width() != width || p.color.height() != height || p.color.channels() != 3)
      throw Error(ErrorKind::InvalidArgument, "warped planes disagree in shape");
  }
  if (values && values->size() != planes.size())
    throw Error(ErrorKind::InvalidArgument, "need one composited value per plane");

  RenderOutput out;
  out.color = Image(width, height, 3);
  out.transmittance = Image(width, height, 1);
  if (values) out.depth = Image(width, height, 1);

  parallel_for(static_cast<size_t>(height), [&](size_t row) {
    const int y = static_cast<int>(row);
    for (int x = 0; x < width; ++x) {
      double transmittance = 1.0;
      double rgb[3] = {0.0, 0.0, 0.0};
      double depth = 0.0;
      for (size_t i = 0; i < planes.size(); ++i) {
        const double a = planes[i].alpha(x, y);
        const double w = a * transmittance;
        const auto c = planes[i].color.pixel(x, y);
        rgb[0] += c[0] * w;
        rgb[1] += c[1] * w;
        rgb[2] += c[2] * w;
        if (values) depth += (*values)[i] * w;
        transmittance *= 1.0 - a;
      }
      for (int c = 0; c < 3; ++c) out.color(x, y, c) = rgb[c];
      out.transmittance(x, y) = transmittance;
      if (values) (*out.depth)(x, y) = depth;
    }
  });
  return out;
}

ViewGeometry view_geometry(const MultiplaneImage& mpi, const CameraPair& cams, const CameraPose& target_to_canonical) {
  ViewGeometry g;
  g.homographies.reserve(mpi.plane_count());
  g.plane_offsets.reserve(mpi.plane_count());
  for (size_t i = 0; i < mpi.plane_count(); ++i) {
    const PlaneGeometry plane = plane_in_target_frame(mpi.depth(i), target_to_canonical);
    g.homographies.push_back(plane_homography(cams.canonical, cams.target, target_to_canonical, plane));
    g.plane_offsets.push_back(plane.b);
  }
  return g;
}

std::vector<WarpedPlane> warp_all(const MultiplaneImage& mpi, const CameraPair& cams, const ViewGeometry& geometry) {
  std::vector<WarpedPlane> warped(mpi.plane_count());
  for (size_t i = 0; i < mpi.plane_count(); ++i)
    warped[i] = warp_plane(mpi, i, geometry.homographies[i], cams.target.width, cams.target.height);
  return warped;
}

RenderOutput render(const MultiplaneImage& mpi, const CameraPair& cams, const CameraPose& target_to_canonical,
                    const RenderSettings& settings) {
  const ViewGeometry geometry = view_geometry(mpi, cams, target_to_canonical);
  const std::vector<WarpedPlane> warped = warp_all(mpi, cams, geometry);
  if (!settings.with_depth) return over_composite(warped);
  return over_composite(warped, std::span<const double>(geometry.plane_offsets));
}

Image over_backdrop(const RenderOutput& out, const std::array<double, 3>& backdrop) {
  Image img = out.color;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c) img(x, y, c) += out.transmittance(x, y) * backdrop[static_cast<size_t>(c)];
  return img;
}

}  // namespace gmpi
