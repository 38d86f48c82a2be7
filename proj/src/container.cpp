// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

#include "gmpi/container.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <Eigen/Geometry>
#include <json.hpp>

#include "gmpi/png_io.h"

namespace gmpi {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json pose_to_json(const CameraPose& pose) {
  json rotation = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) rotation.push_back(pose.rotation()(r, c));
  const auto& t = pose.translation();
  return {{"rotation", rotation}, {"translation", {t.x(), t.y(), t.z()}}};
}

CameraPose pose_from_json(const json& j) {
  const auto rotation = j.at("rotation").get<std::vector<double>>();
  const auto translation = j.at("translation").get<std::vector<double>>();
  if (rotation.size() != 9 || translation.size() != 3)
    throw Error(ErrorKind::InvalidContainer, "pose needs 9 rotation and 3 translation values");
  Eigen::Matrix3d r;
  for (int row = 0; row < 3; ++row)
    for (int c = 0; c < 3; ++c) r(row, c) = rotation[static_cast<size_t>(row * 3 + c)];
  try {
    return CameraPose(r, {translation[0], translation[1], translation[2]});
  } catch (const Error& e) {
    throw Error(ErrorKind::InvalidContainer, std::string("invalid pose: ") + e.what());
  }
}

json read_json(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw Error(ErrorKind::InvalidContainer, "missing file '" + path + "'");
  try {
    return json::parse(file);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidContainer, "malformed JSON in '" + path + "': " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  file << text;
  if (!file) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

Image load_image(const fs::path& dir, const std::string& name, int channels, int width, int height) {
  if (name.empty() || name.find('/') != std::string::npos || name.find('\\') != std::string::npos || name == "." || name == "..")
    throw Error(ErrorKind::InvalidContainer, "image name '" + name + "' must be a plain file name");
  const fs::path path = dir / name;
  if (!fs::exists(path)) throw Error(ErrorKind::InvalidContainer, "missing image file '" + name + "'");
  PngImage png;
  try {
    png = read_png(path.string());
  } catch (const Error& e) {
    throw Error(ErrorKind::InvalidContainer, e.what());
  }
  if (png.image.channels() != channels)
    throw Error(ErrorKind::InvalidContainer, "'" + name + "' must have " + std::to_string(channels) + " channel(s)");
  if (png.image.width() != width || png.image.height() != height)
    throw Error(ErrorKind::InvalidContainer, "'" + name + "' does not match the manifest resolution");
  return std::move(png.image);
}

}  // namespace

std::string alpha_file_name(size_t plane, size_t plane_count) {
  const int digits = std::max<int>(3, static_cast<int>(std::to_string(plane_count > 0 ? plane_count - 1 : 0).size()));
  char buf[32];
  std::snprintf(buf, sizeof buf, "alpha_%0*zu.png", digits, plane);
  return buf;
}

void save_mpi(const MultiplaneImage& mpi, const CameraIntrinsics& intrinsics, const std::string& dir,
              const SaveOptions& options) {
  if (options.bit_depth != 8 && options.bit_depth != 16) throw Error(ErrorKind::InvalidArgument, "bit depth must be 8 or 16");
  intrinsics.validate();
  if (intrinsics.width != mpi.width() || intrinsics.height != mpi.height())
    throw Error(ErrorKind::InvalidArgument, "intrinsics do not match the MPI resolution");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create '" + dir + "': " + ec.message());

  const fs::path root(dir);
  json alphas = json::array();
  for (size_t i = 0; i < mpi.plane_count(); ++i) {
    const std::string name = alpha_file_name(i, mpi.plane_count());
    write_png((root / name).string(), mpi.alpha(i), options.bit_depth);
    alphas.push_back(name);
  }
  write_png((root / "color.png").string(), mpi.color(), options.bit_depth);

  json manifest = {
      {"format", "gmpi-mpi"},
      {"version", kContainerVersion},
      {"planes", mpi.plane_count()},
      {"width", mpi.width()},
      {"height", mpi.height()},
      {"depths", mpi.depths()},
      {"near", mpi.near()},
      {"far", mpi.far()},
      {"intrinsics", {{"fx", intrinsics.fx}, {"fy", intrinsics.fy}, {"cx", intrinsics.cx}, {"cy", intrinsics.cy}}},
      {"canonical_pose", pose_to_json(options.canonical_pose)},
      {"bit_depth", options.bit_depth},
      {"color", "color.png"},
      {"alphas", alphas},
  };
  if (mpi.background()) {
    write_png((root / "background.png").string(), *mpi.background(), options.bit_depth);
    manifest["background"] = "background.png";
  }
  write_text((root / kManifestName).string(), manifest.dump(2) + "\n");
}

LoadedMpi load_mpi(const std::string& dir) {
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw Error(ErrorKind::InvalidContainer, "'" + dir + "' is not a directory");
  const json m = read_json((root / kManifestName).string());
  try {
    if (!m.is_object()) throw Error(ErrorKind::InvalidContainer, "manifest must be a JSON object");
    if (m.at("format").get<std::string>() != "gmpi-mpi") throw Error(ErrorKind::InvalidContainer, "manifest format is not gmpi-mpi");
    const int version = m.at("version").get<int>();
    if (version != kContainerVersion)
      throw Error(ErrorKind::InvalidContainer, "unsupported container version " + std::to_string(version));
    const int planes = m.at("planes").get<int>();
    const int width = m.at("width").get<int>();
    const int height = m.at("height").get<int>();
    if (planes < 1) throw Error(ErrorKind::InvalidContainer, "planes must be at least 1");
    if (width < 1 || height < 1) throw Error(ErrorKind::InvalidContainer, "width and height must be positive");
    const auto depths = m.at("depths").get<std::vector<double>>();
    const auto alpha_names = m.at("alphas").get<std::vector<std::string>>();
    if (depths.size() != static_cast<size_t>(planes))
      throw Error(ErrorKind::InvalidContainer, "manifest lists " + std::to_string(depths.size()) + " depths for " +
                                                   std::to_string(planes) + " planes");
    if (alpha_names.size() != static_cast<size_t>(planes))
      throw Error(ErrorKind::InvalidContainer, "manifest lists " + std::to_string(alpha_names.size()) +
                                                   " alpha files for " + std::to_string(planes) + " planes");
    const int bit_depth = m.at("bit_depth").get<int>();
    if (bit_depth != 8 && bit_depth != 16) throw Error(ErrorKind::InvalidContainer, "bit_depth must be 8 or 16");

    const json& k = m.at("intrinsics");
    CameraIntrinsics intrinsics{k.at("fx").get<double>(), k.at("fy").get<double>(), k.at("cx").get<double>(),
                                k.at("cy").get<double>(), width, height};
    try {
      intrinsics.validate();
    } catch (const Error& e) {
      throw Error(ErrorKind::InvalidContainer, std::string("invalid intrinsics: ") + e.what());
    }
    const CameraPose pose = pose_from_json(m.at("canonical_pose"));

    // Counting check against the directory before decoding anything.
    size_t files_on_disk = 0;
    for (const auto& entry : fs::directory_iterator(root)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("alpha_", 0) == 0 && entry.path().extension() == ".png") ++files_on_disk;
    }
    if (files_on_disk != static_cast<size_t>(planes))
      throw Error(ErrorKind::InvalidContainer, "manifest declares " + std::to_string(planes) + " planes but the directory holds " +
                                                   std::to_string(files_on_disk) + " alpha files");

    Image color = load_image(root, m.at("color").get<std::string>(), 3, width, height);
    std::vector<Image> alphas;
    alphas.reserve(alpha_names.size());
    for (const auto& name : alpha_names) alphas.push_back(load_image(root, name, 1, width, height));
    std::optional<Image> background;
    if (m.contains("background")) background = load_image(root, m.at("background").get<std::string>(), 3, width, height);

    try {
      MultiplaneImage mpi(std::move(color), std::move(alphas), depths, m.at("near").get<double>(),
                          m.at("far").get<double>(), std::move(background));
      return {std::move(mpi), intrinsics, pose, bit_depth};
    } catch (const Error& e) {
      throw Error(ErrorKind::InvalidContainer, std::string("invalid MPI: ") + e.what());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidContainer, std::string("malformed manifest: ") + e.what());
  }
}

CameraPose orbit_pose(double yaw, double pitch, double center_depth) {
  const Eigen::Matrix3d r =
      (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()) * Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitX()))
          .toRotationMatrix();
  const Eigen::Vector3d center(0.0, 0.0, center_depth);
  // The target's optical axis passes through the center at the same range.
  const Eigen::Vector3d t = center - r * center;
  return CameraPose(r, t);
}

Trajectory orbit_trajectory(const OrbitSpec& spec) {
  if (spec.count < 1) throw Error(ErrorKind::InvalidArgument, "orbit count must be at least 1");
  if (!(spec.yaw_min <= spec.yaw_max) || !(spec.pitch_min <= spec.pitch_max))
    throw Error(ErrorKind::InvalidRange, "orbit ranges must satisfy min <= max");
  if (!(spec.center_depth > 0.0)) throw Error(ErrorKind::InvalidRange, "orbit center depth must be positive");
  Trajectory traj;
  traj.generator = spec;
  for (int i = 0; i < spec.count; ++i) {
    const double s = spec.count == 1 ? 0.5 : static_cast<double>(i) / (spec.count - 1);
    const double yaw = std::lerp(spec.yaw_min, spec.yaw_max, s);
    const double pitch = std::lerp(spec.pitch_min, spec.pitch_max, s);
    char label[32];
    std::snprintf(label, sizeof label, "orbit_%03d", i);
    traj.poses.push_back({label, orbit_pose(yaw, pitch, spec.center_depth)});
  }
  return traj;
}

void save_trajectory(const Trajectory& trajectory, const std::string& path) {
  json poses = json::array();
  for (const auto& p : trajectory.poses) {
    json entry = pose_to_json(p.pose);
    entry["label"] = p.label;
    poses.push_back(entry);
  }
  json doc = {{"format", "gmpi-trajectory"}, {"version", 1}, {"poses", poses}};
  if (trajectory.generator) {
    const double deg = 180.0 / std::numbers::pi;
    const OrbitSpec& g = *trajectory.generator;
    doc["generator"] = {{"kind", "orbit"},
                        {"yaw_deg", {g.yaw_min * deg, g.yaw_max * deg}},
                        {"pitch_deg", {g.pitch_min * deg, g.pitch_max * deg}},
                        {"count", g.count},
                        {"center_depth", g.center_depth}};
  }
  write_text(path, doc.dump(2) + "\n");
}

Trajectory load_trajectory(const std::string& path) {
  const json doc = read_json(path);
  try {
    if (doc.at("format").get<std::string>() != "gmpi-trajectory")
      throw Error(ErrorKind::InvalidContainer, "trajectory format is not gmpi-trajectory");
    if (doc.at("version").get<int>() != 1) throw Error(ErrorKind::InvalidContainer, "unsupported trajectory version");
    Trajectory traj;
    for (const json& p : doc.at("poses")) traj.poses.push_back({p.at("label").get<std::string>(), pose_from_json(p)});
    if (doc.contains("generator")) {
      const json& g = doc.at("generator");
      if (g.at("kind").get<std::string>() != "orbit") throw Error(ErrorKind::InvalidContainer, "unknown trajectory generator");
      const auto yaw = g.at("yaw_deg").get<std::vector<double>>();
      const auto pitch = g.at("pitch_deg").get<std::vector<double>>();
      if (yaw.size() != 2 || pitch.size() != 2) throw Error(ErrorKind::InvalidContainer, "generator ranges need two values");
      const double rad = std::numbers::pi / 180.0;
      traj.generator = OrbitSpec{yaw[0] * rad, yaw[1] * rad, pitch[0] * rad, pitch[1] * rad, g.at("count").get<int>(),
                                 g.at("center_depth").get<double>()};
    }
    return traj;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidContainer, std::string("malformed trajectory: ") + e.what());
  }
}

}  // namespace gmpi
