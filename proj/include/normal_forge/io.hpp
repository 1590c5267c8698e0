#pragma once

// File formats.
//
//   depth / disparity  16-bit gray PNG, value = round(256 * x), 0 = invalid
//   normals            16-bit RGB PNG, channel = round((c + 1) / 2 * 65535),
//                      (0, 0, 0) = invalid
//   masks              8-bit gray PNG, 255 = positive, 0 = negative
//   calib / scene      `key=value` text, `#` comments, keys in any order
//
// Every writer goes through a temporary file and an atomic rename, so a
// failed write never leaves a partial file behind.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "normal_forge/camera.hpp"
#include "normal_forge/eval.hpp"
#include "normal_forge/scene.hpp"
#include "normal_forge/sne.hpp"

namespace normal_forge {

namespace fs = std::filesystem;

DepthImage read_depth_png(const fs::path& path);
void write_depth_png(const DepthImage& z, const fs::path& path);

DisparityImage read_disparity_png(const fs::path& path, double baseline);
void write_disparity_png(const DisparityImage& d, const fs::path& path);

NormalMap read_normal_png(const fs::path& path);
void write_normal_png(const NormalMap& nm, const fs::path& path);

Mask read_mask_png(const fs::path& path);
void write_mask_png(const Mask& mask, const fs::path& path);

// 8-bit RGB, used for colorized error maps.
void write_rgb_png(const Raster<Rgb8>& image, const fs::path& path);

// KITTI-style /256 fixed point, saturating to [1, 65535] on valid pixels.
std::uint16_t encode_fixed256(double value);
std::uint16_t encode_normal_component(double c);
double decode_normal_component(std::uint16_t v);

struct CalibFile {
  CameraIntrinsics intrinsics;
  std::optional<double> baseline;  // meters

  bool operator==(const CalibFile&) const = default;
};

CalibFile parse_calib(std::string_view text);
std::string format_calib(const CalibFile& calib);
CalibFile read_calib(const fs::path& path);
void write_calib(const CalibFile& calib, const fs::path& path);

SceneSpec parse_scene_spec(std::string_view text);
std::string format_scene_spec(const SceneSpec& spec);
SceneSpec read_scene_spec(const fs::path& path);
void write_scene_spec(const SceneSpec& spec, const fs::path& path);

// Ordered metric list; std::nullopt marks an undefined value.
struct MetricReport {
  std::vector<std::pair<std::string, std::optional<double>>> entries;

  void add(std::string key, std::optional<double> value) {
    entries.emplace_back(std::move(key), value);
  }
};

// One `metric=value` line per entry, `undefined` for missing values.
std::string format_metric_text(const MetricReport& report);
// Flat JSON object, null for undefined values.
std::string format_metric_json(const MetricReport& report);

// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

void write_text_file(const fs::path& path, std::string_view contents);
std::string read_text_file(const fs::path& path);

}  // namespace normal_forge
