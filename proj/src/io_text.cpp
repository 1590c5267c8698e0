#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <system_error>

#include "json.hpp"

#include "io_detail.hpp"
#include "normal_forge/errors.hpp"
#include "normal_forge/io.hpp"

namespace normal_forge {
namespace {

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// `key=value` lines; `#` starts a comment; blank lines ignored; duplicate
// keys rejected.
std::vector<Entry> parse_key_values(std::string_view text) {
  std::vector<Entry> entries;
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key=value");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "empty key");
    if (value.empty()) throw ParseError(line_no, "empty value for '" + std::string(key) + "'");
    if (seen.contains(key)) throw ParseError(line_no, "duplicate key '" + std::string(key) + "'");
    seen.insert(std::string(key));
    entries.push_back({std::string(key), std::string(value), line_no});
  }
  return entries;
}

double parse_number(const Entry& e) {
  double v = 0.0;
  const char* begin = e.value.data();
  const char* end = begin + e.value.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ParseError(e.line, "'" + e.key + "': not a finite number: " + e.value);
  }
  return v;
}

int parse_int(const Entry& e) {
  int v = 0;
  const char* begin = e.value.data();
  const char* end = begin + e.value.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(e.line, "'" + e.key + "': not an integer: " + e.value);
  }
  return v;
}

std::vector<double> parse_tuple(const Entry& e, std::size_t n) {
  std::vector<double> out;
  std::string_view rest = e.value;
  while (true) {
    const auto comma = rest.find(',');
    Entry part{e.key, std::string(trim(rest.substr(0, comma))), e.line};
    out.push_back(parse_number(part));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  if (out.size() != n) {
    throw ParseError(e.line, "'" + e.key + "': expected " + std::to_string(n) +
                                 " comma-separated numbers");
  }
  return out;
}

double require_positive(const Entry& e) {
  const double v = parse_number(e);
  if (!(v > 0.0)) throw ParseError(e.line, "'" + e.key + "' must be positive");
  return v;
}

std::string format_tuple(std::initializer_list<double> values) {
  std::string out;
  for (double v : values) {
    if (!out.empty()) out += ',';
    out += format_double(v);
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw InvalidArgument("format_double: conversion failed");
  return std::string(buf, ptr);
}

CalibFile parse_calib(std::string_view text) {
  CalibFile calib;
  std::optional<double> fx, fy, cx, cy;
  for (const Entry& e : parse_key_values(text)) {
    if (e.key == "fx") {
      fx = require_positive(e);
    } else if (e.key == "fy") {
      fy = require_positive(e);
    } else if (e.key == "cx") {
      cx = parse_number(e);
    } else if (e.key == "cy") {
      cy = parse_number(e);
    } else if (e.key == "baseline") {
      calib.baseline = require_positive(e);
    } else {
      throw ParseError(e.line, "unknown key '" + e.key + "'");
    }
  }
  for (const auto& [name, value] : {std::pair{"fx", fx}, {"fy", fy}, {"cx", cx}, {"cy", cy}}) {
    if (!value) throw ParseError(0, std::string("missing required key '") + name + "'");
  }
  calib.intrinsics = {*fx, *fy, *cx, *cy};
  return calib;
}

std::string format_calib(const CalibFile& calib) {
  const CameraIntrinsics& k = calib.intrinsics;
  std::string out = "fx=" + format_double(k.fx) + "\nfy=" + format_double(k.fy) +
                    "\ncx=" + format_double(k.xo) + "\ncy=" + format_double(k.yo) + "\n";
  if (calib.baseline) out += "baseline=" + format_double(*calib.baseline) + "\n";
  return out;
}

CalibFile read_calib(const fs::path& path) {
  try {
    return parse_calib(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + e.what());
  }
}

void write_calib(const CalibFile& calib, const fs::path& path) {
  write_text_file(path, format_calib(calib));
}

SceneSpec parse_scene_spec(std::string_view text) {
  const std::vector<Entry> entries = parse_key_values(text);
  const Entry* kind = nullptr;
  for (const Entry& e : entries) {
    if (e.key == "kind") kind = &e;
  }
  if (kind == nullptr) throw ParseError(0, "missing required key 'kind'");

  SceneSpec spec;
  if (kind->value == "plane") {
    spec = default_plane_spec();
  } else if (kind->value == "sphere") {
    spec = default_sphere_spec();
  } else if (kind->value == "road") {
    spec = default_road_spec();
    std::get<RoadScene>(spec.geometry).boxes.clear();
  } else {
    throw ParseError(kind->line, "unknown scene kind '" + kind->value + "'");
  }

  std::map<int, Box> boxes;
  for (const Entry& e : entries) {
    const std::string& key = e.key;
    if (key == "kind") continue;
    if (key == "width" || key == "height") {
      const int v = parse_int(e);
      if (v < 1) throw ParseError(e.line, "'" + key + "' must be positive");
      (key == "width" ? spec.width : spec.height) = v;
    } else if (key == "fx") {
      spec.intrinsics.fx = require_positive(e);
    } else if (key == "fy") {
      spec.intrinsics.fy = require_positive(e);
    } else if (key == "cx") {
      spec.intrinsics.xo = parse_number(e);
    } else if (key == "cy") {
      spec.intrinsics.yo = parse_number(e);
    } else if (key == "far") {
      spec.far_limit = require_positive(e);
    } else if (auto* plane = std::get_if<PlaneScene>(&spec.geometry);
               plane != nullptr && (key == "normal" || key == "offset")) {
      if (key == "normal") {
        const auto v = parse_tuple(e, 3);
        plane->normal = {v[0], v[1], v[2]};
      } else {
        plane->offset = parse_number(e);
      }
    } else if (auto* sphere = std::get_if<SphereScene>(&spec.geometry);
               sphere != nullptr && (key == "center" || key == "radius")) {
      if (key == "center") {
        const auto v = parse_tuple(e, 3);
        sphere->center = {v[0], v[1], v[2]};
      } else {
        sphere->radius = require_positive(e);
      }
    } else if (auto* road = std::get_if<RoadScene>(&spec.geometry); road != nullptr) {
      if (key == "camera_height") {
        road->camera_height = require_positive(e);
      } else if (key == "pitch") {
        road->pitch = parse_number(e);
      } else if (key.size() > 3 && key.starts_with("box") &&
                 key.find_first_not_of("0123456789", 3) == std::string::npos) {
        const Entry index{key, key.substr(3), e.line};
        const auto v = parse_tuple(e, 5);
        boxes[parse_int(index)] = {v[0], v[1], v[2], v[3], v[4]};
      } else {
        throw ParseError(e.line, "unknown key '" + key + "' for road scene");
      }
    } else {
      throw ParseError(e.line, "unknown key '" + key + "' for " + kind->value + " scene");
    }
  }
  if (auto* road = std::get_if<RoadScene>(&spec.geometry)) {
    for (const auto& [index, box] : boxes) road->boxes.push_back(box);
  }
  try {
    spec.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(0, e.what());
  }
  return spec;
}

std::string format_scene_spec(const SceneSpec& spec) {
  std::ostringstream out;
  const CameraIntrinsics& k = spec.intrinsics;
  std::visit(
      [&](const auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, PlaneScene>) {
          out << "kind=plane\n";
        } else if constexpr (std::is_same_v<T, SphereScene>) {
          out << "kind=sphere\n";
        } else {
          out << "kind=road\n";
        }
      },
      spec.geometry);
  out << "width=" << spec.width << "\nheight=" << spec.height << "\nfx=" << format_double(k.fx)
      << "\nfy=" << format_double(k.fy) << "\ncx=" << format_double(k.xo)
      << "\ncy=" << format_double(k.yo) << "\nfar=" << format_double(spec.far_limit) << "\n";
  if (const auto* plane = std::get_if<PlaneScene>(&spec.geometry)) {
    out << "normal=" << format_tuple({plane->normal.x, plane->normal.y, plane->normal.z})
        << "\noffset=" << format_double(plane->offset) << "\n";
  } else if (const auto* sphere = std::get_if<SphereScene>(&spec.geometry)) {
    out << "center=" << format_tuple({sphere->center.x, sphere->center.y, sphere->center.z})
        << "\nradius=" << format_double(sphere->radius) << "\n";
  } else if (const auto* road = std::get_if<RoadScene>(&spec.geometry)) {
    out << "camera_height=" << format_double(road->camera_height)
        << "\npitch=" << format_double(road->pitch) << "\n";
    for (std::size_t i = 0; i < road->boxes.size(); ++i) {
      const Box& b = road->boxes[i];
      out << "box" << i << "=" << format_tuple({b.x, b.z, b.width, b.length, b.height}) << "\n";
    }
  }
  return out.str();
}

SceneSpec read_scene_spec(const fs::path& path) {
  try {
    return parse_scene_spec(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + e.what());
  }
}

void write_scene_spec(const SceneSpec& spec, const fs::path& path) {
  write_text_file(path, format_scene_spec(spec));
}

std::string format_metric_text(const MetricReport& report) {
  std::string out;
  for (const auto& [key, value] : report.entries) {
    out += key + "=" + (value ? format_double(*value) : std::string("undefined")) + "\n";
  }
  return out;
}

std::string format_metric_json(const MetricReport& report) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& [key, value] : report.entries) {
    if (value) {
      doc[key] = *value;
    } else {
      doc[key] = nullptr;
    }
  }
  return doc.dump(2) + "\n";
}

void write_text_file(const fs::path& path, std::string_view contents) {
  const fs::path tmp = detail::temp_path_for(path);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("cannot write " + path.string());
    }
  }
  detail::commit_file(tmp, path);
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return buf.str();
}

}  // namespace normal_forge
