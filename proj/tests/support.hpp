#pragma once

// Shared helpers for the unit and acceptance suites.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>
#include <sys/wait.h>
#include <string>
#include <vector>

#include "normal_forge/vec3.hpp"

namespace nf_test {

inline constexpr double kDeg = std::numbers::pi / 180.0;

inline normal_forge::Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  while (true) {
    const normal_forge::Vec3 v{g(rng), g(rng), g(rng)};
    const double n = normal_forge::norm(v);
    if (n > 1e-6) return v / n;
  }
}

// Rotation angle between two unit vectors measured in the orthonormal frame
// (a, e2) spanned by them, via atan2. Shares no code with angular_error.
inline double frame_angle(const normal_forge::Vec3& a, const normal_forge::Vec3& b) {
  const double along = normal_forge::dot(a, b);
  const normal_forge::Vec3 perp = b - a * along;
  const double across = normal_forge::norm(perp);
  return std::atan2(across, along);
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const std::filesystem::path dir = std::filesystem::path(NF_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct RunResult {
  int exit_code = -1;
  std::string output;
};

// Runs the CLI with the given argument string, capturing stdout+stderr.
inline RunResult run_cli(const std::string& args, const std::filesystem::path& log) {
  const std::string cmd =
      std::string("\"") + NF_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = slurp(log);
  return r;
}

}  // namespace nf_test
