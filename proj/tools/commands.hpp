#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace normal_forge::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitValidation = 2;

struct IntrinsicsSource {
  std::optional<fs::path> calib;
  std::optional<double> fx, fy, cx, cy, baseline;
};

struct EstimateConfig {
  std::optional<fs::path> depth;
  std::optional<fs::path> disparity;
  IntrinsicsSource intrinsics;
  fs::path out;
  std::string filter = "central";
  int neighborhood = 8;
  int threads = 1;
};

struct SynthConfig {
  std::optional<fs::path> spec;
  std::string kind;  // used when no spec file is given
  fs::path outdir;
  std::uint64_t seed = 0;
  double noise = 0.0;
  std::optional<double> baseline;  // also write disparity.png when set
};

struct EvalConfig {
  fs::path pred;
  fs::path gt;
  std::string mode = "normals";
  bool sign_invariant = false;
  std::optional<fs::path> valid;
  std::optional<fs::path> report;
  std::optional<fs::path> json;
  std::optional<fs::path> error_map;
  double saturation_deg = 30.0;
};

struct FreespaceConfig {
  fs::path normals;
  std::string up = "0,-1,0";
  double max_angle_deg = 15.0;
  bool largest_component = true;
  fs::path out;
};

struct BenchConfig {
  std::string size = "640x480";
  int iters = 50;
  int threads = 1;
  int neighborhood = 8;
  std::string filter = "central";
};

// Each command validates its whole configuration before touching the
// filesystem and returns a process exit code.
int cmd_estimate(const EstimateConfig& cfg);
int cmd_synth(const SynthConfig& cfg);
int cmd_eval(const EvalConfig& cfg);
int cmd_freespace(const FreespaceConfig& cfg);
int cmd_bench(const BenchConfig& cfg);

}  // namespace normal_forge::cli
