#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <vector>

#include "normal_forge/errors.hpp"
#include "normal_forge/eval.hpp"
#include "normal_forge/io.hpp"
#include "normal_forge/scene.hpp"
#include "normal_forge/sne.hpp"

namespace normal_forge::cli {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

class ValidationError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

template <typename Fn>
int guarded(const char* command, Fn&& fn) {
  try {
    return fn();
  } catch (const IoError& e) {
    std::cerr << command << ": " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << command << ": " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << command << ": " << e.what() << "\n";
    return kExitIo;
  }
}

void require_threads(int threads) {
  if (threads < 1) throw ValidationError("--threads must be >= 1");
}

EstimateOptions make_options(const std::string& filter, int neighborhood, int threads) {
  require_threads(threads);
  EstimateOptions options;
  options.filter = GradientFilter::make(parse_filter_kind(filter));
  options.neighborhood = NeighborhoodSpec::from_size(neighborhood);
  options.threads = threads;
  return options;
}

// Inline flags win over the calibration file, field by field.
CalibFile resolve_intrinsics(const IntrinsicsSource& src) {
  std::optional<double> fx, fy, cx, cy, baseline;
  if (src.calib) {
    const CalibFile file = read_calib(*src.calib);
    fx = file.intrinsics.fx;
    fy = file.intrinsics.fy;
    cx = file.intrinsics.xo;
    cy = file.intrinsics.yo;
    baseline = file.baseline;
  }
  if (src.fx) fx = src.fx;
  if (src.fy) fy = src.fy;
  if (src.cx) cx = src.cx;
  if (src.cy) cy = src.cy;
  if (src.baseline) baseline = src.baseline;
  if (!fx || !fy || !cx || !cy) {
    throw ValidationError("missing intrinsics: pass --calib or all of --fx, --fy, --cx, --cy");
  }
  CalibFile out{{*fx, *fy, *cx, *cy}, baseline};
  out.intrinsics.validate();
  if (out.baseline && !(*out.baseline > 0.0)) throw ValidationError("--baseline must be positive");
  return out;
}

Vec3 parse_vector(const std::string& text, const char* flag) {
  double v[3];
  std::size_t n = 0;
  const char* p = text.data();
  const char* end = p + text.size();
  while (n < 3) {
    auto [ptr, ec] = std::from_chars(p, end, v[n]);
    if (ec != std::errc()) break;
    ++n;
    p = ptr;
    if (p == end) break;
    if (*p != ',') {
      n = 0;
      break;
    }
    ++p;
  }
  if (n != 3 || p != end) {
    throw ValidationError(std::string(flag) + " expects three comma-separated numbers, got '" +
                          text + "'");
  }
  const Vec3 out{v[0], v[1], v[2]};
  if (!is_finite(out) || !(norm(out) > 0.0)) {
    throw ValidationError(std::string(flag) + " must be a nonzero finite vector");
  }
  return normalized(out);
}

std::pair<int, int> parse_size(const std::string& text) {
  const auto x = text.find('x');
  int w = 0;
  int h = 0;
  bool ok = x != std::string::npos;
  if (ok) {
    auto r1 = std::from_chars(text.data(), text.data() + x, w);
    auto r2 = std::from_chars(text.data() + x + 1, text.data() + text.size(), h);
    ok = r1.ec == std::errc() && r1.ptr == text.data() + x && r2.ec == std::errc() &&
         r2.ptr == text.data() + text.size();
  }
  if (!ok || w < 3 || h < 3) {
    throw ValidationError("--size expects WIDTHxHEIGHT with both >= 3, got '" + text + "'");
  }
  return {w, h};
}

std::size_t count_valid(const Mask& m) {
  return static_cast<std::size_t>(std::count(m.values().begin(), m.values().end(), 1));
}

// FNV-1a over the raw bytes of valid flags and normal components.
std::uint64_t checksum(const NormalMap& nm) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  const auto normals = nm.normals.values();
  const auto valid = nm.valid.values();
  mix(valid.data(), valid.size());
  mix(normals.data(), normals.size() * sizeof(Vec3));
  return h;
}

void emit_report(const MetricReport& report, const EvalConfig& cfg) {
  const std::string text = format_metric_text(report);
  std::cout << text;
  if (cfg.report) write_text_file(*cfg.report, text);
  if (cfg.json) write_text_file(*cfg.json, format_metric_json(report));
}

}  // namespace

int cmd_estimate(const EstimateConfig& cfg) {
  return guarded("estimate", [&] {
    if (!cfg.depth && !cfg.disparity) throw ValidationError("one of --depth or --disparity is required");
    const EstimateOptions options = make_options(cfg.filter, cfg.neighborhood, cfg.threads);
    const CalibFile calib = resolve_intrinsics(cfg.intrinsics);
    if (cfg.disparity && !calib.baseline) {
      throw ValidationError("disparity input needs a baseline: pass --baseline or a calib with baseline");
    }

    DepthImage depth;
    if (cfg.depth) {
      depth = read_depth_png(*cfg.depth);
    } else {
      depth = disparity_to_depth(read_disparity_png(*cfg.disparity, *calib.baseline),
                                 calib.intrinsics);
    }

    const auto start = std::chrono::steady_clock::now();
    const NormalMap nm = estimate_normals(depth, calib.intrinsics, options);
    const auto stop = std::chrono::steady_clock::now();
    write_normal_png(nm, cfg.out);

    std::cout << "pixels=" << depth.depth.size() << "\n"
              << "valid_input=" << count_valid(depth.valid) << "\n"
              << "valid_output=" << count_valid(nm.valid) << "\n"
              << "elapsed_ms=" << std::chrono::duration<double, std::milli>(stop - start).count()
              << "\n";
    return kExitOk;
  });
}

int cmd_synth(const SynthConfig& cfg) {
  return guarded("synth", [&] {
    SceneSpec spec;
    if (cfg.spec) {
      spec = read_scene_spec(*cfg.spec);
    } else if (cfg.kind == "plane") {
      spec = default_plane_spec();
    } else if (cfg.kind == "sphere") {
      spec = default_sphere_spec();
    } else if (cfg.kind == "road") {
      spec = default_road_spec();
    } else {
      throw ValidationError("pass --spec or --kind plane|sphere|road");
    }
    if (!(cfg.noise >= 0.0)) throw ValidationError("--noise must be non-negative");
    if (cfg.baseline && !(*cfg.baseline > 0.0)) throw ValidationError("--baseline must be positive");

    GroundTruthBundle gt = synthesize(spec);
    const DepthImage depth = add_noise(gt.depth, cfg.noise, cfg.seed);

    std::error_code ec;
    fs::create_directories(cfg.outdir, ec);
    if (ec) throw IoError("cannot create " + cfg.outdir.string() + ": " + ec.message());
    write_depth_png(depth, cfg.outdir / "depth.png");
    write_normal_png(gt.normals, cfg.outdir / "normals.png");
    if (gt.freespace) write_mask_png(*gt.freespace, cfg.outdir / "freespace.png");
    if (cfg.baseline) {
      write_disparity_png(depth_to_disparity(depth, spec.intrinsics, *cfg.baseline),
                          cfg.outdir / "disparity.png");
    }
    write_calib({spec.intrinsics, cfg.baseline}, cfg.outdir / "calib.txt");
    write_scene_spec(spec, cfg.outdir / "scene.txt");

    std::cout << "width=" << spec.width << "\nheight=" << spec.height
              << "\nvalid=" << count_valid(gt.depth.valid) << "\n";
    if (gt.freespace) std::cout << "freespace=" << count_valid(*gt.freespace) << "\n";
    return kExitOk;
  });
}

int cmd_eval(const EvalConfig& cfg) {
  return guarded("eval", [&] {
    if (cfg.mode != "normals" && cfg.mode != "mask") {
      throw ValidationError("--mode must be normals or mask");
    }
    if (!(cfg.saturation_deg > 0.0)) throw ValidationError("--saturation must be positive");

    MetricReport report;
    if (cfg.mode == "normals") {
      const NormalMap pred = read_normal_png(cfg.pred);
      const NormalMap gt = read_normal_png(cfg.gt);
      const AngularErrorMap err = aae(gt, pred, cfg.sign_invariant);
      report.add("count", static_cast<double>(err.count));
      report.add("aae_rad", err.mean);
      report.add("aae_deg", err.mean / kDegToRad);
      report.add("median_deg", median_error(err) / kDegToRad);
      emit_report(report, cfg);
      if (cfg.error_map) {
        write_rgb_png(colorize_error(err, cfg.saturation_deg * kDegToRad), *cfg.error_map);
      }
    } else {
      const Mask pred = read_mask_png(cfg.pred);
      const Mask gt = read_mask_png(cfg.gt);
      const Mask valid = cfg.valid ? read_mask_png(*cfg.valid) : Mask(gt.width(), gt.height(), 1);
      const ConfusionCounts c = confusion(pred, gt, valid);
      const SegmentationScores s = scores(c);
      report.add("tp", static_cast<double>(c.tp));
      report.add("tn", static_cast<double>(c.tn));
      report.add("fp", static_cast<double>(c.fp));
      report.add("fn", static_cast<double>(c.fn));
      report.add("accuracy", s.accuracy);
      report.add("precision", s.precision);
      report.add("recall", s.recall);
      report.add("fscore", s.fscore);
      report.add("iou", s.iou);
      emit_report(report, cfg);
    }
    return kExitOk;
  });
}

int cmd_freespace(const FreespaceConfig& cfg) {
  return guarded("freespace", [&] {
    FreespaceOptions options;
    options.up = parse_vector(cfg.up, "--up");
    options.max_angle = cfg.max_angle_deg * kDegToRad;
    options.largest_component = cfg.largest_component;
    if (!(options.max_angle > 0.0) || !(cfg.max_angle_deg < 90.0)) {
      throw ValidationError("--max-angle must lie in (0, 90) degrees");
    }
    const NormalMap nm = read_normal_png(cfg.normals);
    const Mask mask = normal_freespace(nm, options);
    write_mask_png(mask, cfg.out);
    std::cout << "positive=" << count_valid(mask) << "\npixels=" << mask.size() << "\n";
    return kExitOk;
  });
}

int cmd_bench(const BenchConfig& cfg) {
  return guarded("bench", [&] {
    const auto [w, h] = parse_size(cfg.size);
    if (cfg.iters < 1) throw ValidationError("--iters must be >= 1");
    const EstimateOptions options = make_options(cfg.filter, cfg.neighborhood, cfg.threads);

    SceneSpec spec = default_road_spec();
    spec.width = w;
    spec.height = h;
    const double scale = w / 640.0;
    spec.intrinsics = {500.0 * scale, 500.0 * scale, 0.5 * w, 0.5 * h};
    const GroundTruthBundle gt = synth_road(spec);

    NormalMap nm = estimate_normals(gt.depth, spec.intrinsics, options);  // warm-up
    std::vector<double> ms;
    ms.reserve(static_cast<std::size_t>(cfg.iters));
    for (int i = 0; i < cfg.iters; ++i) {
      const auto start = std::chrono::steady_clock::now();
      nm = estimate_normals(gt.depth, spec.intrinsics, options);
      const auto stop = std::chrono::steady_clock::now();
      ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
    }
    std::sort(ms.begin(), ms.end());
    const double median = ms.size() % 2 == 1
                              ? ms[ms.size() / 2]
                              : 0.5 * (ms[ms.size() / 2 - 1] + ms[ms.size() / 2]);
    char digest[17];
    std::snprintf(digest, sizeof(digest), "%016llx",
                  static_cast<unsigned long long>(checksum(nm)));
    std::cout << "size=" << w << "x" << h << "\nthreads=" << options.threads
              << "\niters=" << cfg.iters << "\nmedian_ms=" << median
              << "\nfps=" << (median > 0.0 ? 1000.0 / median : 0.0) << "\nchecksum=" << digest
              << "\n";
    return kExitOk;
  });
}

}  // namespace normal_forge::cli
