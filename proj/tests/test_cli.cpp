#include <string>

#include "doctest.h"
#include "normal_forge/eval.hpp"
#include "normal_forge/io.hpp"
#include "normal_forge/sne.hpp"
#include "support.hpp"

using namespace normal_forge;
using nf_test::run_cli;

namespace {

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

// Value of `key=` in a metric report, or NaN when absent.
double metric(const std::string& text, const std::string& key) {
  const std::string needle = key + "=";
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    if (pos == 0 || text[pos - 1] == '\n') return std::stod(text.substr(pos + needle.size()));
    pos += needle.size();
  }
  return std::nan("");
}

}  // namespace

TEST_CASE("synth") {
  const fs::path dir = nf_test::scratch_dir("cli_synth");
  const fs::path log = dir / "log.txt";

  SUBCASE("byte-identical reruns") {
    for (const char* sub : {"a", "b"}) {
      REQUIRE(run_cli("synth --kind road --noise 0.01 --seed 9 --baseline 0.54 --out " +
                          q(dir / sub), log).exit_code == 0);
    }
    for (const char* f : {"depth.png", "normals.png", "freespace.png", "disparity.png",
                          "calib.txt", "scene.txt"}) {
      CHECK(nf_test::slurp(dir / "a" / f) == nf_test::slurp(dir / "b" / f));
      CHECK(!nf_test::slurp(dir / "a" / f).empty());
    }
  }
  SUBCASE("road writes three images of the same size") {
    REQUIRE(run_cli("synth --kind road --out " + q(dir / "road"), log).exit_code == 0);
    const DepthImage z = read_depth_png(dir / "road" / "depth.png");
    const NormalMap n = read_normal_png(dir / "road" / "normals.png");
    const Mask m = read_mask_png(dir / "road" / "freespace.png");
    CHECK(z.width() == 640);
    CHECK(z.height() == 480);
    CHECK(n.normals.same_shape(z.depth));
    CHECK(m.same_shape(z.depth));
    CHECK(read_calib(dir / "road" / "calib.txt").intrinsics == CameraIntrinsics{500, 500, 320, 240});
    CHECK(!fs::exists(dir / "road" / "disparity.png"));
  }
  SUBCASE("noise touches only valid pixels") {
    REQUIRE(run_cli("synth --kind road --out " + q(dir / "clean"), log).exit_code == 0);
    REQUIRE(run_cli("synth --kind road --noise 0.01 --seed 3 --out " + q(dir / "noisy"), log)
                .exit_code == 0);
    const DepthImage clean = read_depth_png(dir / "clean" / "depth.png");
    const DepthImage noisy = read_depth_png(dir / "noisy" / "depth.png");
    CHECK(clean.valid == noisy.valid);
    std::size_t changed = 0, valid = 0;
    for (std::size_t i = 0; i < clean.depth.size(); ++i) {
      const bool diff = clean.depth.values()[i] != noisy.depth.values()[i];
      if (!clean.valid.values()[i]) REQUIRE(!diff);
      valid += clean.valid.values()[i];
      changed += diff;
    }
    CHECK(changed > valid / 2);
  }
  SUBCASE("spec file") {
    write_text_file(dir / "s.txt", "kind=sphere\nwidth=64\nheight=48\nfx=50\nfy=50\ncx=32\ncy=24\n"
                                   "center=0,0,10\nradius=3\n");
    REQUIRE(run_cli("synth --spec " + q(dir / "s.txt") + " --out " + q(dir / "sphere"), log)
                .exit_code == 0);
    CHECK(read_depth_png(dir / "sphere" / "depth.png").width() == 64);
    CHECK(!fs::exists(dir / "sphere" / "freespace.png"));
  }
  SUBCASE("validation") {
    CHECK(run_cli("synth --out " + q(dir / "x"), log).exit_code == 2);
    CHECK(run_cli("synth --kind cube --out " + q(dir / "x"), log).exit_code == 2);
    CHECK(run_cli("synth --kind plane --noise -1 --out " + q(dir / "x"), log).exit_code == 2);
    write_text_file(dir / "bad.txt", "kind=plane\nbogus=1\n");
    const auto r = run_cli("synth --spec " + q(dir / "bad.txt") + " --out " + q(dir / "x"), log);
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("line 2") != std::string::npos);
    CHECK(run_cli("synth --spec " + q(dir / "nope.txt") + " --out " + q(dir / "x"), log)
              .exit_code == 1);
    CHECK(!fs::exists(dir / "x" / "depth.png"));
  }
}

TEST_CASE("estimate") {
  const fs::path dir = nf_test::scratch_dir("cli_estimate");
  const fs::path log = dir / "log.txt";

  SUBCASE("missing intrinsics name the flag") {
    DepthImage z(8, 8);
    z.set(3, 3, 1.0);
    write_depth_png(z, dir / "z.png");
    const auto r = run_cli("estimate --depth " + q(dir / "z.png") + " --out " + q(dir / "n.png"), log);
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("--calib") != std::string::npos);
    CHECK(!fs::exists(dir / "n.png"));
  }
  SUBCASE("constant depth gives (0,0,-1)") {
    DepthImage z(32, 24);
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 32; ++x) z.set(x, y, 5.0);
    write_depth_png(z, dir / "flat.png");
    REQUIRE(run_cli("estimate --depth " + q(dir / "flat.png") +
                        " --fx 100 --fy 100 --cx 16 --cy 12 --filter central --out " +
                        q(dir / "flat_n.png"), log).exit_code == 0);
    const NormalMap n = read_normal_png(dir / "flat_n.png");
    // (0,0,-1) is stored as (32768, 32768, 0) and read back renormalized.
    NormalMap unit(1, 1);
    unit.normals(0, 0) = {0, 0, -1};
    unit.valid(0, 0) = 1;
    write_normal_png(unit, dir / "unit.png");
    const Vec3 stored = read_normal_png(dir / "unit.png").normals(0, 0);
    int valid = 0;
    for (int y = 0; y < 24; ++y) {
      for (int x = 0; x < 32; ++x) {
        if (!n.valid(x, y)) continue;
        CHECK(n.normals(x, y) == stored);
        ++valid;
      }
    }
    CHECK(valid == 30 * 22);
  }
  SUBCASE("ground plane from disparity within 1e-3 rad") {
    write_text_file(dir / "ground.txt", "kind=plane\nnormal=0,-1,0\noffset=1.5\n");
    REQUIRE(run_cli("synth --spec " + q(dir / "ground.txt") + " --baseline 0.375 --out " +
                        q(dir / "g"), log).exit_code == 0);
    // disparity = fx b / Z = (y - 240) / 4, exactly representable at 1/256 px.
    const DisparityImage d = read_disparity_png(dir / "g" / "disparity.png", 0.375);
    CHECK(d.disparity(100, 300) == 15.0);
    REQUIRE(run_cli("estimate --disparity " + q(dir / "g" / "disparity.png") + " --calib " +
                        q(dir / "g" / "calib.txt") + " --out " + q(dir / "g" / "pred.png"), log)
                .exit_code == 0);
    const auto r = run_cli("eval --pred " + q(dir / "g" / "pred.png") + " --gt " +
                               q(dir / "g" / "normals.png"), log);
    REQUIRE(r.exit_code == 0);
    CHECK(metric(r.output, "count") > 100000);
    CHECK(metric(r.output, "aae_rad") < 1e-3);
    const NormalMap pred = read_normal_png(dir / "g" / "pred.png");
    double worst = 0.0;
    for (int y = 0; y < pred.height(); ++y)
      for (int x = 0; x < pred.width(); ++x)
        if (pred.valid(x, y)) worst = std::max(worst, angular_error(pred.normals(x, y), {0, -1, 0}));
    CHECK(worst < 1e-3);
  }
  SUBCASE("depth path matches the library bit for bit") {
    REQUIRE(run_cli("synth --kind sphere --out " + q(dir / "s"), log).exit_code == 0);
    REQUIRE(run_cli("estimate --depth " + q(dir / "s" / "depth.png") + " --calib " +
                        q(dir / "s" / "calib.txt") + " --neighborhood 24 --filter sobel --out " +
                        q(dir / "s" / "cli.png"), log).exit_code == 0);
    EstimateOptions opt;
    opt.filter = GradientFilter::sobel();
    opt.neighborhood = NeighborhoodSpec::square(2);
    const NormalMap lib = estimate_normals(read_depth_png(dir / "s" / "depth.png"),
                                           read_calib(dir / "s" / "calib.txt").intrinsics, opt);
    write_normal_png(lib, dir / "s" / "lib.png");
    CHECK(nf_test::slurp(dir / "s" / "cli.png") == nf_test::slurp(dir / "s" / "lib.png"));

    REQUIRE(run_cli("estimate --depth " + q(dir / "s" / "depth.png") + " --calib " +
                        q(dir / "s" / "calib.txt") + " --fx 400 --out " + q(dir / "s" / "fx.png"),
                    log).exit_code == 0);
    CameraIntrinsics k = read_calib(dir / "s" / "calib.txt").intrinsics;
    k.fx = 400;
    write_normal_png(estimate_normals(read_depth_png(dir / "s" / "depth.png"), k), dir / "s" / "fx_lib.png");
    CHECK(nf_test::slurp(dir / "s" / "fx.png") == nf_test::slurp(dir / "s" / "fx_lib.png"));
  }
  SUBCASE("threads do not change the output") {
    REQUIRE(run_cli("synth --kind road --noise 0.01 --seed 2 --out " + q(dir / "r"), log).exit_code == 0);
    const std::string base = "estimate --depth " + q(dir / "r" / "depth.png") + " --calib " +
                             q(dir / "r" / "calib.txt");
    REQUIRE(run_cli(base + " --threads 1 --out " + q(dir / "r" / "t1.png"), log).exit_code == 0);
    REQUIRE(run_cli(base + " --threads 4 --out " + q(dir / "r" / "t4.png"), log).exit_code == 0);
    REQUIRE(run_cli(base + " --threads 1 --out " + q(dir / "r" / "t1b.png"), log).exit_code == 0);
    CHECK(nf_test::slurp(dir / "r" / "t1.png") == nf_test::slurp(dir / "r" / "t4.png"));
    CHECK(nf_test::slurp(dir / "r" / "t1.png") == nf_test::slurp(dir / "r" / "t1b.png"));
  }
  SUBCASE("errors") {
    const std::string k = " --fx 1 --fy 1 --cx 0 --cy 0 --out " + q(dir / "o.png");
    CHECK(run_cli("estimate --depth " + q(dir / "missing.png") + k, log).exit_code == 1);
    DepthImage z(8, 8);
    z.set(3, 3, 1.0);
    write_depth_png(z, dir / "z.png");
    CHECK(run_cli("estimate --depth " + q(dir / "z.png") + k + " --filter laplace", log).exit_code == 2);
    CHECK(run_cli("estimate --depth " + q(dir / "z.png") + k + " --neighborhood 5", log).exit_code == 2);
    CHECK(run_cli("estimate --depth " + q(dir / "z.png") + k + " --threads 0", log).exit_code == 2);
    CHECK(run_cli("estimate --disparity " + q(dir / "z.png") + k, log).exit_code == 2);
    CHECK(run_cli("estimate" + k, log).exit_code == 2);
    CHECK(run_cli("estimate --bogus", log).exit_code == 2);
    CHECK(!fs::exists(dir / "o.png"));
  }
}

TEST_CASE("eval") {
  const fs::path dir = nf_test::scratch_dir("cli_eval");
  const fs::path log = dir / "log.txt";
  REQUIRE(run_cli("synth --kind road --out " + q(dir / "r"), log).exit_code == 0);

  SUBCASE("identical normals") {
    const auto r = run_cli("eval --pred " + q(dir / "r" / "normals.png") + " --gt " +
                               q(dir / "r" / "normals.png") + " --report " + q(dir / "rep.txt") +
                               " --json " + q(dir / "rep.json") + " --error-map " + q(dir / "err.png"),
                           log);
    REQUIRE(r.exit_code == 0);
    CHECK(metric(r.output, "aae_rad") == 0.0);
    CHECK(nf_test::slurp(dir / "rep.txt") == r.output);
    CHECK(nf_test::slurp(dir / "rep.json").find("\"aae_rad\": 0.0") != std::string::npos);
    CHECK(fs::exists(dir / "err.png"));
  }
  SUBCASE("identical masks") {
    const auto r = run_cli("eval --mode mask --pred " + q(dir / "r" / "freespace.png") + " --gt " +
                               q(dir / "r" / "freespace.png"), log);
    REQUIRE(r.exit_code == 0);
    for (const char* key : {"accuracy", "precision", "recall", "fscore", "iou"})
      CHECK(metric(r.output, key) == 1.0);
  }
  SUBCASE("confusion fixture") {
    // tp=3, fp=1, fn=1, tn=5 over ten pixels.
    Mask pred(10, 1, 0), gt(10, 1, 0);
    for (int x : {0, 1, 2, 3}) pred(x, 0) = 1;
    for (int x : {0, 1, 2, 4}) gt(x, 0) = 1;
    write_mask_png(pred, dir / "p.png");
    write_mask_png(gt, dir / "g.png");
    const auto r = run_cli("eval --mode mask --pred " + q(dir / "p.png") + " --gt " + q(dir / "g.png"), log);
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("iou=0.6\n") != std::string::npos);
    CHECK(r.output.find("accuracy=0.8\n") != std::string::npos);
    CHECK(r.output.find("fscore=0.75\n") != std::string::npos);

    Mask none(10, 1, 0);
    write_mask_png(none, dir / "none.png");
    const auto u = run_cli("eval --mode mask --pred " + q(dir / "none.png") + " --gt " + q(dir / "none.png"), log);
    REQUIRE(u.exit_code == 0);
    CHECK(u.output.find("precision=undefined\n") != std::string::npos);
  }
  SUBCASE("dimension mismatch and bad mode") {
    write_text_file(dir / "small.txt", "kind=road\nwidth=64\nheight=48\nfx=50\nfy=50\ncx=32\ncy=24\n");
    REQUIRE(run_cli("synth --spec " + q(dir / "small.txt") + " --out " + q(dir / "small"), log).exit_code == 0);
    CHECK(run_cli("eval --pred " + q(dir / "small" / "normals.png") + " --gt " +
                      q(dir / "r" / "normals.png"), log).exit_code == 2);
    CHECK(run_cli("eval --mode mask --pred " + q(dir / "small" / "freespace.png") + " --gt " +
                      q(dir / "r" / "freespace.png"), log).exit_code == 2);
    CHECK(run_cli("eval --mode depth --pred " + q(dir / "r" / "normals.png") + " --gt " +
                      q(dir / "r" / "normals.png"), log).exit_code == 2);
    CHECK(run_cli("eval --mode mask --pred " + q(dir / "r" / "normals.png") + " --gt " +
                      q(dir / "r" / "freespace.png"), log).exit_code == 1);
  }
}

TEST_CASE("freespace") {
  const fs::path dir = nf_test::scratch_dir("cli_freespace");
  const fs::path log = dir / "log.txt";
  REQUIRE(run_cli("synth --kind road --out " + q(dir / "r"), log).exit_code == 0);
  REQUIRE(run_cli("estimate --depth " + q(dir / "r" / "depth.png") + " --calib " +
                      q(dir / "r" / "calib.txt") + " --out " + q(dir / "n.png"), log).exit_code == 0);

  SUBCASE("defaults reproduce the ground truth") {
    REQUIRE(run_cli("freespace --normals " + q(dir / "n.png") + " --out " + q(dir / "m.png"), log)
                .exit_code == 0);
    const auto r = run_cli("eval --mode mask --pred " + q(dir / "m.png") + " --gt " +
                               q(dir / "r" / "freespace.png"), log);
    REQUIRE(r.exit_code == 0);
    CHECK(metric(r.output, "iou") > 0.95);
  }
  SUBCASE("tiny angle on noisy input is nearly empty") {
    REQUIRE(run_cli("synth --kind road --noise 0.01 --seed 1 --out " + q(dir / "noisy"), log).exit_code == 0);
    REQUIRE(run_cli("estimate --depth " + q(dir / "noisy" / "depth.png") + " --calib " +
                        q(dir / "noisy" / "calib.txt") + " --out " + q(dir / "nn.png"), log).exit_code == 0);
    const auto r = run_cli("freespace --normals " + q(dir / "nn.png") + " --max-angle 0.01 --out " +
                               q(dir / "tiny.png"), log);
    REQUIRE(r.exit_code == 0);
    const Mask m = read_mask_png(dir / "tiny.png");
    std::size_t positive = 0;
    for (auto v : m.values()) positive += v;
    CHECK(positive < m.size() / 1000);
  }
  SUBCASE("flags") {
    CHECK(run_cli("freespace --normals " + q(dir / "n.png") + " --no-largest-component --up 0,1,0 --out " +
                      q(dir / "all.png"), log).exit_code == 0);
    CHECK(run_cli("freespace --normals " + q(dir / "n.png") + " --up 1,2 --out " + q(dir / "x.png"), log)
              .exit_code == 2);
    CHECK(run_cli("freespace --normals " + q(dir / "n.png") + " --up a,b,c --out " + q(dir / "x.png"), log)
              .exit_code == 2);
    CHECK(run_cli("freespace --normals " + q(dir / "n.png") + " --max-angle 95 --out " + q(dir / "x.png"), log)
              .exit_code == 2);
    CHECK(!fs::exists(dir / "x.png"));
  }
}

TEST_CASE("bench") {
  const fs::path dir = nf_test::scratch_dir("cli_bench");
  const fs::path log = dir / "log.txt";
  const auto one = run_cli("bench --size 64x48 --iters 5", log);
  REQUIRE(one.exit_code == 0);
  CHECK(metric(one.output, "fps") > 0.0);
  CHECK(metric(one.output, "median_ms") >= 0.0);
  const auto four = run_cli("bench --size 64x48 --iters 3 --threads 4", log);
  REQUIRE(four.exit_code == 0);
  const auto sum = [](const std::string& s) { return s.substr(s.find("checksum=")); };
  CHECK(sum(one.output) == sum(four.output));
  CHECK(run_cli("bench --size 64by48", log).exit_code == 2);
  CHECK(run_cli("bench --iters 0", log).exit_code == 2);
}
