#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "normal_forge/parallel.hpp"

using namespace normal_forge::cli;

int main(int argc, char** argv) {
  CLI::App app{"normal-forge: surface normals from depth and disparity images"};
  app.require_subcommand(1);
  const int default_threads = normal_forge::default_thread_count();

  EstimateConfig est;
  est.threads = default_threads;
  auto* estimate = app.add_subcommand("estimate", "Estimate a normal map from depth or disparity");
  auto* depth_opt = estimate->add_option("--depth", est.depth, "16-bit depth PNG (value/256 m)");
  auto* disp_opt =
      estimate->add_option("--disparity", est.disparity, "16-bit disparity PNG (value/256 px)");
  depth_opt->excludes(disp_opt);
  estimate->add_option("--calib", est.intrinsics.calib, "Calibration file (key=value)");
  estimate->add_option("--fx", est.intrinsics.fx, "Focal length x (overrides calib)");
  estimate->add_option("--fy", est.intrinsics.fy, "Focal length y (overrides calib)");
  estimate->add_option("--cx", est.intrinsics.cx, "Principal point x (overrides calib)");
  estimate->add_option("--cy", est.intrinsics.cy, "Principal point y (overrides calib)");
  estimate->add_option("--baseline", est.intrinsics.baseline, "Stereo baseline in meters");
  estimate->add_option("--out", est.out, "Output normal PNG")->required();
  estimate->add_option("--filter", est.filter, "central | forward | sobel")->capture_default_str();
  estimate->add_option("--neighborhood", est.neighborhood, "4 | 8 | 24 | 48")->capture_default_str();
  estimate->add_option("--threads", est.threads, "Worker threads")->capture_default_str();

  SynthConfig syn;
  auto* synth = app.add_subcommand("synth", "Render an analytic scene with ground truth");
  auto* spec_opt = synth->add_option("--spec", syn.spec, "Scene spec file (key=value)");
  auto* kind_opt = synth->add_option("--kind", syn.kind, "plane | sphere | road (built-in defaults)");
  spec_opt->excludes(kind_opt);
  synth->add_option("--out", syn.outdir, "Output directory")->required();
  synth->add_option("--seed", syn.seed, "Noise seed")->capture_default_str();
  synth->add_option("--noise", syn.noise, "Depth noise sigma in meters")->capture_default_str();
  synth->add_option("--baseline", syn.baseline, "Also write disparity.png for this baseline");

  EvalConfig ev;
  auto* eval = app.add_subcommand("eval", "Compare a prediction against ground truth");
  eval->add_option("--pred", ev.pred, "Predicted normal or mask PNG")->required();
  eval->add_option("--gt", ev.gt, "Ground-truth normal or mask PNG")->required();
  eval->add_option("--mode", ev.mode, "normals | mask")->capture_default_str();
  eval->add_flag("--sign-invariant", ev.sign_invariant, "Ignore normal orientation");
  eval->add_option("--valid", ev.valid, "Mask PNG restricting evaluated pixels (mask mode)");
  eval->add_option("--report", ev.report, "Write metric=value report here");
  eval->add_option("--json", ev.json, "Write JSON metric report here");
  eval->add_option("--error-map", ev.error_map, "Write colorized angular error PNG here");
  eval->add_option("--saturation", ev.saturation_deg, "Error-map saturation in degrees")->capture_default_str();

  FreespaceConfig fsc;
  auto* freespace = app.add_subcommand("freespace", "Threshold normals against an up vector");
  freespace->add_option("--normals", fsc.normals, "Normal PNG")->required();
  freespace->add_option("--up", fsc.up, "Up vector x,y,z")->capture_default_str();
  freespace->add_option("--max-angle", fsc.max_angle_deg, "Max angle to up in degrees")->capture_default_str();
  freespace->add_flag("--largest-component,!--no-largest-component", fsc.largest_component,
                      "Keep only the largest 4-connected region (default on)");
  freespace->add_option("--out", fsc.out, "Output mask PNG")->required();

  BenchConfig bc;
  bc.threads = default_threads;
  auto* bench = app.add_subcommand("bench", "Time normal estimation on a synthetic frame");
  bench->add_option("--size", bc.size, "WIDTHxHEIGHT")->capture_default_str();
  bench->add_option("--iters", bc.iters, "Timed iterations")->capture_default_str();
  bench->add_option("--threads", bc.threads, "Worker threads")->capture_default_str();
  bench->add_option("--neighborhood", bc.neighborhood, "4 | 8 | 24 | 48")->capture_default_str();
  bench->add_option("--filter", bc.filter, "central | forward | sobel")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  if (estimate->parsed()) return cmd_estimate(est);
  if (synth->parsed()) return cmd_synth(syn);
  if (eval->parsed()) return cmd_eval(ev);
  if (freespace->parsed()) return cmd_freespace(fsc);
  if (bench->parsed()) return cmd_bench(bc);
  return kExitValidation;
}
