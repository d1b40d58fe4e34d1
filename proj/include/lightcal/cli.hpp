#pragma once

// `lightcal` command line: synth, calibrate, render, report.
//
// Exit codes: 0 success, 1 solver did not converge, 2 input error.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lightcal/error.hpp"
#include "lightcal/io.hpp"
#include "lightcal/photometry.hpp"
#include "lightcal/solver.hpp"
#include "lightcal/synth.hpp"

namespace lightcal::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kSuccess = 0, kNotConverged = 1, kInputError = 2 };

struct ViewRange {
  int first = 0;  // smallest subset size (== last when a single count is given)
  int last = 0;
};

inline ViewRange parse_view_range(const std::string& text, int available) {
  ViewRange r{available, available};
  if (!text.empty()) {
    const auto dash = text.find('-');
    try {
      std::size_t used = 0;
      if (dash == std::string::npos) {
        r.first = r.last = std::stoi(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
      } else {
        r.first = std::stoi(text.substr(0, dash), &used);
        if (used != dash) throw std::invalid_argument(text);
        const std::string tail = text.substr(dash + 1);
        r.last = std::stoi(tail, &used);
        if (used != tail.size()) throw std::invalid_argument(text);
      }
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::InvalidArgument, "--views expects N or A-B, got '" + text + "'");
    }
  }
  if (r.first < 2 || r.last < r.first || r.last > available)
    throw Error(ErrorCode::InvalidArgument, "--views must select between 2 and " + std::to_string(available) + " views");
  return r;
}

inline double stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

inline io::SubsetConsistency summarize_subsets(std::vector<io::SubsetRow> rows) {
  io::SubsetConsistency s;
  std::vector<double> pitch, roll, px, py, pz;
  for (const auto& r : rows) {
    pitch.push_back(r.light.pitch_deg);
    roll.push_back(r.light.roll_deg);
    px.push_back(r.light.position_m[0]);
    py.push_back(r.light.position_m[1]);
    pz.push_back(r.light.position_m[2]);
  }
  s.rows = std::move(rows);
  s.pitch_std_deg = stddev(pitch);
  s.roll_std_deg = stddev(roll);
  const double sx = stddev(px), sy = stddev(py), sz = stddev(pz);
  s.position_std_m = std::sqrt((sx * sx + sy * sy + sz * sz) / 3.0);
  return s;
}

struct CalibrateArgs {
  std::string manifest;
  std::string init;
  std::string out = "report.json";
  std::string views;
  bool render_comparison = false;
  SolverOptions solver;
  SamplingOptions sampling;
};

inline int cmd_calibrate(const CalibrateArgs& args, std::ostream& out, std::ostream& err) {
  const Dataset full = io::load_dataset(args.manifest);
  const LightModel init = io::to_light(io::read_light_or_truth(args.init), full.characteristic);
  const ViewRange range = parse_view_range(args.views, static_cast<int>(full.views.size()));

  const auto all_samples = select_samples(full.views, args.sampling);
  const double zeros = zero_render_fraction(full, all_samples, init);
  if (zeros > 0.5)
    err << "warning: " << std::fixed << std::setprecision(0) << zeros * 100.0
        << "% of samples render as zero under the initial light; the initial guess may be outside the light cone\n";

  std::vector<io::SubsetRow> rows;
  std::optional<CalibrationResult> main_result;
  for (int k = range.first; k <= range.last; ++k) {
    Dataset subset{full.intrinsics, full.characteristic,
                   std::vector<ViewRecord>(full.views.begin(), full.views.begin() + k)};
    std::vector<PixelSample> samples;
    for (const auto& s : all_samples)
      if (s.view < static_cast<std::size_t>(k)) samples.push_back(s);
    CalibrationResult res = calibrate(subset, samples, init, args.solver);
    rows.push_back({k, io::to_record(res.light), res.final_cost, std::string(to_string(res.status))});
    if (k == range.last) main_result = std::move(res);
  }

  std::vector<std::size_t> used(static_cast<std::size_t>(range.last));
  for (std::size_t i = 0; i < used.size(); ++i) used[i] = i;
  io::ResultReport report = io::make_report(*main_result, used);
  if (range.first != range.last) report.subsets = summarize_subsets(std::move(rows));

  const fs::path out_path(args.out);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  io::write_report(out_path, report);

  if (args.render_comparison) {
    const fs::path dir = out_path.has_parent_path() ? out_path.parent_path() : fs::path(".");
    for (std::size_t i = 0; i < used.size(); ++i) {
      const ViewRecord& view = full.views[i];
      const RenderedImage r = render_image(full.intrinsics, view.pose, main_result->light);
      Image side(2 * view.image.width, view.image.height);
      for (int v = 0; v < view.image.height; ++v) {
        for (int u = 0; u < view.image.width; ++u) {
          side.at(u, v) = view.image.at(u, v);
          side.at(u + view.image.width, v) = static_cast<float>(view.exposure * r.image.at(u, v));
        }
      }
      char name[48];
      std::snprintf(name, sizeof(name), "comparison_view_%02zu.pfm", i);
      io::write_pfm(dir / name, side);
    }
  }

  out << "status: " << report.status << " after " << report.iterations << " iterations, cost "
      << report.final_cost << "\n";
  return main_result->converged() ? kSuccess : kNotConverged;
}

inline int cmd_synth(const std::string& spec_path, const std::string& out_dir, std::optional<std::uint64_t> seed,
                     std::ostream& out) {
  ScenarioSpec spec = spec_path.empty() ? default_scenario() : io::read_scenario(spec_path);
  if (seed) spec.seed = *seed;
  const auto manifest = generate_dataset(spec, out_dir);
  out << "wrote " << manifest.views.size() << " views to " << out_dir << "\n";
  return kSuccess;
}

inline int cmd_render(const std::string& manifest_path, const std::string& light_path, int view_index,
                      const std::string& out_path, std::ostream& out) {
  const Dataset ds = io::load_dataset(manifest_path);
  if (view_index < 0 || view_index >= static_cast<int>(ds.views.size()))
    throw Error(ErrorCode::InvalidArgument, "--view out of range");
  const LightModel light = io::to_light(io::read_light_or_truth(light_path), ds.characteristic);
  light.validate();
  const ViewRecord& view = ds.views[static_cast<std::size_t>(view_index)];
  RenderedImage r = render_image(ds.intrinsics, view.pose, light);
  if (view.exposure != 1.0)
    for (float& v : r.image.data) v = static_cast<float>(view.exposure * v);
  io::write_pfm(out_path, r.image);
  out << "rendered view " << view_index << " (" << r.valid_count() << " valid pixels) to " << out_path << "\n";
  return kSuccess;
}

inline int cmd_report(const std::string& report_path, const std::string& truth_path, std::ostream& out) {
  const io::ResultReport rep = io::read_report(report_path);
  out << std::setprecision(10);
  out << "status      " << rep.status << " (" << rep.iterations << " iterations)\n";
  out << "final cost  " << rep.final_cost << " over " << rep.sample_count << " samples\n";
  out << "position m  " << rep.light.position_m[0] << " " << rep.light.position_m[1] << " "
      << rep.light.position_m[2] << "\n";
  out << "roll deg    " << rep.light.roll_deg << "\n";
  out << "pitch deg   " << rep.light.pitch_deg << "\n";
  out << "yaw deg     " << rep.light.yaw_deg << "\n";
  out << "scale       " << rep.light.scale << "\n";
  for (const auto& v : rep.per_view_rms) out << "view " << v.view << " rms " << v.rms << "\n";
  if (rep.subsets) {
    out << "subset consistency:\n";
    for (const auto& row : rep.subsets->rows)
      out << "  " << row.n_views << " views: pitch " << row.light.pitch_deg << " roll " << row.light.roll_deg
          << " position " << row.light.position_m[0] << " " << row.light.position_m[1] << " "
          << row.light.position_m[2] << " (" << row.status << ")\n";
    out << "  pitch std " << rep.subsets->pitch_std_deg << " deg, roll std " << rep.subsets->roll_std_deg
        << " deg, position std " << rep.subsets->position_std_m << " m\n";
  }
  if (!truth_path.empty()) {
    const io::LightPoseRecord gt = io::read_light_or_truth(truth_path);
    const double dp = std::hypot(rep.light.position_m[0] - gt.position_m[0], rep.light.position_m[1] - gt.position_m[1],
                                 rep.light.position_m[2] - gt.position_m[2]);
    out << "error vs ground truth: position " << dp << " m, roll " << rep.light.roll_deg - gt.roll_deg
        << " deg, pitch " << rep.light.pitch_deg - gt.pitch_deg << " deg, scale "
        << (rep.light.scale - gt.scale) / gt.scale << " rel\n";
  }
  return kSuccess;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Calibrate the pose and gain of a camera-mounted directional light from images of a plane"};
  app.require_subcommand(1);

  std::string spec_path, synth_out;
  std::optional<std::uint64_t> synth_seed;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with ground truth");
  synth->add_option("--spec", spec_path, "Scenario JSON (defaults apply to missing fields)")->check(CLI::ExistingFile);
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", synth_seed, "Override the scenario seed");

  CalibrateArgs cal;
  auto* calib = app.add_subcommand("calibrate", "Estimate the light pose and scale");
  calib->add_option("--manifest", cal.manifest, "Dataset manifest JSON")->required();
  calib->add_option("--init", cal.init, "Initial light JSON")->required();
  calib->add_option("--out", cal.out, "Report path")->capture_default_str();
  calib->add_option("--views", cal.views, "Use the first N views, or A-B for a subset-consistency sweep");
  calib->add_flag("--render-comparison", cal.render_comparison, "Write measured|rendered images next to the report");
  calib->add_option("--max-iterations", cal.solver.max_iterations)->capture_default_str()->check(CLI::PositiveNumber);
  calib->add_option("--cost-tolerance", cal.solver.cost_tolerance)->capture_default_str();
  calib->add_option("--gradient-tolerance", cal.solver.gradient_tolerance)->capture_default_str();
  calib->add_option("--pixels-per-image", cal.sampling.pixels_per_image)->capture_default_str()->check(CLI::PositiveNumber);
  calib->add_option("--saturation-threshold", cal.sampling.saturation_threshold)->capture_default_str();
  calib->add_option("--floor-threshold", cal.sampling.floor_threshold)->capture_default_str();
  calib->add_option("--seed", cal.sampling.seed, "Pixel selection seed")->capture_default_str();

  std::string render_manifest, render_light, render_out = "render.pfm";
  int render_view = 0;
  auto* render = app.add_subcommand("render", "Render one view under a given light");
  render->add_option("--manifest", render_manifest)->required();
  render->add_option("--light", render_light, "Light JSON")->required();
  render->add_option("--view", render_view)->capture_default_str();
  render->add_option("--out", render_out)->capture_default_str();

  std::string report_path, truth_path;
  auto* report = app.add_subcommand("report", "Summarize a calibration report");
  report->add_option("--report", report_path)->required()->check(CLI::ExistingFile);
  report->add_option("--ground-truth", truth_path, "ground_truth.json or a light JSON")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  try {
    if (*synth) return cmd_synth(spec_path, synth_out, synth_seed, out);
    if (*calib) return cmd_calibrate(cal, out, err);
    if (*render) return cmd_render(render_manifest, render_light, render_view, render_out, out);
    if (*report) return cmd_report(report_path, truth_path, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_input_error(e.code()) || e.code() == ErrorCode::InsufficientValidPixels ? kInputError : kNotConverged;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace lightcal::cli
