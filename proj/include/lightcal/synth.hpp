#pragma once

// Synthetic multi-view datasets rendered from a known light, used as ground truth.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "lightcal/error.hpp"
#include "lightcal/geometry.hpp"
#include "lightcal/io.hpp"
#include "lightcal/photometry.hpp"
#include "lightcal/random.hpp"
#include "lightcal/solver.hpp"

namespace lightcal {

struct NoiseModel {
  double sigma_fraction = 0.0;  // gaussian sigma as a fraction of the view's peak intensity
  int quantization_bits = 0;    // 0 disables quantization
};

struct ScenarioSpec {
  int n_views = 12;
  double distance_min = 1.5;  // meters, camera center to its look-at point
  double distance_max = 3.0;
  double tilt_min_deg = 0.0;  // optical axis vs. plane normal
  double tilt_max_deg = 30.0;
  double target_radius = 0.5;  // look-at points are drawn from this disk around the origin
  CameraIntrinsics intrinsics;
  LightModel light;
  NoiseModel noise;
  std::uint64_t seed = 7;

  void validate() const {
    auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, "scenario: " + m); };
    if (n_views < 1) fail("n_views must be >= 1");
    if (!(distance_min > 0.0) || !(distance_max >= distance_min)) fail("distance range must be positive and ordered");
    if (!(tilt_min_deg >= 0.0) || !(tilt_max_deg >= tilt_min_deg) || !(tilt_max_deg < 90.0))
      fail("tilt range must satisfy 0 <= min <= max < 90");
    if (!(target_radius >= 0.0)) fail("target radius must be >= 0");
    if (!(noise.sigma_fraction >= 0.0)) fail("noise sigma must be >= 0");
    if (noise.quantization_bits < 0 || noise.quantization_bits > 24) fail("quantization bits must be in [0, 24]");
    intrinsics.validate();
    light.validate();
  }
};

// Bell-shaped reflector profile sampled every 5 degrees out to 90.
inline RidCurve default_rid_curve() {
  std::vector<double> theta, e;
  for (int t = 0; t <= 90; t += 5) {
    theta.push_back(t);
    e.push_back(std::exp(-std::pow(t / 30.0, 2.0)));
  }
  return RidCurve(theta, e);
}

inline ScenarioSpec default_scenario() {
  ScenarioSpec spec;
  spec.intrinsics.fx = 350.0;
  spec.intrinsics.fy = 350.0;
  spec.intrinsics.cx = 200.0;
  spec.intrinsics.cy = 150.0;
  spec.intrinsics.width = 400;
  spec.intrinsics.height = 300;
  spec.intrinsics.dist = {-0.05, 0.01, 0.0, 0.0, 0.0};
  spec.light.position = Vec3(0.25, -0.10, 0.05);
  spec.light.roll = 4.0 * kDegToRad;
  spec.light.pitch = -8.0 * kDegToRad;
  spec.light.scale = 2.5e5;
  spec.light.characteristic = default_rid_curve();
  return spec;
}

// Rotation taking v to itself rotated by angle about the unit axis.
inline Mat3 axis_angle(const Vec3& axis, double angle) { return Eigen::AngleAxisd(angle, axis).toRotationMatrix(); }

namespace detail {
// Every image corner must see the plane in front of the camera, and the light must
// stay above the plane.
inline bool pose_usable(const CameraPose& pose, const ScenarioSpec& spec) {
  const auto& in = spec.intrinsics;
  const Vec2 corners[] = {{0, 0}, {double(in.width), 0}, {double(in.width), double(in.height)}, {0, double(in.height)}};
  for (const Vec2& c : corners) {
    try {
      if (!(pixel_ray(c, in, pose).z() < -0.05)) return false;
    } catch (const Error&) {
      return false;
    }
  }
  return (pose.R * spec.light.position + pose.C).z() > 1e-3;
}
}  // namespace detail

inline std::vector<CameraPose> sample_poses(const ScenarioSpec& spec) {
  spec.validate();
  Rng rng(mix_seed(spec.seed, 0x706f736573ULL));
  Mat3 looking_down;
  looking_down << 1, 0, 0, 0, -1, 0, 0, 0, -1;

  std::vector<CameraPose> poses;
  for (int i = 0; i < spec.n_views; ++i) {
    bool found = false;
    for (int attempt = 0; attempt < 1000 && !found; ++attempt) {
      const double distance = rng.uniform(spec.distance_min, spec.distance_max);
      const double tilt = rng.uniform(spec.tilt_min_deg, spec.tilt_max_deg) * kDegToRad;
      const double tilt_dir = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double spin = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double rho = spec.target_radius * std::sqrt(rng.uniform());
      const double ang = rng.uniform(0.0, 2.0 * std::numbers::pi);

      const Vec3 tilt_axis(-std::sin(tilt_dir), std::cos(tilt_dir), 0.0);
      CameraPose pose;
      pose.R = axis_angle(tilt_axis, tilt) * looking_down * rotation_z(spin);
      const Vec3 target(rho * std::cos(ang), rho * std::sin(ang), 0.0);
      pose.C = target - distance * pose.optical_axis();
      if (detail::pose_usable(pose, spec)) {
        poses.push_back(pose);
        found = true;
      }
    }
    if (!found) throw Error(ErrorCode::InvalidArgument, "scenario: cannot place a camera that keeps the plane in frame");
  }
  return poses;
}

// Additive gaussian noise, then optional uniform quantization against the view peak.
inline Image apply_noise(const Image& clean, const NoiseModel& noise, std::uint64_t seed) {
  float peak = 0.0f;
  for (float v : clean.data) peak = std::max(peak, v);
  Image out = clean;
  if (noise.sigma_fraction > 0.0) {
    Rng rng(seed);
    const double sigma = noise.sigma_fraction * peak;
    for (float& v : out.data) v = static_cast<float>(double(v) + sigma * rng.normal());
  }
  if (noise.quantization_bits > 0 && peak > 0.0f) {
    const double levels = std::ldexp(1.0, noise.quantization_bits) - 1.0;
    for (float& v : out.data) {
      const double x = std::clamp(double(v) / peak, 0.0, 1.0);
      v = static_cast<float>(std::round(x * levels) / levels * peak);
    }
  }
  return out;
}

struct SyntheticViews {
  std::vector<ViewRecord> views;
  std::vector<Image> clean;  // noise-free renders, same order
};

inline SyntheticViews synthesize_views(const ScenarioSpec& spec) {
  const auto poses = sample_poses(spec);
  SyntheticViews out;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    RenderedImage r = render_image(spec.intrinsics, poses[i], spec.light);
    ViewRecord view;
    view.pose = poses[i];
    view.image = apply_noise(r.image, spec.noise, mix_seed(spec.seed, 0x6e6f697365ULL + i));
    out.views.push_back(std::move(view));
    out.clean.push_back(std::move(r.image));
  }
  return out;
}

inline Dataset to_dataset(const ScenarioSpec& spec, std::vector<ViewRecord> views) {
  return Dataset{spec.intrinsics, spec.light.characteristic, std::move(views)};
}

inline std::string view_file_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "view_%02zu.pfm", i);
  return buf;
}

// ---------------------------------------------------------------------------
// Scenario documents

namespace io {

inline Json to_json(const ScenarioSpec& s) {
  Json ch;
  if (const auto* rid = std::get_if<RidCurve>(&s.light.characteristic)) {
    ch = {{"type", "rid"}, {"theta_deg", rid->theta_deg()}, {"intensity", rid->intensity()}};
  } else {
    const auto& grid = std::get<RadianceGrid>(s.light.characteristic);
    ch = {{"type", "grid"}, {"n_theta", grid.n_theta()}, {"n_phi", grid.n_phi()}, {"values", grid.values()}};
  }
  return Json{{"version", kFormatVersion},
              {"n_views", s.n_views},
              {"distance_range_m", {s.distance_min, s.distance_max}},
              {"tilt_range_deg", {s.tilt_min_deg, s.tilt_max_deg}},
              {"target_radius_m", s.target_radius},
              {"intrinsics", to_json(s.intrinsics)},
              {"light", to_json(to_record(s.light))},
              {"characteristic", ch},
              {"noise", {{"sigma_fraction", s.noise.sigma_fraction}, {"quantization_bits", s.noise.quantization_bits}}},
              {"seed", s.seed}};
}

// Fields absent from the document keep their default_scenario() values.
inline ScenarioSpec scenario_from_json(const Json& j) {
  using namespace detail;
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "scenario: expected a JSON object");
  check_version(j, "");
  ScenarioSpec s = default_scenario();
  if (j.contains("n_views")) s.n_views = static_cast<int>(as_integer(j.at("n_views"), "n_views"));
  if (j.contains("distance_range_m")) {
    const auto r = as_numbers(j.at("distance_range_m"), "distance_range_m", 2);
    s.distance_min = r[0];
    s.distance_max = r[1];
  }
  if (j.contains("tilt_range_deg")) {
    const auto r = as_numbers(j.at("tilt_range_deg"), "tilt_range_deg", 2);
    s.tilt_min_deg = r[0];
    s.tilt_max_deg = r[1];
  }
  if (j.contains("target_radius_m")) s.target_radius = as_number(j.at("target_radius_m"), "target_radius_m");
  if (j.contains("intrinsics")) s.intrinsics = intrinsics_from_json(j.at("intrinsics"), "intrinsics");
  if (j.contains("characteristic")) {
    const Json& ch = j.at("characteristic");
    const std::string type = as_string(require(ch, "type", "characteristic"), "characteristic.type");
    try {
      if (type == "rid") {
        s.light.characteristic = RidCurve(as_numbers(require(ch, "theta_deg", "characteristic"), "characteristic.theta_deg"),
                                          as_numbers(require(ch, "intensity", "characteristic"), "characteristic.intensity"));
      } else if (type == "grid") {
        s.light.characteristic = RadianceGrid(
            static_cast<int>(as_integer(require(ch, "n_theta", "characteristic"), "characteristic.n_theta")),
            static_cast<int>(as_integer(require(ch, "n_phi", "characteristic"), "characteristic.n_phi")),
            as_numbers(require(ch, "values", "characteristic"), "characteristic.values"));
      } else {
        throw Error(ErrorCode::ParseError, "field 'characteristic.type': expected 'rid' or 'grid'");
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ParseError) throw;
      throw Error(ErrorCode::ParseError, std::string("field 'characteristic': ") + e.what());
    }
  }
  if (j.contains("light")) {
    Characteristic ch = s.light.characteristic;
    s.light = to_light(light_record_from_json(j.at("light"), "light"), std::move(ch));
  }
  if (j.contains("noise")) {
    const Json& n = j.at("noise");
    s.noise.sigma_fraction = number_or(n, "sigma_fraction", "noise", 0.0);
    if (n.contains("quantization_bits"))
      s.noise.quantization_bits = static_cast<int>(as_integer(n.at("quantization_bits"), "noise.quantization_bits"));
  }
  if (j.contains("seed")) {
    const auto seed = as_integer(j.at("seed"), "seed");
    if (seed < 0) throw Error(ErrorCode::ParseError, "field 'seed': must be >= 0");
    s.seed = static_cast<std::uint64_t>(seed);
  }
  try {
    s.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return s;
}

inline ScenarioSpec read_scenario(const fs::path& path) {
  return scenario_from_json(detail::parse_json(read_text(path), path.string()));
}

}  // namespace io

// Writes manifest.json, the characteristic CSV, one PFM per view and a separate
// ground_truth.json that the calibration path never reads.
inline io::DatasetManifest generate_dataset(const ScenarioSpec& spec, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir.string() + ": " + ec.message());

  const SyntheticViews synth = synthesize_views(spec);
  io::DatasetManifest manifest;
  manifest.intrinsics = spec.intrinsics;
  if (const auto* rid = std::get_if<RidCurve>(&spec.light.characteristic)) {
    manifest.light_type = "rid";
    manifest.light_file = "rid.csv";
    io::write_bytes(out_dir / manifest.light_file, io::encode_rid_csv(*rid));
  } else {
    manifest.light_type = "grid";
    manifest.light_file = "grid.csv";
    io::write_bytes(out_dir / manifest.light_file, io::encode_grid_csv(std::get<RadianceGrid>(spec.light.characteristic)));
  }
  for (std::size_t i = 0; i < synth.views.size(); ++i) {
    const std::string name = view_file_name(i);
    io::write_pfm(out_dir / name, synth.views[i].image);
    manifest.views.push_back(io::to_manifest_view(synth.views[i].pose, name));
  }
  io::write_manifest(out_dir / "manifest.json", manifest);

  io::Json truth = {{"version", io::kFormatVersion},
                    {"light", io::to_json(io::to_record(spec.light))},
                    {"scenario", io::to_json(spec)}};
  io::write_bytes(out_dir / "ground_truth.json", truth.dump(2) + "\n");
  return manifest;
}

}  // namespace lightcal
