#pragma once

// Light pose + gain estimation by minimizing measured-minus-rendered intensities.

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lightcal/error.hpp"
#include "lightcal/geometry.hpp"
#include "lightcal/parallel.hpp"
#include "lightcal/photometry.hpp"
#include "lightcal/random.hpp"

namespace lightcal {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

struct ViewRecord {
  CameraPose pose;
  Image image;
  double exposure = 1.0;  // multiplies the rendered intensity of this view
};

struct Dataset {
  CameraIntrinsics intrinsics;
  Characteristic characteristic;
  std::vector<ViewRecord> views;
};

struct PixelSample {
  std::size_t view = 0;
  int u = 0;
  int v = 0;
  double intensity = 0.0;

  friend bool operator==(const PixelSample&, const PixelSample&) = default;
};

struct SamplingOptions {
  int pixels_per_image = 100;
  double saturation_threshold = 0.98;
  double floor_threshold = 0.02;
  std::uint64_t seed = 0;
};

// Stratified pick of up to n pixels with floor < I < saturation: the image is cut
// into ceil(sqrt(n))^2 cells and each cell contributes the first valid pixel of a
// seeded shuffle.
inline std::vector<PixelSample> select_pixels(const ViewRecord& view, std::size_t view_index, int n,
                                              double saturation, double floor, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "pixel count must be >= 1");
  const Image& img = view.image;
  if (img.width <= 0 || img.height <= 0 || img.data.empty())
    throw Error(ErrorCode::InvalidArgument, "view image is empty");

  const int g = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)) - 1e-12));
  Rng rng(mix_seed(seed, view_index));

  std::vector<int> cells(static_cast<std::size_t>(g) * g);
  std::iota(cells.begin(), cells.end(), 0);
  rng.shuffle(cells.begin(), cells.end());

  std::vector<PixelSample> picked;
  std::vector<int> candidates;
  for (int cell : cells) {
    if (static_cast<int>(picked.size()) == n) break;
    const int cx = cell % g;
    const int cy = cell / g;
    const int x0 = cx * img.width / g, x1 = (cx + 1) * img.width / g;
    const int y0 = cy * img.height / g, y1 = (cy + 1) * img.height / g;
    candidates.clear();
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) candidates.push_back(y * img.width + x);
    rng.shuffle(candidates.begin(), candidates.end());
    for (int idx : candidates) {
      const double value = img.data[static_cast<std::size_t>(idx)];
      if (std::isfinite(value) && value > floor && value < saturation) {
        picked.push_back({view_index, idx % img.width, idx / img.width, value});
        break;
      }
    }
  }
  if (2 * picked.size() < static_cast<std::size_t>(n))
    throw Error(ErrorCode::InsufficientValidPixels,
                "view " + std::to_string(view_index) + " yields only " + std::to_string(picked.size()) +
                    " valid pixels of " + std::to_string(n) + " requested");
  std::sort(picked.begin(), picked.end(),
            [](const PixelSample& a, const PixelSample& b) { return a.v != b.v ? a.v < b.v : a.u < b.u; });
  return picked;
}

inline std::vector<PixelSample> select_samples(std::span<const ViewRecord> views, const SamplingOptions& opts) {
  std::vector<PixelSample> all;
  for (std::size_t i = 0; i < views.size(); ++i) {
    auto s = select_pixels(views[i], i, opts.pixels_per_image, opts.saturation_threshold, opts.floor_threshold,
                           opts.seed);
    all.insert(all.end(), s.begin(), s.end());
  }
  return all;
}

// ---------------------------------------------------------------------------
// Parameter vector: [x, y, z, roll, pitch, (yaw), log_s]

inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (a > -std::numbers::pi && a <= std::numbers::pi) return a;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a <= 0.0) a += two_pi;
  return a - std::numbers::pi;
}

inline int parameter_count(const LightModel& light) { return light.symmetric() ? 6 : 7; }

inline VecX to_parameters(const LightModel& light) {
  VecX p(parameter_count(light));
  p.head<3>() = light.position;
  p[3] = wrap_angle(light.roll);
  p[4] = wrap_angle(light.pitch);
  if (!light.symmetric()) p[5] = wrap_angle(light.yaw);
  p[p.size() - 1] = std::log(light.scale);
  return p;
}

// Copies the prototype (characteristic, and yaw for symmetric lights) and overwrites
// the optimized quantities.
inline LightModel with_parameters(const LightModel& prototype, const VecX& p) {
  if (p.size() != parameter_count(prototype))
    throw Error(ErrorCode::InvalidArgument, "parameter vector has the wrong length");
  LightModel light = prototype;
  light.position = p.head<3>();
  light.roll = wrap_angle(p[3]);
  light.pitch = wrap_angle(p[4]);
  if (!prototype.symmetric()) light.yaw = wrap_angle(p[5]);
  light.scale = std::exp(p[p.size() - 1]);
  return light;
}

// Central-difference step for each parameter.
inline VecX jacobian_steps(const LightModel& prototype) {
  VecX h(parameter_count(prototype));
  h.head<3>().setConstant(1e-5);
  h.segment(3, h.size() - 4).setConstant(1e-5);
  h[h.size() - 1] = 1e-6;
  return h;
}

// Residuals r_i = I_i - I_render,i over a fixed sample set.
class ResidualModel {
 public:
  ResidualModel(const CameraIntrinsics& intrinsics, std::span<const ViewRecord> views,
                std::span<const PixelSample> samples, LightModel prototype)
      : intrinsics_(intrinsics), views_(views), samples_(samples), prototype_(std::move(prototype)) {
    double max_intensity = 0.0;
    for (const auto& s : samples_) {
      if (s.view >= views_.size()) throw Error(ErrorCode::InvalidArgument, "sample refers to a missing view");
      max_intensity = std::max(max_intensity, s.intensity);
    }
    sentinel_ = 10.0 * max_intensity;
  }

  std::size_t size() const { return samples_.size(); }
  int parameters() const { return parameter_count(prototype_); }
  double sentinel() const { return sentinel_; }
  const LightModel& prototype() const { return prototype_; }
  std::span<const PixelSample> samples() const { return samples_; }

  // Rendered intensities; entries whose render failed are NaN.
  VecX rendered(const VecX& p) const {
    const LightModel light = with_parameters(prototype_, p);
    VecX out(static_cast<Eigen::Index>(samples_.size()));
    parallel_for(samples_.size(), [&](std::size_t i) {
      const PixelSample& s = samples_[i];
      const ViewRecord& view = views_[s.view];
      double value = std::numeric_limits<double>::quiet_NaN();
      try {
        value = view.exposure * render_pixel(s.u, s.v, intrinsics_, view.pose, light);
      } catch (const Error&) {
      }
      out[static_cast<Eigen::Index>(i)] = std::isfinite(value) ? value : std::numeric_limits<double>::quiet_NaN();
    });
    return out;
  }

  VecX residuals(const VecX& p) const {
    VecX r = rendered(p);
    for (Eigen::Index i = 0; i < r.size(); ++i)
      r[i] = std::isnan(r[i]) ? sentinel_ : samples_[static_cast<std::size_t>(i)].intensity - r[i];
    return r;
  }

  // Central differences. Entries where either side hit a render failure are zero.
  MatX jacobian(const VecX& p, const VecX& steps) const {
    MatX J(static_cast<Eigen::Index>(samples_.size()), p.size());
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      VecX plus = p, minus = p;
      plus[k] += steps[k];
      minus[k] -= steps[k];
      const VecX rp = rendered(plus);
      const VecX rm = rendered(minus);
      for (Eigen::Index i = 0; i < J.rows(); ++i) {
        J(i, k) = (std::isnan(rp[i]) || std::isnan(rm[i])) ? 0.0 : -(rp[i] - rm[i]) / (2.0 * steps[k]);
      }
    }
    return J;
  }

  MatX jacobian(const VecX& p) const { return jacobian(p, jacobian_steps(prototype_)); }

 private:
  CameraIntrinsics intrinsics_;
  std::span<const ViewRecord> views_;
  std::span<const PixelSample> samples_;
  LightModel prototype_;
  double sentinel_ = 0.0;
};

inline VecX residuals(const VecX& params, std::span<const PixelSample> samples, std::span<const ViewRecord> views,
                      const CameraIntrinsics& intrinsics, const LightModel& prototype) {
  return ResidualModel(intrinsics, views, samples, prototype).residuals(params);
}

inline MatX jacobian(const VecX& params, std::span<const PixelSample> samples, std::span<const ViewRecord> views,
                     const CameraIntrinsics& intrinsics, const LightModel& prototype) {
  return ResidualModel(intrinsics, views, samples, prototype).jacobian(params);
}

// ---------------------------------------------------------------------------
// Levenberg-Marquardt

struct SolverOptions {
  int max_iterations = 200;
  double cost_tolerance = 1e-10;
  double gradient_tolerance = 1e-12;
  double initial_damping = 1e-3;
};

enum class ConvergenceStatus { Converged, MaxIterations, Stalled };

inline std::string_view to_string(ConvergenceStatus s) {
  switch (s) {
    case ConvergenceStatus::Converged: return "Converged";
    case ConvergenceStatus::MaxIterations: return "MaxIterations";
    case ConvergenceStatus::Stalled: return "Stalled";
  }
  return "Unknown";
}

struct CalibrationResult {
  LightModel light;
  double final_cost = 0.0;            // 0.5 * sum r^2
  std::vector<double> cost_trace;     // initial cost, then one entry per accepted step
  std::vector<double> per_view_rms;   // indexed like the dataset views; 0 for views without samples
  ConvergenceStatus status = ConvergenceStatus::MaxIterations;
  int iterations = 0;
  std::size_t sample_count = 0;

  bool converged() const { return status == ConvergenceStatus::Converged; }
};

// Views count as distinct poses when centers differ by > 1e-6 m or rotations by > 1e-6 rad.
inline std::size_t distinct_pose_count(std::span<const ViewRecord> views) {
  std::vector<const CameraPose*> distinct;
  for (const auto& v : views) {
    bool seen = false;
    for (const CameraPose* d : distinct) {
      const double dc = (v.pose.C - d->C).norm();
      const double cos_angle = std::clamp(((v.pose.R.transpose() * d->R).trace() - 1.0) / 2.0, -1.0, 1.0);
      if (dc <= 1e-6 && std::acos(cos_angle) <= 1e-6) {
        seen = true;
        break;
      }
    }
    if (!seen) distinct.push_back(&v.pose);
  }
  return distinct.size();
}

inline std::vector<double> per_view_rms(const VecX& r, std::span<const PixelSample> samples, std::size_t n_views) {
  std::vector<double> sum(n_views, 0.0);
  std::vector<std::size_t> count(n_views, 0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    sum[samples[i].view] += r[static_cast<Eigen::Index>(i)] * r[static_cast<Eigen::Index>(i)];
    ++count[samples[i].view];
  }
  std::vector<double> rms(n_views, 0.0);
  for (std::size_t v = 0; v < n_views; ++v)
    if (count[v] > 0) rms[v] = std::sqrt(sum[v] / static_cast<double>(count[v]));
  return rms;
}

inline CalibrationResult calibrate(const Dataset& dataset, std::span<const PixelSample> samples,
                                   const LightModel& init, const SolverOptions& options = {}) {
  if (dataset.views.size() < 2) throw Error(ErrorCode::InvalidArgument, "calibration needs at least two views");
  if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "no pixel samples");
  init.validate();
  if (distinct_pose_count(dataset.views) < 2)
    throw Error(ErrorCode::DegenerateDataset, "all views share one camera pose; vary distance and viewing angle");
  for (const auto& v : dataset.views) {
    const Vec3 light_world = v.pose.R * init.position + v.pose.C;
    if (!(light_world.z() > kMinLightHeight))
      throw Error(ErrorCode::InvalidArgument, "initial light lies on or below the reference plane in some view");
  }

  LightModel prototype = init;
  prototype.characteristic = dataset.characteristic;
  const ResidualModel model(dataset.intrinsics, dataset.views, samples, prototype);
  const VecX steps = jacobian_steps(prototype);

  VecX p = to_parameters(prototype);
  VecX r = model.residuals(p);
  double cost = 0.5 * r.squaredNorm();

  CalibrationResult result;
  result.cost_trace.push_back(cost);
  result.sample_count = samples.size();
  double lambda = options.initial_damping;
  bool accepted_any = false;

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    result.iterations = iter;
    if (cost == 0.0) {
      result.status = ConvergenceStatus::Converged;
      break;
    }
    const MatX J = model.jacobian(p, steps);
    const MatX JtJ = J.transpose() * J;
    const VecX g = J.transpose() * r;
    const VecX diag = JtJ.diagonal();

    // A parameter with no influence on any residual cannot be damped into a step.
    if (!(diag.minCoeff() > 1e-30 * std::max(diag.maxCoeff(), 1e-300))) {
      if (!accepted_any)
        throw Error(ErrorCode::DegenerateDataset,
                    "normal equations are singular: some parameters do not affect any sample");
      result.status = ConvergenceStatus::Stalled;
      break;
    }
    if (g.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
      result.status = ConvergenceStatus::Converged;
      break;
    }

    bool stop = false;
    while (true) {
      MatX A = JtJ;
      A.diagonal() += lambda * diag;
      const Eigen::LDLT<MatX> ldlt(A);
      VecX delta;
      bool ok = ldlt.info() == Eigen::Success && ldlt.isPositive();
      if (ok) {
        delta = ldlt.solve(-g);
        ok = delta.allFinite();
      }
      if (ok) {
        const VecX p_new = p + delta;
        const VecX r_new = model.residuals(p_new);
        const double cost_new = 0.5 * r_new.squaredNorm();
        if (cost_new < cost) {
          const double rel = (cost - cost_new) / cost;
          p = p_new;
          r = r_new;
          cost = cost_new;
          accepted_any = true;
          result.cost_trace.push_back(cost);
          lambda = std::max(lambda / 10.0, 1e-16);
          if (rel < options.cost_tolerance) {
            result.status = ConvergenceStatus::Converged;
            stop = true;
          }
          break;
        }
        // Nothing left to gain according to the local quadratic model.
        const double predicted = -(g.dot(delta) + 0.5 * delta.dot(JtJ * delta));
        if (predicted <= options.cost_tolerance * cost) {
          result.status = ConvergenceStatus::Converged;
          stop = true;
          break;
        }
      }
      lambda *= 10.0;
      if (lambda > 1e16) {
        result.status = ConvergenceStatus::Stalled;
        stop = true;
        break;
      }
    }
    if (stop) break;
    if (iter == options.max_iterations) result.status = ConvergenceStatus::MaxIterations;
  }

  result.light = with_parameters(prototype, p);
  result.final_cost = cost;
  result.per_view_rms = per_view_rms(r, samples, dataset.views.size());
  return result;
}

inline CalibrationResult calibrate(const Dataset& dataset, const LightModel& init, const SolverOptions& options,
                                   const SamplingOptions& sampling) {
  const auto samples = select_samples(dataset.views, sampling);
  return calibrate(dataset, samples, init, options);
}

// Fraction of samples that render exactly zero (outside the light cone) under a light.
inline double zero_render_fraction(const Dataset& dataset, std::span<const PixelSample> samples,
                                   const LightModel& light) {
  if (samples.empty()) return 0.0;
  LightModel prototype = light;
  prototype.characteristic = dataset.characteristic;
  const ResidualModel model(dataset.intrinsics, dataset.views, samples, prototype);
  const VecX values = model.rendered(to_parameters(prototype));
  std::size_t zeros = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i) zeros += (values[i] == 0.0);
  return static_cast<double>(zeros) / static_cast<double>(samples.size());
}

}  // namespace lightcal
