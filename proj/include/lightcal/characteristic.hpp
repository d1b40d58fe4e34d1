#pragma once

// Angular emission characteristics of a directional point light.
//
// Both characteristics are evaluated on a direction expressed in the light's local
// frame, whose +Z is the central axis.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lightcal/error.hpp"
#include "lightcal/geometry.hpp"

namespace lightcal {

inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Polar angle from the central axis, computed without acos to stay accurate near 0.
inline double polar_angle(const Vec3& local_dir) {
  return std::atan2(std::hypot(local_dir.x(), local_dir.y()), local_dir.z());
}

// Azimuth about the central axis in [0, 2pi).
inline double azimuth(const Vec3& local_dir) {
  double phi = std::atan2(local_dir.y(), local_dir.x());
  if (phi < 0.0) phi += 2.0 * std::numbers::pi;
  return phi;
}

// Radiation intensity distribution of a rotationally symmetric light: piecewise
// linear in theta, zero past the last sample.
class RidCurve {
 public:
  RidCurve() = default;

  RidCurve(std::vector<double> theta_deg, std::vector<double> intensity)
      : theta_deg_(std::move(theta_deg)), intensity_(std::move(intensity)) {
    if (theta_deg_.size() != intensity_.size() || theta_deg_.size() < 2)
      throw Error(ErrorCode::InvalidArgument, "RID curve needs at least two (theta, intensity) pairs");
    if (theta_deg_.front() != 0.0)
      throw Error(ErrorCode::InvalidArgument, "RID curve must start at theta = 0");
    for (std::size_t i = 0; i < theta_deg_.size(); ++i) {
      if (!std::isfinite(theta_deg_[i]) || !std::isfinite(intensity_[i]))
        throw Error(ErrorCode::InvalidArgument, "RID curve samples must be finite");
      if (intensity_[i] < 0.0) throw Error(ErrorCode::InvalidArgument, "RID intensities must be >= 0");
      if (theta_deg_[i] > 180.0) throw Error(ErrorCode::InvalidArgument, "RID theta must be <= 180 degrees");
      if (i > 0 && !(theta_deg_[i] > theta_deg_[i - 1]))
        throw Error(ErrorCode::InvalidArgument, "RID theta samples must be strictly increasing");
    }
    theta_rad_.reserve(theta_deg_.size());
    for (double t : theta_deg_) theta_rad_.push_back(t * kDegToRad);
  }

  // Emission is 1 in every direction.
  static RidCurve isotropic() { return RidCurve({0.0, 180.0}, {1.0, 1.0}); }

  double operator()(double theta) const {
    if (theta_rad_.empty() || theta < 0.0 || theta > theta_rad_.back()) return 0.0;
    const auto it = std::upper_bound(theta_rad_.begin(), theta_rad_.end(), theta);
    if (it == theta_rad_.end()) return intensity_.back();
    const std::size_t hi = static_cast<std::size_t>(it - theta_rad_.begin());
    const std::size_t lo = hi - 1;
    const double f = (theta - theta_rad_[lo]) / (theta_rad_[hi] - theta_rad_[lo]);
    return intensity_[lo] + f * (intensity_[hi] - intensity_[lo]);
  }

  double evaluate(const Vec3& local_dir) const { return (*this)(polar_angle(local_dir)); }

  const std::vector<double>& theta_deg() const { return theta_deg_; }
  const std::vector<double>& intensity() const { return intensity_; }
  double cutoff() const { return theta_rad_.empty() ? 0.0 : theta_rad_.back(); }

  RidCurve scaled(double k) const {
    std::vector<double> e = intensity_;
    for (double& x : e) x *= k;
    return RidCurve(theta_deg_, std::move(e));
  }

  friend bool operator==(const RidCurve& a, const RidCurve& b) {
    return a.theta_deg_ == b.theta_deg_ && a.intensity_ == b.intensity_;
  }

 private:
  std::vector<double> theta_deg_;
  std::vector<double> intensity_;
  std::vector<double> theta_rad_;
};

// Non-symmetric characteristic on a regular (theta, phi) grid. Rows are theta from 0
// to 90 degrees inclusive; columns are phi = j * 360 / n_phi, periodic.
class RadianceGrid {
 public:
  static constexpr double kThetaMaxDeg = 90.0;

  RadianceGrid() = default;

  RadianceGrid(int n_theta, int n_phi, std::vector<double> values)
      : n_theta_(n_theta), n_phi_(n_phi), values_(std::move(values)) {
    if (n_theta < 2 || n_phi < 4)
      throw Error(ErrorCode::InvalidArgument, "radiance grid needs n_theta >= 2 and n_phi >= 4");
    if (values_.size() != static_cast<std::size_t>(n_theta) * static_cast<std::size_t>(n_phi))
      throw Error(ErrorCode::InvalidArgument, "radiance grid value count does not match n_theta * n_phi");
    for (double v : values_)
      if (!std::isfinite(v) || v < 0.0)
        throw Error(ErrorCode::InvalidArgument, "radiance grid values must be finite and >= 0");
  }

  // Grid constant in phi with the given theta profile (theta sampled uniformly on [0, 90]).
  static RadianceGrid from_profile(const std::vector<double>& profile, int n_phi) {
    std::vector<double> values;
    values.reserve(profile.size() * static_cast<std::size_t>(n_phi));
    for (double e : profile) values.insert(values.end(), static_cast<std::size_t>(n_phi), e);
    return RadianceGrid(static_cast<int>(profile.size()), n_phi, std::move(values));
  }

  int n_theta() const { return n_theta_; }
  int n_phi() const { return n_phi_; }
  const std::vector<double>& values() const { return values_; }
  double at(int i_theta, int j_phi) const {
    return values_[static_cast<std::size_t>(i_theta) * static_cast<std::size_t>(n_phi_) + static_cast<std::size_t>(j_phi)];
  }
  double theta_step() const { return kThetaMaxDeg * kDegToRad / (n_theta_ - 1); }

  // Theta sample positions in degrees, for building an equivalent RID curve.
  std::vector<double> theta_samples_deg() const {
    std::vector<double> t(static_cast<std::size_t>(n_theta_));
    for (int i = 0; i < n_theta_; ++i) t[static_cast<std::size_t>(i)] = kThetaMaxDeg * i / (n_theta_ - 1);
    return t;
  }

  double operator()(double theta, double phi) const {
    const double theta_max = kThetaMaxDeg * kDegToRad;
    if (values_.empty() || theta < 0.0 || theta > theta_max) return 0.0;
    const double t = theta / theta_step();
    int i = static_cast<int>(std::floor(t));
    i = std::clamp(i, 0, n_theta_ - 2);
    const double f = t - i;

    double p = phi / (2.0 * std::numbers::pi) * n_phi_;
    p -= n_phi_ * std::floor(p / n_phi_);
    int j = static_cast<int>(std::floor(p));
    if (j >= n_phi_) j = 0;
    const double g = p - j;
    const int j1 = (j + 1) % n_phi_;

    const double lo = at(i, j) + g * (at(i, j1) - at(i, j));
    const double hi = at(i + 1, j) + g * (at(i + 1, j1) - at(i + 1, j));
    return lo + f * (hi - lo);
  }

  double evaluate(const Vec3& local_dir) const { return (*this)(polar_angle(local_dir), azimuth(local_dir)); }

  friend bool operator==(const RadianceGrid& a, const RadianceGrid& b) {
    return a.n_theta_ == b.n_theta_ && a.n_phi_ == b.n_phi_ && a.values_ == b.values_;
  }

 private:
  int n_theta_ = 0;
  int n_phi_ = 0;
  std::vector<double> values_;
};

using Characteristic = std::variant<RidCurve, RadianceGrid>;

inline bool is_symmetric(const Characteristic& c) { return std::holds_alternative<RidCurve>(c); }

inline double evaluate(const Characteristic& c, const Vec3& local_dir) {
  return std::visit([&](const auto& ch) { return ch.evaluate(local_dir); }, c);
}

}  // namespace lightcal
