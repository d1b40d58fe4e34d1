#pragma once

// Locates finite-difference stencils that straddle a slope discontinuity of a
// piecewise-linear emission curve. The model is not differentiable there, so a
// central difference and its half-step counterpart legitimately disagree.

#include <algorithm>
#include <array>
#include <cmath>
#include <variant>

#include "lightcal/solver.hpp"

namespace knots {

using namespace lightcal;

// Knot interval of each of the five emission directions of a pixel.
inline std::array<long, 5> intervals(const CameraIntrinsics& intr, const CameraPose& pose, int u, int v,
                                     const LightModel& light) {
  std::array<long, 5> out{};
  const auto* curve = std::get_if<RidCurve>(&light.characteristic);
  if (!curve) return out;
  const PlaneQuad quad = pixel_quad(u, v, intr, pose);
  const PlacedLight placed = place_light(light, pose);
  const auto& knots = curve->theta_deg();
  for (int c = 0; c < 5; ++c) {
    const Vec3 point = c < 4 ? quad.corners[c] : quad.centroid;
    const Vec3 d = placed.rotation.transpose() * (point - placed.position).normalized();
    const double theta = std::acos(std::clamp(d.z(), -1.0, 1.0)) * kRadToDeg;
    out[c] = std::upper_bound(knots.begin(), knots.end(), theta) - knots.begin();
  }
  return out;
}

// True when some emission direction changes knot interval across p ± h e_k.
inline bool stencil_crosses_knot(const CameraIntrinsics& intr, const CameraPose& pose, int u, int v,
                                 const LightModel& prototype, const VecX& p, Eigen::Index k, double h) {
  VecX lo = p, hi = p;
  lo[k] -= h;
  hi[k] += h;
  const auto a = intervals(intr, pose, u, v, with_parameters(prototype, lo));
  const auto b = intervals(intr, pose, u, v, with_parameters(prototype, p));
  const auto c = intervals(intr, pose, u, v, with_parameters(prototype, hi));
  return a != b || b != c;
}

}  // namespace knots
