#pragma once

// Energy-preserving forward renderer for a Lambertian reference plane lit by a
// directional point light rigidly mounted on the camera.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "lightcal/characteristic.hpp"
#include "lightcal/error.hpp"
#include "lightcal/geometry.hpp"
#include "lightcal/parallel.hpp"

namespace lightcal {

// Single-channel linear image, row-major.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  Image() = default;
  Image(int w, int h, float fill = 0.0f)
      : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width) + static_cast<std::size_t>(u);
  }
  float& at(int u, int v) { return data[index(u, v)]; }
  float at(int u, int v) const { return data[index(u, v)]; }

  friend bool operator==(const Image&, const Image&) = default;
};

// Light pose relative to the camera plus its characteristic and gain.
//
// The central axis is the camera optical axis (+Z of the camera frame) rotated by
// roll about X, then pitch about Y. Yaw spins the light about its own central axis
// afterwards and only matters for non-symmetric characteristics.
struct LightModel {
  Vec3 position = Vec3::Zero();  // camera frame, meters
  double roll = 0.0;             // radians
  double pitch = 0.0;
  double yaw = 0.0;
  double scale = 1.0;
  Characteristic characteristic = RidCurve::isotropic();

  bool symmetric() const { return is_symmetric(characteristic); }

  // Camera-from-light rotation; its third column is the central axis.
  Mat3 orientation() const { return rotation_y(pitch) * rotation_x(roll) * rotation_z(yaw); }

  void validate() const {
    if (!(scale > 0.0) || !std::isfinite(scale))
      throw Error(ErrorCode::InvalidArgument, "light scale must be positive and finite");
    if (!position.allFinite() || !std::isfinite(roll) || !std::isfinite(pitch) || !std::isfinite(yaw))
      throw Error(ErrorCode::InvalidArgument, "light pose must be finite");
  }
};

inline Vec3 light_axis(double roll, double pitch) {
  return rotation_y(pitch) * (rotation_x(roll) * Vec3::UnitZ());
}

// A light expressed in the world (reference-plane) frame for one view.
struct PlacedLight {
  Vec3 position;
  Mat3 rotation;  // world-from-light
  double scale;
  const Characteristic* characteristic;

  double emission(const Vec3& world_dir) const {
    return evaluate(*characteristic, rotation.transpose() * world_dir);
  }
};

inline PlacedLight place_light(const LightModel& light, const CameraPose& pose) {
  return {pose.R * light.position + pose.C, pose.R * light.orientation(), light.scale, &light.characteristic};
}

inline constexpr double kMinLightHeight = 1e-9;

// Relative energy reaching a plane quad: s * solid angle * mean emission over the
// four corner directions and the centroid direction.
inline double incident_irradiance(const PlaneQuad& quad, const PlacedLight& light) {
  if (!(light.position.z() > kMinLightHeight))
    throw Error(ErrorCode::LightOnPlane, "light must be strictly above the reference plane");
  std::array<Vec3, 4> dirs;
  double emission = 0.0;
  for (int i = 0; i < 4; ++i) {
    dirs[i] = (quad.corners[i] - light.position).normalized();
    emission += light.emission(dirs[i]);
  }
  emission += light.emission((quad.centroid - light.position).normalized());
  const double omega = solid_angle_quad(dirs);
  return light.scale * omega * (emission / 5.0);
}

// Lambertian cosine term and inverse-square falloff to the camera.
inline double reflect_to_camera(double irradiance, const Vec3& point, const Vec3& light_position,
                                const Vec3& camera_center) {
  const double d = (point - camera_center).norm();
  if (d < 1e-9) throw Error(ErrorCode::ZeroDistance, "plane point coincides with the camera center");
  const Vec3 to_point = point - light_position;
  const double len = to_point.norm();
  if (len < 1e-9) throw Error(ErrorCode::ZeroDistance, "plane point coincides with the light");
  const double cosine = std::max(0.0, -to_point.z() / len);
  return irradiance * cosine / (d * d);
}

inline double render_quad(const PlaneQuad& quad, const PlacedLight& light, const CameraPose& pose) {
  const double ir = incident_irradiance(quad, light);
  return reflect_to_camera(ir, quad.centroid, light.position, pose.C);
}

inline double render_pixel(int u, int v, const CameraIntrinsics& intr, const CameraPose& pose,
                           const LightModel& light) {
  const PlacedLight placed = place_light(light, pose);
  if (!(placed.position.z() > kMinLightHeight))
    throw Error(ErrorCode::LightOnPlane, "light must be strictly above the reference plane");
  return render_quad(pixel_quad(u, v, intr, pose), placed, pose);
}

struct RenderedImage {
  Image image;                      // float32 copy, the on-disk precision
  std::vector<double> values;       // full-precision intensities
  std::vector<std::uint8_t> valid;  // 1 where the pixel rendered, 0 where masked

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (auto m : valid) n += m;
    return n;
  }
};

// Renders every pixel. Corner back-projections are shared between neighbouring
// pixels; each pixel value is computed exactly as render_pixel would.
inline RenderedImage render_image(const CameraIntrinsics& intr, const CameraPose& pose, const LightModel& light) {
  const int w = intr.width;
  const int h = intr.height;
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  RenderedImage out{Image(w, h), std::vector<double>(n, 0.0), std::vector<std::uint8_t>(n, 0)};
  const PlacedLight placed = place_light(light, pose);
  if (!(placed.position.z() > kMinLightHeight)) return out;

  const std::size_t cw = static_cast<std::size_t>(w) + 1;
  std::vector<std::optional<Vec3>> corners(cw * (static_cast<std::size_t>(h) + 1));
  parallel_for(static_cast<std::size_t>(h) + 1, [&](std::size_t y) {
    for (std::size_t x = 0; x < cw; ++x) {
      try {
        corners[y * cw + x] = back_project_corner({double(x), double(y)}, intr, pose);
      } catch (const Error&) {
      }
    }
  }, 1);

  parallel_for(static_cast<std::size_t>(h), [&](std::size_t y) {
    for (std::size_t x = 0; x < static_cast<std::size_t>(w); ++x) {
      const auto& a = corners[y * cw + x];
      const auto& b = corners[y * cw + x + 1];
      const auto& c = corners[(y + 1) * cw + x + 1];
      const auto& d = corners[(y + 1) * cw + x];
      if (!a || !b || !c || !d) continue;
      try {
        const double value = render_quad(make_plane_quad(*a, *b, *c, *d), placed, pose);
        const std::size_t idx = y * static_cast<std::size_t>(w) + x;
        out.values[idx] = value;
        out.image.data[idx] = static_cast<float>(value);
        out.valid[idx] = 1;
      } catch (const Error&) {
      }
    }
  }, 1);
  return out;
}

}  // namespace lightcal
