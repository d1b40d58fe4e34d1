#pragma once

// Camera model and pixel footprints on the z = 0 reference plane.
//
// Pixel (u, v) owns the square [u, u+1] x [v, v+1] in pixel-corner coordinates, so
// integer coordinates are pixel corners and pixel centers sit at half-integers.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <sstream>

#include "lightcal/error.hpp"

namespace lightcal {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kDegeneracyEps = 1e-12;

// Pinhole camera with the 5-coefficient radial-tangential distortion model.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;
  std::array<double, 5> dist{};  // k1, k2, p1, p2, k3

  double k1() const { return dist[0]; }
  double k2() const { return dist[1]; }
  double p1() const { return dist[2]; }
  double p2() const { return dist[3]; }
  double k3() const { return dist[4]; }

  bool has_distortion() const {
    for (double d : dist)
      if (d != 0.0) return true;
    return false;
  }

  void validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, "intrinsics: " + msg); };
    if (!(fx > 0.0) || !(fy > 0.0)) fail("focal lengths must be positive");
    if (width <= 0 || height <= 0) fail("sensor size must be positive");
    if (!(cx > 0.0 && cx < width)) fail("cx must lie inside (0, width)");
    if (!(cy > 0.0 && cy < height)) fail("cy must lie inside (0, height)");
    for (double d : dist)
      if (!std::isfinite(d)) fail("distortion coefficients must be finite");
  }

  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

// Camera-to-world rotation and camera center in the reference-plane frame.
struct CameraPose {
  Mat3 R = Mat3::Identity();
  Vec3 C = Vec3::Zero();

  void validate() const {
    const double ortho = (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff();
    if (!(ortho < 1e-10) || !(std::abs(R.determinant() - 1.0) < 1e-10))
      throw Error(ErrorCode::InvalidArgument, "camera rotation is not orthonormal with det +1");
    if (!(C.z() > 0.0))
      throw Error(ErrorCode::InvalidArgument, "camera center must lie above the z = 0 plane");
  }

  Vec3 optical_axis() const { return R.col(2); }
};

// Back-projected pixel footprint, counter-clockwise seen from +Z.
struct PlaneQuad {
  std::array<Vec3, 4> corners;
  Vec3 centroid = Vec3::Zero();

  double signed_area() const {
    double a = 0.0;
    for (int i = 0; i < 4; ++i) {
      const Vec3& p = corners[i];
      const Vec3& q = corners[(i + 1) % 4];
      a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * a;
  }
};

// Forward distortion of ideal normalized coordinates.
inline Vec2 distort_normalized(const Vec2& x, const CameraIntrinsics& intr) {
  const double r2 = x.squaredNorm();
  const double radial = 1.0 + r2 * (intr.k1() + r2 * (intr.k2() + r2 * intr.k3()));
  const double xy = x.x() * x.y();
  return {x.x() * radial + 2.0 * intr.p1() * xy + intr.p2() * (r2 + 2.0 * x.x() * x.x()),
          x.y() * radial + intr.p1() * (r2 + 2.0 * x.y() * x.y()) + 2.0 * intr.p2() * xy};
}

inline Vec2 project_normalized(const Vec2& x, const CameraIntrinsics& intr) {
  const Vec2 d = distort_normalized(x, intr);
  return {intr.fx * d.x() + intr.cx, intr.fy * d.y() + intr.cy};
}

// Pixel coordinates -> ideal normalized coordinates by fixed-point iteration.
inline Vec2 undistort_pixel(const Vec2& p, const CameraIntrinsics& intr) {
  if (intr.width > 0 && intr.height > 0) {
    const double gx = 0.1 * intr.width;
    const double gy = 0.1 * intr.height;
    if (p.x() < -gx || p.x() > intr.width + gx || p.y() < -gy || p.y() > intr.height + gy) {
      std::ostringstream os;
      os << "pixel (" << p.x() << ", " << p.y() << ") outside the image guard band";
      throw Error(ErrorCode::InvalidArgument, os.str());
    }
  }
  const Vec2 xd((p.x() - intr.cx) / intr.fx, (p.y() - intr.cy) / intr.fy);
  if (!intr.has_distortion()) return xd;

  constexpr int kMaxIterations = 50;
  constexpr double kPixelTolerance = 1e-10;
  Vec2 x = xd;
  for (int it = 0; it < kMaxIterations; ++it) {
    const Vec2 err = distort_normalized(x, intr) - xd;
    if (std::abs(err.x() * intr.fx) < kPixelTolerance && std::abs(err.y() * intr.fy) < kPixelTolerance)
      return x;
    const double r2 = x.squaredNorm();
    const double radial = 1.0 + r2 * (intr.k1() + r2 * (intr.k2() + r2 * intr.k3()));
    const double xy = x.x() * x.y();
    const Vec2 tangential(2.0 * intr.p1() * xy + intr.p2() * (r2 + 2.0 * x.x() * x.x()),
                          intr.p1() * (r2 + 2.0 * x.y() * x.y()) + 2.0 * intr.p2() * xy);
    x = (xd - tangential) / radial;
    if (!x.allFinite()) break;
  }
  const Vec2 err = distort_normalized(x, intr) - xd;
  if (x.allFinite() && std::abs(err.x() * intr.fx) < kPixelTolerance &&
      std::abs(err.y() * intr.fy) < kPixelTolerance)
    return x;
  std::ostringstream os;
  os << "undistortion did not converge at pixel (" << p.x() << ", " << p.y() << ")";
  throw Error(ErrorCode::NonConvergence, os.str());
}

// Unit world-frame viewing ray through a pixel-corner coordinate.
inline Vec3 pixel_ray(const Vec2& p, const CameraIntrinsics& intr, const CameraPose& pose) {
  const Vec2 x = undistort_pixel(p, intr);
  return (pose.R * Vec3(x.x(), x.y(), 1.0)).normalized();
}

// Intersection of the corner ray with z = 0: P = lambda * ray + C, lambda = -C_z / ray_z.
inline Vec3 back_project_corner(const Vec2& p, const CameraIntrinsics& intr, const CameraPose& pose) {
  const Vec3 ray = pixel_ray(p, intr, pose);
  if (std::abs(ray.z()) <= kDegeneracyEps)
    throw Error(ErrorCode::RayParallelToPlane, "viewing ray is parallel to the reference plane");
  const double lambda = -pose.C.z() / ray.z();
  if (!(lambda > 0.0))
    throw Error(ErrorCode::IntersectionBehindCamera, "reference plane lies behind the camera");
  Vec3 P = lambda * ray + pose.C;
  P.z() = 0.0;
  return P;
}

// Orders four plane points counter-clockwise (seen from +Z) and fills the centroid.
inline PlaneQuad make_plane_quad(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  PlaneQuad q;
  q.corners = {a, b, c, d};
  if (q.signed_area() < 0.0) q.corners = {a, d, c, b};
  q.centroid = 0.25 * (q.corners[0] + q.corners[1] + q.corners[2] + q.corners[3]);
  return q;
}

inline PlaneQuad pixel_quad(int u, int v, const CameraIntrinsics& intr, const CameraPose& pose) {
  if (intr.width > 0 && intr.height > 0 && (u < 0 || v < 0 || u >= intr.width || v >= intr.height))
    throw Error(ErrorCode::InvalidArgument, "pixel outside the image");
  const double x = u;
  const double y = v;
  return make_plane_quad(back_project_corner({x, y}, intr, pose), back_project_corner({x + 1, y}, intr, pose),
                         back_project_corner({x + 1, y + 1}, intr, pose),
                         back_project_corner({x, y + 1}, intr, pose));
}

// Van Oosterom-Strackee signed solid angle of the spherical triangle (a, b, c).
inline double signed_triangle_solid_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double numer = a.dot(b.cross(c));
  const double denom = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
  return 2.0 * std::atan2(numer, denom);
}

inline double spherical_triangle_solid_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
  return std::abs(signed_triangle_solid_angle(a, b, c));
}

// Solid angle of a spherical quadrilateral given by four unit vertex directions,
// split along the (0, 2) diagonal.
inline double solid_angle_quad(const std::array<Vec3, 4>& dirs) {
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      const double d = dirs[i].dot(dirs[j]);
      if (!(d > -1.0 + kDegeneracyEps && d < 1.0 - kDegeneracyEps))
        throw Error(ErrorCode::DegenerateQuad, "quad directions are duplicate or antipodal");
    }
  }
  return std::abs(signed_triangle_solid_angle(dirs[0], dirs[1], dirs[2]) +
                  signed_triangle_solid_angle(dirs[0], dirs[2], dirs[3]));
}

// Elementary rotations (right-handed, active).
inline Mat3 rotation_x(double a) {
  Mat3 m;
  m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return m;
}

inline Mat3 rotation_y(double a) {
  Mat3 m;
  m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return m;
}

inline Mat3 rotation_z(double a) {
  Mat3 m;
  m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return m;
}

}  // namespace lightcal
