#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lightcal/photometry.hpp"
#include "lightcal/random.hpp"
#include "lightcal/synth.hpp"
#include "oracle.hpp"

using namespace lightcal;

namespace {

constexpr double kPi = std::numbers::pi;

Mat3 looking_down() { return Vec3(1, -1, -1).asDiagonal(); }

CameraIntrinsics pinhole(double f, int w, int h) {
  CameraIntrinsics in;
  in.fx = in.fy = f;
  in.cx = w / 2.0;
  in.cy = h / 2.0;
  in.width = w;
  in.height = h;
  return in;
}

PlacedLight placed(const Vec3& pos, const Mat3& rot, double scale, const Characteristic& c) {
  return {pos, rot, scale, &c};
}

PlaneQuad square(double x0, double y0, double side) {
  return make_plane_quad({x0, y0, 0}, {x0 + side, y0, 0}, {x0 + side, y0 + side, 0}, {x0, y0 + side, 0});
}

double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST(LightAxis, Cases) {
  EXPECT_EQ(light_axis(0, 0), Vec3::UnitZ());
  const Vec3 side = light_axis(0, kPi / 2);
  EXPECT_NEAR(side.dot(Vec3::UnitZ()), 0.0, 1e-12);
  EXPECT_NEAR(side.norm(), 1.0, 1e-12);

  // Independent composition: pitch about Y applied after roll about X.
  const double r = 0.1, p = 0.2;
  Eigen::Matrix3d Rx, Ry;
  Rx << 1, 0, 0, 0, std::cos(r), -std::sin(r), 0, std::sin(r), std::cos(r);
  Ry << std::cos(p), 0, std::sin(p), 0, 1, 0, -std::sin(p), 0, std::cos(p);
  const Vec3 expected = Ry * Rx * Vec3(0, 0, 1);
  EXPECT_LT((light_axis(r, p) - expected).norm(), 1e-15);
  EXPECT_NEAR(light_axis(r, p).norm(), 1.0, 1e-12);

  LightModel m;
  m.roll = r;
  m.pitch = p;
  m.yaw = 1.3;
  EXPECT_LT((m.orientation().col(2) - expected).norm(), 1e-15);
}

TEST(IncidentIrradiance, IsotropicEqualsSolidAngle) {
  const Characteristic iso = RidCurve::isotropic();
  const auto light = placed(Vec3(0.1, -0.2, 1.0), Mat3::Identity(), 1.0, iso);
  const PlaneQuad q = square(0.3, 0.1, 0.05);
  std::array<Vec3, 4> d;
  for (int i = 0; i < 4; ++i) d[i] = (q.corners[i] - light.position).normalized();
  EXPECT_EQ(incident_irradiance(q, light), solid_angle_quad(d));
}

TEST(IncidentIrradiance, OutsideConeIsZero) {
  const Characteristic narrow = RidCurve({0, 10}, {1, 0.5});
  // Light 1 m up pointing straight down; quad about 60 degrees off-axis.
  const auto light = placed(Vec3(0, 0, 1), looking_down(), 3.0, narrow);
  EXPECT_EQ(incident_irradiance(square(1.7, 0, 0.05), light), 0.0);
}

TEST(IncidentIrradiance, StraddlingConeEdgeIsFivePointMean) {
  const RidCurve curve({0, 10}, {1, 0.5});
  const Characteristic narrow = curve;
  const auto light = placed(Vec3(0, 0, 1), looking_down(), 2.0, narrow);
  const double edge = std::tan(10 * kDegToRad);
  const PlaneQuad q = square(edge - 0.02, -0.02, 0.04);
  std::array<Vec3, 5> d;
  for (int i = 0; i < 4; ++i) d[i] = (q.corners[i] - light.position).normalized();
  d[4] = (q.centroid - light.position).normalized();
  double e = 0;
  for (const auto& x : d) e += oracle::rid(curve.theta_deg(), curve.intensity(), std::acos(-x.z()));
  const double omega = oracle::quad_area({d[0], d[1], d[2], d[3]});
  const double got = incident_irradiance(q, light);
  EXPECT_GT(got, 0.0);
  EXPECT_LT(got, 2.0 * omega * 1.0);
  EXPECT_NEAR(got, 2.0 * omega * e / 5, 1e-12 * got);
}

TEST(IncidentIrradiance, LightOnPlaneIsAnError) {
  const Characteristic iso = RidCurve::isotropic();
  try {
    incident_irradiance(square(0, 0, 1), placed(Vec3(0, 0, 0), Mat3::Identity(), 1, iso));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LightOnPlane);
  }
}

TEST(ReflectToCamera, NormalIncidenceAndInverseSquare) {
  const Vec3 P(0.3, 0.4, 0);
  const Vec3 L = P + Vec3(0, 0, 0.7);
  EXPECT_DOUBLE_EQ(reflect_to_camera(2.5, P, L, P + Vec3(0, 0, 1)), 2.5);
  EXPECT_DOUBLE_EQ(reflect_to_camera(2.5, P, L, P + Vec3(0, 0, 2)), 2.5 / 4);
  EXPECT_DOUBLE_EQ(reflect_to_camera(2.5, P, L, P + Vec3(0, 2, 0)), 2.5 / 4);
}

TEST(ReflectToCamera, GrazingLightGivesZero) {
  const Vec3 P(0, 0, 0);
  EXPECT_EQ(reflect_to_camera(1.0, P, Vec3(1, 0, 0), Vec3(0, 0, 1)), 0.0);
  EXPECT_THROW(reflect_to_camera(1.0, P, Vec3(0, 0, 1), P), Error);
}

TEST(RenderPixel, LightBelowPlaneIsAnError) {
  auto spec = default_scenario();
  const auto poses = sample_poses(spec);
  LightModel light = spec.light;
  light.position = Vec3(0, 0, 50);  // far past the plane along the optical axis
  try {
    render_pixel(10, 10, spec.intrinsics, poses[0], light);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LightOnPlane);
  }
  const RenderedImage img = render_image(spec.intrinsics, poses[0], light);
  EXPECT_EQ(img.valid_count(), 0u);
  for (float v : img.image.data) EXPECT_EQ(v, 0.0f);
}

TEST(RenderPixel, MatchesIndependentOracle) {
  auto spec = default_scenario();
  const auto poses = sample_poses(spec);
  const auto& curve = std::get<RidCurve>(spec.light.characteristic);
  Rng rng(8);
  for (const auto& pose : poses) {
    for (int i = 0; i < 100; ++i) {
      const int u = static_cast<int>(rng.index(spec.intrinsics.width));
      const int v = static_cast<int>(rng.index(spec.intrinsics.height));
      const double got = render_pixel(u, v, spec.intrinsics, pose, spec.light);
      const double ref = oracle::render_pixel(u, v, spec.intrinsics, pose, spec.light.position, spec.light.roll,
                                              spec.light.pitch, spec.light.scale, curve);
      EXPECT_NEAR(got, ref, 1e-9 * std::max(ref, 1e-3));
    }
  }
}

TEST(RenderImage, AgreesWithRenderPixelBitwise) {
  auto spec = default_scenario();
  const auto poses = sample_poses(spec);
  const RenderedImage img = render_image(spec.intrinsics, poses[1], spec.light);
  EXPECT_EQ(img.valid_count(), img.valid.size());
  Rng rng(9);
  for (int i = 0; i < 300; ++i) {
    const int u = static_cast<int>(rng.index(spec.intrinsics.width));
    const int v = static_cast<int>(rng.index(spec.intrinsics.height));
    const double px = render_pixel(u, v, spec.intrinsics, poses[1], spec.light);
    EXPECT_EQ(img.values[img.image.index(u, v)], px);
    EXPECT_EQ(img.image.at(u, v), static_cast<float>(px));
  }
}

TEST(RenderImage, LinearInScaleAndCurveGain) {
  auto spec = default_scenario();
  const auto pose = sample_poses(spec)[2];
  const RenderedImage base = render_image(spec.intrinsics, pose, spec.light);

  LightModel doubled = spec.light;
  doubled.scale *= 2;
  EXPECT_EQ(render_image(spec.intrinsics, pose, doubled).values,
            [&] {
              auto v = base.values;
              for (double& x : v) x *= 2;
              return v;
            }());

  LightModel brighter = spec.light;
  brighter.characteristic = std::get<RidCurve>(spec.light.characteristic).scaled(3.0);
  const auto b = render_image(spec.intrinsics, pose, brighter).values;
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_NEAR(b[i], 3.0 * base.values[i], 1e-14 * b[i]);
}

TEST(RenderImage, CoLocatedLightSmallQuadLimit) {
  const double f = 2000, h = 1.5;
  CameraIntrinsics in = pinhole(f, 64, 64);
  in.cx = in.cy = 32.5;
  const CameraPose pose{looking_down(), Vec3(0, 0, h)};
  LightModel light;
  light.scale = 7.0;
  // Flat near the axis: a kink there would add a first-order term in the pixel's angular size.
  light.characteristic = RidCurve({0, 1, 30}, {2.0, 2.0, 1.0});
  // Pixel solid angle ~ 1/f^2 from the camera center, on-axis emission 2, cosine 1.
  const double expected = light.scale * 2.0 / (f * f) / (h * h);
  EXPECT_NEAR(render_pixel(32, 32, in, pose, light), expected, 1e-6 * expected);
}

TEST(RenderImage, FrontoParallelProfileHasSingleMaximum) {
  const double f = 300, h = 2.0;
  const CameraIntrinsics in = pinhole(f, 240, 240);
  const CameraPose pose{looking_down(), Vec3(0, 0, h)};
  LightModel light;
  light.scale = 1.0;
  light.characteristic = default_rid_curve();
  const auto& curve = std::get<RidCurve>(light.characteristic);
  const RenderedImage img = render_image(in, pose, light);

  std::size_t best = 0;
  for (std::size_t i = 0; i < img.values.size(); ++i)
    if (img.values[i] > img.values[best]) best = i;
  const int bu = static_cast<int>(best % in.width), bv = static_cast<int>(best / in.width);
  EXPECT_NEAR(bu, 119.5, 0.5);
  EXPECT_NEAR(bv, 119.5, 0.5);

  const int steps[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
  for (const auto& s : steps) {
    double prev = img.values[best];
    for (int u = bu + s[0], v = bv + s[1]; u >= 0 && v >= 0 && u < in.width && v < in.height; u += s[0], v += s[1]) {
      const double cur = img.values[img.image.index(u, v)];
      EXPECT_LE(cur, prev * (1 + 1e-12)) << "at " << u << "," << v;
      prev = cur;
    }
  }

  // Closed-form small-pixel profile along the centre row: footprint (h/f)^2 seen at
  // distance r with two cosine factors and the inverse-square camera falloff.
  for (int u = 0; u < in.width; ++u) {
    const double x = (u + 0.5 - in.cx) * h / f;
    const double r2 = h * h + x * x;
    const double cos_t = h / std::sqrt(r2);
    const double e = oracle::rid(curve.theta_deg(), curve.intensity(), std::acos(cos_t));
    const double ideal = (h / f) * (h / f) * cos_t * cos_t * e / (r2 * r2);
    // The piecewise-linear curve has a kink at the axis, so the five-point pixel mean
    // departs from the centre value to first order in the pixel's angular size (~1/f).
    EXPECT_NEAR(img.values[img.image.index(u, 119)], ideal, 1e-3 * ideal);
  }
}

TEST(RenderImage, ZeroCurveRendersBlack) {
  auto spec = default_scenario();
  LightModel light = spec.light;
  light.characteristic = RidCurve({0, 90}, {0, 0});
  const auto img = render_image(spec.intrinsics, sample_poses(spec)[0], light);
  for (float v : img.image.data) EXPECT_EQ(v, 0.0f);
}

TEST(RenderImage, PhiConstantGridMatchesCurve) {
  auto spec = default_scenario();
  const auto poses = sample_poses(spec);
  const auto& curve = std::get<RidCurve>(spec.light.characteristic);
  LightModel grid_light = spec.light;
  grid_light.characteristic = RadianceGrid::from_profile(curve.intensity(), 24);
  grid_light.yaw = 0.7;
  for (int k = 0; k < 3; ++k) {
    const auto a = render_image(spec.intrinsics, poses[k], spec.light).values;
    const auto b = render_image(spec.intrinsics, poses[k], grid_light).values;
    double diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
    EXPECT_LE(diff, 1e-9 * max_abs(a));
  }
}

TEST(RenderImage, YawIsIrrelevantForSymmetricLights) {
  auto spec = default_scenario();
  const auto poses = sample_poses(spec);
  for (double yaw : {0.3, -2.0, 3.1}) {
    LightModel spun = spec.light;
    spun.yaw = yaw;
    for (int k = 0; k < 2; ++k) {
      const auto a = render_image(spec.intrinsics, poses[k], spec.light).values;
      const auto b = render_image(spec.intrinsics, poses[k], spun).values;
      double diff = 0;
      for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
      EXPECT_LE(diff, 1e-12 * max_abs(a));
    }
  }
}

TEST(RenderImage, ScheduleIndependent) {
  auto spec = default_scenario();
  const auto pose = sample_poses(spec)[3];
  const auto a = render_image(spec.intrinsics, pose, spec.light);
  const auto b = render_image(spec.intrinsics, pose, spec.light);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.image, b.image);
}

TEST(Energy, SubdividedPixelsPreserveIncidentEnergy) {
  auto spec = default_scenario();
  const auto poses = sample_poses(spec);
  const Characteristic iso = RidCurve::isotropic();
  Rng rng(12);
  for (const auto& pose : poses) {
    LightModel light = spec.light;
    light.characteristic = iso;
    const PlacedLight pl = place_light(light, pose);
    for (int i = 0; i < 40; ++i) {
      const int u = static_cast<int>(rng.index(spec.intrinsics.width));
      const int v = static_cast<int>(rng.index(spec.intrinsics.height));
      const double whole = incident_irradiance(pixel_quad(u, v, spec.intrinsics, pose), pl);
      double parts = 0;
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          const double x = u + 0.5 * a, y = v + 0.5 * b;
          auto P = [&](double px, double py) { return back_project_corner({px, py}, spec.intrinsics, pose); };
          parts += incident_irradiance(make_plane_quad(P(x, y), P(x + 0.5, y), P(x + 0.5, y + 0.5), P(x, y + 0.5)), pl);
        }
      }
      EXPECT_NEAR(parts, whole, 1e-6 * whole);
    }
  }
}

TEST(Energy, IsotropicLightOverLargeDiskMatchesHemisphereFraction) {
  // Light 1 m above the plane under a fronto-parallel camera at 10 m.
  const double f = 30, H = 10, h = 1, radius = 150;
  const int n = 1000;
  const CameraIntrinsics in = pinhole(f, n, n);
  const CameraPose pose{looking_down(), Vec3(0, 0, H)};
  LightModel light;
  light.position = Vec3(0, 0, H - h);  // camera frame: straight down the optical axis
  light.characteristic = RidCurve::isotropic();
  const PlacedLight pl = place_light(light, pose);
  double total = 0;
  for (int v = 0; v < n; ++v) {
    for (int u = 0; u < n; ++u) {
      const PlaneQuad q = pixel_quad(u, v, in, pose);
      if (q.centroid.head<2>().norm() < radius) total += incident_irradiance(q, pl);
    }
  }
  const double expected = 2 * kPi * (1 - h / std::hypot(h, radius));
  EXPECT_NEAR(total, expected, 1e-3 * expected);
}
