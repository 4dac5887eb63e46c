#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "error.hpp"
#include "scene.hpp"

#ifdef G4DC_HAVE_EIGEN
#include <Eigen/Eigenvalues>
#endif

using namespace g4dc;

namespace {

StaticGaussian makeStatic(Vec3f pivot, Vec3f drift) {
  StaticGaussian g;
  g.pivot = pivot;
  g.drift = drift;
  g.scale = {0.1f, 0.1f, 0.1f};
  g.sh.assign(16, Vec3f{0, 0, 0});
  return g;
}

GaussianScene sceneWithFrames(int frames, uint32_t interval) {
  GaussianScene s;
  s.keyframeInterval = interval;
  s.timestamps.resize(frames);
  for (int i = 0; i < frames; ++i) s.timestamps[i] = static_cast<float>(i);
  s.duration = static_cast<float>(frames - 1);
  return s;
}

DynamicGaussian makeDynamic(size_t keyframes) {
  DynamicGaussian g;
  g.keyPositions.assign(keyframes, Vec3f{0, 0, 0});
  g.keyRotations.assign(keyframes, Quatf{1, 0, 0, 0});
  g.scale = {0.1f, 0.1f, 0.1f};
  g.plateauStart = 0.f;
  g.plateauEnd = 1.f;
  g.riseWidth = 1.f;
  g.fallWidth = 1.f;
  g.sh.assign(16, Vec3f{0, 0, 0});
  return g;
}

}  // namespace

TEST_CASE("static position: pivot at t=0, full drift at t=L") {
  StaticGaussian g = makeStatic({0, 0, 0}, {2, 0, 0});
  Vec3 p0 = staticPositionAt(g, 0.0, 10.0);
  CHECK(p0.x == doctest::Approx(0.0));
  Vec3 p1 = staticPositionAt(g, 10.0, 10.0);
  CHECK(p1.x == doctest::Approx(2.0));
  CHECK(p1.y == doctest::Approx(0.0));
}

TEST_CASE("static position: midpoint evaluation") {
  StaticGaussian g = makeStatic({1, 1, 1}, {2, 4, 6});
  Vec3 p = staticPositionAt(g, 5.0, 10.0);
  CHECK(p.x == doctest::Approx(2.0));
  CHECK(p.y == doctest::Approx(3.0));
  CHECK(p.z == doctest::Approx(4.0));
}

TEST_CASE("static position is affine in t: midpoint equals endpoint average") {
  StaticGaussian g = makeStatic({0.25f, -1.5f, 3.f}, {1.5f, 0.5f, -2.f});
  // Dyadic times make the identity exact in floating point.
  double L = 8.0;
  Vec3 a = staticPositionAt(g, 2.0, L);
  Vec3 b = staticPositionAt(g, 6.0, L);
  Vec3 mid = staticPositionAt(g, 4.0, L);
  CHECK(mid.x == (a.x + b.x) / 2);
  CHECK(mid.y == (a.y + b.y) / 2);
  CHECK(mid.z == (a.z + b.z) / 2);
}

TEST_CASE("static position rejects out-of-range times") {
  StaticGaussian g = makeStatic({0, 0, 0}, {1, 0, 0});
  CHECK_THROWS_AS(staticPositionAt(g, -0.1, 1.0), ValidationError);
  CHECK_THROWS_AS(staticPositionAt(g, 1.1, 1.0), ValidationError);
  CHECK_THROWS_AS(staticPositionAt(g, 0.5, 0.0), ValidationError);
}

TEST_CASE("covariance of unit isotropic Gaussian is identity") {
  Mat3 c = covarianceOf({1, 1, 1}, {1, 0, 0, 0});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(c.m[i][j] == doctest::Approx(i == j ? 1.0 : 0.0));
}

TEST_CASE("covariance squares axis-aligned scales") {
  Mat3 c = covarianceOf({2, 1, 1}, {1, 0, 0, 0});
  CHECK(c.m[0][0] == doctest::Approx(4.0));
  CHECK(c.m[1][1] == doctest::Approx(1.0));
  CHECK(c.m[2][2] == doctest::Approx(1.0));
}

TEST_CASE("covariance rotates: 90 degrees about z maps x-extent to y") {
  Quat q = Quat::axisAngle({0, 0, 1}, 3.14159265358979323846 / 2);
  Mat3 c = covarianceOf({2, 1, 1}, q);
  CHECK(c.m[0][0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(c.m[1][1] == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(c.m[2][2] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("covariance rejects bad inputs") {
  CHECK_THROWS_AS(covarianceOf({1, 1, 1}, {0.9, 0, 0, 0}), ValidationError);
  CHECK_THROWS_AS(covarianceOf({0, 1, 1}, {1, 0, 0, 0}), ValidationError);
}

#ifdef G4DC_HAVE_EIGEN
TEST_CASE("covariance eigenvalues equal squared scales for random rotations") {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    Vec3 s{rng.range(0.1, 2.0), rng.range(0.1, 2.0), rng.range(0.1, 2.0)};
    double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
    double a = std::sqrt(1 - u1), b = std::sqrt(u1);
    const double tau = 2 * 3.14159265358979323846;
    Quat q{a * std::sin(tau * u2), a * std::cos(tau * u2), b * std::sin(tau * u3),
           b * std::cos(tau * u3)};
    Mat3 c = covarianceOf(s, q);
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = c.m[i][j];
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(m);
    std::array<double, 3> got{solver.eigenvalues()[0], solver.eigenvalues()[1],
                              solver.eigenvalues()[2]};
    std::array<double, 3> want{s.x * s.x, s.y * s.y, s.z * s.z};
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    for (int i = 0; i < 3; ++i) CHECK(std::abs(got[i] - want[i]) < 1e-9);
  }
}
#endif

TEST_CASE("hermite: constant trajectory stays constant") {
  GaussianScene scene = sceneWithFrames(9, 2);
  DynamicGaussian g = makeDynamic(scene.keyframeCount());
  for (auto& p : g.keyPositions) p = {1.5f, -2.f, 0.5f};
  for (double t : {0.0, 0.7, 2.0, 3.3, 8.0}) {
    Vec3 p = dynamicPositionAt(g, t, scene);
    CHECK(p.x == doctest::Approx(1.5));
    CHECK(p.y == doctest::Approx(-2.0));
  }
}

TEST_CASE("hermite: reproduces keyframe values at knots") {
  GaussianScene scene = sceneWithFrames(9, 2);
  DynamicGaussian g = makeDynamic(scene.keyframeCount());
  Rng rng(7);
  for (auto& p : g.keyPositions)
    p = {static_cast<float>(rng.normal()), static_cast<float>(rng.normal()),
         static_cast<float>(rng.normal())};
  for (size_t n = 0; n < g.keyPositions.size(); ++n) {
    Vec3 p = dynamicPositionAt(g, scene.keyframeTime(n), scene);
    CHECK(p.x == doctest::Approx(g.keyPositions[n].x).epsilon(1e-12));
    CHECK(p.y == doctest::Approx(g.keyPositions[n].y).epsilon(1e-12));
    CHECK(p.z == doctest::Approx(g.keyPositions[n].z).epsilon(1e-12));
  }
}

TEST_CASE("hermite with central-difference tangents is exact on linear data") {
  GaussianScene scene = sceneWithFrames(7, 2);
  DynamicGaussian g = makeDynamic(scene.keyframeCount());
  for (size_t n = 0; n < g.keyPositions.size(); ++n)
    g.keyPositions[n] = {static_cast<float>(n), 0, 0};
  // Midway between knots 1 and 2.
  Vec3 p = dynamicPositionAt(g, 3.0, scene);
  CHECK(p.x == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(p.y == doctest::Approx(0.0));
}

TEST_CASE("hermite is exact on quadratics at interior segments") {
  // Central differences are exact derivatives of quadratics on a uniform
  // grid, and a cubic Hermite segment reproduces any polynomial of degree
  // <= 3 given exact endpoint values and derivatives.
  GaussianScene scene = sceneWithFrames(11, 1);
  DynamicGaussian g = makeDynamic(scene.keyframeCount());
  auto f = [](double t) { return 0.25 * t * t - 1.5 * t + 2.0; };
  for (size_t n = 0; n < g.keyPositions.size(); ++n)
    g.keyPositions[n] = {static_cast<float>(f(static_cast<double>(n))), 0, 0};
  for (double t : {1.25, 3.5, 7.75, 8.9}) {
    Vec3 p = dynamicPositionAt(g, t, scene);
    CHECK(p.x == doctest::Approx(f(t)).epsilon(1e-6));
  }
}

TEST_CASE("hermite is C1: one-sided derivatives agree at interior knots") {
  GaussianScene scene = sceneWithFrames(9, 2);
  DynamicGaussian g = makeDynamic(scene.keyframeCount());
  Rng rng(11);
  for (auto& p : g.keyPositions)
    p = {static_cast<float>(rng.normal()), static_cast<float>(rng.normal()), 0};
  const double h = 1e-6;
  for (size_t n = 1; n + 1 < g.keyPositions.size(); ++n) {
    double t = scene.keyframeTime(n);
    Vec3 left = (dynamicPositionAt(g, t, scene) - dynamicPositionAt(g, t - h, scene)) / h;
    Vec3 right = (dynamicPositionAt(g, t + h, scene) - dynamicPositionAt(g, t, scene)) / h;
    CHECK(std::abs(left.x - right.x) < 1e-4);
    CHECK(std::abs(left.y - right.y) < 1e-4);
  }
}

TEST_CASE("hermite rejects fewer than 2 keyframes") {
  GaussianScene scene = sceneWithFrames(9, 2);
  DynamicGaussian g = makeDynamic(1);
  CHECK_THROWS_AS(dynamicPositionAt(g, 1.0, scene), ValidationError);
}

TEST_CASE("slerp: identical knots give the same quaternion") {
  GaussianScene scene = sceneWithFrames(3, 1);
  DynamicGaussian g = makeDynamic(scene.keyframeCount());
  Quatf q = Quat::axisAngle({0, 0, 1}, 0.8).toFloat();
  for (auto& r : g.keyRotations) r = q;
  Quat out = dynamicRotationAt(g, 0.4, scene);
  CHECK(out.w == doctest::Approx(q.w).epsilon(1e-6));
  CHECK(out.z == doctest::Approx(q.z).epsilon(1e-6));
}

TEST_CASE("slerp halves and thirds angles") {
  GaussianScene scene = sceneWithFrames(3, 1);
  DynamicGaussian g = makeDynamic(scene.keyframeCount());
  g.keyRotations[0] = Quatf{1, 0, 0, 0};
  g.keyRotations[1] = Quat::axisAngle({0, 0, 1}, 3.14159265358979323846 / 2).toFloat();
  g.keyRotations[2] = g.keyRotations[1];

  Quat mid = dynamicRotationAt(g, 0.5, scene);
  Quat want45 = Quat::axisAngle({0, 0, 1}, 3.14159265358979323846 / 4);
  CHECK(mid.w == doctest::Approx(want45.w).epsilon(1e-6));
  CHECK(mid.z == doctest::Approx(want45.z).epsilon(1e-6));

  Quat third = dynamicRotationAt(g, 1.0 / 3.0, scene);
  Quat want30 = Quat::axisAngle({0, 0, 1}, 3.14159265358979323846 / 6);
  CHECK(third.w == doctest::Approx(want30.w).epsilon(1e-6));
  CHECK(third.z == doctest::Approx(want30.z).epsilon(1e-6));
}

TEST_CASE("slerp results are unit-norm along the arc") {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    Quat a = Quat{rng.normal(), rng.normal(), rng.normal(), rng.normal()}.normalized();
    Quat b = Quat{rng.normal(), rng.normal(), rng.normal(), rng.normal()}.normalized();
    Quat out = slerp(a, b, rng.uniform());
    CHECK(out.norm() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("slerp flags antipodal pairs and falls back to an endpoint") {
  bool flag = false;
  Quat a{1, 0, 0, 0};
  Quat b{0, 0, 0, 1};  // 180-degree rotation away
  Quat out = slerp(a, b, 0.5, &flag);
  CHECK(flag);
  CHECK(out.w == doctest::Approx(1.0));
}

TEST_CASE("temporal opacity: plateau, one-sigma edge, vanishing tails") {
  DynamicGaussian g = makeDynamic(2);
  g.plateauStart = 10.f;
  g.plateauEnd = 20.f;
  g.riseWidth = 2.f;
  g.fallWidth = 4.f;
  CHECK(temporalOpacityAt(g, 10.0) == doctest::Approx(1.0));
  CHECK(temporalOpacityAt(g, 15.0) == doctest::Approx(1.0));
  CHECK(temporalOpacityAt(g, 20.0) == doctest::Approx(1.0));
  CHECK(temporalOpacityAt(g, 8.0) == doctest::Approx(std::exp(-0.5)));
  CHECK(temporalOpacityAt(g, 24.0) == doctest::Approx(std::exp(-0.5)));
  CHECK(temporalOpacityAt(g, -1e5) == doctest::Approx(0.0));
  CHECK(temporalOpacityAt(g, 1e5) == doctest::Approx(0.0));
}

TEST_CASE("temporal opacity stays in [0,1] everywhere") {
  DynamicGaussian g = makeDynamic(2);
  g.plateauStart = 3.f;
  g.plateauEnd = 9.f;
  g.riseWidth = 0.5f;
  g.fallWidth = 7.f;
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    double v = temporalOpacityAt(g, rng.range(-50, 50));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("temporal opacity rejects non-positive widths") {
  DynamicGaussian g = makeDynamic(2);
  g.riseWidth = 0.f;
  CHECK_THROWS_AS(temporalOpacityAt(g, 0.0), ValidationError);
}

TEST_CASE("scene validation catches structural violations") {
  GaussianScene scene = sceneWithFrames(9, 2);
  scene.statics.push_back(makeStatic({0, 0, 0}, {0, 0, 0}));
  scene.statics[0].rotation = {1, 0, 0, 0};
  CHECK_NOTHROW(scene.validate());

  SUBCASE("non-unit rotation") {
    scene.statics[0].rotation = {0.5f, 0, 0, 0};
    CHECK_THROWS_AS(scene.validate(), ValidationError);
  }
  SUBCASE("opacity out of range") {
    scene.statics[0].opacity = 1.5f;
    CHECK_THROWS_AS(scene.validate(), ValidationError);
  }
  SUBCASE("SH length mismatch") {
    scene.statics[0].sh.resize(9);
    CHECK_THROWS_AS(scene.validate(), ValidationError);
  }
  SUBCASE("keyframe row mismatch") {
    scene.dynamics.push_back(makeDynamic(3));  // scene has 5 keyframes
    CHECK_THROWS_AS(scene.validate(), ValidationError);
  }
  SUBCASE("window start exceeds end") {
    DynamicGaussian d = makeDynamic(scene.keyframeCount());
    d.plateauStart = 5.f;
    d.plateauEnd = 2.f;
    scene.dynamics.push_back(d);
    CHECK_THROWS_AS(scene.validate(), ValidationError);
  }
}
