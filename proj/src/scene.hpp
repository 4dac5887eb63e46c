#pragma once

#include <cstdint>
#include <vector>

#include "math.hpp"

namespace g4dc {

inline constexpr int kMaxShDegree = 3;
inline constexpr double kUnitQuatTolerance = 1e-6;

inline int shCoeffCount(int degree) { return (degree + 1) * (degree + 1); }

// Scene element with constant shape/color and linear motion: the position at
// time t is pivot + (t / duration) * drift.
struct StaticGaussian {
  Vec3f pivot;   // position at t = 0
  Vec3f drift;   // total displacement over the full duration
  Vec3f scale;   // componentwise > 0
  Quatf rotation;
  float opacity = 1.f;          // [0, 1]
  std::vector<Vec3f> sh;        // (k+1)^2 RGB triples, sh[0] = DC band
};

// Scene element sampled at uniform keyframes; positions are interpolated with
// a cubic Hermite spline, rotations with slerp, and visibility follows a
// plateau window with Gaussian rise/fall edges.
struct DynamicGaussian {
  std::vector<Vec3f> keyPositions;   // one row per keyframe
  std::vector<Quatf> keyRotations;   // unit, one per keyframe
  Vec3f scale;
  float baseOpacity = 1.f;
  float plateauStart = 0.f;   // window start center
  float plateauEnd = 0.f;     // window end center, >= plateauStart
  float riseWidth = 1.f;      // edge width before the window, > 0
  float fallWidth = 1.f;      // edge width after the window, > 0
  std::vector<Vec3f> sh;
};

struct GaussianScene {
  std::vector<StaticGaussian> statics;
  std::vector<DynamicGaussian> dynamics;
  float duration = 0.f;              // last timestamp
  uint32_t keyframeInterval = 1;     // keyframes sit at t = n * interval
  std::vector<float> timestamps;     // ascending frame times, starts at 0
  int maxShDegree = kMaxShDegree;

  size_t keyframeCount() const;
  double keyframeTime(size_t n) const { return static_cast<double>(n) * keyframeInterval; }
  size_t totalGaussians() const { return statics.size() + dynamics.size(); }

  // Throws ValidationError on any violated structural invariant.
  void validate() const;
};

// Position of a static Gaussian at time t in [0, duration].
Vec3 staticPositionAt(const StaticGaussian& g, double t, double duration);

// Covariance R * S * S^T * R^T from a positive scale vector and a unit
// quaternion. Throws ValidationError if the quaternion norm is off by more
// than the unit tolerance or any scale component is non-positive.
Mat3 covarianceOf(const Vec3& scale, const Quat& rotation);

// Cubic Hermite interpolation over uniformly spaced keys with
// central-difference tangents (one-sided at the ends). Times beyond the last
// key clamp to it. Throws ValidationError with fewer than 2 keys.
Vec3 hermiteInterpolate(const std::vector<Vec3f>& keys, double spacing, double t);

Vec3 dynamicPositionAt(const DynamicGaussian& g, double t, const GaussianScene& scene);

Quat dynamicRotationAt(const DynamicGaussian& g, double t, const GaussianScene& scene,
                       bool* antipodalWarning = nullptr);

// Window weight in [0, 1]: 1 inside [plateauStart, plateauEnd], Gaussian
// falloff with riseWidth / fallWidth outside. Effective opacity is
// baseOpacity times this.
double temporalOpacityAt(const DynamicGaussian& g, double t);

}  // namespace g4dc
