#include "scene.hpp"

#include <cmath>
#include <string>

#include "error.hpp"

namespace g4dc {

namespace {

void requireUnit(const Quatf& q, const char* what) {
  double n = Quat(q).norm();
  if (std::abs(n - 1.0) > kUnitQuatTolerance)
    throw ValidationError(std::string(what) + ": quaternion norm " + std::to_string(n) +
                          " is not unit");
}

void requirePositiveScale(const Vec3f& s, const char* what) {
  if (!(s.x > 0.f && s.y > 0.f && s.z > 0.f))
    throw ValidationError(std::string(what) + ": scale components must be positive");
}

void requireOpacity(float a, const char* what) {
  if (!(a >= 0.f && a <= 1.f))
    throw ValidationError(std::string(what) + ": opacity outside [0, 1]");
}

}  // namespace

size_t GaussianScene::keyframeCount() const {
  if (timestamps.empty()) return 0;
  double maxT = timestamps.back();
  return static_cast<size_t>(std::floor(maxT / keyframeInterval + 1e-9)) + 1;
}

void GaussianScene::validate() const {
  if (keyframeInterval == 0) throw ValidationError("keyframe interval must be positive");
  if (maxShDegree < 0 || maxShDegree > kMaxShDegree)
    throw ValidationError("SH degree outside [0, 3]");
  if (!timestamps.empty()) {
    if (timestamps.front() != 0.f)
      throw ValidationError("first timestamp must be 0");
    for (size_t i = 1; i < timestamps.size(); ++i)
      if (!(timestamps[i] > timestamps[i - 1]))
        throw ValidationError("timestamps must be strictly ascending");
    if (std::abs(duration - timestamps.back()) > 1e-6f)
      throw ValidationError("duration must equal the last timestamp");
  } else if (!statics.empty() || !dynamics.empty()) {
    throw ValidationError("non-empty scene requires timestamps");
  }

  const size_t shLen = static_cast<size_t>(shCoeffCount(maxShDegree));
  for (const auto& g : statics) {
    requireUnit(g.rotation, "static");
    requirePositiveScale(g.scale, "static");
    requireOpacity(g.opacity, "static");
    if (g.sh.size() != shLen) throw ValidationError("static: SH coefficient count mismatch");
  }

  const size_t kf = keyframeCount();
  if (!dynamics.empty() && kf < 2)
    throw ValidationError("dynamic Gaussians need at least 2 keyframes");
  for (const auto& g : dynamics) {
    if (g.keyPositions.size() != kf)
      throw ValidationError("dynamic: keyframe position rows != scene keyframe count");
    if (g.keyRotations.size() != kf)
      throw ValidationError("dynamic: keyframe rotation count != scene keyframe count");
    for (const auto& q : g.keyRotations) requireUnit(q, "dynamic keyframe");
    requirePositiveScale(g.scale, "dynamic");
    requireOpacity(g.baseOpacity, "dynamic");
    if (!(g.plateauStart <= g.plateauEnd))
      throw ValidationError("dynamic: window start exceeds window end");
    if (!(g.riseWidth > 0.f && g.fallWidth > 0.f))
      throw ValidationError("dynamic: edge widths must be positive");
    if (g.sh.size() != shLen) throw ValidationError("dynamic: SH coefficient count mismatch");
  }
}

Vec3 staticPositionAt(const StaticGaussian& g, double t, double duration) {
  if (!(duration > 0)) throw ValidationError("duration must be positive");
  if (t < 0 || t > duration)
    throw ValidationError("time " + std::to_string(t) + " outside [0, duration]");
  return Vec3(g.pivot) + (t / duration) * Vec3(g.drift);
}

Mat3 covarianceOf(const Vec3& scale, const Quat& rotation) {
  if (std::abs(rotation.norm() - 1.0) > kUnitQuatTolerance)
    throw ValidationError("covarianceOf: rotation is not unit-norm");
  if (!(scale.x > 0 && scale.y > 0 && scale.z > 0))
    throw ValidationError("covarianceOf: scale components must be positive");
  Mat3 r = quatToMat(rotation);
  Mat3 d = Mat3::diag(scale.x * scale.x, scale.y * scale.y, scale.z * scale.z);
  return r * d * r.transposed();
}

Vec3 hermiteInterpolate(const std::vector<Vec3f>& keys, double spacing, double t) {
  const size_t n = keys.size();
  if (n < 2) throw ValidationError("hermite interpolation needs at least 2 keyframes");
  if (!(spacing > 0)) throw ValidationError("keyframe spacing must be positive");

  double last = spacing * static_cast<double>(n - 1);
  if (t <= 0) return Vec3(keys.front());
  if (t >= last) return Vec3(keys.back());

  size_t seg = static_cast<size_t>(t / spacing);
  if (seg > n - 2) seg = n - 2;
  double u = t / spacing - static_cast<double>(seg);

  auto tangent = [&](size_t i) -> Vec3 {  // scaled by the key spacing
    if (i == 0) return Vec3(keys[1]) - Vec3(keys[0]);
    if (i == n - 1) return Vec3(keys[n - 1]) - Vec3(keys[n - 2]);
    return (Vec3(keys[i + 1]) - Vec3(keys[i - 1])) * 0.5;
  };

  Vec3 p0(keys[seg]), p1(keys[seg + 1]);
  Vec3 m0 = tangent(seg), m1 = tangent(seg + 1);
  double u2 = u * u, u3 = u2 * u;
  double h00 = 2 * u3 - 3 * u2 + 1;
  double h10 = u3 - 2 * u2 + u;
  double h01 = -2 * u3 + 3 * u2;
  double h11 = u3 - u2;
  return p0 * h00 + m0 * h10 + p1 * h01 + m1 * h11;
}

Vec3 dynamicPositionAt(const DynamicGaussian& g, double t, const GaussianScene& scene) {
  if (t < 0 || t > scene.duration + 1e-9)
    throw ValidationError("time outside [0, duration]");
  return hermiteInterpolate(g.keyPositions, scene.keyframeInterval, t);
}

Quat dynamicRotationAt(const DynamicGaussian& g, double t, const GaussianScene& scene,
                       bool* antipodalWarning) {
  const size_t n = g.keyRotations.size();
  if (n < 2) throw ValidationError("slerp needs at least 2 keyframes");
  if (t < 0 || t > scene.duration + 1e-9)
    throw ValidationError("time outside [0, duration]");

  double spacing = scene.keyframeInterval;
  double last = spacing * static_cast<double>(n - 1);
  if (t <= 0) return Quat(g.keyRotations.front()).normalized();
  if (t >= last) return Quat(g.keyRotations.back()).normalized();
  size_t seg = static_cast<size_t>(t / spacing);
  if (seg > n - 2) seg = n - 2;
  double u = t / spacing - static_cast<double>(seg);
  return slerp(Quat(g.keyRotations[seg]).normalized(),
               Quat(g.keyRotations[seg + 1]).normalized(), u, antipodalWarning);
}

double temporalOpacityAt(const DynamicGaussian& g, double t) {
  if (!(g.riseWidth > 0.f && g.fallWidth > 0.f))
    throw ValidationError("temporal opacity edge widths must be positive");
  if (t < g.plateauStart) {
    double d = (t - g.plateauStart) / g.riseWidth;
    return std::exp(-0.5 * d * d);
  }
  if (t > g.plateauEnd) {
    double d = (t - g.plateauEnd) / g.fallWidth;
    return std::exp(-0.5 * d * d);
  }
  return 1.0;
}

}  // namespace g4dc
