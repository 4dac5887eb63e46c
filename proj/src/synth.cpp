#include "synth.hpp"

#include <cmath>

#include "error.hpp"

namespace g4dc {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kShDc = 0.28209479177387814;

Vec3f dcForColor(double r, double g, double b) {
  return Vec3f{static_cast<float>((r - 0.5) / kShDc), static_cast<float>((g - 0.5) / kShDc),
               static_cast<float>((b - 0.5) / kShDc)};
}

std::vector<Vec3f> makeSh(Rng& rng, int degree, bool withHighBands) {
  std::vector<Vec3f> sh(shCoeffCount(degree), Vec3f{0, 0, 0});
  double r = rng.range(0.1, 0.9), g = rng.range(0.1, 0.9), b = rng.range(0.1, 0.9);
  sh[0] = dcForColor(r, g, b);
  if (withHighBands) {
    for (int l = 1; l <= degree; ++l) {
      double sigma = 0.18 * std::pow(0.5, l - 1);
      for (int i = l * l; i < (l + 1) * (l + 1); ++i)
        sh[i] = Vec3f{static_cast<float>(rng.normal() * sigma),
                      static_cast<float>(rng.normal() * sigma),
                      static_cast<float>(rng.normal() * sigma)};
    }
  }
  return sh;
}

Quatf randomUnitQuat(Rng& rng) {
  double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
  double a = std::sqrt(1 - u1), b = std::sqrt(u1);
  return Quat{a * std::sin(2 * kPi * u2), a * std::cos(2 * kPi * u2),
              b * std::sin(2 * kPi * u3), b * std::cos(2 * kPi * u3)}
      .canonical()
      .toFloat();
}

}  // namespace

GaussianScene generateSyntheticScene(const SynthConfig& cfg, uint64_t seed) {
  if (cfg.frames < 2) throw ValidationError("synthetic scene needs at least 2 frames");
  if (cfg.keyframeInterval < 1) throw ValidationError("keyframe interval must be >= 1");
  if (cfg.shDegree < 0 || cfg.shDegree > kMaxShDegree)
    throw ValidationError("SH degree outside [0, 3]");
  if (cfg.clutterFraction < 0 || cfg.clutterFraction > 1 || cfg.eventFraction < 0 ||
      cfg.eventFraction > 1)
    throw ValidationError("fractions must be in [0, 1]");

  GaussianScene scene;
  scene.maxShDegree = cfg.shDegree;
  scene.keyframeInterval = cfg.keyframeInterval;
  scene.timestamps.resize(cfg.frames);
  for (uint32_t i = 0; i < cfg.frames; ++i) scene.timestamps[i] = static_cast<float>(i);
  scene.duration = static_cast<float>(cfg.frames - 1);
  const size_t kf = scene.keyframeCount();
  if (cfg.dynamicCount > 0 && kf < 2)
    throw ValidationError("dynamic Gaussians need at least 2 keyframes");

  Rng rng(seed);
  const double L = scene.duration;

  // --- statics -------------------------------------------------------------
  const uint32_t clutterCount =
      static_cast<uint32_t>(std::floor(cfg.staticCount * cfg.clutterFraction));
  for (uint32_t i = 0; i < cfg.staticCount; ++i) {
    StaticGaussian g;
    bool clutter = i < clutterCount;
    g.pivot = Vec3f{static_cast<float>(rng.range(-3.5, 3.5)),
                    static_cast<float>(rng.range(-3.5, 3.5)),
                    static_cast<float>(rng.range(0.0, 2.5))};
    if (clutter) {
      double s = rng.range(0.015, 0.06);
      g.scale = Vec3f{static_cast<float>(s * rng.range(0.7, 1.4)),
                      static_cast<float>(s * rng.range(0.7, 1.4)),
                      static_cast<float>(s * rng.range(0.7, 1.4))};
      // A slice of the clutter is sub-threshold dust; the rest spans faint
      // to barely-visible, so pruning bites progressively across lambdas.
      double u = rng.uniform();
      if (u < 0.12)
        g.opacity = static_cast<float>(rng.range(1e-4, 2e-4));
      else
        g.opacity = static_cast<float>(rng.range(0.006, 0.15));
      g.drift = Vec3f{0, 0, 0};
      g.sh = makeSh(rng, cfg.shDegree, rng.uniform() < 0.3);
    } else {
      double s = rng.range(0.08, 0.35);
      g.scale = Vec3f{static_cast<float>(s * rng.range(0.5, 1.8)),
                      static_cast<float>(s * rng.range(0.5, 1.8)),
                      static_cast<float>(s * rng.range(0.5, 1.8))};
      g.opacity = static_cast<float>(rng.range(0.55, 1.0));
      bool drifts = rng.uniform() < 0.25;
      g.drift = drifts ? Vec3f{static_cast<float>(rng.range(-0.25, 0.25)),
                               static_cast<float>(rng.range(-0.25, 0.25)),
                               static_cast<float>(rng.range(-0.1, 0.1))}
                       : Vec3f{0, 0, 0};
      g.sh = makeSh(rng, cfg.shDegree, rng.uniform() < 0.6);
    }
    g.rotation = randomUnitQuat(rng);
    scene.statics.push_back(std::move(g));
  }

  // --- dynamics ------------------------------------------------------------
  const uint32_t eventCount =
      static_cast<uint32_t>(std::floor(cfg.dynamicCount * cfg.eventFraction));
  for (uint32_t i = 0; i < cfg.dynamicCount; ++i) {
    DynamicGaussian g;
    bool event = i < eventCount;

    Vec3 center{rng.range(-2.2, 2.2), rng.range(-2.2, 2.2), rng.range(0.4, 2.0)};
    g.sh = makeSh(rng, cfg.shDegree, rng.uniform() < 0.6);

    if (event) {
      // Appearance/disappearance events clustered mid-clip: large solid
      // movers with sharp window edges, plus occasional slow fades that
      // stretch the observed width range.
      double s = rng.range(0.3, 0.65);
      g.scale = Vec3f{static_cast<float>(s * rng.range(0.7, 1.4)),
                      static_cast<float>(s * rng.range(0.7, 1.4)),
                      static_cast<float>(s * rng.range(0.7, 1.4))};
      g.baseOpacity = static_cast<float>(rng.range(0.85, 1.0));
      bool slowFade = rng.uniform() < 0.1;
      if (slowFade) {
        // Long fades widen the observed width range without adding much
        // edge-shape sensitivity of their own.
        g.riseWidth = static_cast<float>(rng.range(12.0, 25.0));
        g.fallWidth = static_cast<float>(rng.range(12.0, 25.0));
        g.plateauStart = static_cast<float>(rng.range(0.34, 0.40) * L);
        g.plateauEnd = static_cast<float>(rng.range(0.60, 0.66) * L);
      } else {
        // Sharp pops whose rise/fall tails straddle the mid-clip sample
        // times, so distortion of the window shape is observable.
        double riseB = rng.range(0.2, 0.6);
        double fallB = rng.range(0.2, 0.6);
        g.riseWidth = static_cast<float>(riseB);
        g.fallWidth = static_cast<float>(fallB);
        g.plateauStart = static_cast<float>(0.37 * L + rng.range(0.8, 2.2) * riseB);
        g.plateauEnd = static_cast<float>(0.63 * L - rng.range(0.8, 2.2) * fallB);
        // Short clips can cross the window; collapse to a momentary pop.
        if (g.plateauEnd < g.plateauStart) g.plateauEnd = g.plateauStart;
      }
    } else {
      double s = rng.range(0.06, 0.28);
      g.scale = Vec3f{static_cast<float>(s * rng.range(0.6, 1.6)),
                      static_cast<float>(s * rng.range(0.6, 1.6)),
                      static_cast<float>(s * rng.range(0.6, 1.6))};
      g.baseOpacity = static_cast<float>(rng.range(0.6, 1.0));
      g.plateauStart = 0.f;
      g.plateauEnd = scene.duration;
      g.riseWidth = static_cast<float>(rng.range(1.0, 4.0));
      g.fallWidth = static_cast<float>(rng.range(1.0, 4.0));
    }

    // Smooth trajectory: planar orbit plus a vertical bob for orbiters,
    // a gentle drift with a sinusoidal wobble for event movers.
    double radius = rng.range(0.5, 1.9);
    double cycles = rng.range(0.35, 1.0) * cfg.maxOrbitCycles;
    double omega = 2 * kPi * cycles / L;
    double phase = rng.range(0.0, 2 * kPi);
    double bobAmp = rng.range(0.05, 0.3);
    double bobPhase = rng.range(0.0, 2 * kPi);
    Vec3 velocity{rng.range(-1.5, 1.5) / L, rng.range(-1.5, 1.5) / L,
                  rng.range(-0.6, 0.6) / L};

    g.keyPositions.resize(kf);
    for (size_t n = 0; n < kf; ++n) {
      double t = scene.keyframeTime(n);
      Vec3 p;
      if (event) {
        p = center + velocity * t +
            Vec3{0, 0, bobAmp * std::sin(omega * t + bobPhase)};
      } else {
        p = center + Vec3{radius * std::cos(omega * t + phase),
                          radius * std::sin(omega * t + phase),
                          bobAmp * std::sin(0.5 * omega * t + bobPhase)};
      }
      g.keyPositions[n] = p.toFloat();
    }

    // Slow spin about a fixed axis; slerp between keys follows it closely.
    Vec3 axis{rng.normal(), rng.normal(), rng.normal()};
    if (axis.norm() < 1e-6) axis = Vec3{0, 0, 1};
    double spinRate = rng.range(-kPi, kPi) / L;
    double spinPhase = rng.range(0.0, 2 * kPi);
    g.keyRotations.resize(kf);
    for (size_t n = 0; n < kf; ++n) {
      double t = scene.keyframeTime(n);
      g.keyRotations[n] =
          Quat::axisAngle(axis, spinPhase + spinRate * t).canonical().toFloat();
    }
    scene.dynamics.push_back(std::move(g));
  }

  scene.validate();
  return scene;
}

}  // namespace g4dc
