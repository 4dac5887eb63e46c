#pragma once

#include <cstdint>

#include "scene.hpp"

namespace g4dc {

// Deterministic desk-scale scene generator. Statics split into solid
// "furniture" and faint clutter; dynamics are smooth orbiters plus
// appear/disappear event movers with plateau visibility windows.
struct SynthConfig {
  uint32_t staticCount = 2000;
  uint32_t dynamicCount = 500;
  uint32_t frames = 64;
  uint32_t keyframeInterval = 2;
  int shDegree = 3;
  double clutterFraction = 0.45;  // of statics
  double eventFraction = 0.30;    // of dynamics; the rest are orbiters
  double maxOrbitCycles = 0.5;    // revolutions over the full duration
};

GaussianScene generateSyntheticScene(const SynthConfig& config, uint64_t seed);

}  // namespace g4dc
