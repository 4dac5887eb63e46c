#pragma once

#include <cstdint>
#include <string>

#include "container.hpp"
#include "quant.hpp"
#include "scene.hpp"

namespace g4dc {

// Encoder configuration; presets 1..6 span the compression/quality range
// (1 = smallest, 6 = highest fidelity). The two pruning weights fall
// strictly from level 1 to 6 while the codebook size grows.
struct EncodeConfig {
  int level = 3;
  double lambdaGsPrune = 0.01;
  double lambdaShPrune = 0.1;
  double lambdaR = 0.01;
  uint32_t codebookSize = 64;
  int waveletLevels = 1;  // 0 disables the trajectory transform
  int keepDetailLevels = 0;
  OpacityPolicy policy;
  int opacityBits = 8;
  int coeffBits = 16;
  int ecvqIterations = 30;
  uint64_t seed = 42;
  int probeSize = 64;
  double lambdaDssim = 0.2;
  double attrLambda[kAttrGroupCount] = {1, 1, 1, 1, 1, 1};

  static EncodeConfig preset(int level);
  // Parses {"level": n, ...} with per-field overrides; unknown keys are
  // rejected. Throws ValidationError.
  static EncodeConfig fromJson(const std::string& json);
  std::string toJson() const;
  void validate() const;
};

struct EncodeOutcome {
  CompressedContainer container;
  RateReport report;
  size_t staticPruned = 0;
  size_t dynamicPruned = 0;
  size_t shDegreesPruned = 0;
};

// Full pipeline: greedy pruning, SH masking, ECVQ, trajectory transform,
// selective scalar quantization, entropy coding, container assembly.
// Deterministic given (scene, config).
EncodeOutcome encodeScene(const GaussianScene& scene, const EncodeConfig& config);

// Reconstructs the quantized scene. The encoder's post-quantization model is
// by construction the decode of its own container, so decode(encode(s)) is
// bit-identical to it.
GaussianScene decodeScene(const CompressedContainer& container);

// Keep flags for the original Gaussians (statics then dynamics), from the
// serialized mask section.
std::vector<uint8_t> gaussianKeepBits(const CompressedContainer& container);

}  // namespace g4dc
