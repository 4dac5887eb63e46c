#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "scene.hpp"

namespace g4dc {

// ---------------------------------------------------------------------------
// Pruning masks

// Keep/drop decision per Gaussian. soft is a (0,1) keep score, hard the
// binarized decision; hard[i] == 1 exactly when soft[i] > threshold.
struct PruneMask {
  std::vector<float> soft;
  std::vector<uint8_t> hard;
  float threshold = 0.01f;

  size_t keptCount() const;
};

// Per-Gaussian, per-SH-degree keep masks for degrees 1..maxDegree.
struct ShMask {
  int maxDegree = 3;
  std::vector<std::array<float, 3>> soft;    // [gaussian][degree-1]
  std::vector<std::array<uint8_t, 3>> hard;  // same indexing
  float threshold = 0.5f;
};

// Mean soft keep score; the Gaussian-count pruning pressure term.
double gsPruneLoss(const PruneMask& mask);

// Degree-weighted mean soft keep score: weight (2l+1)/((k+1)^2 - 1) for
// degree l, so the weights sum to 1 at k = 3.
double shPruneLoss(const ShMask& mask, int maxDegree);

// Hard thresholding: 1 iff soft > threshold (strict).
inline int binarize(double soft, double threshold) { return soft > threshold ? 1 : 0; }

// ---------------------------------------------------------------------------
// Entropy-constrained vector quantization

enum class AttrGroup : uint8_t { Scale = 0, Rotation = 1, Dc = 2, Sh1 = 3, Sh2 = 4, Sh3 = 5 };
enum class Component : uint8_t { Static = 0, Dynamic = 1 };

inline constexpr int kAttrGroupCount = 6;
const char* attrGroupName(AttrGroup a);
uint32_t attrGroupDim(AttrGroup a);

inline constexpr uint32_t kProbScale = 1u << 16;  // probabilities as 16-bit counts

struct EcvqCodebook {
  AttrGroup attr = AttrGroup::Scale;
  Component comp = Component::Static;
  uint32_t dim = 0;
  std::vector<float> codewords;    // count() * dim, row-major
  std::vector<uint32_t> counts;    // sum == kProbScale
  std::vector<double> prob;        // counts / kProbScale
  double lambda = 0.0;             // rate weight used at codeword selection

  size_t count() const { return prob.size(); }
  const float* word(size_t j) const { return codewords.data() + j * dim; }
  void refreshProb();
};

struct EcvqResult {
  uint32_t index = 0;
  double rateBits = 0.0;    // -log2 p of the chosen codeword
  double distortion = 0.0;  // squared Euclidean distance
};

// Codeword selection minimizing d(x, c_j) + lambda * (-log2 p_j); ties break
// to the lowest index. x must have cb.dim components.
EcvqResult ecvqEncode(const double* x, size_t dim, const EcvqCodebook& cb);

struct EcvqTrainOptions {
  uint32_t codebookSize = 256;
  double lambda = 0.0;
  int iterations = 30;
  uint64_t seed = 0;
  bool unitNormCodewords = false;  // project codewords to the unit sphere (rotations)
};

// Alternating assignment / centroid / probability optimization over flattened
// samples (sampleCount x dim). The objective mean[d + lambda * rate] is
// non-increasing across iterations; training stops as soon as it fails to
// improve. Deterministic for a fixed seed.
EcvqCodebook ecvqTrain(const std::vector<double>& samples, size_t dim,
                       const EcvqTrainOptions& options,
                       std::vector<double>* objectiveHistory = nullptr);

// ---------------------------------------------------------------------------
// Scalar quantization

struct ScalarQuantizer {
  int bits = 8;
  double lo = 0.0;
  double hi = 1.0;
};

// Uniform mid-rise quantization with 2^bits cells over [lo, hi]; the cell
// index rounds half away from zero. Input is clamped into range.
uint32_t scalarQuantize(double x, const ScalarQuantizer& q);
float scalarDequantize(uint32_t code, const ScalarQuantizer& q);

// Which opacity-related attributes pass through the scalar quantizer. Edge
// widths stay raw under every preset; they are only quantizable through the
// explicit ablation policy.
struct OpacityPolicy {
  bool alphaStatic = true;
  bool alphaDynamic = true;
  bool windowCenters = true;
  bool edgeWidths = false;

  uint8_t toBits() const {
    return static_cast<uint8_t>((alphaStatic ? 1 : 0) | (alphaDynamic ? 2 : 0) |
                                (windowCenters ? 4 : 0) | (edgeWidths ? 8 : 0));
  }
  static OpacityPolicy fromBits(uint8_t b) {
    OpacityPolicy p;
    p.alphaStatic = b & 1;
    p.alphaDynamic = b & 2;
    p.windowCenters = b & 4;
    p.edgeWidths = b & 8;
    return p;
  }
};

// ---------------------------------------------------------------------------
// Greedy rate-distortion pruning

struct PruneOracles {
  // Probe-set distortion of a candidate scene against the reference renders.
  std::function<double(const GaussianScene&)> distortion;
  // Visibility-weighted importance per Gaussian, statics first then dynamics.
  std::function<std::vector<double>(const GaussianScene&)> importance;
};

struct PruneOutcome {
  PruneMask mask;     // over statics followed by dynamics
  ShMask shMask;      // same indexing; entries for pruned Gaussians keep hard = 1
  size_t staticPruned = 0;
  size_t dynamicPruned = 0;
  size_t shDegreesPruned = 0;
  GaussianScene prunedScene;
};

// Greedy pruning in ascending-importance order: Gaussians first, then SH
// degrees of the survivors. A prefix is accepted while the probe distortion
// increase stays strictly below the rate credit lambda * (removed soft mass).
// Deterministic given (scene, lambdas); pruned counts are non-decreasing in
// the lambdas.
PruneOutcome rdGreedyPrune(const GaussianScene& scene, double lambdaGsPrune,
                           double lambdaShPrune, const PruneOracles& oracles);

// Applies masks: drops non-kept Gaussians and zeroes masked SH degrees.
GaussianScene applyMasks(const GaussianScene& scene, const PruneMask& mask,
                         const ShMask& shMask);

}  // namespace g4dc
