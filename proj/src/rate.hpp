#pragma once

#include <vector>

#include "image.hpp"
#include "quant.hpp"
#include "scene.hpp"

namespace g4dc {

double l1Loss(const Image& a, const Image& b);

// Mean SSIM over pixels and channels, 11x11 Gaussian window (sigma 1.5),
// k1 = 0.01, k2 = 0.03, dynamic range 1. Borders use symmetric extension.
double ssim(const Image& a, const Image& b);

// (1 - lambdaDssim) * L1 + lambdaDssim * (1 - SSIM).
double distortionLoss(const Image& rendered, const Image& truth, double lambdaDssim);

// One coded attribute stream plus its entropy model.
struct RateStream {
  const std::vector<uint32_t>* indices = nullptr;
  const EcvqCodebook* codebook = nullptr;
  double lambdaDivisor = 1.0;
};

// Sum over streams of (-log2 p of each chosen codeword) / lambdaDivisor,
// normalized by gaussianCount.
double entropyLoss(const std::vector<RateStream>& streams, size_t gaussianCount);

struct VqStream {
  const std::vector<double>* samples = nullptr;  // sampleCount * dim, flattened
  const std::vector<uint32_t>* indices = nullptr;
  const EcvqCodebook* codebook = nullptr;
};

// Mean squared quantization error summed over streams, normalized by
// gaussianCount.
double vqLoss(const std::vector<VqStream>& streams, size_t gaussianCount);

// Motion plausibility penalty: mean squared drift length over statics plus
// mean squared second differences of dynamic keyframe positions and of
// consecutive geodesic rotation steps.
double regLoss(const GaussianScene& scene);

struct LossWeights {
  double lambdaR = 1.0;
  double lambdaReg = 1.0;
  double lambdaDssim = 0.2;
  double lambdaGsPrune = 0.0;
  double lambdaShPrune = 0.0;
};

struct LossBreakdown {
  double dist = 0, rate = 0, reg = 0, total = 0;
  double gsPrune = 0, shPrune = 0, entropy = 0, vq = 0;
  LossWeights weights;
};

// rate = lambdaGsPrune * gsPrune + lambdaShPrune * shPrune + entropy + vq;
// total = dist + lambdaR * rate + lambdaReg * reg. Throws ValidationError on
// non-finite sub-terms.
LossBreakdown totalLoss(double dist, double gsPrune, double shPrune, double entropy,
                        double vq, double reg, const LossWeights& weights);

}  // namespace g4dc
