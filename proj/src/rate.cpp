#include "rate.hpp"

#include <cmath>

#include "error.hpp"

namespace g4dc {

namespace {

void requireSameShape(const Image& a, const Image& b) {
  if (!a.sameShape(b)) throw ValidationError("image shape mismatch");
  if (a.width <= 0 || a.height <= 0) throw ValidationError("empty image");
}

std::vector<double> gaussianKernel11() {
  constexpr int kRadius = 5;
  constexpr double kSigma = 1.5;
  std::vector<double> k(2 * kRadius + 1);
  double sum = 0;
  for (int i = -kRadius; i <= kRadius; ++i) {
    k[i + kRadius] = std::exp(-0.5 * i * i / (kSigma * kSigma));
    sum += k[i + kRadius];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable convolution with symmetric border extension, one channel.
void blur(const std::vector<double>& src, int w, int h, const std::vector<double>& kernel,
          std::vector<double>& tmp, std::vector<double>& dst) {
  const int radius = static_cast<int>(kernel.size()) / 2;
  auto reflect = [](int i, int n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
    return i;
  };
  tmp.resize(src.size());
  dst.resize(src.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0;
      for (int i = -radius; i <= radius; ++i)
        s += kernel[i + radius] * src[static_cast<size_t>(y) * w + reflect(x + i, w)];
      tmp[static_cast<size_t>(y) * w + x] = s;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0;
      for (int i = -radius; i <= radius; ++i)
        s += kernel[i + radius] * tmp[static_cast<size_t>(reflect(y + i, h)) * w + x];
      dst[static_cast<size_t>(y) * w + x] = s;
    }
}

}  // namespace

double l1Loss(const Image& a, const Image& b) {
  requireSameShape(a, b);
  double sum = 0;
  for (size_t i = 0; i < a.px.size(); ++i)
    sum += std::abs(static_cast<double>(a.px[i]) - b.px[i]);
  return sum / static_cast<double>(a.px.size());
}

double ssim(const Image& a, const Image& b) {
  requireSameShape(a, b);
  constexpr double kC1 = 0.01 * 0.01;
  constexpr double kC2 = 0.03 * 0.03;
  static const std::vector<double> kernel = gaussianKernel11();

  const int w = a.width, h = a.height;
  const size_t n = static_cast<size_t>(w) * h;
  std::vector<double> ca(n), cb(n), tmp, mua, mub, saa, sbb, sab, buf(n);
  double total = 0;
  for (int c = 0; c < 3; ++c) {
    for (size_t i = 0; i < n; ++i) {
      ca[i] = a.px[i * 3 + c];
      cb[i] = b.px[i * 3 + c];
    }
    blur(ca, w, h, kernel, tmp, mua);
    blur(cb, w, h, kernel, tmp, mub);
    for (size_t i = 0; i < n; ++i) buf[i] = ca[i] * ca[i];
    blur(buf, w, h, kernel, tmp, saa);
    for (size_t i = 0; i < n; ++i) buf[i] = cb[i] * cb[i];
    blur(buf, w, h, kernel, tmp, sbb);
    for (size_t i = 0; i < n; ++i) buf[i] = ca[i] * cb[i];
    blur(buf, w, h, kernel, tmp, sab);
    double channelSum = 0;
    for (size_t i = 0; i < n; ++i) {
      double va = saa[i] - mua[i] * mua[i];
      double vb = sbb[i] - mub[i] * mub[i];
      double cov = sab[i] - mua[i] * mub[i];
      double num = (2 * mua[i] * mub[i] + kC1) * (2 * cov + kC2);
      double den = (mua[i] * mua[i] + mub[i] * mub[i] + kC1) * (va + vb + kC2);
      channelSum += num / den;
    }
    total += channelSum / static_cast<double>(n);
  }
  return total / 3.0;
}

double distortionLoss(const Image& rendered, const Image& truth, double lambdaDssim) {
  requireSameShape(rendered, truth);
  double l1 = l1Loss(rendered, truth);
  if (lambdaDssim == 0.0) return l1;
  return (1.0 - lambdaDssim) * l1 + lambdaDssim * (1.0 - ssim(rendered, truth));
}

double entropyLoss(const std::vector<RateStream>& streams, size_t gaussianCount) {
  if (gaussianCount == 0) throw ValidationError("entropy loss: gaussian count is zero");
  double sum = 0;
  for (const RateStream& s : streams) {
    if (!s.indices || !s.codebook) throw ValidationError("entropy loss: missing stream data");
    if (!(s.lambdaDivisor > 0)) throw ValidationError("entropy loss: lambda must be positive");
    for (uint32_t idx : *s.indices) {
      if (idx >= s.codebook->count())
        throw ValidationError("entropy loss: index outside codebook");
      sum += -std::log2(s.codebook->prob[idx]) / s.lambdaDivisor;
    }
  }
  return sum / static_cast<double>(gaussianCount);
}

double vqLoss(const std::vector<VqStream>& streams, size_t gaussianCount) {
  if (gaussianCount == 0) throw ValidationError("vq loss: gaussian count is zero");
  double sum = 0;
  for (const VqStream& s : streams) {
    if (!s.samples || !s.indices || !s.codebook)
      throw ValidationError("vq loss: missing stream data");
    size_t dim = s.codebook->dim;
    if (s.samples->size() != s.indices->size() * dim)
      throw ValidationError("vq loss: samples and indices misaligned");
    for (size_t i = 0; i < s.indices->size(); ++i) {
      uint32_t idx = (*s.indices)[i];
      if (idx >= s.codebook->count()) throw ValidationError("vq loss: index outside codebook");
      const float* c = s.codebook->word(idx);
      for (size_t k = 0; k < dim; ++k) {
        double diff = (*s.samples)[i * dim + k] - static_cast<double>(c[k]);
        sum += diff * diff;
      }
    }
  }
  return sum / static_cast<double>(gaussianCount);
}

double regLoss(const GaussianScene& scene) {
  double total = 0;
  if (!scene.statics.empty()) {
    double sum = 0;
    for (const auto& g : scene.statics) sum += Vec3(g.drift).norm2();
    total += sum / static_cast<double>(scene.statics.size());
  }
  if (!scene.dynamics.empty()) {
    double posSum = 0, rotSum = 0;
    size_t posTerms = 0, rotTerms = 0;
    for (const auto& g : scene.dynamics) {
      const size_t kf = g.keyPositions.size();
      for (size_t i = 1; i + 1 < kf; ++i) {
        Vec3 d2 = Vec3(g.keyPositions[i + 1]) - 2.0 * Vec3(g.keyPositions[i]) +
                  Vec3(g.keyPositions[i - 1]);
        posSum += d2.norm2();
        ++posTerms;
      }
      // Second difference of consecutive geodesic step angles.
      std::vector<double> steps;
      for (size_t i = 0; i + 1 < g.keyRotations.size(); ++i) {
        double d = std::abs(Quat(g.keyRotations[i]).dot(Quat(g.keyRotations[i + 1])));
        d = std::min(d, 1.0);
        steps.push_back(2.0 * std::acos(d));
      }
      for (size_t i = 1; i < steps.size(); ++i) {
        double diff = steps[i] - steps[i - 1];
        rotSum += diff * diff;
        ++rotTerms;
      }
    }
    if (posTerms > 0) total += posSum / static_cast<double>(posTerms);
    if (rotTerms > 0) total += rotSum / static_cast<double>(rotTerms);
  }
  return total;
}

LossBreakdown totalLoss(double dist, double gsPrune, double shPrune, double entropy,
                        double vq, double reg, const LossWeights& weights) {
  for (double v : {dist, gsPrune, shPrune, entropy, vq, reg})
    if (!std::isfinite(v)) throw ValidationError("total loss: non-finite sub-term");
  LossBreakdown b;
  b.weights = weights;
  b.dist = dist;
  b.gsPrune = gsPrune;
  b.shPrune = shPrune;
  b.entropy = entropy;
  b.vq = vq;
  b.reg = reg;
  b.rate = weights.lambdaGsPrune * gsPrune + weights.lambdaShPrune * shPrune + entropy + vq;
  b.total = dist + weights.lambdaR * b.rate + weights.lambdaReg * reg;
  return b;
}

}  // namespace g4dc
