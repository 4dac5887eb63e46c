#include <doctest.h>

#include <cmath>
#include <vector>

#include "error.hpp"
#include "rate.hpp"

using namespace g4dc;

namespace {

Image constantImage(int w, int h, float r, float g, float b) {
  Image img(w, h);
  for (size_t i = 0; i < img.pixelCount(); ++i) {
    img.px[i * 3] = r;
    img.px[i * 3 + 1] = g;
    img.px[i * 3 + 2] = b;
  }
  return img;
}

// Closed-form SSIM of two constant images: variances and covariance vanish.
double constantSsim(double a, double b) {
  const double c1 = 0.01 * 0.01;
  return (2 * a * b + c1) / (a * a + b * b + c1);
}

EcvqCodebook uniformBook(size_t m, uint32_t dim) {
  EcvqCodebook cb;
  cb.dim = dim;
  cb.codewords.assign(m * dim, 0.f);
  for (size_t j = 0; j < m; ++j) cb.codewords[j * dim] = static_cast<float>(j);
  cb.counts.assign(m, kProbScale / static_cast<uint32_t>(m));
  cb.refreshProb();
  return cb;
}

}  // namespace

TEST_CASE("distortion of identical images is zero") {
  Image a = constantImage(32, 32, 0.3f, 0.6f, 0.9f);
  CHECK(distortionLoss(a, a, 0.0) == doctest::Approx(0.0));
  CHECK(distortionLoss(a, a, 0.2) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(ssim(a, a) == doctest::Approx(1.0));
}

TEST_CASE("pure L1 distortion of constant offset") {
  Image truth = constantImage(16, 16, 0.f, 0.f, 0.f);
  Image rendered = constantImage(16, 16, 0.5f, 0.5f, 0.5f);
  CHECK(distortionLoss(rendered, truth, 0.0) == doctest::Approx(0.5));
}

TEST_CASE("mixed loss matches the closed-form SSIM oracle on constant images") {
  Image a = constantImage(24, 24, 0.6f, 0.6f, 0.6f);
  Image b = constantImage(24, 24, 0.5f, 0.5f, 0.5f);
  double wantSsim = constantSsim(0.6, 0.5);
  CHECK(ssim(a, b) == doctest::Approx(wantSsim).epsilon(1e-6));
  double lambda = 0.2;
  double want = (1 - lambda) * 0.1 + lambda * (1 - wantSsim);
  CHECK(distortionLoss(a, b, lambda) == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("distortion is symmetric at lambda 0 and 1") {
  Rng rng(15);
  Image a(16, 16), b(16, 16);
  for (size_t i = 0; i < a.px.size(); ++i) {
    a.px[i] = static_cast<float>(rng.uniform());
    b.px[i] = static_cast<float>(rng.uniform());
  }
  CHECK(distortionLoss(a, b, 0.0) == doctest::Approx(distortionLoss(b, a, 0.0)));
  CHECK(distortionLoss(a, b, 1.0) == doctest::Approx(distortionLoss(b, a, 1.0)).epsilon(1e-12));
}

TEST_CASE("distortion rejects shape mismatches") {
  Image a(8, 8), b(8, 9);
  CHECK_THROWS_AS(distortionLoss(a, b, 0.2), ValidationError);
}

TEST_CASE("entropy loss: uniform 256-codeword streams cost 8 bits per symbol") {
  EcvqCodebook cb = uniformBook(256, 1);
  std::vector<uint32_t> idx(100);
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<uint32_t>(i % 256);
  std::vector<RateStream> streams{{&idx, &cb, 1.0}};
  CHECK(entropyLoss(streams, idx.size()) == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("entropy loss: certain symbols cost zero bits") {
  EcvqCodebook cb;
  cb.dim = 1;
  cb.codewords = {0.f};
  cb.counts = {kProbScale};
  cb.refreshProb();
  std::vector<uint32_t> idx(50, 0);
  std::vector<RateStream> streams{{&idx, &cb, 1.0}};
  CHECK(entropyLoss(streams, idx.size()) == doctest::Approx(0.0));
}

TEST_CASE("entropy loss equals empirical entropy on a frequency-matched stream") {
  // Probabilities 1/2, 1/4, 1/8, 1/8 with a stream matching them exactly.
  EcvqCodebook cb;
  cb.dim = 1;
  cb.codewords = {0.f, 1.f, 2.f, 3.f};
  cb.counts = {kProbScale / 2, kProbScale / 4, kProbScale / 8, kProbScale / 8};
  cb.refreshProb();
  std::vector<uint32_t> idx;
  for (int i = 0; i < 4; ++i) idx.push_back(0);
  for (int i = 0; i < 2; ++i) idx.push_back(1);
  idx.push_back(2);
  idx.push_back(3);
  std::vector<RateStream> streams{{&idx, &cb, 1.0}};
  double want = 0.5 * 1 + 0.25 * 2 + 0.125 * 3 + 0.125 * 3;  // = 1.75 bits
  CHECK(entropyLoss(streams, idx.size()) == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("entropy loss divides per-stream rates by the lambda divisor") {
  EcvqCodebook cb = uniformBook(4, 1);
  std::vector<uint32_t> idx{0, 1, 2, 3};
  std::vector<RateStream> streams{{&idx, &cb, 2.0}};
  CHECK(entropyLoss(streams, 4) == doctest::Approx(1.0));  // 2 bits / 2
}

TEST_CASE("entropy loss rejects out-of-range indices") {
  EcvqCodebook cb = uniformBook(4, 1);
  std::vector<uint32_t> idx{0, 7};
  std::vector<RateStream> streams{{&idx, &cb, 1.0}};
  CHECK_THROWS_AS(entropyLoss(streams, 2), ValidationError);
}

TEST_CASE("vq loss: exact codewords give zero, one squared distance otherwise") {
  EcvqCodebook cb;
  cb.dim = 2;
  cb.codewords = {0.f, 0.f, 3.f, 4.f};
  cb.counts = {kProbScale / 2, kProbScale / 2};
  cb.refreshProb();
  std::vector<double> samples{0, 0, 3, 4};
  std::vector<uint32_t> idx{0, 1};
  std::vector<VqStream> streams{{&samples, &idx, &cb}};
  CHECK(vqLoss(streams, 2) == doctest::Approx(0.0));

  std::vector<double> off{2, 0};  // distance 2 from codeword 0
  std::vector<uint32_t> one{0};
  std::vector<VqStream> s2{{&off, &one, &cb}};
  CHECK(vqLoss(s2, 1) == doctest::Approx(4.0));
}

TEST_CASE("vq loss matches a brute-force recomputation") {
  Rng rng(21);
  EcvqCodebook cb;
  cb.dim = 3;
  size_t m = 5;
  for (size_t j = 0; j < m * 3; ++j)
    cb.codewords.push_back(static_cast<float>(rng.normal()));
  cb.counts.assign(m, kProbScale / static_cast<uint32_t>(m));
  cb.counts[0] += kProbScale - (kProbScale / m) * m;
  cb.refreshProb();
  std::vector<double> samples;
  std::vector<uint32_t> idx;
  for (int i = 0; i < 50; ++i) {
    for (int k = 0; k < 3; ++k) samples.push_back(rng.normal());
    idx.push_back(static_cast<uint32_t>(rng.index(m)));
  }
  std::vector<VqStream> streams{{&samples, &idx, &cb}};
  double got = vqLoss(streams, 50);
  double want = 0;
  for (size_t i = 0; i < idx.size(); ++i)
    for (int k = 0; k < 3; ++k) {
      double diff = samples[i * 3 + k] - cb.word(idx[i])[k];
      want += diff * diff;
    }
  want /= 50;
  CHECK(got == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("reg loss: zero for a motionless scene, drift norm squared otherwise") {
  GaussianScene scene;
  scene.keyframeInterval = 1;
  scene.timestamps = {0, 1, 2, 3};
  scene.duration = 3;
  scene.maxShDegree = 0;
  StaticGaussian g;
  g.scale = {0.1f, 0.1f, 0.1f};
  g.sh.assign(1, Vec3f{0, 0, 0});
  scene.statics.push_back(g);
  CHECK(regLoss(scene) == doctest::Approx(0.0));
  scene.statics[0].drift = {1, 0, 0};
  CHECK(regLoss(scene) == doctest::Approx(1.0));
}

TEST_CASE("reg loss: linear keyframe trajectories have zero smoothness terms") {
  GaussianScene scene;
  scene.keyframeInterval = 1;
  scene.timestamps = {0, 1, 2, 3, 4};
  scene.duration = 4;
  scene.maxShDegree = 0;
  DynamicGaussian d;
  for (int i = 0; i < 5; ++i) {
    d.keyPositions.push_back({static_cast<float>(0.3 * i), static_cast<float>(-0.1 * i), 0});
    d.keyRotations.push_back(Quat::axisAngle({0, 0, 1}, 0.1 * i).toFloat());
  }
  d.scale = {0.1f, 0.1f, 0.1f};
  d.plateauStart = 0;
  d.plateauEnd = 4;
  d.riseWidth = d.fallWidth = 1;
  d.sh.assign(1, Vec3f{0, 0, 0});
  scene.dynamics.push_back(d);
  // Linear positions and constant-rate rotation: both second differences are 0.
  CHECK(regLoss(scene) == doctest::Approx(0.0).epsilon(1e-9));

  // Bend the trajectory: the penalty becomes positive.
  scene.dynamics[0].keyPositions[2].x += 0.5f;
  CHECK(regLoss(scene) > 1e-4);
}

TEST_CASE("total loss composes the breakdown") {
  LossWeights w;
  w.lambdaR = 0.01;
  w.lambdaReg = 0.1;
  w.lambdaGsPrune = 0;
  w.lambdaShPrune = 0;
  LossBreakdown b = totalLoss(0.1, 0.0, 0.0, 2.0, 0.0, 3.0, w);
  CHECK(b.rate == doctest::Approx(2.0));
  CHECK(b.total == doctest::Approx(0.42));
}

TEST_CASE("total loss with zero weights reduces to distortion") {
  LossWeights w;
  w.lambdaR = 0;
  w.lambdaReg = 0;
  LossBreakdown b = totalLoss(0.37, 1.0, 1.0, 1.0, 1.0, 1.0, w);
  CHECK(b.total == doctest::Approx(0.37));
  LossBreakdown zero = totalLoss(0, 0, 0, 0, 0, 0, w);
  CHECK(zero.total == doctest::Approx(0.0));
}

TEST_CASE("total loss is linear in lambdaR and lambdaReg") {
  auto totalAt = [](double lr, double lreg) {
    LossWeights w;
    w.lambdaR = lr;
    w.lambdaReg = lreg;
    w.lambdaGsPrune = 0.3;
    w.lambdaShPrune = 0.7;
    return totalLoss(0.2, 0.4, 0.5, 1.5, 0.25, 2.0, w).total;
  };
  // Three collinear lambda values: midpoint equals the average.
  CHECK(totalAt(0.2, 0.0) - totalAt(0.1, 0.0) ==
        doctest::Approx(totalAt(0.3, 0.0) - totalAt(0.2, 0.0)).epsilon(1e-12));
  CHECK(totalAt(0.0, 0.2) - totalAt(0.0, 0.1) ==
        doctest::Approx(totalAt(0.0, 0.3) - totalAt(0.0, 0.2)).epsilon(1e-12));
}

TEST_CASE("total loss rejects non-finite sub-terms") {
  LossWeights w;
  CHECK_THROWS_AS(totalLoss(std::nan(""), 0, 0, 0, 0, 0, w), ValidationError);
  CHECK_THROWS_AS(totalLoss(0, 0, 0, std::numeric_limits<double>::infinity(), 0, 0, w),
                  ValidationError);
}
