#include "quant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "error.hpp"

namespace g4dc {

size_t PruneMask::keptCount() const {
  size_t n = 0;
  for (uint8_t h : hard) n += h;
  return n;
}

double gsPruneLoss(const PruneMask& mask) {
  if (mask.soft.empty()) throw ValidationError("prune loss needs at least one Gaussian");
  double sum = 0;
  for (float s : mask.soft) sum += s;
  return sum / static_cast<double>(mask.soft.size());
}

double shPruneLoss(const ShMask& mask, int maxDegree) {
  if (maxDegree < 1 || maxDegree > 3) throw ValidationError("SH prune loss needs k in 1..3");
  if (mask.soft.empty()) return 0.0;
  double denom = static_cast<double>((maxDegree + 1) * (maxDegree + 1) - 1);
  double sum = 0;
  for (const auto& degrees : mask.soft)
    for (int l = 1; l <= maxDegree; ++l)
      sum += (2.0 * l + 1.0) / denom * degrees[l - 1];
  return sum / static_cast<double>(mask.soft.size());
}

const char* attrGroupName(AttrGroup a) {
  switch (a) {
    case AttrGroup::Scale: return "scale";
    case AttrGroup::Rotation: return "rotation";
    case AttrGroup::Dc: return "dc";
    case AttrGroup::Sh1: return "sh1";
    case AttrGroup::Sh2: return "sh2";
    case AttrGroup::Sh3: return "sh3";
  }
  return "?";
}

uint32_t attrGroupDim(AttrGroup a) {
  switch (a) {
    case AttrGroup::Scale: return 3;
    case AttrGroup::Rotation: return 4;
    case AttrGroup::Dc: return 3;
    case AttrGroup::Sh1: return 9;
    case AttrGroup::Sh2: return 15;
    case AttrGroup::Sh3: return 21;
  }
  return 0;
}

void EcvqCodebook::refreshProb() {
  prob.resize(counts.size());
  for (size_t j = 0; j < counts.size(); ++j)
    prob[j] = static_cast<double>(counts[j]) / kProbScale;
}

EcvqResult ecvqEncode(const double* x, size_t dim, const EcvqCodebook& cb) {
  if (cb.count() == 0) throw ValidationError("ecvq encode: empty codebook");
  if (dim != cb.dim) throw ValidationError("ecvq encode: dimension mismatch");
  EcvqResult best;
  double bestScore = std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < cb.count(); ++j) {
    const float* c = cb.word(j);
    double d = 0;
    for (size_t i = 0; i < dim; ++i) {
      double diff = x[i] - static_cast<double>(c[i]);
      d += diff * diff;
    }
    double rate = -std::log2(cb.prob[j]);
    double score = d + cb.lambda * rate;
    if (score < bestScore) {
      bestScore = score;
      best.index = static_cast<uint32_t>(j);
      best.rateBits = rate;
      best.distortion = d;
    }
  }
  return best;
}

namespace {

// Largest-remainder quantization of probabilities to counts summing to
// kProbScale with a per-entry floor.
std::vector<uint32_t> quantizeCounts(const std::vector<double>& p, uint32_t minCount) {
  size_t m = p.size();
  if (m == 1) return {kProbScale};
  std::vector<uint32_t> counts(m);
  std::vector<std::pair<double, size_t>> remainder(m);
  uint64_t assigned = 0;
  for (size_t j = 0; j < m; ++j) {
    double raw = p[j] * kProbScale;
    uint32_t base = std::max(minCount, static_cast<uint32_t>(raw));
    counts[j] = base;
    remainder[j] = {raw - std::floor(raw), j};
    assigned += base;
  }
  if (assigned < kProbScale) {
    std::sort(remainder.begin(), remainder.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    uint64_t left = kProbScale - assigned;
    size_t i = 0;
    while (left > 0) {
      counts[remainder[i % m].second] += 1;
      --left;
      ++i;
    }
  } else if (assigned > kProbScale) {
    // Take the excess from the largest entries, respecting the floor.
    uint64_t extra = assigned - kProbScale;
    while (extra > 0) {
      size_t largest = 0;
      for (size_t j = 1; j < m; ++j)
        if (counts[j] > counts[largest]) largest = j;
      uint32_t take = static_cast<uint32_t>(
          std::min<uint64_t>(extra, counts[largest] > minCount ? counts[largest] - minCount : 0));
      if (take == 0) take = 1;  // degenerate: everything at floor; steal anyway
      counts[largest] -= take;
      extra -= take;
    }
  }
  return counts;
}

}  // namespace

EcvqCodebook ecvqTrain(const std::vector<double>& samples, size_t dim,
                       const EcvqTrainOptions& options,
                       std::vector<double>* objectiveHistory) {
  if (dim == 0 || samples.empty() || samples.size() % dim != 0)
    throw ValidationError("ecvq train: empty or misaligned samples");
  if (options.codebookSize < 1) throw ValidationError("ecvq train: codebook size must be >= 1");
  const size_t n = samples.size() / dim;
  const size_t m = std::min<size_t>(options.codebookSize, n);
  const double pFloor = 1.0 / (64.0 * static_cast<double>(m));
  auto sample = [&](size_t i) { return samples.data() + i * dim; };

  // k-means++ style seeding.
  Rng rng(options.seed);
  std::vector<double> words(m * dim);
  std::vector<double> dist2(n, std::numeric_limits<double>::infinity());
  size_t first = static_cast<size_t>(rng.index(n));
  std::copy_n(sample(first), dim, words.begin());
  for (size_t j = 1; j < m; ++j) {
    double total = 0;
    const double* prev = words.data() + (j - 1) * dim;
    for (size_t i = 0; i < n; ++i) {
      double d = 0;
      for (size_t k = 0; k < dim; ++k) {
        double diff = samples[i * dim + k] - prev[k];
        d += diff * diff;
      }
      dist2[i] = std::min(dist2[i], d);
      total += dist2[i];
    }
    size_t pick = 0;
    if (total > 0) {
      double r = rng.uniform() * total;
      double acc = 0;
      for (size_t i = 0; i < n; ++i) {
        acc += dist2[i];
        if (acc >= r) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<size_t>(rng.index(n));
    }
    std::copy_n(sample(pick), dim, words.begin() + j * dim);
  }

  std::vector<double> prob(m, 1.0 / static_cast<double>(m));
  std::vector<uint32_t> assign(n, 0);
  double prevObjective = std::numeric_limits<double>::infinity();
  std::vector<double> prevWords;
  std::vector<double> prevProb;
  std::vector<uint32_t> prevAssign;

  int iterations = std::max(1, options.iterations);
  for (int it = 0; it < iterations; ++it) {
    // Assignment under the current codebook and probabilities.
    double objective = 0;
    for (size_t i = 0; i < n; ++i) {
      double bestScore = std::numeric_limits<double>::infinity();
      uint32_t bestJ = 0;
      for (size_t j = 0; j < m; ++j) {
        const double* c = words.data() + j * dim;
        double d = 0;
        for (size_t k = 0; k < dim; ++k) {
          double diff = samples[i * dim + k] - c[k];
          d += diff * diff;
        }
        double score = d + options.lambda * -std::log2(prob[j]);
        if (score < bestScore) {
          bestScore = score;
          bestJ = static_cast<uint32_t>(j);
        }
      }
      assign[i] = bestJ;
      objective += bestScore;
    }
    objective /= static_cast<double>(n);

    if (objective > prevObjective + 1e-12) {
      // No further improvement possible under this update order: restore the
      // previous state so the reported objective sequence stays monotone.
      words = prevWords;
      prob = prevProb;
      assign = prevAssign;
      break;
    }
    if (objectiveHistory) objectiveHistory->push_back(objective);
    bool converged = prevObjective - objective <= 1e-12 * (1.0 + std::abs(objective));
    prevObjective = objective;
    prevWords = words;
    prevProb = prob;
    prevAssign = assign;
    if (converged) break;

    // Centroid update; empty cells keep their codeword.
    std::vector<double> sum(m * dim, 0.0);
    std::vector<uint64_t> cellCount(m, 0);
    for (size_t i = 0; i < n; ++i) {
      cellCount[assign[i]]++;
      for (size_t k = 0; k < dim; ++k) sum[assign[i] * dim + k] += samples[i * dim + k];
    }
    for (size_t j = 0; j < m; ++j) {
      if (cellCount[j] == 0) continue;
      for (size_t k = 0; k < dim; ++k)
        words[j * dim + k] = sum[j * dim + k] / static_cast<double>(cellCount[j]);
      if (options.unitNormCodewords) {
        double norm2 = 0;
        for (size_t k = 0; k < dim; ++k) norm2 += words[j * dim + k] * words[j * dim + k];
        double norm = std::sqrt(norm2);
        if (norm > 1e-12)
          for (size_t k = 0; k < dim; ++k) words[j * dim + k] /= norm;
        else
          for (size_t k = 0; k < dim; ++k) words[j * dim + k] = k == 0 ? 1.0 : 0.0;
      }
    }

    // Probability update from assignment frequencies with a stability floor.
    double probSum = 0;
    for (size_t j = 0; j < m; ++j) {
      prob[j] = std::max(static_cast<double>(cellCount[j]) / static_cast<double>(n), pFloor);
      probSum += prob[j];
    }
    for (size_t j = 0; j < m; ++j) prob[j] /= probSum;
  }

  EcvqCodebook cb;
  cb.dim = static_cast<uint32_t>(dim);
  cb.lambda = options.lambda;
  cb.codewords.resize(m * dim);
  for (size_t i = 0; i < m * dim; ++i) cb.codewords[i] = static_cast<float>(words[i]);
  if (options.unitNormCodewords) {
    // Renormalize after the float cast so stored codewords stay unit-norm.
    for (size_t j = 0; j < m; ++j) {
      float* wj = cb.codewords.data() + j * dim;
      double norm2 = 0;
      for (size_t k = 0; k < dim; ++k) norm2 += static_cast<double>(wj[k]) * wj[k];
      double norm = std::sqrt(norm2);
      for (size_t k = 0; k < dim; ++k)
        wj[k] = static_cast<float>(static_cast<double>(wj[k]) / norm);
    }
  }
  uint32_t minCount = std::max<uint32_t>(1, static_cast<uint32_t>(pFloor * kProbScale));
  cb.counts = quantizeCounts(prob, minCount);
  cb.refreshProb();
  return cb;
}

uint32_t scalarQuantize(double x, const ScalarQuantizer& q) {
  if (!(q.hi > q.lo)) throw ValidationError("scalar quantizer: hi must exceed lo");
  if (q.bits < 1 || q.bits > 24) throw ValidationError("scalar quantizer: bits out of range");
  double clamped = std::min(std::max(x, q.lo), q.hi);
  double step = (q.hi - q.lo) / static_cast<double>(1u << q.bits);
  long long idx = std::llround((clamped - q.lo) / step - 0.5);
  long long maxIdx = (1ll << q.bits) - 1;
  if (idx < 0) idx = 0;
  if (idx > maxIdx) idx = maxIdx;
  return static_cast<uint32_t>(idx);
}

float scalarDequantize(uint32_t code, const ScalarQuantizer& q) {
  if (!(q.hi > q.lo)) throw ValidationError("scalar quantizer: hi must exceed lo");
  double step = (q.hi - q.lo) / static_cast<double>(1u << q.bits);
  return static_cast<float>(q.lo + (static_cast<double>(code) + 0.5) * step);
}

// ---------------------------------------------------------------------------

namespace {

// Monotone squash of raw importance into a (0,1) keep score, centered at the
// population median.
std::vector<float> squashImportance(const std::vector<double>& importance) {
  std::vector<double> sorted(importance);
  std::sort(sorted.begin(), sorted.end());
  double median = sorted.empty() ? 0.0 : sorted[sorted.size() / 2];
  if (median <= 0) {
    double maxV = sorted.empty() ? 0.0 : sorted.back();
    median = maxV > 0 ? maxV * 1e-3 : 1e-12;
  }
  std::vector<float> soft(importance.size());
  for (size_t i = 0; i < importance.size(); ++i) {
    double s = importance[i] / (importance[i] + median);
    soft[i] = static_cast<float>(std::min(std::max(s, 1e-6), 1.0 - 1e-6));
  }
  return soft;
}

GaussianScene sceneWithGaussianPrefixPruned(const GaussianScene& scene,
                                            const std::vector<size_t>& order, size_t count) {
  std::vector<uint8_t> drop(scene.totalGaussians(), 0);
  for (size_t i = 0; i < count; ++i) drop[order[i]] = 1;
  GaussianScene out;
  out.duration = scene.duration;
  out.keyframeInterval = scene.keyframeInterval;
  out.timestamps = scene.timestamps;
  out.maxShDegree = scene.maxShDegree;
  for (size_t i = 0; i < scene.statics.size(); ++i)
    if (!drop[i]) out.statics.push_back(scene.statics[i]);
  for (size_t i = 0; i < scene.dynamics.size(); ++i)
    if (!drop[scene.statics.size() + i]) out.dynamics.push_back(scene.dynamics[i]);
  return out;
}

// Threshold placed between the highest pruned and lowest kept soft value so
// that hard == (soft > threshold) holds exactly.
float realizedThreshold(const std::vector<float>& soft, const std::vector<uint8_t>& hard,
                        float fallback) {
  float maxPruned = -1.f, minKept = 2.f;
  for (size_t i = 0; i < soft.size(); ++i) {
    if (hard[i])
      minKept = std::min(minKept, soft[i]);
    else
      maxPruned = std::max(maxPruned, soft[i]);
  }
  if (maxPruned < 0.f) {  // nothing pruned
    return std::min(fallback, minKept > 0.f ? minKept * 0.5f : fallback);
  }
  if (minKept > 1.f) return 1.f;  // everything pruned
  return 0.5f * (maxPruned + minKept);
}

}  // namespace

GaussianScene applyMasks(const GaussianScene& scene, const PruneMask& mask,
                         const ShMask& shMask) {
  GaussianScene out;
  out.duration = scene.duration;
  out.keyframeInterval = scene.keyframeInterval;
  out.timestamps = scene.timestamps;
  out.maxShDegree = scene.maxShDegree;
  auto zeroMasked = [&](std::vector<Vec3f>& sh, size_t id) {
    for (int l = 1; l <= scene.maxShDegree; ++l) {
      if (shMask.hard.empty() || shMask.hard[id][l - 1]) continue;
      for (int i = l * l; i < (l + 1) * (l + 1); ++i) sh[i] = Vec3f{0, 0, 0};
    }
  };
  for (size_t i = 0; i < scene.statics.size(); ++i) {
    if (!mask.hard.empty() && !mask.hard[i]) continue;
    out.statics.push_back(scene.statics[i]);
    zeroMasked(out.statics.back().sh, i);
  }
  for (size_t i = 0; i < scene.dynamics.size(); ++i) {
    size_t id = scene.statics.size() + i;
    if (!mask.hard.empty() && !mask.hard[id]) continue;
    out.dynamics.push_back(scene.dynamics[i]);
    zeroMasked(out.dynamics.back().sh, id);
  }
  return out;
}

PruneOutcome rdGreedyPrune(const GaussianScene& scene, double lambdaGsPrune,
                           double lambdaShPrune, const PruneOracles& oracles) {
  const size_t n = scene.totalGaussians();
  PruneOutcome out;
  out.mask.soft.assign(n, 0.5f);
  out.mask.hard.assign(n, 1);
  out.shMask.maxDegree = scene.maxShDegree;
  out.shMask.soft.assign(n, {0.5f, 0.5f, 0.5f});
  out.shMask.hard.assign(n, {1, 1, 1});

  if (n == 0) {
    out.prunedScene = scene;
    return out;
  }

  std::vector<double> importance = oracles.importance(scene);
  out.mask.soft = squashImportance(importance);

  // --- Gaussian pass -------------------------------------------------------
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (out.mask.soft[a] != out.mask.soft[b]) return out.mask.soft[a] < out.mask.soft[b];
    return a < b;
  });

  size_t prunedGaussians = 0;
  if (lambdaGsPrune > 0) {
    double baseDist = oracles.distortion(scene);
    std::vector<double> softPrefix(n + 1, 0.0);
    for (size_t i = 0; i < n; ++i)
      softPrefix[i + 1] = softPrefix[i] + out.mask.soft[order[i]];

    size_t chunk = std::max<size_t>(1, n / 32);
    for (size_t k = chunk; k <= n; k += chunk) {
      size_t take = std::min(k, n);
      GaussianScene candidate = sceneWithGaussianPrefixPruned(scene, order, take);
      double delta = oracles.distortion(candidate) - baseDist;
      double credit = lambdaGsPrune * softPrefix[take] / static_cast<double>(n);
      if (delta < credit) prunedGaussians = std::max(prunedGaussians, take);
      if (take == n) break;
    }
  }
  for (size_t i = 0; i < prunedGaussians; ++i) out.mask.hard[order[i]] = 0;
  out.mask.threshold = realizedThreshold(out.mask.soft, out.mask.hard, 0.01f);
  for (size_t i = 0; i < prunedGaussians; ++i) {
    if (order[i] < scene.statics.size())
      out.staticPruned++;
    else
      out.dynamicPruned++;
  }

  GaussianScene afterGaussians =
      sceneWithGaussianPrefixPruned(scene, order, prunedGaussians);

  // --- SH degree pass ------------------------------------------------------
  struct ShCandidate {
    size_t gaussian;  // index into the concatenated scene
    int degree;       // 1..k
    double weight;    // (2l+1)/((k+1)^2-1)
  };
  std::vector<ShCandidate> candidates;
  const int k = scene.maxShDegree;
  if (lambdaShPrune > 0 && k >= 1) {
    auto shEnergy = [&](const std::vector<Vec3f>& sh, int l) {
      double e = 0;
      for (int i = l * l; i < (l + 1) * (l + 1); ++i)
        e += Vec3(sh[i]).norm2();
      return e / static_cast<double>(2 * l + 1);
    };
    double denom = static_cast<double>((k + 1) * (k + 1) - 1);
    std::vector<double> shImp;
    for (size_t id = 0; id < n; ++id) {
      const std::vector<Vec3f>& sh =
          id < scene.statics.size() ? scene.statics[id].sh
                                    : scene.dynamics[id - scene.statics.size()].sh;
      for (int l = 1; l <= k; ++l) {
        shImp.push_back(importance[id] * shEnergy(sh, l));
        if (out.mask.hard[id])
          candidates.push_back({id, l, (2.0 * l + 1.0) / denom});
      }
    }
    std::vector<float> shSoftAll = squashImportance(shImp);
    for (size_t id = 0; id < n; ++id)
      for (int l = 1; l <= k; ++l) out.shMask.soft[id][l - 1] = shSoftAll[id * k + (l - 1)];

    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](const ShCandidate& a, const ShCandidate& b) {
                       float sa = out.shMask.soft[a.gaussian][a.degree - 1];
                       float sb = out.shMask.soft[b.gaussian][b.degree - 1];
                       if (sa != sb) return sa < sb;
                       if (a.gaussian != b.gaussian) return a.gaussian < b.gaussian;
                       return a.degree > b.degree;
                     });

    if (!candidates.empty()) {
      // Map original Gaussian ids to indices in the survivor scene.
      std::vector<size_t> survivorIndex(n, SIZE_MAX);
      size_t next = 0;
      for (size_t id = 0; id < n; ++id)
        if (out.mask.hard[id]) survivorIndex[id] = next++;

      double baseDist = oracles.distortion(afterGaussians);
      std::vector<double> creditPrefix(candidates.size() + 1, 0.0);
      for (size_t i = 0; i < candidates.size(); ++i) {
        const ShCandidate& c = candidates[i];
        creditPrefix[i + 1] =
            creditPrefix[i] + c.weight * out.shMask.soft[c.gaussian][c.degree - 1];
      }
      size_t total = candidates.size();
      size_t chunk = std::max<size_t>(1, total / 32);
      size_t prunedSh = 0;
      ShMask trial;
      trial.maxDegree = k;
      trial.soft.assign(afterGaussians.totalGaussians(), {0.5f, 0.5f, 0.5f});
      for (size_t kk = chunk; kk <= total; kk += chunk) {
        size_t take = std::min(kk, total);
        trial.hard.assign(afterGaussians.totalGaussians(), {1, 1, 1});
        for (size_t i = 0; i < take; ++i)
          trial.hard[survivorIndex[candidates[i].gaussian]][candidates[i].degree - 1] = 0;
        GaussianScene candidate = applyMasks(afterGaussians, PruneMask{}, trial);
        double delta = oracles.distortion(candidate) - baseDist;
        double credit = lambdaShPrune * creditPrefix[take] / static_cast<double>(n);
        if (delta < credit) prunedSh = std::max(prunedSh, take);
        if (take == total) break;
      }
      for (size_t i = 0; i < prunedSh; ++i)
        out.shMask.hard[candidates[i].gaussian][candidates[i].degree - 1] = 0;
      out.shDegreesPruned = prunedSh;
    }
  }

  // Realized SH threshold over the candidates actually considered.
  {
    std::vector<float> flatSoft;
    std::vector<uint8_t> flatHard;
    for (size_t id = 0; id < n; ++id) {
      if (!out.mask.hard[id]) continue;
      for (int l = 1; l <= k; ++l) {
        flatSoft.push_back(out.shMask.soft[id][l - 1]);
        flatHard.push_back(out.shMask.hard[id][l - 1]);
      }
    }
    out.shMask.threshold =
        flatSoft.empty() ? 0.5f : realizedThreshold(flatSoft, flatHard, 0.5f);
  }

  out.prunedScene = applyMasks(scene, out.mask, out.shMask);
  return out;
}

}  // namespace g4dc
