#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "bytes.hpp"
#include "error.hpp"
#include "rangecoder.hpp"
#include "render.hpp"
#include "wavelet.hpp"

namespace g4dc {

namespace {

using json = nlohmann::json;

constexpr double kLevelLambdaGs[6] = {0.05, 0.02, 0.01, 0.005, 0.002, 0.0005};
constexpr double kLevelLambdaSh[6] = {0.5, 0.2, 0.1, 0.05, 0.02, 0.005};
constexpr uint32_t kLevelCodebook[6] = {16, 32, 64, 96, 128, 256};

// Stream order inside the Indexes/Codebooks/Logits sections.
constexpr size_t kStreamCount = 2 * kAttrGroupCount;
Component streamComponent(size_t s) {
  return s < kAttrGroupCount ? Component::Static : Component::Dynamic;
}
AttrGroup streamGroup(size_t s) { return static_cast<AttrGroup>(s % kAttrGroupCount); }

struct BitWriter {
  std::vector<uint8_t> bytes;
  uint32_t cur = 0;
  int nbits = 0;
  void put(int bit) {
    cur |= static_cast<uint32_t>(bit & 1) << nbits;
    if (++nbits == 8) {
      bytes.push_back(static_cast<uint8_t>(cur));
      cur = 0;
      nbits = 0;
    }
  }
  std::vector<uint8_t> take() {
    if (nbits > 0) {
      bytes.push_back(static_cast<uint8_t>(cur));
      cur = 0;
      nbits = 0;
    }
    return std::move(bytes);
  }
};

struct BitReader {
  const std::vector<uint8_t>& bytes;
  size_t pos = 0;
  explicit BitReader(const std::vector<uint8_t>& b) : bytes(b) {}
  int get() {
    size_t byte = pos >> 3;
    if (byte >= bytes.size()) throw FormatError("mask section truncated");
    int bit = (bytes[byte] >> (pos & 7)) & 1;
    ++pos;
    return bit;
  }
};

// Degenerate observed ranges expand slightly so the quantizer stays valid.
QuantRange observedRange(const std::vector<double>& values) {
  if (values.empty()) return {0.f, 1.f};
  double lo = values[0], hi = values[0];
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi > lo)) hi = lo + std::max(1e-6, std::abs(lo) * 1e-6);
  return {static_cast<float>(lo), static_cast<float>(hi)};
}

ScalarQuantizer quantizerFor(const QuantRange& r, int bits) {
  return ScalarQuantizer{bits, static_cast<double>(r.lo), static_cast<double>(r.hi)};
}

// Per-degree SH flattening: degree l spans coefficients l^2 .. (l+1)^2 - 1.
void appendShBand(std::vector<double>& out, const std::vector<Vec3f>& sh, int l) {
  for (int i = l * l; i < (l + 1) * (l + 1); ++i) {
    out.push_back(sh[i].x);
    out.push_back(sh[i].y);
    out.push_back(sh[i].z);
  }
}

struct TrainedGroup {
  EcvqCodebook assignView;       // training space (log for scale)
  std::vector<float> storedWords;  // serialized space (linear for scale)
  std::vector<uint32_t> indices;
  std::vector<double> samples;   // training-space samples, flattened
};

// Grouping permutation: surviving Gaussians ordered by SH keep pattern so
// same-pattern runs are contiguous in the SH index streams.
std::vector<uint32_t> sortPermutation(const std::vector<std::array<uint8_t, 3>>& keptShBits,
                                      int maxDegree) {
  std::vector<uint32_t> perm(keptShBits.size());
  std::iota(perm.begin(), perm.end(), 0u);
  auto pattern = [&](uint32_t i) {
    int p = 0;
    for (int l = 1; l <= maxDegree; ++l) p = (p << 1) | keptShBits[i][l - 1];
    return p;
  };
  std::stable_sort(perm.begin(), perm.end(), [&](uint32_t a, uint32_t b) {
    int pa = pattern(a), pb = pattern(b);
    if (pa != pb) return pa > pb;
    return a < b;
  });
  return perm;
}

}  // namespace

EncodeConfig EncodeConfig::preset(int level) {
  if (level < 1 || level > 6) throw ValidationError("compression level must be in 1..6");
  EncodeConfig c;
  c.level = level;
  c.lambdaGsPrune = kLevelLambdaGs[level - 1];
  c.lambdaShPrune = kLevelLambdaSh[level - 1];
  c.codebookSize = kLevelCodebook[level - 1];
  return c;
}

void EncodeConfig::validate() const {
  if (level < 1 || level > 6) throw ValidationError("compression level must be in 1..6");
  if (lambdaGsPrune < 0 || lambdaShPrune < 0 || lambdaR < 0)
    throw ValidationError("lambdas must be non-negative");
  if (codebookSize < 1 || codebookSize > 65535)
    throw ValidationError("codebook size must be in 1..65535");
  if (waveletLevels < 0 || waveletLevels > 8)
    throw ValidationError("wavelet levels must be in 0..8");
  if (keepDetailLevels < 0 || keepDetailLevels > waveletLevels)
    throw ValidationError("kept detail levels must be in 0..waveletLevels");
  if (opacityBits < 1 || opacityBits > 8) throw ValidationError("opacity bits must be 1..8");
  if (coeffBits < 1 || coeffBits > 16)
    throw ValidationError("coefficient bits must be 1..16");
  if (ecvqIterations < 1) throw ValidationError("ecvq iterations must be >= 1");
  if (probeSize < 8 || probeSize > 256) throw ValidationError("probe size must be 8..256");
  if (lambdaDssim < 0 || lambdaDssim > 1)
    throw ValidationError("lambda_dssim must be in [0, 1]");
  for (double v : attrLambda)
    if (!(v > 0)) throw ValidationError("attribute lambdas must be positive");
}

EncodeConfig EncodeConfig::fromJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  EncodeConfig c = j.contains("level") ? preset(j["level"].get<int>()) : EncodeConfig{};
  try {
    for (auto& [key, value] : j.items()) {
      if (key == "level") {
      } else if (key == "lambda_gsprune") {
        c.lambdaGsPrune = value.get<double>();
      } else if (key == "lambda_shprune") {
        c.lambdaShPrune = value.get<double>();
      } else if (key == "lambda_r") {
        c.lambdaR = value.get<double>();
      } else if (key == "codebook_size") {
        c.codebookSize = value.get<uint32_t>();
      } else if (key == "wavelet_levels") {
        c.waveletLevels = value.get<int>();
      } else if (key == "keep_detail_levels") {
        c.keepDetailLevels = value.get<int>();
      } else if (key == "quantize_alpha_static") {
        c.policy.alphaStatic = value.get<bool>();
      } else if (key == "quantize_alpha_dynamic") {
        c.policy.alphaDynamic = value.get<bool>();
      } else if (key == "quantize_window_centers") {
        c.policy.windowCenters = value.get<bool>();
      } else if (key == "quantize_edge_widths") {
        c.policy.edgeWidths = value.get<bool>();
      } else if (key == "opacity_bits") {
        c.opacityBits = value.get<int>();
      } else if (key == "coeff_bits") {
        c.coeffBits = value.get<int>();
      } else if (key == "ecvq_iterations") {
        c.ecvqIterations = value.get<int>();
      } else if (key == "seed") {
        c.seed = value.get<uint64_t>();
      } else if (key == "probe_size") {
        c.probeSize = value.get<int>();
      } else if (key == "lambda_dssim") {
        c.lambdaDssim = value.get<double>();
      } else if (key == "attr_lambda") {
        auto arr = value.get<std::vector<double>>();
        if (arr.size() != kAttrGroupCount)
          throw ValidationError("attr_lambda needs 6 entries");
        for (size_t i = 0; i < kAttrGroupCount; ++i) c.attrLambda[i] = arr[i];
      } else {
        throw ValidationError("config: unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string EncodeConfig::toJson() const {
  json j;
  j["level"] = level;
  j["lambda_gsprune"] = lambdaGsPrune;
  j["lambda_shprune"] = lambdaShPrune;
  j["lambda_r"] = lambdaR;
  j["codebook_size"] = codebookSize;
  j["wavelet_levels"] = waveletLevels;
  j["keep_detail_levels"] = keepDetailLevels;
  j["quantize_alpha_static"] = policy.alphaStatic;
  j["quantize_alpha_dynamic"] = policy.alphaDynamic;
  j["quantize_window_centers"] = policy.windowCenters;
  j["quantize_edge_widths"] = policy.edgeWidths;
  j["opacity_bits"] = opacityBits;
  j["coeff_bits"] = coeffBits;
  j["ecvq_iterations"] = ecvqIterations;
  j["seed"] = seed;
  j["probe_size"] = probeSize;
  j["lambda_dssim"] = lambdaDssim;
  j["attr_lambda"] = std::vector<double>(attrLambda, attrLambda + kAttrGroupCount);
  return j.dump();
}

// ---------------------------------------------------------------------------
// Encode

EncodeOutcome encodeScene(const GaussianScene& scene, const EncodeConfig& cfg) {
  cfg.validate();
  scene.validate();
  if (scene.statics.size() > 65535 || scene.dynamics.size() > 65535)
    throw ValidationError("scene exceeds 65535 Gaussians per component");

  // 1. Rate-distortion pruning against the probe oracle.
  PruneOutcome prune;
  if (scene.totalGaussians() > 0 && (cfg.lambdaGsPrune > 0 || cfg.lambdaShPrune > 0)) {
    std::vector<ProbeCamera> probes = makeProbeSet(scene, cfg.seed, cfg.probeSize);
    std::vector<Image> reference = renderProbes(scene, probes);
    PruneOracles oracles;
    oracles.distortion = [&](const GaussianScene& candidate) {
      return probeDistortion(candidate, probes, reference, cfg.lambdaDssim);
    };
    oracles.importance = [&](const GaussianScene& s) {
      return computeImportance(s, probes);
    };
    prune = rdGreedyPrune(scene, cfg.lambdaGsPrune, cfg.lambdaShPrune, oracles);
  } else {
    prune.mask.soft.assign(scene.totalGaussians(), 0.5f);
    prune.mask.hard.assign(scene.totalGaussians(), 1);
    prune.shMask.maxDegree = scene.maxShDegree;
    prune.shMask.soft.assign(scene.totalGaussians(), {0.5f, 0.5f, 0.5f});
    prune.shMask.hard.assign(scene.totalGaussians(), {1, 1, 1});
    prune.prunedScene = scene;
  }
  const GaussianScene& kept = prune.prunedScene;
  const size_t ns = kept.statics.size();
  const size_t nd = kept.dynamics.size();
  const int k = scene.maxShDegree;
  const size_t kf = scene.keyframeCount();

  // SH keep bits for survivors, statics then dynamics.
  std::vector<std::array<uint8_t, 3>> keptSh;
  keptSh.reserve(ns + nd);
  for (size_t id = 0; id < scene.totalGaussians(); ++id)
    if (prune.mask.hard[id]) keptSh.push_back(prune.shMask.hard[id]);

  std::vector<uint32_t> permStatic =
      sortPermutation({keptSh.begin(), keptSh.begin() + ns}, k);
  std::vector<uint32_t> permDynamic =
      sortPermutation({keptSh.begin() + ns, keptSh.end()}, k);

  // 2. Gather training samples per stream and run ECVQ.
  std::array<TrainedGroup, kStreamCount> groups;
  auto shForKept = [&](Component comp, uint32_t i) -> const std::vector<Vec3f>& {
    return comp == Component::Static ? kept.statics[i].sh : kept.dynamics[i].sh;
  };
  for (size_t s = 0; s < kStreamCount; ++s) {
    Component comp = streamComponent(s);
    AttrGroup group = streamGroup(s);
    size_t n = comp == Component::Static ? ns : nd;
    std::vector<double>& samples = groups[s].samples;
    switch (group) {
      case AttrGroup::Scale:
        for (size_t i = 0; i < n; ++i) {
          Vec3f sc = comp == Component::Static ? kept.statics[i].scale : kept.dynamics[i].scale;
          samples.push_back(std::log(static_cast<double>(sc.x)));
          samples.push_back(std::log(static_cast<double>(sc.y)));
          samples.push_back(std::log(static_cast<double>(sc.z)));
        }
        break;
      case AttrGroup::Rotation:
        if (comp == Component::Static) {
          for (size_t i = 0; i < n; ++i) {
            Quat q = Quat(kept.statics[i].rotation).normalized().canonical();
            samples.insert(samples.end(), {q.w, q.x, q.y, q.z});
          }
        } else {
          for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < kf; ++j) {
              Quat q = Quat(kept.dynamics[i].keyRotations[j]).normalized().canonical();
              samples.insert(samples.end(), {q.w, q.x, q.y, q.z});
            }
        }
        break;
      case AttrGroup::Dc:
        for (size_t i = 0; i < n; ++i) {
          const Vec3f& dc = shForKept(comp, static_cast<uint32_t>(i))[0];
          samples.insert(samples.end(), {dc.x, dc.y, dc.z});
        }
        break;
      default: {
        int l = static_cast<int>(group) - 2;  // Sh1 -> 1 ...
        if (l > k) break;
        const std::vector<uint32_t>& perm =
            comp == Component::Static ? permStatic : permDynamic;
        size_t base = comp == Component::Static ? 0 : ns;
        for (uint32_t pi : perm) {
          if (!keptSh[base + pi][l - 1]) continue;
          appendShBand(samples, shForKept(comp, pi), l);
        }
        break;
      }
    }

    size_t dim = attrGroupDim(group);
    if (samples.empty()) continue;
    EcvqTrainOptions opt;
    opt.codebookSize = cfg.codebookSize;
    opt.lambda = cfg.lambdaR * cfg.attrLambda[static_cast<size_t>(group)];
    opt.iterations = cfg.ecvqIterations;
    opt.seed = cfg.seed * 1315423911u + s;
    opt.unitNormCodewords = group == AttrGroup::Rotation;
    // Large streams train on a strided subset; assignment still covers
    // every sample below.
    constexpr size_t kMaxTrainVectors = 4096;
    size_t vecCount = samples.size() / dim;
    if (vecCount > kMaxTrainVectors) {
      size_t stride = (vecCount + kMaxTrainVectors - 1) / kMaxTrainVectors;
      std::vector<double> subset;
      subset.reserve(kMaxTrainVectors * dim);
      for (size_t i = 0; i < vecCount; i += stride)
        subset.insert(subset.end(), samples.begin() + i * dim,
                      samples.begin() + (i + 1) * dim);
      groups[s].assignView = ecvqTrain(subset, dim, opt);
    } else {
      groups[s].assignView = ecvqTrain(samples, dim, opt);
    }
    groups[s].assignView.attr = group;
    groups[s].assignView.comp = comp;

    // Final assignment against the trained codebook.
    size_t count = samples.size() / dim;
    groups[s].indices.reserve(count);
    for (size_t i = 0; i < count; ++i)
      groups[s].indices.push_back(ecvqEncode(samples.data() + i * dim, dim,
                                             groups[s].assignView)
                                      .index);

    // Serialized codewords live in linear space for scale groups, so decode
    // is a pure table lookup.
    groups[s].storedWords = groups[s].assignView.codewords;
    if (group == AttrGroup::Scale)
      for (float& w : groups[s].storedWords)
        w = static_cast<float>(std::exp(static_cast<double>(w)));
  }

  // 3. Trajectory transform + coefficient quantization.
  ContainerHeader header;
  std::vector<std::vector<Vec3>> approxRows(nd), detailRows(nd);
  {
    std::vector<double> approxVals[3], detailVals[3];
    for (size_t i = 0; i < nd; ++i) {
      std::vector<Vec3> traj;
      traj.reserve(kf);
      for (const Vec3f& p : kept.dynamics[i].keyPositions) traj.push_back(Vec3(p));
      if (cfg.waveletLevels >= 1 && kf >= 2) {
        WaveletPyramid pyr =
            maskDetails(haarForward(traj, cfg.waveletLevels), cfg.keepDetailLevels);
        approxRows[i] = pyr.approx;
        for (int l = pyr.levels; l > pyr.levels - cfg.keepDetailLevels; --l)
          for (const Vec3& v : pyr.details[l - 1]) detailRows[i].push_back(v);
      } else {
        approxRows[i] = traj;
      }
      for (const Vec3& v : approxRows[i])
        for (int a = 0; a < 3; ++a) approxVals[a].push_back(v[a]);
      for (const Vec3& v : detailRows[i])
        for (int a = 0; a < 3; ++a) detailVals[a].push_back(v[a]);
    }
    for (int a = 0; a < 3; ++a) {
      header.coeffRange[a] = observedRange(approxVals[a]);
      header.detailRange[a] = observedRange(detailVals[a]);
    }
  }

  // 4. Opacity-family scalar quantizers over observed survivor ranges.
  {
    std::vector<double> vals;
    auto rangeOf = [&](auto&& extract, auto const& items) {
      vals.clear();
      for (const auto& g : items) vals.push_back(extract(g));
      return observedRange(vals);
    };
    header.alphaStaticRange =
        rangeOf([](const StaticGaussian& g) { return g.opacity; }, kept.statics);
    header.alphaDynamicRange =
        rangeOf([](const DynamicGaussian& g) { return g.baseOpacity; }, kept.dynamics);
    header.plateauStartRange =
        rangeOf([](const DynamicGaussian& g) { return g.plateauStart; }, kept.dynamics);
    header.plateauEndRange =
        rangeOf([](const DynamicGaussian& g) { return g.plateauEnd; }, kept.dynamics);
    header.riseWidthRange =
        rangeOf([](const DynamicGaussian& g) { return g.riseWidth; }, kept.dynamics);
    header.fallWidthRange =
        rangeOf([](const DynamicGaussian& g) { return g.fallWidth; }, kept.dynamics);
  }

  header.staticCountOriginal = static_cast<uint32_t>(scene.statics.size());
  header.staticCount = static_cast<uint32_t>(ns);
  header.dynamicCountOriginal = static_cast<uint32_t>(scene.dynamics.size());
  header.dynamicCount = static_cast<uint32_t>(nd);
  header.duration = scene.duration;
  header.keyframeInterval = scene.keyframeInterval;
  header.timestamps = scene.timestamps;
  header.maxShDegree = static_cast<uint8_t>(k);
  header.waveletLevels = static_cast<uint8_t>(kf >= 2 ? cfg.waveletLevels : 0);
  header.keepDetailLevels = static_cast<uint8_t>(cfg.keepDetailLevels);
  header.opacityPolicy = cfg.policy.toBits();
  header.opacityBits = static_cast<uint8_t>(cfg.opacityBits);
  header.coeffBits = static_cast<uint8_t>(cfg.coeffBits);
  header.seed = cfg.seed;

  CompressedContainer container;
  container.header = header;

  // gaussian_mask: keep bit per original Gaussian.
  {
    BitWriter bw;
    for (uint8_t h : prune.mask.hard) bw.put(h);
    container.section(Section::GaussianMask) = bw.take();
  }
  // sh_mask: k bits per surviving Gaussian.
  if (k >= 1) {
    BitWriter bw;
    for (const auto& bits : keptSh)
      for (int l = 1; l <= k; ++l) bw.put(bits[l - 1]);
    container.section(Section::ShMask) = bw.take();
  }
  // sort_idx: grouping permutations, fixed-width u16.
  {
    ByteWriter w;
    for (uint32_t p : permStatic) w.u16(static_cast<uint16_t>(p));
    for (uint32_t p : permDynamic) w.u16(static_cast<uint16_t>(p));
    container.section(Section::SortIdx) = w.take();
  }
  // indexes: entropy-coded streams (empty when the scene is empty).
  if (ns + nd > 0) {
    ByteWriter w;
    for (size_t s = 0; s < kStreamCount; ++s) {
      const TrainedGroup& g = groups[s];
      if (g.indices.empty()) {
        w.u32(0);
        w.u32(0);
        continue;
      }
      SymbolTable table = SymbolTable::fromCounts(g.assignView.counts);
      std::vector<uint8_t> coded = rangeEncode(g.indices, table);
      w.u32(static_cast<uint32_t>(g.indices.size()));
      w.u32(static_cast<uint32_t>(coded.size()));
      w.bytes(coded.data(), coded.size());
    }
    container.section(Section::Indexes) = w.take();
  }
  // f_masked: quantized trajectory coefficient rows.
  {
    ByteWriter w;
    ScalarQuantizer qa[3] = {quantizerFor(header.coeffRange[0], cfg.coeffBits),
                             quantizerFor(header.coeffRange[1], cfg.coeffBits),
                             quantizerFor(header.coeffRange[2], cfg.coeffBits)};
    ScalarQuantizer qd[3] = {quantizerFor(header.detailRange[0], cfg.coeffBits),
                             quantizerFor(header.detailRange[1], cfg.coeffBits),
                             quantizerFor(header.detailRange[2], cfg.coeffBits)};
    for (size_t i = 0; i < nd; ++i) {
      for (const Vec3& v : approxRows[i])
        for (int a = 0; a < 3; ++a)
          w.u16(static_cast<uint16_t>(scalarQuantize(v[a], qa[a])));
      for (const Vec3& v : detailRows[i])
        for (int a = 0; a < 3; ++a)
          w.u16(static_cast<uint16_t>(scalarQuantize(v[a], qd[a])));
    }
    container.section(Section::FMasked) = w.take();
  }
  // mu_disp / mu_0: raw statics motion and pivots.
  {
    ByteWriter wd, w0;
    for (const auto& g : kept.statics) {
      wd.f32(g.drift.x);
      wd.f32(g.drift.y);
      wd.f32(g.drift.z);
      w0.f32(g.pivot.x);
      w0.f32(g.pivot.y);
      w0.f32(g.pivot.z);
    }
    container.section(Section::MuDisp) = wd.take();
    container.section(Section::Mu0) = w0.take();
  }
  // codebooks + logits; left empty when there is nothing to dictionary.
  if (ns + nd > 0) {
    ByteWriter wc, wl;
    for (size_t s = 0; s < kStreamCount; ++s) {
      const TrainedGroup& g = groups[s];
      uint16_t m = static_cast<uint16_t>(g.assignView.count());
      wc.u8(static_cast<uint8_t>(streamGroup(s)));
      wc.u8(static_cast<uint8_t>(streamComponent(s)));
      wc.u16(m);
      wc.u16(static_cast<uint16_t>(attrGroupDim(streamGroup(s))));
      for (float v : g.storedWords) wc.f32(v);
      wl.u16(m);
      for (uint32_t c : g.assignView.counts)
        wl.u16(c == kProbScale ? 0 : static_cast<uint16_t>(c));
    }
    container.section(Section::Codebooks) = wc.take();
    container.section(Section::Logits) = wl.take();
  }
  // opacity_centers.
  {
    ByteWriter w;
    ScalarQuantizer qs = quantizerFor(header.plateauStartRange, cfg.opacityBits);
    ScalarQuantizer qe = quantizerFor(header.plateauEndRange, cfg.opacityBits);
    for (const auto& g : kept.dynamics) {
      if (cfg.policy.windowCenters) {
        w.u8(static_cast<uint8_t>(scalarQuantize(g.plateauStart, qs)));
        w.u8(static_cast<uint8_t>(scalarQuantize(g.plateauEnd, qe)));
      } else {
        w.f32(g.plateauStart);
        w.f32(g.plateauEnd);
      }
    }
    container.section(Section::OpacityCenters) = w.take();
  }
  // beta_var: edge widths, raw unless the ablation policy quantizes them.
  {
    ByteWriter w;
    ScalarQuantizer qr = quantizerFor(header.riseWidthRange, cfg.opacityBits);
    ScalarQuantizer qf = quantizerFor(header.fallWidthRange, cfg.opacityBits);
    for (const auto& g : kept.dynamics) {
      if (cfg.policy.edgeWidths) {
        w.u8(static_cast<uint8_t>(scalarQuantize(g.riseWidth, qr)));
        w.u8(static_cast<uint8_t>(scalarQuantize(g.fallWidth, qf)));
      } else {
        w.f32(g.riseWidth);
        w.f32(g.fallWidth);
      }
    }
    container.section(Section::BetaVar) = w.take();
  }
  // base_opacities.
  {
    ByteWriter w;
    ScalarQuantizer qs = quantizerFor(header.alphaStaticRange, cfg.opacityBits);
    ScalarQuantizer qd = quantizerFor(header.alphaDynamicRange, cfg.opacityBits);
    for (const auto& g : kept.statics) {
      if (cfg.policy.alphaStatic)
        w.u8(static_cast<uint8_t>(scalarQuantize(g.opacity, qs)));
      else
        w.f32(g.opacity);
    }
    for (const auto& g : kept.dynamics) {
      if (cfg.policy.alphaDynamic)
        w.u8(static_cast<uint8_t>(scalarQuantize(g.baseOpacity, qd)));
      else
        w.f32(g.baseOpacity);
    }
    container.section(Section::BaseOpacities) = w.take();
  }

  EncodeOutcome out;
  out.container = std::move(container);
  out.report = sizeReport(out.container);
  out.staticPruned = prune.staticPruned;
  out.dynamicPruned = prune.dynamicPruned;
  out.shDegreesPruned = prune.shDegreesPruned;
  return out;
}

// ---------------------------------------------------------------------------
// Decode

namespace {

struct ParsedCodebooks {
  std::array<EcvqCodebook, kStreamCount> books;  // stored (lookup) space
  std::array<uint16_t, kStreamCount> counts{};
};

ParsedCodebooks parseCodebooks(const CompressedContainer& c) {
  ParsedCodebooks out;
  const auto& cbBytes = c.section(Section::Codebooks);
  const auto& logitBytes = c.section(Section::Logits);
  if (c.header.staticCount + c.header.dynamicCount == 0) {
    if (!cbBytes.empty() || !logitBytes.empty())
      throw FormatError("codebook sections present in an empty container");
    for (size_t s = 0; s < kStreamCount; ++s) {
      out.books[s].attr = streamGroup(s);
      out.books[s].comp = streamComponent(s);
      out.books[s].dim = attrGroupDim(streamGroup(s));
    }
    return out;
  }
  ByteReader rc(cbBytes.data(), cbBytes.size());
  ByteReader rl(logitBytes.data(), logitBytes.size());
  for (size_t s = 0; s < kStreamCount; ++s) {
    uint8_t attr = rc.u8();
    uint8_t comp = rc.u8();
    uint16_t m = rc.u16();
    uint16_t dim = rc.u16();
    if (attr != static_cast<uint8_t>(streamGroup(s)) ||
        comp != static_cast<uint8_t>(streamComponent(s)))
      throw FormatError("codebook table out of order");
    if (dim != attrGroupDim(streamGroup(s)))
      throw FormatError("codebook dimension mismatch");
    EcvqCodebook& cb = out.books[s];
    cb.attr = streamGroup(s);
    cb.comp = streamComponent(s);
    cb.dim = dim;
    cb.codewords.resize(static_cast<size_t>(m) * dim);
    for (auto& w : cb.codewords) w = rc.f32();
    uint16_t ml = rl.u16();
    if (ml != m) throw FormatError("logits table inconsistent with codebooks");
    cb.counts.resize(m);
    uint64_t total = 0;
    for (auto& cnt : cb.counts) {
      uint16_t v = rl.u16();
      cnt = v == 0 ? kProbScale : v;
      total += cnt;
    }
    if (m > 0 && total != kProbScale)
      throw FormatError("logits for a codebook do not sum to the probability scale");
    cb.refreshProb();
    out.counts[s] = m;
  }
  if (rc.remaining() != 0 || rl.remaining() != 0)
    throw FormatError("trailing bytes in codebook sections");
  return out;
}

}  // namespace

std::vector<uint8_t> gaussianKeepBits(const CompressedContainer& c) {
  const ContainerHeader& h = c.header;
  size_t total = static_cast<size_t>(h.staticCountOriginal) + h.dynamicCountOriginal;
  BitReader br(c.section(Section::GaussianMask));
  std::vector<uint8_t> bits(total);
  for (size_t i = 0; i < total; ++i) bits[i] = static_cast<uint8_t>(br.get());
  return bits;
}

GaussianScene decodeScene(const CompressedContainer& c) {
  const ContainerHeader& h = c.header;
  GaussianScene scene;
  scene.duration = h.duration;
  scene.keyframeInterval = h.keyframeInterval;
  scene.timestamps = h.timestamps;
  scene.maxShDegree = h.maxShDegree;
  const size_t ns = h.staticCount, nd = h.dynamicCount;
  const int k = h.maxShDegree;
  const size_t kf = scene.keyframeCount();
  const size_t shLen = static_cast<size_t>(shCoeffCount(k));

  // Keep-mask sanity against header counts.
  {
    std::vector<uint8_t> bits = gaussianKeepBits(c);
    size_t keptS = 0, keptD = 0;
    for (size_t i = 0; i < h.staticCountOriginal; ++i) keptS += bits[i];
    for (size_t i = 0; i < h.dynamicCountOriginal; ++i)
      keptD += bits[h.staticCountOriginal + i];
    if (keptS != ns || keptD != nd)
      throw FormatError("gaussian mask inconsistent with header counts");
  }

  // SH keep bits per survivor.
  std::vector<std::array<uint8_t, 3>> shBits(ns + nd, {1, 1, 1});
  if (k >= 1) {
    BitReader br(c.section(Section::ShMask));
    for (size_t i = 0; i < ns + nd; ++i)
      for (int l = 1; l <= k; ++l) shBits[i][l - 1] = static_cast<uint8_t>(br.get());
  }

  // Grouping permutations.
  std::vector<uint32_t> permStatic(ns), permDynamic(nd);
  {
    const auto& bytes = c.section(Section::SortIdx);
    ByteReader r(bytes.data(), bytes.size());
    std::vector<uint8_t> seen(ns, 0);
    for (auto& p : permStatic) {
      p = r.u16();
      if (p >= ns || seen[p]) throw FormatError("sort_idx is not a permutation");
      seen[p] = 1;
    }
    seen.assign(nd, 0);
    for (auto& p : permDynamic) {
      p = r.u16();
      if (p >= nd || seen[p]) throw FormatError("sort_idx is not a permutation");
      seen[p] = 1;
    }
    if (r.remaining() != 0) throw FormatError("trailing bytes in sort_idx");
  }

  ParsedCodebooks cbs = parseCodebooks(c);

  // Entropy-coded index streams.
  std::array<std::vector<uint32_t>, kStreamCount> indices;
  if (ns + nd > 0) {
    const auto& bytes = c.section(Section::Indexes);
    ByteReader r(bytes.data(), bytes.size());
    for (size_t s = 0; s < kStreamCount; ++s) {
      uint32_t symbolCount = r.u32();
      uint32_t byteLength = r.u32();
      if (symbolCount == 0) {
        if (byteLength != 0) throw FormatError("empty stream with nonzero length");
        continue;
      }
      if (cbs.counts[s] == 0) throw FormatError("index stream without a codebook");
      std::vector<uint8_t> blob(byteLength);
      r.bytes(blob.data(), byteLength);
      SymbolTable table = SymbolTable::fromCounts(cbs.books[s].counts);
      indices[s] = rangeDecode(blob.data(), blob.size(), table, symbolCount);
      for (uint32_t idx : indices[s])
        if (idx >= cbs.counts[s]) throw FormatError("decoded index outside codebook");
    }
    if (r.remaining() != 0) throw FormatError("trailing bytes in indexes section");
  }

  auto expectCount = [&](size_t s, size_t expected) {
    if (indices[s].size() != expected)
      throw FormatError(std::string("stream ") + attrGroupName(streamGroup(s)) +
                        ": symbol count mismatch");
  };
  expectCount(0, ns);
  expectCount(1, ns);
  expectCount(2, ns);
  expectCount(6, nd);
  expectCount(7, nd * kf);
  expectCount(8, nd);

  OpacityPolicy policy = OpacityPolicy::fromBits(h.opacityPolicy);

  auto lookupVec3 = [&](size_t s, uint32_t idx) {
    const EcvqCodebook& cb = cbs.books[s];
    const float* w = cb.word(idx);
    return Vec3f{w[0], w[1], w[2]};
  };
  auto lookupQuat = [&](size_t s, uint32_t idx) {
    const EcvqCodebook& cb = cbs.books[s];
    const float* w = cb.word(idx);
    return Quatf{w[0], w[1], w[2], w[3]};
  };

  // Assemble SH coefficient vectors: DC from its stream, bands via the
  // grouping permutation order.
  auto assembleSh = [&](Component comp, size_t count,
                        const std::vector<uint32_t>& perm) -> std::vector<std::vector<Vec3f>> {
    size_t base = comp == Component::Static ? 0 : ns;
    size_t dcStream = comp == Component::Static ? 2 : 8;
    std::vector<std::vector<Vec3f>> sh(count, std::vector<Vec3f>(shLen, Vec3f{0, 0, 0}));
    for (size_t i = 0; i < count; ++i) sh[i][0] = lookupVec3(dcStream, indices[dcStream][i]);
    for (int l = 1; l <= k; ++l) {
      size_t s = (comp == Component::Static ? 0 : kAttrGroupCount) + 2 + l;
      size_t cursor = 0;
      for (uint32_t pi : perm) {
        if (!shBits[base + pi][l - 1]) continue;
        if (cursor >= indices[s].size())
          throw FormatError("SH index stream shorter than its mask");
        const EcvqCodebook& cb = cbs.books[s];
        const float* w = cb.word(indices[s][cursor++]);
        for (int t = 0; t < 2 * l + 1; ++t)
          sh[pi][static_cast<size_t>(l * l + t)] = Vec3f{w[t * 3], w[t * 3 + 1], w[t * 3 + 2]};
      }
      if (cursor != indices[s].size())
        throw FormatError("SH index stream longer than its mask");
    }
    return sh;
  };
  std::vector<std::vector<Vec3f>> shStatic = assembleSh(Component::Static, ns, permStatic);
  std::vector<std::vector<Vec3f>> shDynamic = assembleSh(Component::Dynamic, nd, permDynamic);

  // Statics.
  {
    const auto& mu0 = c.section(Section::Mu0);
    const auto& mud = c.section(Section::MuDisp);
    const auto& bop = c.section(Section::BaseOpacities);
    ByteReader r0(mu0.data(), mu0.size());
    ByteReader rd(mud.data(), mud.size());
    ByteReader rb(bop.data(), bop.size());
    ScalarQuantizer qs = quantizerFor(h.alphaStaticRange, h.opacityBits);
    ScalarQuantizer qd = quantizerFor(h.alphaDynamicRange, h.opacityBits);
    scene.statics.resize(ns);
    for (size_t i = 0; i < ns; ++i) {
      StaticGaussian& g = scene.statics[i];
      g.pivot.x = r0.f32();
      g.pivot.y = r0.f32();
      g.pivot.z = r0.f32();
      g.drift.x = rd.f32();
      g.drift.y = rd.f32();
      g.drift.z = rd.f32();
      g.scale = lookupVec3(0, indices[0][i]);
      g.rotation = lookupQuat(1, indices[1][i]);
      g.opacity = policy.alphaStatic ? scalarDequantize(rb.u8(), qs) : rb.f32();
      g.sh = std::move(shStatic[i]);
    }
    // Dynamics share the base-opacity section tail.
    scene.dynamics.resize(nd);
    const auto& centers = c.section(Section::OpacityCenters);
    const auto& widths = c.section(Section::BetaVar);
    ByteReader rc2(centers.data(), centers.size());
    ByteReader rw(widths.data(), widths.size());
    ScalarQuantizer qps = quantizerFor(h.plateauStartRange, h.opacityBits);
    ScalarQuantizer qpe = quantizerFor(h.plateauEndRange, h.opacityBits);
    ScalarQuantizer qrw = quantizerFor(h.riseWidthRange, h.opacityBits);
    ScalarQuantizer qfw = quantizerFor(h.fallWidthRange, h.opacityBits);

    // Trajectory coefficients.
    const auto& fm = c.section(Section::FMasked);
    ByteReader rf(fm.data(), fm.size());
    ScalarQuantizer qa[3] = {quantizerFor(h.coeffRange[0], h.coeffBits),
                             quantizerFor(h.coeffRange[1], h.coeffBits),
                             quantizerFor(h.coeffRange[2], h.coeffBits)};
    ScalarQuantizer qdet[3] = {quantizerFor(h.detailRange[0], h.coeffBits),
                               quantizerFor(h.detailRange[1], h.coeffBits),
                               quantizerFor(h.detailRange[2], h.coeffBits)};
    const int levels = h.waveletLevels;
    const int keep = h.keepDetailLevels;
    size_t paddedLen = kf;
    size_t approxCount = kf;
    if (levels >= 1) {
      size_t block = size_t{1} << levels;
      paddedLen = (kf + block - 1) / block * block;
      approxCount = paddedLen >> levels;
    }

    for (size_t i = 0; i < nd; ++i) {
      DynamicGaussian& g = scene.dynamics[i];
      if (levels >= 1) {
        WaveletPyramid pyr;
        pyr.levels = levels;
        pyr.originalLength = kf;
        pyr.approx.resize(approxCount);
        for (auto& v : pyr.approx)
          v = Vec3{scalarDequantize(rf.u16(), qa[0]), scalarDequantize(rf.u16(), qa[1]),
                   scalarDequantize(rf.u16(), qa[2])};
        pyr.details.resize(levels);
        for (int l = 1; l <= levels; ++l)
          pyr.details[l - 1].assign(paddedLen >> l, Vec3{0, 0, 0});
        for (int l = levels; l > levels - keep; --l)
          for (auto& v : pyr.details[l - 1])
            v = Vec3{scalarDequantize(rf.u16(), qdet[0]), scalarDequantize(rf.u16(), qdet[1]),
                     scalarDequantize(rf.u16(), qdet[2])};
        std::vector<Vec3> traj = haarInverse(pyr);
        g.keyPositions.resize(kf);
        for (size_t j = 0; j < kf; ++j) g.keyPositions[j] = traj[j].toFloat();
      } else {
        g.keyPositions.resize(kf);
        for (size_t j = 0; j < kf; ++j)
          g.keyPositions[j] =
              Vec3f{scalarDequantize(rf.u16(), qa[0]), scalarDequantize(rf.u16(), qa[1]),
                    scalarDequantize(rf.u16(), qa[2])};
      }
      g.keyRotations.resize(kf);
      for (size_t j = 0; j < kf; ++j)
        g.keyRotations[j] = lookupQuat(7, indices[7][i * kf + j]);
      g.scale = lookupVec3(6, indices[6][i]);
      g.baseOpacity = policy.alphaDynamic ? scalarDequantize(rb.u8(), qd) : rb.f32();
      if (policy.windowCenters) {
        g.plateauStart = scalarDequantize(rc2.u8(), qps);
        g.plateauEnd = scalarDequantize(rc2.u8(), qpe);
      } else {
        g.plateauStart = rc2.f32();
        g.plateauEnd = rc2.f32();
      }
      if (g.plateauEnd < g.plateauStart) g.plateauEnd = g.plateauStart;
      if (policy.edgeWidths) {
        g.riseWidth = scalarDequantize(rw.u8(), qrw);
        g.fallWidth = scalarDequantize(rw.u8(), qfw);
      } else {
        g.riseWidth = rw.f32();
        g.fallWidth = rw.f32();
      }
      g.sh = std::move(shDynamic[i]);
    }
    if (rf.remaining() != 0) throw FormatError("trailing bytes in f_masked");
    if (rb.remaining() != 0) throw FormatError("trailing bytes in base_opacities");
    if (rc2.remaining() != 0) throw FormatError("trailing bytes in opacity_centers");
    if (rw.remaining() != 0) throw FormatError("trailing bytes in beta_var");
    if (r0.remaining() != 0 || rd.remaining() != 0)
      throw FormatError("trailing bytes in position sections");
  }

  try {
    scene.validate();
  } catch (const ValidationError& e) {
    // Parseable bytes that decode to an invalid model mean the container is
    // damaged, not the caller's arguments.
    throw FormatError(std::string("decoded scene invalid: ") + e.what());
  }
  return scene;
}

}  // namespace g4dc
