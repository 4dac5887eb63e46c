#include "wavelet.hpp"

#include <cmath>

#include "error.hpp"

namespace g4dc {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

size_t paddedLengthFor(size_t n, int levels) {
  size_t block = size_t{1} << levels;
  return (n + block - 1) / block * block;
}

// Symmetric (edge-repeating) extension: a b c -> a b c c b a a b c ...
double sampleSymmetric(const std::vector<double>& s, size_t i) {
  size_t n = s.size();
  size_t period = 2 * n;
  size_t j = i % period;
  return j < n ? s[j] : s[period - 1 - j];
}

}  // namespace

WaveletPyramid1d haarForward1d(const std::vector<double>& signal, int levels) {
  if (signal.size() < 2) throw ValidationError("haar transform needs at least 2 samples");
  if (levels < 1) throw ValidationError("haar transform needs at least 1 level");
  size_t padded = paddedLengthFor(signal.size(), levels);
  if (padded < (size_t{1} << levels))
    throw ValidationError("haar transform: too many levels for signal length");

  WaveletPyramid1d p;
  p.levels = levels;
  p.originalLength = signal.size();
  std::vector<double> cur(padded);
  for (size_t i = 0; i < padded; ++i) cur[i] = sampleSymmetric(signal, i);

  p.details.resize(levels);
  for (int l = 0; l < levels; ++l) {
    size_t half = cur.size() / 2;
    std::vector<double> approx(half), detail(half);
    for (size_t k = 0; k < half; ++k) {
      approx[k] = (cur[2 * k] + cur[2 * k + 1]) * kInvSqrt2;
      detail[k] = (cur[2 * k] - cur[2 * k + 1]) * kInvSqrt2;
    }
    p.details[l] = std::move(detail);
    cur = std::move(approx);
  }
  p.approx = std::move(cur);
  return p;
}

std::vector<double> haarInverse1d(const WaveletPyramid1d& pyramid) {
  if (pyramid.levels < 1) throw ValidationError("haar inverse: invalid level count");
  std::vector<double> cur = pyramid.approx;
  if (static_cast<int>(pyramid.details.size()) != pyramid.levels)
    throw ValidationError("haar inverse: detail level count mismatch");
  for (int l = pyramid.levels - 1; l >= 0; --l) {
    const std::vector<double>& detail = pyramid.details[l];
    if (detail.size() != cur.size())
      throw ValidationError("haar inverse: detail level size mismatch");
    std::vector<double> up(cur.size() * 2);
    for (size_t k = 0; k < cur.size(); ++k) {
      up[2 * k] = (cur[k] + detail[k]) * kInvSqrt2;
      up[2 * k + 1] = (cur[k] - detail[k]) * kInvSqrt2;
    }
    cur = std::move(up);
  }
  if (pyramid.originalLength > cur.size())
    throw ValidationError("haar inverse: original length exceeds padded length");
  cur.resize(pyramid.originalLength);
  return cur;
}

WaveletPyramid haarForward(const std::vector<Vec3>& trajectory, int levels) {
  std::vector<double> axis(trajectory.size());
  WaveletPyramid p;
  for (int a = 0; a < 3; ++a) {
    for (size_t i = 0; i < trajectory.size(); ++i) axis[i] = trajectory[i][a];
    WaveletPyramid1d p1 = haarForward1d(axis, levels);
    if (a == 0) {
      p.levels = p1.levels;
      p.originalLength = p1.originalLength;
      p.approx.resize(p1.approx.size());
      p.details.resize(p1.details.size());
      for (size_t l = 0; l < p1.details.size(); ++l) p.details[l].resize(p1.details[l].size());
    }
    auto set = [a](Vec3& v, double val) {
      if (a == 0)
        v.x = val;
      else if (a == 1)
        v.y = val;
      else
        v.z = val;
    };
    for (size_t i = 0; i < p1.approx.size(); ++i) set(p.approx[i], p1.approx[i]);
    for (size_t l = 0; l < p1.details.size(); ++l)
      for (size_t i = 0; i < p1.details[l].size(); ++i) set(p.details[l][i], p1.details[l][i]);
  }
  return p;
}

std::vector<Vec3> haarInverse(const WaveletPyramid& pyramid) {
  std::vector<Vec3> out;
  for (int a = 0; a < 3; ++a) {
    WaveletPyramid1d p1;
    p1.levels = pyramid.levels;
    p1.originalLength = pyramid.originalLength;
    p1.approx.resize(pyramid.approx.size());
    for (size_t i = 0; i < pyramid.approx.size(); ++i) p1.approx[i] = pyramid.approx[i][a];
    p1.details.resize(pyramid.details.size());
    for (size_t l = 0; l < pyramid.details.size(); ++l) {
      p1.details[l].resize(pyramid.details[l].size());
      for (size_t i = 0; i < pyramid.details[l].size(); ++i)
        p1.details[l][i] = pyramid.details[l][i][a];
    }
    std::vector<double> axis = haarInverse1d(p1);
    if (a == 0) out.resize(axis.size());
    for (size_t i = 0; i < axis.size(); ++i) {
      if (a == 0)
        out[i].x = axis[i];
      else if (a == 1)
        out[i].y = axis[i];
      else
        out[i].z = axis[i];
    }
  }
  return out;
}

WaveletPyramid maskDetails(const WaveletPyramid& pyramid, int keepLevels) {
  if (keepLevels < 0) keepLevels = 0;
  if (keepLevels > pyramid.levels) keepLevels = pyramid.levels;
  WaveletPyramid out = pyramid;
  // details[0] is the finest level; keep only the keepLevels coarsest.
  int zeroUpTo = pyramid.levels - keepLevels;
  for (int l = 0; l < zeroUpTo; ++l)
    for (auto& v : out.details[l]) v = Vec3{0, 0, 0};
  return out;
}

size_t storedCoefficientRows(size_t length, int levels, int keepLevels) {
  if (levels <= 0) return length;
  if (keepLevels < 0) keepLevels = 0;
  if (keepLevels > levels) keepLevels = levels;
  size_t padded = paddedLengthFor(length, levels);
  size_t rows = padded >> levels;
  for (int l = levels; l > levels - keepLevels; --l) rows += padded >> l;
  return rows;
}

}  // namespace g4dc
