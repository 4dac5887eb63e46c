#pragma once

#include <cstddef>
#include <vector>

#include "math.hpp"

namespace g4dc {

// Multi-level orthonormal Haar decomposition of a 3D trajectory. Each level
// halves the approximation: a_k = (p_2k + p_2k+1)/sqrt(2),
// d_k = (p_2k - p_2k+1)/sqrt(2). Inputs whose length is not a multiple of
// 2^levels are symmetric-padded before analysis and truncated after
// synthesis; originalLength records the true length.
struct WaveletPyramid {
  int levels = 0;
  size_t originalLength = 0;
  std::vector<Vec3> approx;                  // paddedLength / 2^levels rows
  std::vector<std::vector<Vec3>> details;    // details[l-1]: paddedLength / 2^l rows

  size_t paddedLength() const { return approx.size() << levels; }
};

// Single-axis variants, used by the 3D wrappers and directly by tests.
struct WaveletPyramid1d {
  int levels = 0;
  size_t originalLength = 0;
  std::vector<double> approx;
  std::vector<std::vector<double>> details;
};

WaveletPyramid1d haarForward1d(const std::vector<double>& signal, int levels);
std::vector<double> haarInverse1d(const WaveletPyramid1d& pyramid);

WaveletPyramid haarForward(const std::vector<Vec3>& trajectory, int levels);
std::vector<Vec3> haarInverse(const WaveletPyramid& pyramid);

// Zeroes all detail levels finer than the keepLevels coarsest ones
// (keepLevels = 0 discards every detail level). keepLevels clamps to
// [0, pyramid.levels].
WaveletPyramid maskDetails(const WaveletPyramid& pyramid, int keepLevels);

// Number of coefficient rows serialized for a masked pyramid: the
// approximation plus the keepLevels coarsest detail levels.
size_t storedCoefficientRows(size_t length, int levels, int keepLevels);

}  // namespace g4dc
