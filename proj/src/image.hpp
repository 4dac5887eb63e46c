#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace g4dc {

// Planar-free RGB float image, values in [0, 1], row-major, 3 floats/pixel.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> px;

  Image() = default;
  Image(int w, int h) : width(w), height(h), px(static_cast<size_t>(w) * h * 3, 0.f) {}

  float* at(int x, int y) { return px.data() + (static_cast<size_t>(y) * width + x) * 3; }
  const float* at(int x, int y) const {
    return px.data() + (static_cast<size_t>(y) * width + x) * 3;
  }
  size_t pixelCount() const { return static_cast<size_t>(width) * height; }
  bool sameShape(const Image& o) const { return width == o.width && height == o.height; }
};

void writePpm(const Image& img, const std::string& path);

}  // namespace g4dc
