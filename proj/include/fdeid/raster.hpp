#pragma once

#include <vector>

namespace fdeid {

/// Unconstrained double-precision raster, same layout as Image samples.
/// Used for gradients and other intermediate fields that may leave [0, 1].
struct Raster64 {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> v;

  Raster64() = default;
  Raster64(int w, int h, int c)
      : width(w), height(h), channels(c),
        v(static_cast<size_t>(w) * h * c, 0.0) {}

  double& at(int x, int y, int c) {
    return v[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  double at(int x, int y, int c) const {
    return v[(static_cast<size_t>(y) * width + x) * channels + c];
  }
};

}  // namespace fdeid
