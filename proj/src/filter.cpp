#include "fdeid/filter.hpp"

#include <algorithm>
#include <cmath>

namespace fdeid {

double auto_sigma(int kernel_size) {
  return 0.3 * ((kernel_size - 1) / 2.0 - 1.0) + 0.8;
}

std::vector<double> gaussian_kernel_1d(int kernel_size, double sigma) {
  if (kernel_size < 1 || kernel_size % 2 == 0)
    raise(ErrorCode::InvalidKernel, "kernel size must be odd and >= 1");
  if (sigma <= 0.0) sigma = auto_sigma(kernel_size);
  const int half = kernel_size / 2;
  std::vector<double> taps(kernel_size);
  double sum = 0.0;
  for (int i = -half; i <= half; ++i) {
    const double v = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
    taps[i + half] = v;
    sum += v;
  }
  for (double& t : taps) t /= sum;
  return taps;
}

namespace {

inline int clamp_index(int i, int n) { return i < 0 ? 0 : (i >= n ? n - 1 : i); }

}  // namespace

void convolve_separable(const double* in, double* out, int w, int h, int channels,
                        const std::vector<double>& taps) {
  const int half = static_cast<int>(taps.size()) / 2;
  std::vector<double> tmp(static_cast<size_t>(w) * h * channels);
  // horizontal pass
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < channels; ++c) {
        double acc = 0.0;
        for (int t = -half; t <= half; ++t) {
          const int sx = clamp_index(x + t, w);
          acc += taps[t + half] * in[(static_cast<size_t>(y) * w + sx) * channels + c];
        }
        tmp[(static_cast<size_t>(y) * w + x) * channels + c] = acc;
      }
    }
  }
  // vertical pass
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < channels; ++c) {
        double acc = 0.0;
        for (int t = -half; t <= half; ++t) {
          const int sy = clamp_index(y + t, h);
          acc += taps[t + half] * tmp[(static_cast<size_t>(sy) * w + x) * channels + c];
        }
        out[(static_cast<size_t>(y) * w + x) * channels + c] = acc;
      }
    }
  }
}

Image gaussian_blur(const Image& img, int kernel_size, double sigma) {
  if (img.empty()) raise(ErrorCode::InvalidSize, "cannot blur empty image");
  const auto taps = gaussian_kernel_1d(kernel_size, sigma);
  if (taps.size() == 1) return img;
  const auto src = img.samples();
  std::vector<double> in(src.begin(), src.end());
  std::vector<double> out(in.size());
  convolve_separable(in.data(), out.data(), img.width(), img.height(), img.channels(), taps);
  Image res(img.width(), img.height(), img.channels());
  for (size_t i = 0; i < out.size(); ++i) res.set_raw(i, static_cast<float>(out[i]));
  return res;
}

}  // namespace fdeid
