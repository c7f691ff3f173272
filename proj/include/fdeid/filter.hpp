#pragma once

#include <vector>

#include "fdeid/image.hpp"

namespace fdeid {

/// 0.3 * ((k - 1) / 2 - 1) + 0.8, the conventional kernel-size-driven sigma.
double auto_sigma(int kernel_size);

/// Normalized (sum 1) 1-D Gaussian taps; kernel_size must be odd and >= 1.
std::vector<double> gaussian_kernel_1d(int kernel_size, double sigma);

/// Separable convolution of an interleaved double plane with edge-clamped
/// borders. `in` and `out` hold w*h*channels samples, row-major.
void convolve_separable(const double* in, double* out, int w, int h, int channels,
                        const std::vector<double>& taps);

/// Edge-clamped separable Gaussian blur; sigma == 0 selects auto_sigma.
Image gaussian_blur(const Image& img, int kernel_size, double sigma);

}  // namespace fdeid
