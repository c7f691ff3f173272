#pragma once

#include <array>
#include <cstdint>

#include "fdeid/image.hpp"

namespace fdeid {

struct BlurParams {
  int kernel_size = 51;  // must be odd
  double sigma = 0.0;    // 0 selects the kernel-size-driven sigma
};

enum class PixelateInterp { Nearest, Linear };

struct PixelateParams {
  int block_size = 16;
  PixelateInterp interpolation = PixelateInterp::Nearest;
};

enum class MaskType { Solid, RandomColor, White, Black };

struct MaskParams {
  std::array<float, 3> mask_color = {0.0f, 0.0f, 0.0f};
  MaskType mask_type = MaskType::Solid;
};

/// Separable Gaussian low-pass with edge-clamped borders.
Image blur(const Image& face, const BlurParams& p);

/// Mosaic effect: block_size^2 cells replaced by their area mean (nearest)
/// or by a bilinear upsample of the block-mean grid (linear).
Image pixelate(const Image& face, const PixelateParams& p);

/// Replaces every pixel with the resolved mask color; random_color draws
/// one seeded uniform RGB triple per call.
Image mask(const Image& face, const MaskParams& p, uint64_t rng_seed);

}  // namespace fdeid
