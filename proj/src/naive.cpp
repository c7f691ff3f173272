#include "fdeid/naive.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fdeid/filter.hpp"
#include "fdeid/rng.hpp"

namespace fdeid {

Image blur(const Image& face, const BlurParams& p) {
  if (face.empty()) raise(ErrorCode::InvalidSize, "cannot blur empty image");
  if (p.kernel_size % 2 == 0 || p.kernel_size < 1)
    raise(ErrorCode::InvalidKernel, "blur kernel size must be odd");
  if (p.kernel_size == 1) return face;
  return gaussian_blur(face, p.kernel_size, p.sigma);
}

Image pixelate(const Image& face, const PixelateParams& p) {
  if (face.empty()) raise(ErrorCode::InvalidSize, "cannot pixelate empty image");
  const int block = std::max(1, p.block_size);
  if (block == 1) return face;
  const int w = face.width(), h = face.height(), ch = face.channels();
  const int gw = (w + block - 1) / block;
  const int gh = (h + block - 1) / block;

  // area means of each cell
  std::vector<double> grid(static_cast<size_t>(gw) * gh * ch, 0.0);
  for (int gy = 0; gy < gh; ++gy) {
    for (int gx = 0; gx < gw; ++gx) {
      const int x0 = gx * block, x1 = std::min(w, x0 + block);
      const int y0 = gy * block, y1 = std::min(h, y0 + block);
      const double count = static_cast<double>(x1 - x0) * (y1 - y0);
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x) acc += face.at(x, y, c);
        grid[(static_cast<size_t>(gy) * gw + gx) * ch + c] = acc / count;
      }
    }
  }

  Image out(w, h, ch);
  if (p.interpolation == PixelateInterp::Nearest) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < ch; ++c)
          out.set(x, y, c, static_cast<float>(
              grid[(static_cast<size_t>(y / block) * gw + x / block) * ch + c]));
    return out;
  }

  // linear: bilinear upsample of the block-mean grid, cell centers as samples
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double u = (x + 0.5) / block - 0.5;
      const double v = (y + 0.5) / block - 0.5;
      const int gx0 = static_cast<int>(std::floor(u));
      const int gy0 = static_cast<int>(std::floor(v));
      const double fx = u - gx0, fy = v - gy0;
      const auto cgx = [&](int g) { return std::min(std::max(g, 0), gw - 1); };
      const auto cgy = [&](int g) { return std::min(std::max(g, 0), gh - 1); };
      for (int c = 0; c < ch; ++c) {
        const auto g = [&](int gx, int gy) {
          return grid[(static_cast<size_t>(cgy(gy)) * gw + cgx(gx)) * ch + c];
        };
        const double top = (1.0 - fx) * g(gx0, gy0) + fx * g(gx0 + 1, gy0);
        const double bot = (1.0 - fx) * g(gx0, gy0 + 1) + fx * g(gx0 + 1, gy0 + 1);
        out.set(x, y, c, static_cast<float>((1.0 - fy) * top + fy * bot));
      }
    }
  }
  return out;
}

Image mask(const Image& face, const MaskParams& p, uint64_t rng_seed) {
  if (face.empty()) raise(ErrorCode::InvalidSize, "cannot mask empty image");
  std::array<float, 3> color = p.mask_color;
  switch (p.mask_type) {
    case MaskType::Solid:
      break;
    case MaskType::White:
      color = {1.0f, 1.0f, 1.0f};
      break;
    case MaskType::Black:
      color = {0.0f, 0.0f, 0.0f};
      break;
    case MaskType::RandomColor: {
      Rng rng(rng_seed);
      for (auto& v : color) v = static_cast<float>(rng.uniform());
      break;
    }
  }
  Image out(face.width(), face.height(), face.channels());
  const float gray =
      0.299f * color[0] + 0.587f * color[1] + 0.114f * color[2];
  for (int y = 0; y < face.height(); ++y)
    for (int x = 0; x < face.width(); ++x)
      for (int c = 0; c < face.channels(); ++c)
        out.set(x, y, c, face.channels() == 1 ? gray : color[static_cast<size_t>(c)]);
  return out;
}

}  // namespace fdeid
