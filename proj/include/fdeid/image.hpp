#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fdeid/errors.hpp"

namespace fdeid {

/// Axis-aligned pixel rectangle, top-left inclusive.
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int w = 0;
  int h = 0;
};

/// Owned H x W x C raster of normalized float samples in [0, 1],
/// row-major with interleaved channels. Immutable by convention once
/// constructed by an operation; concurrent reads are safe.
class Image {
 public:
  Image() = default;

  Image(int width, int height, int channels, float fill = 0.0f)
      : width_(width), height_(height), channels_(channels),
        data_(static_cast<size_t>(width) * height * channels, fill) {
    if (width < 0 || height < 0 || (channels != 1 && channels != 3))
      raise(ErrorCode::InvalidSize, "image dimensions must be non-negative with 1 or 3 channels");
  }

  static Image from_data(int width, int height, int channels, std::vector<float> data) {
    Image img(width, height, channels);
    if (data.size() != img.data_.size())
      raise(ErrorCode::InvalidSize, "sample buffer does not match dimensions");
    img.data_ = std::move(data);
    return img;
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  size_t sample_count() const { return data_.size(); }

  float at(int x, int y, int c) const {
    return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }

  /// Clamps to [0, 1] on write; every stored sample honors the invariant.
  void set(int x, int y, int c, float v) {
    data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c] = clamp01(v);
  }

  void set_raw(size_t index, float v) { data_[index] = clamp01(v); }

  std::span<const float> samples() const { return data_; }

  static float clamp01(float v) { return v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v); }

  bool same_shape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  bool operator==(const Image& other) const {
    return same_shape(other) && data_ == other.data_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

enum class ResizeMode { Nearest, Bilinear };

/// Loads an 8-bit PNG, PPM (P6) or PGM (P5) file; samples are stored
/// byte values divided by 255, exact. Format is detected from content.
Image load_image(const std::filesystem::path& path);

/// Writes an 8-bit file; stored byte = round(sample * 255), round-half-up.
/// Format chosen by extension: .png, .ppm (3-channel), .pgm (1-channel).
void save_image(const Image& img, const std::filesystem::path& path);

uint8_t quantize_8bit(float sample);

Image crop(const Image& img, const PixelRect& rect);

/// Resampling uses half-pixel centers: source x = (x + 0.5) * sw / dw - 0.5,
/// edge-clamped; nearest mode takes floor((x + 0.5) * sw / dw).
Image resize(const Image& img, int w, int h, ResizeMode mode);

/// Rec.601 luma for RGB, passthrough for single-channel.
double luma_at(const Image& img, int x, int y);

/// Whole-image luma plane in doubles (row-major).
std::vector<double> to_luma(const Image& img);

}  // namespace fdeid
