#include "fdeid/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

namespace fdeid {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return "IoError";
    case ErrorCode::Format: return "FormatError";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::InvalidSize: return "InvalidSize";
    case ErrorCode::DegenerateLandmarks: return "DegenerateLandmarks";
    case ErrorCode::SingularTransform: return "SingularTransform";
    case ErrorCode::InvalidKernel: return "InvalidKernel";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::OracleFailure: return "OracleFailure";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::NumericalError: return "NumericalError";
    case ErrorCode::EmptyPairs: return "EmptyPairs";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::ZeroInterOcular: return "ZeroInterOcular";
    case ErrorCode::WeightError: return "WeightError";
    case ErrorCode::NoViableMethod: return "NoViableMethod";
    case ErrorCode::UnknownAttribute: return "UnknownAttribute";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::MissingDetection: return "MissingDetection";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

uint8_t quantize_8bit(float sample) {
  const float v = Image::clamp01(sample) * 255.0f;
  // round-half-up for deterministic cross-platform files
  int q = static_cast<int>(std::floor(v + 0.5f));
  if (q > 255) q = 255;
  return static_cast<uint8_t>(q);
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

Image load_png(std::FILE* fp, const std::filesystem::path& path) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) raise(ErrorCode::Io, "png reader allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    raise(ErrorCode::Io, "png info allocation failed");
  }
  std::vector<uint8_t> interleaved;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    raise(ErrorCode::Format, "corrupt PNG: " + path.string());
  }
  png_init_io(png, fp);
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);

  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    raise(ErrorCode::Format, "unsupported PNG channel layout in " + path.string());
  }

  const size_t row_bytes = png_get_rowbytes(png, info);
  interleaved.resize(row_bytes * h);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = interleaved.data() + y * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  std::vector<float> samples(static_cast<size_t>(w) * h * channels);
  for (size_t i = 0; i < samples.size(); ++i)
    samples[i] = static_cast<float>(interleaved[i]) / 255.0f;
  return Image::from_data(static_cast<int>(w), static_cast<int>(h), channels, std::move(samples));
}

void save_png(const Image& img, const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) raise(ErrorCode::Io, "cannot open for writing: " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) raise(ErrorCode::Io, "png writer allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    raise(ErrorCode::Io, "png info allocation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    raise(ErrorCode::Io, "png write failed: " + path.string());
  }
  png_init_io(png, fp.get());
  const int color_type = img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(png, info, img.width(), img.height(), 8, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<uint8_t> row(static_cast<size_t>(img.width()) * img.channels());
  for (int y = 0; y < img.height(); ++y) {
    size_t i = 0;
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < img.channels(); ++c) row[i++] = quantize_8bit(img.at(x, y, c));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// Reads the next PNM token, skipping whitespace and '#' comments.
std::string pnm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {}
      continue;
    }
    if (!std::isspace(ch)) {
      tok.push_back(static_cast<char>(ch));
      while ((ch = in.peek()) != EOF && !std::isspace(ch)) tok.push_back(static_cast<char>(in.get()));
      return tok;
    }
  }
  return tok;
}

Image load_pnm(std::ifstream& in, int channels, const std::filesystem::path& path) {
  const std::string ws = pnm_token(in), hs = pnm_token(in), ms = pnm_token(in);
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(ws);
    h = std::stoi(hs);
    maxval = std::stoi(ms);
  } catch (...) {
    raise(ErrorCode::Format, "malformed PNM header in " + path.string());
  }
  if (w <= 0 || h <= 0 || maxval != 255)
    raise(ErrorCode::Format, "unsupported PNM geometry or maxval in " + path.string());
  in.get();  // single whitespace after maxval
  std::vector<uint8_t> bytes(static_cast<size_t>(w) * h * channels);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<size_t>(in.gcount()) != bytes.size())
    raise(ErrorCode::Format, "truncated PNM payload in " + path.string());
  std::vector<float> samples(bytes.size());
  for (size_t i = 0; i < bytes.size(); ++i) samples[i] = static_cast<float>(bytes[i]) / 255.0f;
  return Image::from_data(w, h, channels, std::move(samples));
}

void save_pnm(const Image& img, const std::filesystem::path& path) {
  const bool color = path.extension() == ".ppm";
  if ((color && img.channels() != 3) || (!color && img.channels() != 1))
    raise(ErrorCode::Format, "channel count does not match PNM format for " + path.string());
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::Io, "cannot open for writing: " + path.string());
  out << (color ? "P6" : "P5") << "\n" << img.width() << " " << img.height() << "\n255\n";
  std::vector<uint8_t> payload;
  payload.reserve(img.sample_count());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < img.channels(); ++c) payload.push_back(quantize_8bit(img.at(x, y, c)));
  out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (!out) raise(ErrorCode::Io, "write failed: " + path.string());
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) raise(ErrorCode::Io, "cannot open: " + path.string());
  char magic[8] = {};
  probe.read(magic, sizeof(magic));
  const auto got = probe.gcount();
  probe.close();
  if (got >= 8 && std::memcmp(magic, "\x89PNG\r\n\x1a\n", 8) == 0) {
    FilePtr fp(std::fopen(path.string().c_str(), "rb"));
    if (!fp) raise(ErrorCode::Io, "cannot open: " + path.string());
    return load_png(fp.get(), path);
  }
  if (got >= 2 && magic[0] == 'P' && (magic[1] == '5' || magic[1] == '6')) {
    std::ifstream in(path, std::ios::binary);
    in.seekg(2);
    return load_pnm(in, magic[1] == '6' ? 3 : 1, path);
  }
  raise(ErrorCode::Format, "unsupported image format: " + path.string());
}

void save_image(const Image& img, const std::filesystem::path& path) {
  if (img.empty()) raise(ErrorCode::InvalidSize, "refusing to save empty image");
  const auto ext = path.extension();
  if (ext == ".png") {
    save_png(img, path);
  } else if (ext == ".ppm" || ext == ".pgm") {
    save_pnm(img, path);
  } else {
    raise(ErrorCode::Format, "unsupported output extension: " + path.string());
  }
}

Image crop(const Image& img, const PixelRect& rect) {
  if (rect.x0 < 0 || rect.y0 < 0 || rect.w < 0 || rect.h < 0 ||
      rect.x0 + rect.w > img.width() || rect.y0 + rect.h > img.height())
    raise(ErrorCode::OutOfBounds, "crop rect exceeds image bounds");
  Image out(rect.w, rect.h, img.channels());
  for (int y = 0; y < rect.h; ++y)
    for (int x = 0; x < rect.w; ++x)
      for (int c = 0; c < img.channels(); ++c)
        out.set(x, y, c, img.at(rect.x0 + x, rect.y0 + y, c));
  return out;
}

Image resize(const Image& img, int w, int h, ResizeMode mode) {
  if (w < 1 || h < 1) raise(ErrorCode::InvalidSize, "resize target must be at least 1x1");
  if (img.empty()) raise(ErrorCode::InvalidSize, "cannot resize empty image");
  Image out(w, h, img.channels());
  const double sx = static_cast<double>(img.width()) / w;
  const double sy = static_cast<double>(img.height()) / h;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mode == ResizeMode::Nearest) {
        int ix = static_cast<int>(std::floor((x + 0.5) * sx));
        int iy = static_cast<int>(std::floor((y + 0.5) * sy));
        ix = std::min(std::max(ix, 0), img.width() - 1);
        iy = std::min(std::max(iy, 0), img.height() - 1);
        for (int c = 0; c < img.channels(); ++c) out.set(x, y, c, img.at(ix, iy, c));
      } else {
        const double u = (x + 0.5) * sx - 0.5;
        const double v = (y + 0.5) * sy - 0.5;
        const int x0 = static_cast<int>(std::floor(u));
        const int y0 = static_cast<int>(std::floor(v));
        const double fx = u - x0;
        const double fy = v - y0;
        const int xa = std::min(std::max(x0, 0), img.width() - 1);
        const int xb = std::min(std::max(x0 + 1, 0), img.width() - 1);
        const int ya = std::min(std::max(y0, 0), img.height() - 1);
        const int yb = std::min(std::max(y0 + 1, 0), img.height() - 1);
        for (int c = 0; c < img.channels(); ++c) {
          const double top = (1.0 - fx) * img.at(xa, ya, c) + fx * img.at(xb, ya, c);
          const double bot = (1.0 - fx) * img.at(xa, yb, c) + fx * img.at(xb, yb, c);
          out.set(x, y, c, static_cast<float>((1.0 - fy) * top + fy * bot));
        }
      }
    }
  }
  return out;
}

double luma_at(const Image& img, int x, int y) {
  if (img.channels() == 1) return img.at(x, y, 0);
  return 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
}

std::vector<double> to_luma(const Image& img) {
  std::vector<double> plane(static_cast<size_t>(img.width()) * img.height());
  size_t i = 0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) plane[i++] = luma_at(img, x, y);
  return plane;
}

}  // namespace fdeid
