#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fdeid/image.hpp"

namespace fdeid {

/// Reference set of aligned faces used as substitution material.
/// Loaded once, then immutable and shareable across threads.
class Gallery {
 public:
  static Gallery from_images(std::vector<Image> faces, std::vector<std::string> labels = {});

  /// Manifest: newline-delimited image paths, optionally `path<TAB>identity`.
  /// Relative paths resolve against the manifest's directory.
  static Gallery load(const std::filesystem::path& manifest);

  int size() const { return static_cast<int>(faces_.size()); }
  const Image& face(int i) const { return faces_[static_cast<size_t>(i)]; }
  const std::string& label(int i) const { return labels_[static_cast<size_t>(i)]; }
  const std::string& source_manifest() const { return source_manifest_; }

  int face_width() const { return faces_.front().width(); }
  int face_height() const { return faces_.front().height(); }
  int face_channels() const { return faces_.front().channels(); }

 private:
  std::vector<Image> faces_;
  std::vector<std::string> labels_;
  std::string source_manifest_;
};

enum class KSameVariant { Average, Select, Furthest };
enum class SelectionMode { Closest, Furthest, Random };

struct KSameParams {
  int k = 10;
  KSameVariant variant = KSameVariant::Average;
  SelectionMode selection_mode = SelectionMode::Closest;
  uint64_t rng_seed = 0;
  bool exclude_self = false;  // drop gallery entries at pixel distance exactly 0
};

/// Indices of the k gallery faces nearest to `face` by pixel-space L2,
/// ascending distance, ties broken by lower index.
std::vector<int> knn_pixel(const Image& face, const Gallery& g, int k,
                           bool exclude_self = false);

/// Pixel-wise arithmetic mean of the k nearest gallery faces.
Image k_same_average(const Image& face, const Gallery& g, const KSameParams& p);

/// Single representative from the k-NN set per selection_mode.
Image k_same_select(const Image& face, const Gallery& g, const KSameParams& p);

/// The member of the k-NN set most distant from the probe (rank-k neighbor).
Image k_same_furthest(const Image& face, const Gallery& g, const KSameParams& p);

}  // namespace fdeid
