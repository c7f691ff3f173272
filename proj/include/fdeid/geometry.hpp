#pragma once

#include <array>

#include "fdeid/image.hpp"

namespace fdeid {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Five facial landmarks in pixel coordinates (pixel centers at integers),
/// ordered left-eye, right-eye, nose-tip, left-mouth, right-mouth.
struct Landmarks5 {
  std::array<Point2, 5> pts{};
};

/// Rigid similarity (rotation + isotropic scale + translation), no reflection.
class SimilarityTransform {
 public:
  SimilarityTransform() = default;

  static SimilarityTransform from_parts(double scale, double rotation, double tx, double ty);
  static SimilarityTransform identity() { return from_parts(1.0, 0.0, 0.0, 0.0); }

  double scale() const { return scale_; }
  double rotation() const { return rotation_; }
  double tx() const { return tx_; }
  double ty() const { return ty_; }

  /// Row-major 2x3 matrix [a -b tx; b a ty], a = s*cos(r), b = s*sin(r).
  std::array<double, 6> matrix() const;

  Point2 apply(const Point2& p) const;

  SimilarityTransform inverse() const;  // throws SingularTransform when scale ~ 0

  /// this after `inner`: (this . inner)(p) = this(inner(p)).
  SimilarityTransform compose(const SimilarityTransform& inner) const;

 private:
  double scale_ = 1.0;
  double rotation_ = 0.0;
  double tx_ = 0.0;
  double ty_ = 0.0;
};

struct BlendSpec {
  double feather = 8.0;  // linear alpha ramp width in pixels; 0 = hard mask
};

struct AlignedFace {
  Image face;
  SimilarityTransform transform;  // source pixel coords -> template coords
  PixelRect source_rect_hint;
};

/// Canonical 5-point destination template for a 112x112 crop.
const Landmarks5& arcface_template_112();

/// Template rescaled for an arbitrary square crop size.
Landmarks5 scaled_template(int crop_size);

/// Least-squares similarity minimizing sum ||T*src_i - dst_i||^2
/// (closed form, reflection disallowed).
SimilarityTransform estimate_similarity(const Landmarks5& src, const Landmarks5& dst);

/// output(p) = bilinear sample of img at T^-1 * p, edge-clamped.
Image warp_to_template(const Image& img, const SimilarityTransform& t, int size);

/// Warps deid_face back through T^-1 and composites over the background
/// under a feathered alpha mask. Pixels with zero alpha are bit-identical
/// to the background. Alpha at a background pixel q with p = T*q:
///   d = min(p.x, p.y, S-1-p.x, S-1-p.y)
///   alpha = feather > 0 ? clamp(0.5 + d / feather, 0, 1) : (d >= 0 ? 1 : 0)
/// so the ramp is centered on the outermost pixel ring of the crop.
Image reinsert(const Image& background, const Image& deid_face,
               const SimilarityTransform& t, const BlendSpec& blend);

/// Convenience: estimate transform against the scaled template and warp.
AlignedFace align_face(const Image& img, const Landmarks5& lm, int crop_size);

}  // namespace fdeid
