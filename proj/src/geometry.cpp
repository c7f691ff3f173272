#include "fdeid/geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace fdeid {

SimilarityTransform SimilarityTransform::from_parts(double scale, double rotation,
                                                    double tx, double ty) {
  if (!(scale > 0.0) || !std::isfinite(scale))
    raise(ErrorCode::SingularTransform, "similarity scale must be positive and finite");
  SimilarityTransform t;
  t.scale_ = scale;
  t.rotation_ = rotation;
  t.tx_ = tx;
  t.ty_ = ty;
  return t;
}

std::array<double, 6> SimilarityTransform::matrix() const {
  const double a = scale_ * std::cos(rotation_);
  const double b = scale_ * std::sin(rotation_);
  return {a, -b, tx_, b, a, ty_};
}

Point2 SimilarityTransform::apply(const Point2& p) const {
  const auto m = matrix();
  return {m[0] * p.x + m[1] * p.y + m[2], m[3] * p.x + m[4] * p.y + m[5]};
}

SimilarityTransform SimilarityTransform::inverse() const {
  if (scale_ < 1e-12) raise(ErrorCode::SingularTransform, "cannot invert near-zero scale");
  const double inv_scale = 1.0 / scale_;
  const double a = inv_scale * std::cos(-rotation_);
  const double b = inv_scale * std::sin(-rotation_);
  // T^-1: x -> R(-r)/s * (x - t)
  return from_parts(inv_scale, -rotation_, -(a * tx_ - b * ty_), -(b * tx_ + a * ty_));
}

SimilarityTransform SimilarityTransform::compose(const SimilarityTransform& inner) const {
  const Point2 t = apply({inner.tx_, inner.ty_});
  double rot = rotation_ + inner.rotation_;
  // keep rotation in (-pi, pi] for stable comparisons
  while (rot > M_PI) rot -= 2.0 * M_PI;
  while (rot <= -M_PI) rot += 2.0 * M_PI;
  return from_parts(scale_ * inner.scale_, rot, t.x, t.y);
}

const Landmarks5& arcface_template_112() {
  static const Landmarks5 tmpl{{{{38.2946, 51.6963},
                                 {73.5318, 51.5014},
                                 {56.0252, 71.7366},
                                 {41.5493, 92.3655},
                                 {70.7299, 92.2041}}}};
  return tmpl;
}

Landmarks5 scaled_template(int crop_size) {
  Landmarks5 out = arcface_template_112();
  const double s = static_cast<double>(crop_size) / 112.0;
  for (auto& p : out.pts) {
    p.x *= s;
    p.y *= s;
  }
  return out;
}

SimilarityTransform estimate_similarity(const Landmarks5& src, const Landmarks5& dst) {
  constexpr int n = 5;
  Eigen::Matrix<double, 2, n> X, Y;
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(src.pts[i].x) || !std::isfinite(src.pts[i].y) ||
        !std::isfinite(dst.pts[i].x) || !std::isfinite(dst.pts[i].y))
      raise(ErrorCode::DegenerateLandmarks, "non-finite landmark coordinate");
    X.col(i) << src.pts[i].x, src.pts[i].y;
    Y.col(i) << dst.pts[i].x, dst.pts[i].y;
  }
  const Eigen::Vector2d mx = X.rowwise().mean();
  const Eigen::Vector2d my = Y.rowwise().mean();
  const Eigen::Matrix<double, 2, n> Xc = X.colwise() - mx;
  const Eigen::Matrix<double, 2, n> Yc = Y.colwise() - my;

  const double var_x = Xc.squaredNorm() / n;
  if (var_x < 1e-12) raise(ErrorCode::DegenerateLandmarks, "source landmarks are coincident");

  const Eigen::Matrix2d sigma = Yc * Xc.transpose() / n;
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(sigma, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector2d d = svd.singularValues();
  if (d(1) <= 1e-9 * std::max(1.0, d(0)))
    raise(ErrorCode::DegenerateLandmarks, "landmarks are collinear; similarity fit is ill-posed");

  Eigen::Vector2d s(1.0, 1.0);
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) s(1) = -1.0;
  const Eigen::Matrix2d rot = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
  const double scale = (d.dot(s)) / var_x;
  if (!(scale > 0.0)) raise(ErrorCode::DegenerateLandmarks, "fit collapsed to non-positive scale");
  const Eigen::Vector2d t = my - scale * rot * mx;
  return SimilarityTransform::from_parts(scale, std::atan2(rot(1, 0), rot(0, 0)), t(0), t(1));
}

namespace {

// Bilinear sample at real coordinates (pixel centers at integers), edge-clamped.
double sample_bilinear(const Image& img, double u, double v, int c) {
  const int x0 = static_cast<int>(std::floor(u));
  const int y0 = static_cast<int>(std::floor(v));
  const double fx = u - x0;
  const double fy = v - y0;
  const auto cx = [&](int x) { return std::min(std::max(x, 0), img.width() - 1); };
  const auto cy = [&](int y) { return std::min(std::max(y, 0), img.height() - 1); };
  const double top = (1.0 - fx) * img.at(cx(x0), cy(y0), c) + fx * img.at(cx(x0 + 1), cy(y0), c);
  const double bot = (1.0 - fx) * img.at(cx(x0), cy(y0 + 1), c) + fx * img.at(cx(x0 + 1), cy(y0 + 1), c);
  return (1.0 - fy) * top + fy * bot;
}

}  // namespace

Image warp_to_template(const Image& img, const SimilarityTransform& t, int size) {
  if (size < 1) raise(ErrorCode::InvalidSize, "warp size must be >= 1");
  const SimilarityTransform inv = t.inverse();
  Image out(size, size, img.channels());
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const Point2 s = inv.apply({static_cast<double>(x), static_cast<double>(y)});
      for (int c = 0; c < img.channels(); ++c)
        out.set(x, y, c, static_cast<float>(sample_bilinear(img, s.x, s.y, c)));
    }
  }
  return out;
}

Image reinsert(const Image& background, const Image& deid_face,
               const SimilarityTransform& t, const BlendSpec& blend) {
  if (deid_face.empty()) return background;
  if (deid_face.width() != deid_face.height())
    raise(ErrorCode::InvalidSize, "de-identified face must be square");
  if (deid_face.channels() != background.channels())
    raise(ErrorCode::ShapeMismatch, "face and background channel counts differ");
  const int size = deid_face.width();
  const double feather = std::max(0.0, blend.feather);

  Image out = background;
  for (int y = 0; y < background.height(); ++y) {
    for (int x = 0; x < background.width(); ++x) {
      const Point2 p = t.apply({static_cast<double>(x), static_cast<double>(y)});
      const double d = std::min(std::min(p.x, p.y),
                                std::min(size - 1.0 - p.x, size - 1.0 - p.y));
      double alpha;
      if (feather > 0.0) {
        alpha = std::clamp(0.5 + d / feather, 0.0, 1.0);
      } else {
        alpha = d >= 0.0 ? 1.0 : 0.0;
      }
      if (alpha <= 0.0) continue;  // background stays bit-identical
      for (int c = 0; c < background.channels(); ++c) {
        const double face_v = sample_bilinear(deid_face, p.x, p.y, c);
        const double bg_v = background.at(x, y, c);
        out.set(x, y, c, static_cast<float>(alpha * face_v + (1.0 - alpha) * bg_v));
      }
    }
  }
  return out;
}

AlignedFace align_face(const Image& img, const Landmarks5& lm, int crop_size) {
  const Landmarks5 tmpl = scaled_template(crop_size);
  SimilarityTransform t = estimate_similarity(lm, tmpl);
  AlignedFace out;
  out.face = warp_to_template(img, t, crop_size);
  out.transform = t;
  // hint: axis-aligned bounding box of the warped crop quad in source coords
  const SimilarityTransform inv = t.inverse();
  double x_min = 1e30, y_min = 1e30, x_max = -1e30, y_max = -1e30;
  for (const auto& corner :
       {Point2{0, 0}, Point2{crop_size - 1.0, 0}, Point2{0, crop_size - 1.0},
        Point2{crop_size - 1.0, crop_size - 1.0}}) {
    const Point2 s = inv.apply(corner);
    x_min = std::min(x_min, s.x);
    y_min = std::min(y_min, s.y);
    x_max = std::max(x_max, s.x);
    y_max = std::max(y_max, s.y);
  }
  const int rx0 = std::max(0, static_cast<int>(std::floor(x_min)));
  const int ry0 = std::max(0, static_cast<int>(std::floor(y_min)));
  const int rx1 = std::min(img.width(), static_cast<int>(std::ceil(x_max)) + 1);
  const int ry1 = std::min(img.height(), static_cast<int>(std::ceil(y_max)) + 1);
  out.source_rect_hint = {rx0, ry0, std::max(0, rx1 - rx0), std::max(0, ry1 - ry0)};
  return out;
}

}  // namespace fdeid
