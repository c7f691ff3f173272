#include "fdeid/metrics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fdeid {

double psnr(const Image& a, const Image& b, double cap_db) {
  if (!a.same_shape(b)) raise(ErrorCode::ShapeMismatch, "psnr inputs must share shape");
  if (a.empty()) raise(ErrorCode::InvalidSize, "psnr of empty images");
  const auto sa = a.samples();
  const auto sb = b.samples();
  double acc = 0.0;
  for (size_t i = 0; i < sa.size(); ++i) {
    const double d = static_cast<double>(sa[i]) - sb[i];
    acc += d * d;
  }
  const double mse = acc / static_cast<double>(sa.size());
  if (mse <= 0.0) return cap_db;
  return std::min(cap_db, 10.0 * std::log10(1.0 / mse));
}

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimC1 = 0.01 * 0.01;
constexpr double kSsimC2 = 0.03 * 0.03;

std::vector<double> ssim_window_weights() {
  // 11x11 Gaussian, sigma 1.5, normalized to sum 1
  std::vector<double> w(kSsimWindow * kSsimWindow);
  const int half = kSsimWindow / 2;
  double sum = 0.0;
  for (int dy = -half; dy <= half; ++dy)
    for (int dx = -half; dx <= half; ++dx) {
      const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * kSsimSigma * kSsimSigma));
      w[static_cast<size_t>(dy + half) * kSsimWindow + (dx + half)] = v;
      sum += v;
    }
  for (double& v : w) v /= sum;
  return w;
}

struct SsimContext {
  int w = 0, h = 0;            // luma plane size
  int ow = 0, oh = 0;          // valid-window map size
  std::vector<double> lx, ly;  // luma planes of a and b
  std::vector<double> mu_x, mu_y, mxx, myy, mxy;
};

SsimContext ssim_forward(const Image& a, const Image& b) {
  if (!a.same_shape(b)) raise(ErrorCode::ShapeMismatch, "ssim inputs must share shape");
  if (a.width() < kSsimWindow || a.height() < kSsimWindow)
    raise(ErrorCode::TooSmall, "ssim requires both dimensions >= 11");
  static const std::vector<double> win = ssim_window_weights();

  SsimContext ctx;
  ctx.w = a.width();
  ctx.h = a.height();
  ctx.ow = ctx.w - kSsimWindow + 1;
  ctx.oh = ctx.h - kSsimWindow + 1;
  ctx.lx = to_luma(a);
  ctx.ly = to_luma(b);
  const size_t map_size = static_cast<size_t>(ctx.ow) * ctx.oh;
  ctx.mu_x.assign(map_size, 0.0);
  ctx.mu_y.assign(map_size, 0.0);
  ctx.mxx.assign(map_size, 0.0);
  ctx.myy.assign(map_size, 0.0);
  ctx.mxy.assign(map_size, 0.0);

  for (int oy = 0; oy < ctx.oh; ++oy) {
    for (int ox = 0; ox < ctx.ow; ++ox) {
      double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
      for (int dy = 0; dy < kSsimWindow; ++dy) {
        for (int dx = 0; dx < kSsimWindow; ++dx) {
          const double wgt = win[static_cast<size_t>(dy) * kSsimWindow + dx];
          const double px = ctx.lx[static_cast<size_t>(oy + dy) * ctx.w + (ox + dx)];
          const double py = ctx.ly[static_cast<size_t>(oy + dy) * ctx.w + (ox + dx)];
          mx += wgt * px;
          my += wgt * py;
          xx += wgt * px * px;
          yy += wgt * py * py;
          xy += wgt * px * py;
        }
      }
      const size_t o = static_cast<size_t>(oy) * ctx.ow + ox;
      ctx.mu_x[o] = mx;
      ctx.mu_y[o] = my;
      ctx.mxx[o] = xx;
      ctx.myy[o] = yy;
      ctx.mxy[o] = xy;
    }
  }
  return ctx;
}

double ssim_value_at(const SsimContext& ctx, size_t o) {
  const double mx = ctx.mu_x[o], my = ctx.mu_y[o];
  const double a1 = 2.0 * mx * my + kSsimC1;
  const double a2 = 2.0 * (ctx.mxy[o] - mx * my) + kSsimC2;
  const double b1 = mx * mx + my * my + kSsimC1;
  const double b2 = (ctx.mxx[o] - mx * mx) + (ctx.myy[o] - my * my) + kSsimC2;
  return (a1 * a2) / (b1 * b2);
}

}  // namespace

double ssim(const Image& a, const Image& b) {
  const SsimContext ctx = ssim_forward(a, b);
  const size_t n = ctx.mu_x.size();
  double acc = 0.0;
  for (size_t o = 0; o < n; ++o) acc += ssim_value_at(ctx, o);
  return acc / static_cast<double>(n);
}

SsimWithGrad ssim_with_grad(const Image& a, const Image& b) {
  const SsimContext ctx = ssim_forward(a, b);
  static const std::vector<double> win = ssim_window_weights();
  const size_t n = ctx.mu_x.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  // partials of each local score with respect to (mu_x, mxx, mxy)
  std::vector<double> d_mu(n), d_mxx(n), d_mxy(n);
  double total = 0.0;
  for (size_t o = 0; o < n; ++o) {
    const double mx = ctx.mu_x[o], my = ctx.mu_y[o];
    const double a1 = 2.0 * mx * my + kSsimC1;
    const double a2 = 2.0 * (ctx.mxy[o] - mx * my) + kSsimC2;
    const double b1 = mx * mx + my * my + kSsimC1;
    const double b2 = (ctx.mxx[o] - mx * mx) + (ctx.myy[o] - my * my) + kSsimC2;
    const double s = (a1 * a2) / (b1 * b2);
    total += s;
    d_mu[o] = (2.0 * my * a2 - 2.0 * my * a1) / (b1 * b2) - s * (2.0 * mx / b1 - 2.0 * mx / b2);
    d_mxx[o] = -s / b2;
    d_mxy[o] = 2.0 * a1 / (b1 * b2);
  }

  // adjoint of the windowed statistics into the luma plane
  std::vector<double> d_luma(static_cast<size_t>(ctx.w) * ctx.h, 0.0);
  for (int oy = 0; oy < ctx.oh; ++oy) {
    for (int ox = 0; ox < ctx.ow; ++ox) {
      const size_t o = static_cast<size_t>(oy) * ctx.ow + ox;
      for (int dy = 0; dy < kSsimWindow; ++dy) {
        for (int dx = 0; dx < kSsimWindow; ++dx) {
          const double wgt = win[static_cast<size_t>(dy) * kSsimWindow + dx];
          const size_t pi = static_cast<size_t>(oy + dy) * ctx.w + (ox + dx);
          d_luma[pi] += inv_n * wgt *
                        (d_mu[o] + 2.0 * ctx.lx[pi] * d_mxx[o] + ctx.ly[pi] * d_mxy[o]);
        }
      }
    }
  }

  SsimWithGrad out;
  out.value = total * inv_n;
  out.grad = Raster64(a.width(), a.height(), a.channels());
  const double rw = a.channels() == 1 ? 1.0 : 0.299;
  const double gw = 0.587, bw = 0.114;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      const double g = d_luma[static_cast<size_t>(y) * ctx.w + x];
      if (a.channels() == 1) {
        out.grad.at(x, y, 0) = g;
      } else {
        out.grad.at(x, y, 0) = rw * g;
        out.grad.at(x, y, 1) = gw * g;
        out.grad.at(x, y, 2) = bw * g;
      }
    }
  }
  return out;
}

namespace {

struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

Moments fit_gaussian(const FeatureSet& fs) {
  if (fs.n < 2) raise(ErrorCode::InvalidSize, "feature set needs at least 2 rows");
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      fs.values.data(), fs.n, fs.d);
  Moments out;
  out.mean = m.colwise().mean();
  const Eigen::MatrixXd centered = m.rowwise() - out.mean.transpose();
  out.cov = centered.transpose() * centered / static_cast<double>(fs.n - 1);
  if (fs.n <= fs.d) {
    const double lambda = 1e-6 * out.cov.trace() / fs.d;
    out.cov.diagonal().array() += lambda;
  }
  return out;
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& m, const char* what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) raise(ErrorCode::NumericalError, "eigendecomposition failed");
  Eigen::VectorXd ev = es.eigenvalues();
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) < -1e-6)
      raise(ErrorCode::NumericalError,
            std::string(what) + " has eigenvalue below -1e-6; covariance is not PSD");
    if (ev(i) < 0.0) ev(i) = 0.0;
  }
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double fid(const FeatureSet& real, const FeatureSet& gen) {
  if (real.d != gen.d) raise(ErrorCode::DimensionMismatch, "feature dimensions differ");
  for (const double v : real.values)
    if (!std::isfinite(v)) raise(ErrorCode::NumericalError, "non-finite feature value");
  for (const double v : gen.values)
    if (!std::isfinite(v)) raise(ErrorCode::NumericalError, "non-finite feature value");

  const Moments m1 = fit_gaussian(real);
  const Moments m2 = fit_gaussian(gen);
  const Eigen::MatrixXd s1_half = symmetric_sqrt(m1.cov, "first covariance");
  const Eigen::MatrixXd inner = s1_half * m2.cov * s1_half;
  // symmetrize against round-off before the second decomposition
  const Eigen::MatrixXd inner_sym = 0.5 * (inner + inner.transpose());
  const Eigen::MatrixXd cross_sqrt = symmetric_sqrt(inner_sym, "cross-covariance product");

  const double mean_term = (m1.mean - m2.mean).squaredNorm();
  const double trace_term = m1.cov.trace() + m2.cov.trace() - 2.0 * cross_sqrt.trace();
  const double value = mean_term + trace_term;
  return value < 0.0 ? 0.0 : value;  // guard round-off on identical sets
}

std::vector<double> pair_similarities(const std::vector<std::pair<Embedding, Embedding>>& pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& [a, b] : pairs) out.push_back(Embedding::cosine(a, b));
  return out;
}

namespace {

// Accuracy of accept-rule s >= t over the two score sets.
double accuracy_at(const std::vector<double>& genuine, const std::vector<double>& impostor,
                   double t) {
  size_t correct = 0;
  for (const double s : genuine) correct += (s >= t) ? 1 : 0;
  for (const double s : impostor) correct += (s < t) ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(genuine.size() + impostor.size());
}

}  // namespace

Threshold calibrate_accuracy_threshold(const std::vector<double>& genuine,
                                       const std::vector<double>& impostor) {
  if (genuine.empty() || impostor.empty())
    raise(ErrorCode::EmptyPairs, "accuracy calibration needs genuine and impostor scores");
  std::vector<double> values;
  values.reserve(genuine.size() + impostor.size());
  values.insert(values.end(), genuine.begin(), genuine.end());
  values.insert(values.end(), impostor.begin(), impostor.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  // candidate intervals: (-1, v1], (v1, v2], ..., (vm, 1]; accuracy is
  // constant on each, evaluated at the interval's upper bound
  double best_acc = -1.0;
  double best_mid = 0.0;
  const auto consider = [&](double lo, double hi) {
    const double acc = accuracy_at(genuine, impostor, hi);
    if (acc > best_acc + 1e-15) {
      best_acc = acc;
      best_mid = 0.5 * (lo + hi);
    }
  };
  double prev = std::min(-1.0, values.front());
  for (const double v : values) {
    consider(prev, v);
    prev = v;
  }
  // the everything-rejected interval above the top score
  const double top = std::max(1.0, values.back());
  if (values.back() < top) {
    const double acc = accuracy_at(genuine, impostor, std::nextafter(values.back(), 2.0));
    if (acc > best_acc + 1e-15) {
      best_acc = acc;
      best_mid = 0.5 * (values.back() + top);
    }
  }
  return {best_mid, ThresholdMode::AccuracyOptimal, 0.0};
}

Threshold calibrate_far_threshold(const std::vector<double>& impostor, double level) {
  if (impostor.empty()) raise(ErrorCode::EmptyPairs, "far calibration needs impostor scores");
  if (!(level > 0.0) || !(level < 1.0))
    raise(ErrorCode::InvalidArgument, "far level must lie in (0, 1)");
  const auto m = impostor.size();
  std::vector<double> desc(impostor);
  std::sort(desc.begin(), desc.end(), std::greater<>());

  // admit the largest count c with c/m strictly below the level, so the
  // boundary case (level exactly c/m) resolves to the stricter threshold
  size_t c = 0;
  while (c + 1 <= m && static_cast<double>(c + 1) / static_cast<double>(m) < level) ++c;

  double lo, hi;
  if (c == 0) {
    lo = desc.front();
    hi = std::max(1.0, desc.front());
    if (lo == hi) hi = std::nextafter(hi, 2.0);
  } else {
    hi = desc[c - 1];
    lo = (c < m) ? desc[c] : std::min(-1.0, desc.back());
  }
  return {0.5 * (lo + hi), ThresholdMode::FarCalibrated, level};
}

Threshold calibrate_threshold(const PairSet& pairs, ThresholdMode mode, double far_level) {
  if (pairs.impostor.empty()) raise(ErrorCode::EmptyPairs, "impostor pair set is empty");
  const auto genuine = pair_similarities(pairs.genuine);
  const auto impostor = pair_similarities(pairs.impostor);
  switch (mode) {
    case ThresholdMode::AccuracyOptimal:
      return calibrate_accuracy_threshold(genuine, impostor);
    case ThresholdMode::FarCalibrated:
      return calibrate_far_threshold(impostor, far_level);
    case ThresholdMode::Fixed:
      raise(ErrorCode::InvalidArgument, "fixed thresholds are supplied, not calibrated");
  }
  raise(ErrorCode::InvalidArgument, "unknown threshold mode");
}

PrivacyReport privacy_report_scores(const std::vector<double>& genuine,
                                    const std::vector<double>& impostor,
                                    const Threshold& t) {
  if (genuine.empty()) raise(ErrorCode::EmptyPairs, "privacy report needs genuine pairs");
  size_t correct = 0, accepted = 0, protected_count = 0;
  for (const double s : genuine) {
    if (s >= t.value) {
      ++correct;
      ++accepted;
    } else {
      ++protected_count;
    }
  }
  for (const double s : impostor) correct += (s < t.value) ? 1 : 0;
  PrivacyReport r;
  r.va_pct = 100.0 * static_cast<double>(correct) /
             static_cast<double>(genuine.size() + impostor.size());
  r.tar_pct = 100.0 * static_cast<double>(accepted) / static_cast<double>(genuine.size());
  r.psr_pct = 100.0 * static_cast<double>(protected_count) / static_cast<double>(genuine.size());
  return r;
}

PrivacyReport privacy_report(const PairSet& pairs, const Threshold& t) {
  return privacy_report_scores(pair_similarities(pairs.genuine),
                               pair_similarities(pairs.impostor), t);
}

namespace {

bool wants(const std::vector<std::string>& requested, const char* name) {
  if (requested.empty()) return true;
  return std::find(requested.begin(), requested.end(), name) != requested.end();
}

}  // namespace

UtilityReport utility_report(const PredictionTable& table,
                             const std::vector<std::string>& requested) {
  for (const auto& r : requested) {
    static const std::vector<std::string> known = {"age",        "gender",   "ethnicity",
                                                   "expression", "landmark", "hr"};
    if (std::find(known.begin(), known.end(), r) == known.end())
      raise(ErrorCode::InvalidArgument, "unknown utility metric: " + r);
  }
  const bool explicit_req = !requested.empty();
  UtilityReport out;

  double age_sum = 0, hr_sum = 0, nme_sum = 0;
  size_t age_n = 0, hr_n = 0, nme_n = 0;
  size_t gender_ok = 0, gender_n = 0;
  size_t eth_ok = 0, eth_n = 0;
  size_t expr_ok = 0, expr_n = 0;

  for (const auto& id : table.ids) {
    const auto& row = table.rows.at(id);
    if (wants(requested, "age")) {
      if (row.age_pred && row.age_gt) {
        age_sum += std::abs(*row.age_pred - *row.age_gt);
        ++age_n;
      } else if (explicit_req) {
        raise(ErrorCode::MissingColumn, "age columns missing for id " + id);
      }
    }
    if (wants(requested, "gender")) {
      if (row.gender_pred && row.gender_gt) {
        gender_ok += (*row.gender_pred == *row.gender_gt) ? 1 : 0;
        ++gender_n;
      } else if (explicit_req) {
        raise(ErrorCode::MissingColumn, "gender columns missing for id " + id);
      }
    }
    if (wants(requested, "ethnicity")) {
      if (row.ethnicity_pred && row.ethnicity_gt) {
        eth_ok += (*row.ethnicity_pred == *row.ethnicity_gt) ? 1 : 0;
        ++eth_n;
      } else if (explicit_req) {
        raise(ErrorCode::MissingColumn, "ethnicity columns missing for id " + id);
      }
    }
    if (wants(requested, "expression")) {
      if (row.expression_pred && row.expression_gt) {
        expr_ok += (*row.expression_pred == *row.expression_gt) ? 1 : 0;
        ++expr_n;
      } else if (explicit_req) {
        raise(ErrorCode::MissingColumn, "expression columns missing for id " + id);
      }
    }
    if (wants(requested, "hr")) {
      if (row.hr_pred && row.hr_gt) {
        hr_sum += std::abs(*row.hr_pred - *row.hr_gt);
        ++hr_n;
      } else if (explicit_req) {
        raise(ErrorCode::MissingColumn, "hr columns missing for id " + id);
      }
    }
    if (wants(requested, "landmark")) {
      if (row.landmarks_pred && row.landmarks_gt) {
        const auto& pred = *row.landmarks_pred;
        const auto& gt = *row.landmarks_gt;
        if (pred.size() != gt.size() || gt.size() < 2)
          raise(ErrorCode::InvalidSize, "landmark column shape mismatch for id " + id);
        const double iod = std::hypot(gt[0][0] - gt[1][0], gt[0][1] - gt[1][1]);
        if (iod <= 0.0) raise(ErrorCode::ZeroInterOcular, "zero inter-ocular distance for id " + id);
        double err = 0.0;
        for (size_t i = 0; i < gt.size(); ++i)
          err += std::hypot(pred[i][0] - gt[i][0], pred[i][1] - gt[i][1]);
        nme_sum += (err / static_cast<double>(gt.size())) / iod;
        ++nme_n;
      } else if (explicit_req) {
        raise(ErrorCode::MissingColumn, "landmark columns missing for id " + id);
      }
    }
  }

  if (age_n) out.age_mae = age_sum / static_cast<double>(age_n);
  if (gender_n) out.gender_acc = 100.0 * static_cast<double>(gender_ok) / static_cast<double>(gender_n);
  if (eth_n) out.ethnicity_acc = 100.0 * static_cast<double>(eth_ok) / static_cast<double>(eth_n);
  if (expr_n) out.expression_acc = 100.0 * static_cast<double>(expr_ok) / static_cast<double>(expr_n);
  if (nme_n) out.landmark_nme = nme_sum / static_cast<double>(nme_n);
  if (hr_n) out.hr_mae = hr_sum / static_cast<double>(hr_n);

  if (explicit_req) {
    if (wants(requested, "age") && !out.age_mae) raise(ErrorCode::MissingColumn, "no age rows");
    if (wants(requested, "gender") && !out.gender_acc) raise(ErrorCode::MissingColumn, "no gender rows");
    if (wants(requested, "ethnicity") && !out.ethnicity_acc) raise(ErrorCode::MissingColumn, "no ethnicity rows");
    if (wants(requested, "expression") && !out.expression_acc) raise(ErrorCode::MissingColumn, "no expression rows");
    if (wants(requested, "landmark") && !out.landmark_nme) raise(ErrorCode::MissingColumn, "no landmark rows");
    if (wants(requested, "hr") && !out.hr_mae) raise(ErrorCode::MissingColumn, "no hr rows");
  }
  return out;
}

}  // namespace fdeid
