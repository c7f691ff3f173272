#include "fdeid/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fdeid/filter.hpp"
#include "fdeid/metrics.hpp"
#include "fdeid/rng.hpp"

namespace fdeid {

AttackParams AttackParams::tipim_defaults() {
  AttackParams p;
  p.epsilon = 16.0 / 255.0;
  p.num_iter = 100;
  p.gamma = 10.0;
  return p;
}

AttackParams AttackParams::chameleon_defaults() {
  AttackParams p;
  p.epsilon = 16.0 / 255.0;
  p.alpha = 0.001;
  p.num_iter = 20;
  p.lambda_dsim = 1.0;
  return p;
}

// ---------------------------------------------------------------------------
// Toy embedder

namespace {
constexpr int kPoolGrid = 8;
}

ToyEmbedder::ToyEmbedder(uint64_t seed, int dim) : dim_(dim) {
  if (dim < 2) raise(ErrorCode::InvalidArgument, "embedder dimension must be >= 2");
  Rng rng(seed);
  weights_.resize(static_cast<size_t>(dim) * kPoolGrid * kPoolGrid);
  for (double& w : weights_) w = rng.normal();
}

std::vector<double> ToyEmbedder::pooled_gray(const Image& x) const {
  std::vector<double> cells(kPoolGrid * kPoolGrid, 0.0);
  for (int gy = 0; gy < kPoolGrid; ++gy) {
    for (int gx = 0; gx < kPoolGrid; ++gx) {
      const int y0 = gy * x.height() / kPoolGrid, y1 = (gy + 1) * x.height() / kPoolGrid;
      const int x0 = gx * x.width() / kPoolGrid, x1 = (gx + 1) * x.width() / kPoolGrid;
      if (y1 <= y0 || x1 <= x0) continue;  // tiny images leave empty cells at 0
      double acc = 0.0;
      for (int y = y0; y < y1; ++y)
        for (int xx = x0; xx < x1; ++xx) acc += luma_at(x, xx, y);
      cells[static_cast<size_t>(gy) * kPoolGrid + gx] =
          acc / (static_cast<double>(y1 - y0) * (x1 - x0));
    }
  }
  return cells;
}

Embedding ToyEmbedder::embed(const Image& x) const {
  if (x.empty()) raise(ErrorCode::OracleFailure, "cannot embed empty image");
  const auto cells = pooled_gray(x);
  Embedding e;
  e.values.resize(static_cast<size_t>(dim_));
  for (int i = 0; i < dim_; ++i) {
    double acc = 0.0;
    for (int j = 0; j < kPoolGrid * kPoolGrid; ++j)
      acc += weights_[static_cast<size_t>(i) * kPoolGrid * kPoolGrid + j] * cells[static_cast<size_t>(j)];
    e.values[static_cast<size_t>(i)] = acc;
  }
  const double n = e.norm();
  if (!(n > 0.0) || !std::isfinite(n))
    raise(ErrorCode::OracleFailure, "embedding collapsed to zero norm");
  for (double& v : e.values) v /= n;
  return e;
}

Raster64 ToyEmbedder::grad_sim(const Image& x, const Embedding& target) const {
  if (target.dim() != dim_) raise(ErrorCode::DimensionMismatch, "target dimension mismatch");
  const auto cells = pooled_gray(x);

  // u = W * cells, e = u / ||u||, s = e . t_hat
  std::vector<double> u(static_cast<size_t>(dim_), 0.0);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < kPoolGrid * kPoolGrid; ++j)
      u[static_cast<size_t>(i)] +=
          weights_[static_cast<size_t>(i) * kPoolGrid * kPoolGrid + j] * cells[static_cast<size_t>(j)];
  double un = 0.0;
  for (const double v : u) un += v * v;
  un = std::sqrt(un);
  if (!(un > 0.0)) raise(ErrorCode::OracleFailure, "embedding collapsed to zero norm");

  const double tn = target.norm();
  if (!(tn > 0.0)) raise(ErrorCode::OracleFailure, "target embedding has zero norm");
  double dot = 0.0;
  for (int i = 0; i < dim_; ++i) dot += u[static_cast<size_t>(i)] * target.values[static_cast<size_t>(i)] / tn;
  const double s = dot / un;

  // ds/du = (t_hat - s * e) / ||u||
  std::vector<double> ds_du(static_cast<size_t>(dim_));
  for (int i = 0; i < dim_; ++i) {
    const double t_hat = target.values[static_cast<size_t>(i)] / tn;
    const double e_i = u[static_cast<size_t>(i)] / un;
    ds_du[static_cast<size_t>(i)] = (t_hat - s * e_i) / un;
  }

  // ds/dcell = W^T ds/du
  std::vector<double> ds_dcell(kPoolGrid * kPoolGrid, 0.0);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < kPoolGrid * kPoolGrid; ++j)
      ds_dcell[static_cast<size_t>(j)] +=
          weights_[static_cast<size_t>(i) * kPoolGrid * kPoolGrid + j] * ds_du[static_cast<size_t>(i)];

  Raster64 g(x.width(), x.height(), x.channels());
  const double rw = x.channels() == 1 ? 1.0 : 0.299;
  const double gw = 0.587, bw = 0.114;
  for (int gy = 0; gy < kPoolGrid; ++gy) {
    for (int gx = 0; gx < kPoolGrid; ++gx) {
      const int y0 = gy * x.height() / kPoolGrid, y1 = (gy + 1) * x.height() / kPoolGrid;
      const int x0 = gx * x.width() / kPoolGrid, x1 = (gx + 1) * x.width() / kPoolGrid;
      if (y1 <= y0 || x1 <= x0) continue;
      const double per_pixel = ds_dcell[static_cast<size_t>(gy) * kPoolGrid + gx] /
                               (static_cast<double>(y1 - y0) * (x1 - x0));
      for (int y = y0; y < y1; ++y) {
        for (int xx = x0; xx < x1; ++xx) {
          if (x.channels() == 1) {
            g.at(xx, y, 0) = per_pixel;
          } else {
            g.at(xx, y, 0) = rw * per_pixel;
            g.at(xx, y, 1) = gw * per_pixel;
            g.at(xx, y, 2) = bw * per_pixel;
          }
        }
      }
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Attack machinery

namespace {

struct Workspace {
  const Image* origin = nullptr;
  std::vector<float> x;        // current iterate
  std::vector<float> lo, hi;   // per-sample Linf box (ball intersected with [0,1])
  NormKind norm = NormKind::Linf;
  double eps = 0.0;
};

Workspace make_workspace(const Image& face, NormKind norm, double eps) {
  Workspace ws;
  ws.origin = &face;
  const auto s = face.samples();
  ws.x.assign(s.begin(), s.end());
  ws.norm = norm;
  ws.eps = eps;
  ws.lo.resize(s.size());
  ws.hi.resize(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    if (norm == NormKind::Linf) {
      ws.lo[i] = static_cast<float>(std::max(0.0, static_cast<double>(s[i]) - eps));
      ws.hi[i] = static_cast<float>(std::min(1.0, static_cast<double>(s[i]) + eps));
    } else {
      ws.lo[i] = 0.0f;
      ws.hi[i] = 1.0f;
    }
  }
  return ws;
}

// Projects x back into the configured ball around the origin, then into the
// [0,1] box (clamping never grows |delta|, so the ball stays satisfied).
void project(Workspace& ws) {
  const auto o = ws.origin->samples();
  if (ws.norm == NormKind::Linf) {
    for (size_t i = 0; i < ws.x.size(); ++i)
      ws.x[i] = std::min(ws.hi[i], std::max(ws.lo[i], ws.x[i]));
    return;
  }
  std::vector<double> delta(ws.x.size());
  for (size_t i = 0; i < ws.x.size(); ++i)
    delta[i] = static_cast<double>(ws.x[i]) - o[i];
  if (ws.norm == NormKind::L2) {
    double n2 = 0.0;
    for (const double d : delta) n2 += d * d;
    n2 = std::sqrt(n2);
    if (n2 > ws.eps) {
      const double s = ws.eps * (1.0 - 1e-7) / n2;
      for (double& d : delta) d *= s;
    }
  } else {  // L1: soft-threshold projection onto the simplex of |delta|
    double n1 = 0.0;
    for (const double d : delta) n1 += std::abs(d);
    if (n1 > ws.eps) {
      const double budget = ws.eps * (1.0 - 1e-7);
      std::vector<double> mags(delta.size());
      for (size_t i = 0; i < delta.size(); ++i) mags[i] = std::abs(delta[i]);
      std::sort(mags.begin(), mags.end(), std::greater<>());
      double prefix = 0.0, theta = 0.0;
      for (size_t k = 0; k < mags.size(); ++k) {
        prefix += mags[k];
        const double cand = (prefix - budget) / static_cast<double>(k + 1);
        if (k + 1 == mags.size() || mags[k + 1] <= cand) {
          theta = cand;
          break;
        }
      }
      for (double& d : delta) {
        const double m = std::abs(d) - theta;
        d = m > 0.0 ? (d > 0.0 ? m : -m) : 0.0;
      }
    }
  }
  for (size_t i = 0; i < ws.x.size(); ++i) {
    const float v = static_cast<float>(o[i] + delta[i]);
    ws.x[i] = std::min(1.0f, std::max(0.0f, v));
  }
}

void random_start(Workspace& ws, Rng& rng) {
  if (ws.eps <= 0.0) return;
  const auto o = ws.origin->samples();
  for (size_t i = 0; i < ws.x.size(); ++i)
    ws.x[i] = static_cast<float>(o[i] + rng.uniform(-ws.eps, ws.eps));
  project(ws);
}

Image snapshot(const Workspace& ws) {
  return Image::from_data(ws.origin->width(), ws.origin->height(), ws.origin->channels(),
                          ws.x);
}

double similarity(const GradientOracle& o, const Image& x, const Embedding& ref) {
  try {
    return Embedding::cosine(o.embed(x), ref);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    raise(ErrorCode::OracleFailure, e.what());
  }
}

struct BestTracker {
  Image image;
  double sim = 0.0;
  int iteration = 0;
  bool targeted = false;

  void offer(const Image& candidate, double s, int it) {
    const bool better = targeted ? (s > sim) : (s < sim);
    if (it == 0 || better) {
      image = candidate;
      sim = s;
      iteration = it;
    }
  }
};

// Shared helpers so that definitional reductions between attacks are
// byte-identical (pgd(Linf) vs mi_fgsm(mu=0), ti_dim vs tip_im(gamma=0)).
void apply_signed_step(Workspace& ws, const std::vector<double>& dir, double alpha,
                       double step_sign) {
  for (size_t i = 0; i < ws.x.size(); ++i) {
    const double sgn = dir[i] > 0.0 ? 1.0 : (dir[i] < 0.0 ? -1.0 : 0.0);
    ws.x[i] = static_cast<float>(static_cast<double>(ws.x[i]) - step_sign * alpha * sgn);
  }
  project(ws);
}

void apply_gradient_step(Workspace& ws, const std::vector<double>& dir, double alpha,
                         double step_sign) {
  for (size_t i = 0; i < ws.x.size(); ++i)
    ws.x[i] = static_cast<float>(static_cast<double>(ws.x[i]) - step_sign * alpha * dir[i]);
  project(ws);
}

double l1_norm(const std::vector<double>& v) {
  double acc = 0.0;
  for (const double x : v) acc += std::abs(x);
  return acc;
}

double l2_norm(const std::vector<double>& v) {
  double acc = 0.0;
  for (const double x : v) acc += x * x;
  return std::sqrt(acc);
}

std::vector<double> raw_gradient(const GradientOracle& o, const Image& x, const Embedding& ref) {
  Raster64 g;
  try {
    g = o.grad_sim(x, ref);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    raise(ErrorCode::OracleFailure, e.what());
  }
  for (const double v : g.v)
    if (!std::isfinite(v)) raise(ErrorCode::OracleFailure, "non-finite gradient from oracle");
  return std::move(g.v);
}

Embedding reference_embedding(const Image& face, const GradientOracle& o,
                              const AttackParams& p, const Embedding* target) {
  if (p.targeted) {
    if (target == nullptr)
      raise(ErrorCode::InvalidArgument, "targeted attack requires a target embedding");
    return *target;
  }
  try {
    return o.embed(face);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    raise(ErrorCode::OracleFailure, e.what());
  }
}

void validate_params(const AttackParams& p) {
  if (p.epsilon < 0.0) raise(ErrorCode::InvalidArgument, "epsilon must be >= 0");
  if (!(p.alpha > 0.0)) raise(ErrorCode::InvalidArgument, "alpha must be > 0");
  if (p.num_iter < 0) raise(ErrorCode::InvalidArgument, "num_iter must be >= 0");
}

// Random resize into [ceil(0.9*S), S] followed by zero-padding back to S
// at a random offset. Consumes three RNG draws when invoked.
Image diverse_input(const Image& x, Rng& rng) {
  const int size = x.width();
  const int lo = std::min(size, static_cast<int>(std::ceil(0.9 * size)));
  const int target = rng.uniform_int(lo, size);
  Image small = (target == size) ? x : resize(x, target, target, ResizeMode::Bilinear);
  const int ox = rng.uniform_int(0, size - target);
  const int oy = rng.uniform_int(0, size - target);
  if (target == size && ox == 0 && oy == 0) return small;
  Image padded(size, size, x.channels(), 0.0f);
  for (int y = 0; y < target; ++y)
    for (int xx = 0; xx < target; ++xx)
      for (int c = 0; c < x.channels(); ++c)
        padded.set(ox + xx, oy + y, c, small.at(xx, y, c));
  return padded;
}

struct MomentumOpts {
  bool allow_diverse = false;
  bool allow_smooth = false;
  bool allow_ssim = false;
};

AttackResult momentum_attack(const Image& face, const GradientOracle& o,
                             const AttackParams& p, const Embedding* target,
                             const MomentumOpts& opts) {
  validate_params(p);
  if (p.norm != NormKind::Linf)
    raise(ErrorCode::InvalidArgument, "momentum attacks support the Linf norm only");
  const Embedding ref = reference_embedding(face, o, p, target);
  const double step_sign = p.targeted ? -1.0 : 1.0;

  Workspace ws = make_workspace(face, NormKind::Linf, p.epsilon);
  Rng rng(p.rng_seed);

  BestTracker best;
  best.targeted = p.targeted;
  best.offer(snapshot(ws), similarity(o, snapshot(ws), ref), 0);

  std::vector<double> taps;
  if (opts.allow_smooth && p.kernel_size > 1)
    taps = gaussian_kernel_1d(p.kernel_size, 0.0);

  std::vector<double> momentum(ws.x.size(), 0.0);
  for (int it = 0; it < p.num_iter; ++it) {
    Image cur = snapshot(ws);
    Image grad_input = cur;
    if (opts.allow_diverse && p.prob > 0.0) {
      if (rng.uniform() < p.prob) grad_input = diverse_input(cur, rng);
    }
    std::vector<double> g = raw_gradient(o, grad_input, ref);

    if (opts.allow_ssim && p.gamma > 0.0) {
      // loss adds gamma * (1 - ssim(x, original)); gradient of that term
      // is -gamma * d ssim / dx
      const SsimWithGrad sg = ssim_with_grad(cur, face);
      for (size_t i = 0; i < g.size(); ++i) g[i] -= p.gamma * sg.grad.v[i];
    }

    if (!taps.empty()) {
      std::vector<double> smoothed(g.size());
      convolve_separable(g.data(), smoothed.data(), face.width(), face.height(),
                         face.channels(), taps);
      g.swap(smoothed);
    }

    const double n1 = l1_norm(g);
    if (n1 > 0.0)
      for (double& v : g) v /= n1;
    for (size_t i = 0; i < momentum.size(); ++i)
      momentum[i] = p.decay_factor * momentum[i] + g[i];

    apply_signed_step(ws, momentum, p.alpha, step_sign);
    Image candidate = snapshot(ws);
    best.offer(candidate, similarity(o, candidate, ref), it + 1);
  }
  return {best.image, best.sim, best.iteration};
}

}  // namespace

AttackResult pgd(const Image& face, const GradientOracle& o, const AttackParams& p,
                 const Embedding* target) {
  validate_params(p);
  const Embedding ref = reference_embedding(face, o, p, target);
  const double step_sign = p.targeted ? -1.0 : 1.0;

  Workspace ws = make_workspace(face, p.norm, p.epsilon);
  Rng rng(p.rng_seed);
  if (p.random_start) random_start(ws, rng);

  BestTracker best;
  best.targeted = p.targeted;
  best.offer(snapshot(ws), similarity(o, snapshot(ws), ref), 0);

  for (int it = 0; it < p.num_iter; ++it) {
    std::vector<double> g = raw_gradient(o, snapshot(ws), ref);
    if (p.norm == NormKind::Linf) {
      apply_signed_step(ws, g, p.alpha, step_sign);
    } else {
      const double n = p.norm == NormKind::L2 ? l2_norm(g) : l1_norm(g);
      if (n > 0.0)
        for (double& v : g) v /= n;
      apply_gradient_step(ws, g, p.alpha, step_sign);
    }
    Image candidate = snapshot(ws);
    best.offer(candidate, similarity(o, candidate, ref), it + 1);
  }
  return {best.image, best.sim, best.iteration};
}

AttackResult mi_fgsm(const Image& face, const GradientOracle& o, const AttackParams& p,
                     const Embedding* target) {
  return momentum_attack(face, o, p, target, {false, false, false});
}

AttackResult ti_dim(const Image& face, const GradientOracle& o, const AttackParams& p,
                    const Embedding* target) {
  return momentum_attack(face, o, p, target, {true, true, false});
}

AttackResult tip_im(const Image& face, const GradientOracle& o, const AttackParams& p,
                    const Embedding* target) {
  return momentum_attack(face, o, p, target, {true, true, true});
}

AttackResult chameleon(const Image& face, const GradientOracle& o, const AttackParams& p,
                       const Embedding* target) {
  validate_params(p);
  const Embedding ref = reference_embedding(face, o, p, target);
  const double step_sign = p.targeted ? -1.0 : 1.0;

  Workspace ws = make_workspace(face, NormKind::Linf, p.epsilon);
  Rng rng(p.rng_seed);
  if (p.random_start) random_start(ws, rng);

  BestTracker best;
  best.targeted = p.targeted;
  best.offer(snapshot(ws), similarity(o, snapshot(ws), ref), 0);

  const auto origin = face.samples();
  const double inv_count = 1.0 / static_cast<double>(ws.x.size());
  for (int it = 0; it < p.num_iter; ++it) {
    const double lambda =
        p.lambda_dsim * (1.0 - static_cast<double>(it) / static_cast<double>(p.num_iter));
    std::vector<double> g = raw_gradient(o, snapshot(ws), ref);
    for (size_t i = 0; i < g.size(); ++i) {
      const double delta = static_cast<double>(ws.x[i]) - origin[i];
      g[i] += lambda * 2.0 * delta * inv_count;
    }
    apply_gradient_step(ws, g, p.alpha, step_sign);
    Image candidate = snapshot(ws);
    best.offer(candidate, similarity(o, candidate, ref), it + 1);
  }
  return {best.image, best.sim, best.iteration};
}

}  // namespace fdeid
