#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "fdeid/embedding.hpp"
#include "fdeid/image.hpp"
#include "fdeid/raster.hpp"

namespace fdeid {

/// Pluggable differentiable-embedder contract: an embedding function plus
/// the exact per-pixel gradient of cosine similarity to a target embedding.
/// Implementations must be safe to call concurrently from multiple threads.
class GradientOracle {
 public:
  virtual ~GradientOracle() = default;

  virtual int dim() const = 0;

  /// Unit-norm embedding of an image.
  virtual Embedding embed(const Image& x) const = 0;

  /// d cos(embed(x), target) / dx, same shape as x.
  virtual Raster64 grad_sim(const Image& x, const Embedding& target) const = 0;
};

/// Analytic stand-in for a face recognizer:
///   embed(x) = normalize(W * downsample_8x8(gray(x)))
/// with W a seeded fixed random matrix. The gradient is exact through
/// normalization, pooling, and the luma conversion.
class ToyEmbedder final : public GradientOracle {
 public:
  explicit ToyEmbedder(uint64_t seed, int dim = 128);

  int dim() const override { return dim_; }
  Embedding embed(const Image& x) const override;
  Raster64 grad_sim(const Image& x, const Embedding& target) const override;

 private:
  std::vector<double> pooled_gray(const Image& x) const;

  int dim_;
  std::vector<double> weights_;  // dim_ x 64, row-major
};

enum class NormKind { Linf, L2, L1 };

struct AttackParams {
  double epsilon = 8.0 / 255.0;
  double alpha = 2.0 / 255.0;
  int num_iter = 20;
  NormKind norm = NormKind::Linf;
  double decay_factor = 1.0;  // momentum mu
  int kernel_size = 15;       // translation-invariance smoothing kernel
  double prob = 0.7;          // diverse-input probability
  double gamma = 10.0;        // perceptual loss weight
  double lambda_dsim = 1.0;   // initial dissimilarity constraint weight
  bool random_start = true;
  bool targeted = false;
  uint64_t rng_seed = 0;

  static AttackParams tipim_defaults();
  static AttackParams chameleon_defaults();
};

struct AttackResult {
  Image image;
  double best_similarity = 1.0;  // cosine to the reference embedding
  int best_iteration = 0;        // 0 = starting point
};

/// Projected gradient descent; signed steps for Linf, normalized gradient
/// steps for L2/L1; returns the trajectory iterate with lowest similarity.
AttackResult pgd(const Image& face, const GradientOracle& o, const AttackParams& p,
                 const Embedding* target = nullptr);

/// Momentum iterative FGSM (Linf only, no random start).
AttackResult mi_fgsm(const Image& face, const GradientOracle& o, const AttackParams& p,
                     const Embedding* target = nullptr);

/// MI-FGSM plus diverse-input transforms (seeded random resize-and-pad with
/// probability `prob`) and Gaussian gradient smoothing of size kernel_size.
AttackResult ti_dim(const Image& face, const GradientOracle& o, const AttackParams& p,
                    const Embedding* target = nullptr);

/// TI-DIM with an added perceptual term: loss = cos + gamma * (1 - SSIM).
AttackResult tip_im(const Image& face, const GradientOracle& o, const AttackParams& p,
                    const Embedding* target = nullptr);

/// Plain gradient descent with learning rate alpha on
/// cos + lambda_dsim(t) * mean(delta^2), lambda decaying linearly to zero.
AttackResult chameleon(const Image& face, const GradientOracle& o, const AttackParams& p,
                       const Embedding* target = nullptr);

}  // namespace fdeid
