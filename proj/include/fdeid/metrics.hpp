#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fdeid/embedding.hpp"
#include "fdeid/image.hpp"
#include "fdeid/raster.hpp"

namespace fdeid {

inline constexpr double kPsnrCapDb = 99.0;  // sentinel for MSE == 0

/// 10*log10(1/MSE) on unit dynamic range; identical images report the cap.
double psnr(const Image& a, const Image& b, double cap_db = kPsnrCapDb);

/// Mean local SSIM: 11x11 Gaussian window (sigma 1.5), C1 = 0.01^2,
/// C2 = 0.03^2 on unit range, luma for RGB, valid windows only (no padding).
double ssim(const Image& a, const Image& b);

struct SsimWithGrad {
  double value = 0.0;
  Raster64 grad;  // d(ssim) / d(a), exact adjoint of the forward pass
};

/// SSIM plus its analytic gradient with respect to the first image.
SsimWithGrad ssim_with_grad(const Image& a, const Image& b);

/// Ingested feature vectors (row-major n x d).
struct FeatureSet {
  int n = 0;
  int d = 0;
  std::vector<double> values;
  std::vector<std::string> ids;

  double at(int row, int col) const { return values[static_cast<size_t>(row) * d + col]; }
};

/// Frechet distance between Gaussians fit to the two feature sets:
/// ||mu1 - mu2||^2 + Tr(S1 + S2 - 2*(S1*S2)^(1/2)), matrix square root via
/// symmetric eigendecomposition of S1^(1/2) * S2 * S1^(1/2). Covariances use
/// the unbiased estimator with a diagonal shrinkage of 1e-6 * trace/d when
/// n <= d.
double fid(const FeatureSet& real, const FeatureSet& gen);

enum class ThresholdMode { AccuracyOptimal, FarCalibrated, Fixed };

struct Threshold {
  double value = 0.0;
  ThresholdMode provenance = ThresholdMode::Fixed;
  double far_level = 0.0;  // set for FarCalibrated
};

struct PairSet {
  std::vector<std::pair<Embedding, Embedding>> genuine;
  std::vector<std::pair<Embedding, Embedding>> impostor;
};

std::vector<double> pair_similarities(const std::vector<std::pair<Embedding, Embedding>>& pairs);

/// Accuracy-optimal threshold over genuine/impostor similarity scores with
/// accept rule s >= t; returns the midpoint of the lowest optimal interval,
/// clamped to [-1, 1] at the extremes.
Threshold calibrate_accuracy_threshold(const std::vector<double>& genuine,
                                       const std::vector<double>& impostor);

/// FAR-calibrated threshold: admits the largest impostor count c with
/// c/m strictly below `level` (so far(1/m) admits none), then returns the
/// midpoint of the corresponding score interval.
Threshold calibrate_far_threshold(const std::vector<double>& impostor, double level);

Threshold calibrate_threshold(const PairSet& pairs, ThresholdMode mode, double far_level = 0.001);

struct PrivacyReport {
  double va_pct = 0.0;   // pairs correctly classified at the threshold
  double tar_pct = 0.0;  // genuine-accept rate at the threshold
  double psr_pct = 0.0;  // genuine pairs with similarity below the threshold
};

PrivacyReport privacy_report_scores(const std::vector<double>& genuine,
                                    const std::vector<double>& impostor,
                                    const Threshold& t);

PrivacyReport privacy_report(const PairSet& pairs, const Threshold& t);

/// Per-image predictions and ground truth; absent columns stay disengaged.
struct PredictionRow {
  std::optional<double> age_pred, age_gt;
  std::optional<std::string> gender_pred, gender_gt;
  std::optional<std::string> ethnicity_pred, ethnicity_gt;
  std::optional<std::string> expression_pred, expression_gt;
  std::optional<double> hr_pred, hr_gt;
  std::optional<std::vector<std::array<double, 2>>> landmarks_pred, landmarks_gt;
};

struct PredictionTable {
  std::vector<std::string> ids;                  // insertion order
  std::map<std::string, PredictionRow> rows;     // keyed by image id
};

struct UtilityReport {
  std::optional<double> age_mae;         // years
  std::optional<double> gender_acc;      // percent
  std::optional<double> ethnicity_acc;   // percent
  std::optional<double> expression_acc;  // percent
  std::optional<double> landmark_nme;    // dimensionless
  std::optional<double> hr_mae;          // bpm
};

/// Computes the requested metrics ("age", "gender", "ethnicity",
/// "expression", "landmark", "hr"); empty request = everything whose
/// columns are present. NME normalizes per image by the inter-ocular
/// distance between the first two ground-truth landmarks.
UtilityReport utility_report(const PredictionTable& table,
                             const std::vector<std::string>& requested = {});

}  // namespace fdeid
