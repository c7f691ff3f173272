#pragma once

#include <cmath>
#include <vector>

#include "fdeid/errors.hpp"

namespace fdeid {

/// Unit-norm identity vector; similarity is the cosine of the angle.
struct Embedding {
  std::vector<double> values;

  int dim() const { return static_cast<int>(values.size()); }

  double norm() const {
    double acc = 0.0;
    for (const double v : values) acc += v * v;
    return std::sqrt(acc);
  }

  void normalize() {
    const double n = norm();
    if (!(n > 0.0) || !std::isfinite(n))
      raise(ErrorCode::NumericalError, "cannot normalize zero or non-finite embedding");
    for (double& v : values) v /= n;
  }

  static double cosine(const Embedding& a, const Embedding& b) {
    if (a.dim() != b.dim())
      raise(ErrorCode::DimensionMismatch, "embedding dimensions differ");
    double dot = 0.0;
    for (int i = 0; i < a.dim(); ++i) dot += a.values[static_cast<size_t>(i)] * b.values[static_cast<size_t>(i)];
    const double na = a.norm(), nb = b.norm();
    if (!(na > 0.0) || !(nb > 0.0))
      raise(ErrorCode::NumericalError, "cosine of zero-norm embedding");
    return dot / (na * nb);
  }
};

}  // namespace fdeid
