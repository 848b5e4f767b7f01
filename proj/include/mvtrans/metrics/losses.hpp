#pragma once

// Training losses with analytic gradients, mean-reduced.

#include <algorithm>
#include <cmath>
#include <vector>

#include "mvtrans/core/error.hpp"
#include "mvtrans/core/tensor.hpp"

namespace mvtrans::metrics {

struct LossResult {
  double loss = 0;
  std::vector<double> gradient;  // d loss / d prediction, same layout as the input
};

/// e^2/2 for |e| <= delta, delta (|e| - delta/2) beyond, e = pred - gt.
inline LossResult huber_loss(const std::vector<double>& pred, const std::vector<double>& gt, double delta = 1.0) {
  require(pred.size() == gt.size(), ErrorCode::ShapeMismatch,
          "huber: " + std::to_string(pred.size()) + " predictions vs " + std::to_string(gt.size()) + " targets");
  require(!pred.empty(), ErrorCode::EmptyList, "huber: no elements");
  require(delta > 0, ErrorCode::InvalidArgument, "huber: delta must be positive");
  const double n = static_cast<double>(pred.size());
  LossResult r;
  r.gradient.resize(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - gt[i];
    const double a = std::abs(e);
    r.loss += a <= delta ? 0.5 * e * e : delta * (a - 0.5 * delta);
    r.gradient[i] = std::clamp(e, -delta, delta) / n;
  }
  r.loss /= n;
  return r;
}

inline LossResult huber_loss(const DepthMap& pred, const DepthMap& gt, double delta = 1.0) {
  require(pred.shape() == gt.shape(), ErrorCode::ShapeMismatch, "huber: depth maps differ in shape");
  const auto p = pred.values(), g = gt.values();
  return huber_loss(std::vector<double>(p.begin(), p.end()), std::vector<double>(g.begin(), g.end()), delta);
}

/// Softmax cross entropy over rows of `logits` (N, C); gradient has the same
/// (N, C) row-major layout.
inline LossResult cross_entropy(const Tensor<double, 2>& logits, const std::vector<int>& labels) {
  const std::size_t n = logits.dim(0), c = logits.dim(1);
  require(labels.size() == n, ErrorCode::ShapeMismatch,
          "cross entropy: " + std::to_string(n) + " rows vs " + std::to_string(labels.size()) + " labels");
  require(n > 0 && c > 0, ErrorCode::EmptyList, "cross entropy: no samples");
  LossResult r;
  r.gradient.resize(n * c);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = labels[i];
    require(label >= 0 && static_cast<std::size_t>(label) < c, ErrorCode::BadLabel,
            "label " + std::to_string(label) + " outside [0, " + std::to_string(c) + ")");
    double top = logits(i, 0);
    for (std::size_t k = 1; k < c; ++k) top = std::max(top, logits(i, k));
    double z = 0;
    for (std::size_t k = 0; k < c; ++k) z += std::exp(logits(i, k) - top);
    const double log_z = top + std::log(z);
    r.loss += log_z - logits(i, label);
    for (std::size_t k = 0; k < c; ++k)
      r.gradient[i * c + k] = (std::exp(logits(i, k) - log_z) - (static_cast<int>(k) == label)) / n;
  }
  r.loss /= static_cast<double>(n);
  return r;
}

}  // namespace mvtrans::metrics
