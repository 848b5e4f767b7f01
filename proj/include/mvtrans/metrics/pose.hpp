#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "mvtrans/core/box.hpp"
#include "mvtrans/core/error.hpp"

namespace mvtrans::metrics {

inline constexpr double kAucMaxError = 0.10;   // metres
inline constexpr double kPoseThreshold = 0.02;  // metres, strict

struct PoseMetrics {
  double auc = 0;            // percent
  double pct_under_2cm = 0;  // percent
  double mae_mm = 0;
  std::size_t count = 0;
};

/// Area under the cumulative error curve on [0, max_err], as a percentage.
/// Each error e contributes 1 - e / max_err of the area, clamped at zero, so
/// the integral is exact.
inline double auc_of_errors(const std::vector<double>& errors, double max_err = kAucMaxError) {
  require(!errors.empty(), ErrorCode::EmptyList, "no errors to integrate");
  require(max_err > 0, ErrorCode::InvalidArgument, "max_err must be positive");
  double area = 0;
  for (double e : errors) {
    require(e >= 0, ErrorCode::InvalidArgument, "errors must be non-negative");
    area += std::max(0.0, 1.0 - e / max_err);
  }
  return 100.0 * area / static_cast<double>(errors.size());
}

inline PoseMetrics pose_metrics_from_errors(const std::vector<double>& errors) {
  PoseMetrics m;
  m.count = errors.size();
  m.auc = auc_of_errors(errors);
  double sum = 0;
  std::size_t under = 0;
  for (double e : errors) {
    sum += e;
    under += e < kPoseThreshold;
  }
  m.pct_under_2cm = 100.0 * static_cast<double>(under) / static_cast<double>(errors.size());
  m.mae_mm = 1000.0 * sum / static_cast<double>(errors.size());
  return m;
}

/// Keypoints correspond by index.
inline PoseMetrics pose_metrics(const std::vector<Vec3>& pred, const std::vector<Vec3>& gt) {
  require(pred.size() == gt.size(), ErrorCode::CountMismatch,
          std::to_string(pred.size()) + " predicted vs " + std::to_string(gt.size()) + " ground-truth keypoints");
  std::vector<double> errors;
  for (std::size_t i = 0; i < pred.size(); ++i) errors.push_back((pred[i] - gt[i]).norm());
  return pose_metrics_from_errors(errors);
}

/// Corner permutations induced by the 48 symmetries of a cube (signed axis
/// permutations), using the corner numbering of box_vertices.
inline const std::vector<std::array<int, 8>>& box_corner_symmetries() {
  static const std::vector<std::array<int, 8>> table = [] {
    std::vector<std::array<int, 8>> out;
    const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (const auto& p : perms)
      for (int flips = 0; flips < 8; ++flips) {
        std::array<int, 8> map{};
        for (int k = 0; k < 8; ++k) {
          int image = 0;
          for (int axis = 0; axis < 3; ++axis) {
            int bit = (k >> (2 - p[axis])) & 1;
            if ((flips >> axis) & 1) bit ^= 1;
            image |= bit << (2 - axis);
          }
          map[k] = image;
        }
        out.push_back(map);
      }
    return out;
  }();
  return table;
}

/// Per-corner errors between two boxes under the corner correspondence with
/// the smallest mean error, so symmetric relabellings of a box do not count
/// as pose error.
inline std::vector<double> box_keypoint_errors(const OrientedBox3& pred, const OrientedBox3& gt) {
  const auto p = box_vertices(pred), g = box_vertices(gt);
  std::vector<double> best;
  double best_sum = std::numeric_limits<double>::infinity();
  for (const auto& map : box_corner_symmetries()) {
    std::vector<double> e(8);
    double sum = 0;
    for (int k = 0; k < 8; ++k) sum += e[k] = (p[k] - g[map[k]]).norm();
    if (sum < best_sum) {
      best_sum = sum;
      best = std::move(e);
    }
  }
  return best;
}

}  // namespace mvtrans::metrics
