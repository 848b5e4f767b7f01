#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mvtrans/core/error.hpp"

namespace mvtrans::planesweep {

enum class Spacing { Uniform, InverseDepth };

/// Fronto-parallel depth hypotheses in the reference camera, strictly increasing.
struct PlaneStack {
  std::vector<double> depths;
  Spacing spacing = Spacing::Uniform;

  std::size_t size() const { return depths.size(); }
  double front() const { return depths.front(); }
  double back() const { return depths.back(); }

  void validate() const {
    require(depths.size() >= 2, ErrorCode::BadRange, "need at least two planes");
    require(depths.front() > 0, ErrorCode::BadRange, "plane depths must be positive");
    for (std::size_t d = 1; d < depths.size(); ++d)
      require(depths[d] > depths[d - 1], ErrorCode::BadRange, "plane depths must increase");
  }
};

inline PlaneStack sample_depth_planes(double z_min, double z_max, std::size_t count,
                                      Spacing spacing = Spacing::Uniform) {
  if (!(z_min > 0 && z_max > z_min) || count < 2)
    fail(ErrorCode::BadRange, "expected 0 < z_min < z_max and count >= 2, got [" +
                                  std::to_string(z_min) + ", " + std::to_string(z_max) + "] x " +
                                  std::to_string(count));
  PlaneStack stack;
  stack.spacing = spacing;
  stack.depths.resize(count);
  const double last = static_cast<double>(count - 1);
  for (std::size_t d = 0; d < count; ++d) {
    const double t = d / last;
    if (spacing == Spacing::Uniform) {
      stack.depths[d] = z_min + t * (z_max - z_min);
    } else {
      const double inv = 1.0 / z_min + t * (1.0 / z_max - 1.0 / z_min);
      stack.depths[d] = 1.0 / inv;
    }
  }
  // endpoints exactly as requested
  stack.depths.front() = z_min;
  stack.depths.back() = z_max;
  return stack;
}

}  // namespace mvtrans::planesweep
