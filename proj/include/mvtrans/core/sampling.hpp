#pragma once

#include <cmath>
#include <vector>

#include "mvtrans/core/geometry.hpp"
#include "mvtrans/core/tensor.hpp"

namespace mvtrans {

struct Sample {
  double value = 0.0;
  bool in_bounds = false;
};

struct VectorSample {
  std::vector<double> values;
  bool in_bounds = false;
};

namespace detail {

struct BilinearTap {
  std::size_t x0, y0, x1, y1;
  double ax, ay;
};

// Node coordinates are pixel centres; valid domain is [0, W-1] x [0, H-1].
inline bool bilinear_tap(std::size_t height, std::size_t width, double u, double v,
                         BilinearTap& tap) {
  if (!(u >= 0.0 && v >= 0.0 && u <= static_cast<double>(width) - 1.0 &&
        v <= static_cast<double>(height) - 1.0))
    return false;
  const double fx = std::floor(u), fy = std::floor(v);
  tap.x0 = static_cast<std::size_t>(fx);
  tap.y0 = static_cast<std::size_t>(fy);
  tap.x1 = std::min(tap.x0 + 1, width - 1);
  tap.y1 = std::min(tap.y0 + 1, height - 1);
  tap.ax = u - fx;
  tap.ay = v - fy;
  return true;
}

}  // namespace detail

/// Bilinear lookup at continuous pixel coords `uv` = (x, y) of a (H, W) grid.
/// Outside the node hull the result is 0 with in_bounds = false.
template <class T>
Sample bilinear_sample(const Grid2<T>& grid, const Vec2& uv) {
  detail::BilinearTap tap;
  if (grid.empty() || !detail::bilinear_tap(grid.dim(0), grid.dim(1), uv.x(), uv.y(), tap))
    return {};
  const double v00 = grid(tap.y0, tap.x0), v01 = grid(tap.y0, tap.x1);
  const double v10 = grid(tap.y1, tap.x0), v11 = grid(tap.y1, tap.x1);
  const double top = v00 + tap.ax * (v01 - v00);
  const double bot = v10 + tap.ax * (v11 - v10);
  return {top + tap.ay * (bot - top), true};
}

/// Channels-first (C, H, W) variant; returns one value per channel.
template <class T>
VectorSample bilinear_sample(const Grid3<T>& grid, const Vec2& uv) {
  VectorSample out;
  out.values.assign(grid.dim(0), 0.0);
  detail::BilinearTap tap;
  if (grid.empty() || !detail::bilinear_tap(grid.dim(1), grid.dim(2), uv.x(), uv.y(), tap))
    return out;
  out.in_bounds = true;
  for (std::size_t c = 0; c < grid.dim(0); ++c) {
    const double v00 = grid(c, tap.y0, tap.x0), v01 = grid(c, tap.y0, tap.x1);
    const double v10 = grid(c, tap.y1, tap.x0), v11 = grid(c, tap.y1, tap.x1);
    const double top = v00 + tap.ax * (v01 - v00);
    const double bot = v10 + tap.ax * (v11 - v10);
    out.values[c] = top + tap.ay * (bot - top);
  }
  return out;
}

/// Resize a (H, W) grid with pixel-centre alignment and edge clamping.
inline Grid2<double> resize_bilinear(const Grid2<double>& src, std::size_t out_h, std::size_t out_w) {
  require(!src.empty() && out_h > 0 && out_w > 0, ErrorCode::ShapeMismatch, "resize of empty grid");
  Grid2<double> out({out_h, out_w});
  const double sy = static_cast<double>(src.dim(0)) / out_h;
  const double sx = static_cast<double>(src.dim(1)) / out_w;
  const double maxy = static_cast<double>(src.dim(0)) - 1, maxx = static_cast<double>(src.dim(1)) - 1;
  for (std::size_t i = 0; i < out_h; ++i) {
    const double v = std::clamp((i + 0.5) * sy - 0.5, 0.0, maxy);
    for (std::size_t j = 0; j < out_w; ++j) {
      const double u = std::clamp((j + 0.5) * sx - 0.5, 0.0, maxx);
      out(i, j) = bilinear_sample(src, Vec2(u, v)).value;
    }
  }
  return out;
}

template <class T>
Grid2<T> resize_nearest(const Grid2<T>& src, std::size_t out_h, std::size_t out_w) {
  Grid2<T> out({out_h, out_w});
  for (std::size_t i = 0; i < out_h; ++i) {
    const auto y = std::min(src.dim(0) - 1, static_cast<std::size_t>((i + 0.5) * src.dim(0) / out_h));
    for (std::size_t j = 0; j < out_w; ++j) {
      const auto x =
          std::min(src.dim(1) - 1, static_cast<std::size_t>((j + 0.5) * src.dim(1) / out_w));
      out(i, j) = src(y, x);
    }
  }
  return out;
}

}  // namespace mvtrans
