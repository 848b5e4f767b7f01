#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "mvtrans/core/error.hpp"
#include "mvtrans/core/tensor.hpp"

namespace mvtrans::metrics {

inline constexpr std::size_t kEvalHeight = 144;
inline constexpr std::size_t kEvalWidth = 256;

struct DepthMetrics {
  double rmse = 0, mae = 0, rel = 0;
  std::size_t pixels = 0;
  double squared_sum = 0, abs_sum = 0, rel_sum = 0;  // error sums behind the means
};

namespace detail {

/// Source coordinate of output sample i under half-pixel alignment.
inline double source_coord(std::size_t i, std::size_t in, std::size_t out) {
  return (static_cast<double>(i) + 0.5) * static_cast<double>(in) / static_cast<double>(out) - 0.5;
}

}  // namespace detail

/// Bilinear resize with pixel centres aligned (edge samples clamp). Equal
/// sizes return the input unchanged.
inline Grid2<double> resize_bilinear(const Grid2<double>& in, std::size_t h, std::size_t w) {
  require(in.size() > 0 && h > 0 && w > 0, ErrorCode::ShapeMismatch, "cannot resize an empty grid");
  if (in.dim(0) == h && in.dim(1) == w) return in;
  Grid2<double> out({h, w});
  const std::size_t ih = in.dim(0), iw = in.dim(1);
  for (std::size_t y = 0; y < h; ++y) {
    const double sy = std::clamp(detail::source_coord(y, ih, h), 0.0, static_cast<double>(ih - 1));
    const std::size_t y0 = static_cast<std::size_t>(std::floor(sy)), y1 = std::min(y0 + 1, ih - 1);
    const double fy = sy - static_cast<double>(y0);
    for (std::size_t x = 0; x < w; ++x) {
      const double sx = std::clamp(detail::source_coord(x, iw, w), 0.0, static_cast<double>(iw - 1));
      const std::size_t x0 = static_cast<std::size_t>(std::floor(sx)), x1 = std::min(x0 + 1, iw - 1);
      const double fx = sx - static_cast<double>(x0);
      const double top = (1 - fx) * in(y0, x0) + fx * in(y0, x1);
      const double bottom = (1 - fx) * in(y1, x0) + fx * in(y1, x1);
      out(y, x) = (1 - fy) * top + fy * bottom;
    }
  }
  return out;
}

template <class T>
Grid2<T> resize_nearest(const Grid2<T>& in, std::size_t h, std::size_t w) {
  require(in.size() > 0 && h > 0 && w > 0, ErrorCode::ShapeMismatch, "cannot resize an empty grid");
  if (in.dim(0) == h && in.dim(1) == w) return in;
  Grid2<T> out({h, w});
  for (std::size_t y = 0; y < h; ++y) {
    const auto sy = std::min(in.dim(0) - 1, static_cast<std::size_t>((y + 0.5) * in.dim(0) / h));
    for (std::size_t x = 0; x < w; ++x)
      out(y, x) = in(sy, std::min(in.dim(1) - 1, static_cast<std::size_t>((x + 0.5) * in.dim(1) / w)));
  }
  return out;
}

/// RMSE, MAE and REL over the masked pixels after resizing prediction and
/// ground truth to 144 x 256. Without a mask, every pixel with positive
/// ground truth counts. Masked pixels whose resized ground truth is not
/// positive are left out.
inline DepthMetrics depth_metrics(const DepthMap& pred, const DepthMap& gt, const std::optional<Mask>& mask = {}) {
  const DepthMap p = resize_bilinear(pred, kEvalHeight, kEvalWidth);
  const DepthMap g = resize_bilinear(gt, kEvalHeight, kEvalWidth);
  Mask m;
  if (mask) {
    require(mask->shape() == gt.shape(), ErrorCode::ShapeMismatch, "mask does not match ground truth");
    m = resize_nearest(*mask, kEvalHeight, kEvalWidth);
  } else {
    Mask valid(gt.shape(), 0);
    for (std::size_t i = 0; i < gt.size(); ++i) valid[i] = gt[i] > 0;
    m = resize_nearest(valid, kEvalHeight, kEvalWidth);
  }
  DepthMetrics out;
  double &se = out.squared_sum, &ae = out.abs_sum, &re = out.rel_sum;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!m[i] || !(g[i] > 0)) continue;
    const double e = p[i] - g[i];
    se += e * e;
    ae += std::abs(e);
    re += std::abs(e) / g[i];
    ++out.pixels;
  }
  require(out.pixels > 0, ErrorCode::EmptyMask, "no valid pixels to evaluate");
  const double n = static_cast<double>(out.pixels);
  out.rmse = std::sqrt(se / n);
  out.mae = ae / n;
  out.rel = re / n;
  return out;
}

/// Metrics over the union of the pixels of several evaluations.
inline DepthMetrics pool(const std::vector<DepthMetrics>& parts) {
  DepthMetrics out;
  for (const auto& p : parts) {
    out.pixels += p.pixels;
    out.squared_sum += p.squared_sum;
    out.abs_sum += p.abs_sum;
    out.rel_sum += p.rel_sum;
  }
  require(out.pixels > 0, ErrorCode::EmptyMask, "no valid pixels to evaluate");
  const double n = static_cast<double>(out.pixels);
  out.rmse = std::sqrt(out.squared_sum / n);
  out.mae = out.abs_sum / n;
  out.rel = out.rel_sum / n;
  return out;
}

}  // namespace mvtrans::metrics
