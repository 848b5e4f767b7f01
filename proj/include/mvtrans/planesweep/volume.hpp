#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mvtrans/core/sampling.hpp"
#include "mvtrans/core/tensor.hpp"
#include "mvtrans/planesweep/homography.hpp"
#include "mvtrans/planesweep/planes.hpp"

namespace mvtrans::planesweep {

using Volume4 = Tensor<double, 4>;   // (C, D, H, W)
using ValidMask = Tensor<unsigned char, 3>;  // (D, H, W)

enum class VolumeRole { RawMatching, Matching, Context, Cost, Probability };

struct GridVolume {
  Volume4 data;
  VolumeRole role = VolumeRole::Matching;

  std::size_t channels() const { return data.dim(0); }
  std::size_t planes() const { return data.dim(1); }
  std::size_t height() const { return data.dim(2); }
  std::size_t width() const { return data.dim(3); }
};

/// Checks the probability invariant: non-negative, sums to 1 over D (1e-6).
inline bool is_normalized(const GridVolume& p, double tol = 1e-6) {
  if (p.channels() != 1) return false;
  for (std::size_t y = 0; y < p.height(); ++y)
    for (std::size_t x = 0; x < p.width(); ++x) {
      double sum = 0;
      for (std::size_t d = 0; d < p.planes(); ++d) {
        const double v = p.data(0, d, y, x);
        if (!(v >= 0)) return false;
        sum += v;
      }
      if (std::abs(sum - 1.0) > tol) return false;
    }
  return true;
}

/// Channels-first feature grid at 1/scale of the input image resolution.
struct FeatureMap {
  Grid3<double> data;  // (C, H', W')
  int scale = 1;

  std::size_t channels() const { return data.dim(0); }
  std::size_t height() const { return data.dim(1); }
  std::size_t width() const { return data.dim(2); }
};

struct WarpedVolume {
  GridVolume volume;  // (C, D, H', W')
  ValidMask valid;    // (D, H', W'), 1 where the sample landed inside the support grid
};

/// Samples support features at H_d * (x, y, 1) for every reference pixel and plane.
inline WarpedVolume warp_support_features(const FeatureMap& sup, const std::vector<Mat3>& homographies) {
  const std::size_t c = sup.channels(), h = sup.height(), w = sup.width();
  const std::size_t depth = homographies.size();
  WarpedVolume out{GridVolume{Volume4({c, depth, h, w}), VolumeRole::Matching},
                   ValidMask({depth, h, w}, 0)};
  const double max_x = static_cast<double>(w) - 1.0, max_y = static_cast<double>(h) - 1.0;
  for (std::size_t d = 0; d < depth; ++d) {
    const Mat3& hom = homographies[d];
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const Vec3 p = hom * Vec3(static_cast<double>(x), static_cast<double>(y), 1.0);
        if (!(p.z() > 0)) continue;  // behind the support camera
        const double u = p.x() / p.z(), v = p.y() / p.z();
        if (!(u >= 0 && v >= 0 && u <= max_x && v <= max_y)) continue;
        const auto x0 = static_cast<std::size_t>(u), y0 = static_cast<std::size_t>(v);
        const std::size_t x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
        const double ax = u - x0, ay = v - y0;
        for (std::size_t ch = 0; ch < c; ++ch) {
          const double v00 = sup.data(ch, y0, x0), v01 = sup.data(ch, y0, x1);
          const double v10 = sup.data(ch, y1, x0), v11 = sup.data(ch, y1, x1);
          const double top = v00 + ax * (v01 - v00);
          const double bot = v10 + ax * (v11 - v10);
          out.volume.data(ch, d, y, x) = top + ay * (bot - top);
        }
        out.valid(d, y, x) = 1;
      }
    }
  }
  return out;
}

/// Reference features broadcast over D, stacked on top of the warped support features.
inline GridVolume build_raw_matching_volume(const FeatureMap& ref, const GridVolume& warped) {
  const std::size_t c = ref.channels(), depth = warped.planes(), h = ref.height(), w = ref.width();
  require(warped.channels() == c && warped.height() == h && warped.width() == w,
          ErrorCode::ShapeMismatch,
          "reference features " + shape_string(ref.data) + " vs warped " + shape_string(warped.data));
  GridVolume raw{Volume4({2 * c, depth, h, w}), VolumeRole::RawMatching};
  const std::size_t plane = h * w;
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t d = 0; d < depth; ++d) {
      std::copy_n(ref.data.data() + ch * plane, plane, raw.data.data() + (ch * depth + d) * plane);
      std::copy_n(warped.data.data() + (ch * depth + d) * plane, plane,
                  raw.data.data() + ((c + ch) * depth + d) * plane);
    }
  return raw;
}

/// 3x3x3 mean over (D, H, W) per channel with replicated edges.
inline Volume4 box_smooth_3d(const Volume4& in) {
  const std::size_t c = in.dim(0), depth = in.dim(1), h = in.dim(2), w = in.dim(3);
  Volume4 a = in, b = in;
  auto pass = [&](const Volume4& src, Volume4& dst, int axis) {
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t d = 0; d < depth; ++d)
        for (std::size_t y = 0; y < h; ++y)
          for (std::size_t x = 0; x < w; ++x) {
            std::size_t idx[3] = {d, y, x};
            const std::size_t n[3] = {depth, h, w};
            const std::size_t i = idx[axis];
            const std::size_t lo = i == 0 ? 0 : i - 1, hi = std::min(i + 1, n[axis] - 1);
            double sum = 0;
            for (std::size_t k : {lo, i, hi}) {
              idx[axis] = k;
              sum += src(ch, idx[0], idx[1], idx[2]);
            }
            dst(ch, d, y, x) = sum / 3.0;
          }
  };
  pass(in, a, 0);
  pass(a, b, 1);
  pass(b, a, 2);
  return a;
}

/// Collapses a raw (2C, D, H, W) matching volume to (C, D, H, W) scores.
class VolumeReducer {
 public:
  virtual ~VolumeReducer() = default;
  virtual GridVolume reduce(const GridVolume& raw, const ValidMask* valid) const = 0;
};

/// Fixed stand-in for the learned 3D CNN: score_c = -(ref_c - sup_c)^2 (higher
/// is a better match), then a 3x3x3 box filter. Voxels whose warp left the
/// support grid take the mean of the valid scores of their (c, y, x) column.
class SquaredDifferenceReducer final : public VolumeReducer {
 public:
  GridVolume reduce(const GridVolume& raw, const ValidMask* valid) const override {
    require(raw.channels() % 2 == 0 && raw.channels() > 0, ErrorCode::ShapeMismatch,
            "raw matching volume needs an even channel count");
    const std::size_t c = raw.channels() / 2, depth = raw.planes(), h = raw.height(),
                      w = raw.width();
    if (valid)
      require(valid->dim(0) == depth && valid->dim(1) == h && valid->dim(2) == w,
              ErrorCode::ShapeMismatch, "validity mask shape mismatch");
    Volume4 score({c, depth, h, w});
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
          double sum = 0;
          std::size_t n = 0;
          for (std::size_t d = 0; d < depth; ++d) {
            const double diff = raw.data(ch, d, y, x) - raw.data(c + ch, d, y, x);
            score(ch, d, y, x) = -diff * diff;
            if (!valid || (*valid)(d, y, x)) {
              sum += score(ch, d, y, x);
              ++n;
            }
          }
          if (valid && n < depth) {
            const double fill = n ? sum / n : 0.0;
            for (std::size_t d = 0; d < depth; ++d)
              if (!(*valid)(d, y, x)) score(ch, d, y, x) = fill;
          }
        }
    return {box_smooth_3d(score), VolumeRole::Matching};
  }
};

inline GridVolume reduce_and_regularize(const GridVolume& raw, const ValidMask* valid = nullptr) {
  return SquaredDifferenceReducer{}.reduce(raw, valid);
}

/// Elementwise mean in index order. A running mean keeps the result bit-exact
/// when volumes repeat, so duplicated support views do not perturb the output.
inline GridVolume view_average_pool(const std::vector<GridVolume>& volumes) {
  require(!volumes.empty(), ErrorCode::EmptyList, "no volumes to pool");
  GridVolume out = volumes.front();
  for (std::size_t k = 1; k < volumes.size(); ++k) {
    require(volumes[k].data.shape() == out.data.shape(), ErrorCode::ShapeMismatch,
            "pooled volumes differ in shape");
    const double inv = 1.0 / static_cast<double>(k + 1);
    const auto src = volumes[k].data.values();
    auto dst = out.data.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += (src[i] - dst[i]) * inv;
  }
  return out;
}

/// Appends a D-channel context map as one extra channel: (C+1, D, H, W).
inline GridVolume fuse_context(const GridVolume& matching, const FeatureMap& context) {
  const std::size_t c = matching.channels(), depth = matching.planes(), h = matching.height(),
                    w = matching.width();
  require(context.channels() == depth, ErrorCode::ShapeMismatch,
          "context has " + std::to_string(context.channels()) + " channels, expected D=" +
              std::to_string(depth));
  require(context.height() == h && context.width() == w, ErrorCode::ShapeMismatch,
          "context spatial size differs from matching volume");
  GridVolume cost{Volume4({c + 1, depth, h, w}), VolumeRole::Cost};
  std::copy(matching.data.data(), matching.data.data() + matching.data.size(), cost.data.data());
  std::copy(context.data.data(), context.data.data() + context.data.size(),
            cost.data.data() + matching.data.size());
  return cost;
}

/// Mean over channels, then softmax over D of `inverse_temperature * score`.
inline GridVolume volume_to_probability(const GridVolume& cost, double inverse_temperature = 1.0) {
  const std::size_t c = cost.channels(), depth = cost.planes(), h = cost.height(), w = cost.width();
  require(c > 0 && depth > 0, ErrorCode::ShapeMismatch, "empty cost volume");
  GridVolume prob{Volume4({1, depth, h, w}), VolumeRole::Probability};
  std::vector<double> s(depth);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      double peak = -std::numeric_limits<double>::infinity();
      for (std::size_t d = 0; d < depth; ++d) {
        double acc = 0;
        for (std::size_t ch = 0; ch < c; ++ch) acc += cost.data(ch, d, y, x);
        s[d] = inverse_temperature * acc / static_cast<double>(c);
        peak = std::max(peak, s[d]);
      }
      double z = 0;
      for (std::size_t d = 0; d < depth; ++d) z += (s[d] = std::exp(s[d] - peak));
      for (std::size_t d = 0; d < depth; ++d) prob.data(0, d, y, x) = s[d] / z;
    }
  return prob;
}

/// Soft argmax: sum_d P[d] z_d, clamped to [z_1, z_D] against round-off.
inline DepthMap expected_depth(const GridVolume& prob, const PlaneStack& planes) {
  require(prob.channels() == 1 && prob.planes() == planes.size(), ErrorCode::ShapeMismatch,
          "probability volume has " + std::to_string(prob.planes()) + " planes, stack has " +
              std::to_string(planes.size()));
  DepthMap depth({prob.height(), prob.width()});
  for (std::size_t y = 0; y < prob.height(); ++y)
    for (std::size_t x = 0; x < prob.width(); ++x) {
      double acc = 0;
      for (std::size_t d = 0; d < planes.size(); ++d) acc += prob.data(0, d, y, x) * planes.depths[d];
      depth(y, x) = std::clamp(acc, planes.front(), planes.back());
    }
  return depth;
}

/// Index of the most probable plane per pixel (first on ties).
inline Grid2<int> argmax_plane(const GridVolume& prob) {
  Grid2<int> out({prob.height(), prob.width()});
  for (std::size_t y = 0; y < prob.height(); ++y)
    for (std::size_t x = 0; x < prob.width(); ++x) {
      std::size_t best = 0;
      for (std::size_t d = 1; d < prob.planes(); ++d)
        if (prob.data(0, d, y, x) > prob.data(0, best, y, x)) best = d;
      out(y, x) = static_cast<int>(best);
    }
  return out;
}

}  // namespace mvtrans::planesweep
