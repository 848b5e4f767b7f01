#pragma once

#include <algorithm>
#include <array>
#include <string>

#include "mvtrans/core/sampling.hpp"
#include "mvtrans/planesweep/volume.hpp"

namespace mvtrans::planesweep {

/// Image -> feature map. Implementations must be deterministic.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual FeatureMap extract(const Image& image) const = 0;
  virtual std::size_t channels() const = 0;
  virtual int scale() const = 0;
};

/// Produces the D-channel context map fused into the cost volume.
class ContextExtractor {
 public:
  virtual ~ContextExtractor() = default;
  virtual FeatureMap extract(const Image& image, std::size_t planes, int scale) const = 0;
};

/// Context without a depth prior: all zeros.
class ZeroContext final : public ContextExtractor {
 public:
  FeatureMap extract(const Image& image, std::size_t planes, int scale) const override {
    require(scale >= 1 && image.dim(0) % scale == 0 && image.dim(1) % scale == 0,
            ErrorCode::BadScale, "image size not divisible by scale");
    return {Grid3<double>({planes, image.dim(0) / scale, image.dim(1) / scale}, 0.0), scale};
  }
};

namespace detail {

// Mean over `window` x `window` blocks of one colour channel; edge blocks
// average whatever pixels they cover.
inline Grid2<double> block_mean(const Image& image, std::size_t channel, std::size_t window) {
  const std::size_t h = image.dim(0), w = image.dim(1);
  const std::size_t oh = (h + window - 1) / window, ow = (w + window - 1) / window;
  Grid2<double> out({oh, ow});
  for (std::size_t by = 0; by < oh; ++by)
    for (std::size_t bx = 0; bx < ow; ++bx) {
      double sum = 0;
      std::size_t n = 0;
      for (std::size_t y = by * window; y < std::min(h, (by + 1) * window); ++y)
        for (std::size_t x = bx * window; x < std::min(w, (bx + 1) * window); ++x, ++n)
          sum += image(y, x, channel);
      out(by, bx) = sum / static_cast<double>(n);
    }
  return out;
}

// Bilinear upsampling of a block grid by `factor` onto an (oh, ow) grid, with
// block centres at factor*j + (factor-1)/2 and clamped edges.
inline Grid2<double> upsample_blocks(const Grid2<double>& coarse, std::size_t factor, std::size_t oh,
                                     std::size_t ow) {
  if (factor == 1) return coarse;
  Grid2<double> out({oh, ow});
  const double f = static_cast<double>(factor), shift = 0.5 * (f - 1.0);
  const double max_y = static_cast<double>(coarse.dim(0)) - 1,
               max_x = static_cast<double>(coarse.dim(1)) - 1;
  for (std::size_t y = 0; y < oh; ++y) {
    const double v = std::clamp((y - shift) / f, 0.0, max_y);
    for (std::size_t x = 0; x < ow; ++x) {
      const double u = std::clamp((x - shift) / f, 0.0, max_x);
      out(y, x) = bilinear_sample(coarse, Vec2(u, v)).value;
    }
  }
  return out;
}

}  // namespace detail

/// Fixed multi-scale pooling features standing in for a learned pyramid
/// pooling encoder. Per colour channel: block means over windows
/// {1, 2, 4, 8} * scale resized to (H/scale, W/scale), then one raw sample per
/// block. Channel order is window-major: [w1: r g b, w2: r g b, w4, w8, raw],
/// truncated to `channels`.
class PyramidPoolingExtractor final : public FeatureExtractor {
 public:
  static constexpr std::array<std::size_t, 4> kWindows{1, 2, 4, 8};

  PyramidPoolingExtractor(std::size_t channels, int scale) : channels_(channels), scale_(scale) {
    require(scale >= 1, ErrorCode::BadScale, "scale must be >= 1");
    require(channels >= 1 && channels <= 15, ErrorCode::InvalidArgument,
            "pyramid pooling yields between 1 and 15 channels");
  }

  std::size_t channels() const override { return channels_; }
  int scale() const override { return scale_; }

  FeatureMap extract(const Image& image) const override {
    const std::size_t h = image.dim(0), w = image.dim(1), colours = image.dim(2);
    const auto s = static_cast<std::size_t>(scale_);
    require(h > 0 && w > 0 && h % s == 0 && w % s == 0, ErrorCode::BadScale,
            "image " + shape_string(image) + " not divisible by scale " + std::to_string(s));
    require(channels_ <= 5 * colours, ErrorCode::InvalidArgument,
            "requested more channels than the image provides");
    const std::size_t oh = h / s, ow = w / s;
    FeatureMap out{Grid3<double>({channels_, oh, ow}), scale_};
    std::size_t next = 0;
    auto emit = [&](const Grid2<double>& g) {
      if (next >= channels_) return;
      std::copy(g.data(), g.data() + g.size(), out.data.data() + next * oh * ow);
      ++next;
    };
    for (std::size_t f : kWindows)
      for (std::size_t ch = 0; ch < colours && next < channels_; ++ch)
        emit(detail::upsample_blocks(detail::block_mean(image, ch, f * s), f, oh, ow));
    for (std::size_t ch = 0; ch < colours && next < channels_; ++ch) {
      Grid2<double> raw({oh, ow});
      for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t x = 0; x < ow; ++x) raw(y, x) = image(y * s + s / 2, x * s + s / 2, ch);
      emit(raw);
    }
    return out;
  }

 private:
  std::size_t channels_;
  int scale_;
};

inline FeatureMap reference_feature_extractor(const Image& image, std::size_t channels, int scale) {
  return PyramidPoolingExtractor(channels, scale).extract(image);
}

}  // namespace mvtrans::planesweep
