#pragma once

// The `inspect` command: diagnostic images of one stored view as binary PPM.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mvtrans/core/box.hpp"
#include "mvtrans/synthgen/annotation_io.hpp"

namespace mvtrans::app {

namespace fs = std::filesystem;

using synthgen::ColorImage;
using Rgb = std::array<std::uint8_t, 3>;

inline constexpr Rgb kCornerColor{255, 0, 255};
inline constexpr Rgb kEdgeColor{0, 255, 0};

inline void write_ppm(const fs::path& path, const ColorImage& img) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(f.good(), ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  f << "P6\n" << img.dim(1) << ' ' << img.dim(0) << "\n255\n";
  f.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
  require(f.good(), ErrorCode::IoError, "failed writing " + path.string());
}

inline ColorImage read_ppm(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), ErrorCode::IoError, "cannot open " + path.string());
  std::string magic;
  std::size_t w = 0, h = 0, maxval = 0;
  f >> magic >> w >> h >> maxval;
  require(f.good() && magic == "P6" && maxval == 255, ErrorCode::FormatError, path.string() + ": not an 8-bit P6 image");
  f.get();
  ColorImage img({h, w, 3});
  f.read(reinterpret_cast<char*>(img.data()), static_cast<std::streamsize>(img.size()));
  require(f.gcount() == static_cast<std::streamsize>(img.size()), ErrorCode::FormatError,
          path.string() + ": truncated pixel data");
  return img;
}

/// Blue -> cyan -> green -> yellow -> red for t in [0, 1].
inline Rgb colormap(double t) {
  static constexpr std::array<std::array<double, 3>, 5> stops{
      {{0, 0, 255}, {0, 255, 255}, {0, 255, 0}, {255, 255, 0}, {255, 0, 0}}};
  t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
  const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
  const double f = t - static_cast<double>(i);
  Rgb out;
  for (int c = 0; c < 3; ++c)
    out[c] = static_cast<std::uint8_t>(std::lround((1 - f) * stops[i][c] + f * stops[i + 1][c]));
  return out;
}

/// Distinct colours per label: black background, grey table, hue-stepped objects.
inline Rgb label_color(int label) {
  if (label == synthgen::kBackgroundLabel) return {0, 0, 0};
  if (label == synthgen::kTableLabel) return {110, 110, 110};
  const double hue = std::fmod(0.618033988749895 * (label - synthgen::kFirstObjectLabel), 1.0) * 6.0;
  const int sector = static_cast<int>(hue);
  const double f = hue - sector;
  const auto hi = std::uint8_t{230}, lo = std::uint8_t{40};
  const auto up = static_cast<std::uint8_t>(lo + f * (hi - lo)), down = static_cast<std::uint8_t>(hi - f * (hi - lo));
  switch (sector % 6) {
    case 0: return {hi, up, lo};
    case 1: return {down, hi, lo};
    case 2: return {lo, hi, up};
    case 3: return {lo, down, hi};
    case 4: return {up, lo, hi};
    default: return {hi, lo, down};
  }
}

inline void put(ColorImage& img, long x, long y, const Rgb& c) {
  if (x < 0 || y < 0 || x >= static_cast<long>(img.dim(1)) || y >= static_cast<long>(img.dim(0))) return;
  for (int k = 0; k < 3; ++k) img(y, x, k) = c[k];
}

inline void draw_line(ColorImage& img, const Vec2& a, const Vec2& b, const Rgb& c) {
  const double len = (b - a).lpNorm<Eigen::Infinity>();
  const int steps = std::max(1, static_cast<int>(std::ceil(len)));
  if (len > 4.0 * static_cast<double>(img.dim(0) + img.dim(1))) return;  // nearly grazing projection
  for (int i = 0; i <= steps; ++i) {
    const Vec2 p = a + (b - a) * (static_cast<double>(i) / steps);
    put(img, std::lround(p.x()), std::lround(p.y()), c);
  }
}

inline ColorImage depth_image(const DepthMap& depth) {
  double lo = 0, hi = 0;
  bool any = false;
  for (double z : depth.values())
    if (z > 0) lo = any ? std::min(lo, z) : z, hi = any ? std::max(hi, z) : z, any = true;
  ColorImage img({depth.dim(0), depth.dim(1), 3}, 0);
  for (std::size_t y = 0; y < depth.dim(0); ++y)
    for (std::size_t x = 0; x < depth.dim(1); ++x)
      if (depth(y, x) > 0) put(img, x, y, colormap(hi > lo ? (depth(y, x) - lo) / (hi - lo) : 0.0));
  return img;
}

inline ColorImage segmentation_image(const LabelMap& labels) {
  ColorImage img({labels.dim(0), labels.dim(1), 3}, 0);
  for (std::size_t y = 0; y < labels.dim(0); ++y)
    for (std::size_t x = 0; x < labels.dim(1); ++x) put(img, x, y, label_color(labels(y, x)));
  return img;
}

/// Field-grid heatmap shown at full resolution, scaled by its maximum.
inline ColorImage heatmap_image(const Grid2<double>& heat, std::size_t height, std::size_t width) {
  double top = 0;
  for (double v : heat.values()) top = std::max(top, v);
  ColorImage img({height, width, 3}, 0);
  const std::size_t sy = std::max<std::size_t>(1, height / heat.dim(0)), sx = std::max<std::size_t>(1, width / heat.dim(1));
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x) {
      const double v = heat(std::min(y / sy, heat.dim(0) - 1), std::min(x / sx, heat.dim(1) - 1));
      put(img, x, y, colormap(top > 0 ? v / top : 0.0));
    }
  return img;
}

/// Image positions of the eight box corners, or nothing if a corner lies
/// behind the camera.
inline std::optional<std::array<Vec2, 8>> projected_corners(const OrientedBox3& box, const CameraView& cam) {
  const RigidTransform cfw = cam.camera_from_world();
  std::array<Vec2, 8> out;
  const auto v = box_vertices(box);
  for (int k = 0; k < 8; ++k) {
    const Vec3 p = cfw.apply(v[k]);
    if (!(p.z() > kMinDepth)) return std::nullopt;
    out[k] = project(cam.intrinsics, p);
  }
  return out;
}

/// Left image with every object's box: edges first, then corner markers.
inline ColorImage overlay_image(const ColorImage& rgb, const std::vector<OrientedBox3>& boxes, const CameraView& cam) {
  ColorImage img = rgb;
  std::vector<std::array<Vec2, 8>> corners;
  for (const auto& b : boxes)
    if (auto c = projected_corners(b, cam)) corners.push_back(*c);
  for (const auto& c : corners)
    for (int a = 0; a < 8; ++a)
      for (int axis = 0; axis < 3; ++axis) {
        const int b = a ^ (1 << axis);
        if (a < b) draw_line(img, c[a], c[b], kEdgeColor);
      }
  for (const auto& c : corners)
    for (const auto& p : c)
      for (long dy = -1; dy <= 1; ++dy)
        for (long dx = -1; dx <= 1; ++dx) put(img, std::lround(p.x()) + dx, std::lround(p.y()) + dy, kCornerColor);
  return img;
}

inline const std::vector<std::string>& inspect_file_names() {
  static const std::vector<std::string> names{"depth.ppm", "segmentation.ppm", "heatmap.ppm", "overlay.ppm"};
  return names;
}

/// Writes the four diagnostic images of view `view` into `out`.
inline std::vector<fs::path> inspect_view(const fs::path& scene_dir, int view, const fs::path& out) {
  const auto m = synthgen::read_manifest(scene_dir);
  const int n = static_cast<int>(m.stations.size());
  require(view >= 0 && view < n, ErrorCode::IndexOutOfRange,
          "view " + std::to_string(view) + " outside valid range [0, " + std::to_string(n - 1) + "]");
  const auto rec = synthgen::read_view(scene_dir, m.stations[view]);
  std::error_code ec;
  fs::create_directories(out, ec);
  require(!ec, ErrorCode::IoError, "cannot create " + out.string() + ": " + ec.message());
  std::vector<OrientedBox3> boxes;
  for (const auto& o : m.scene.objects) boxes.push_back(o.obb);
  const std::vector<ColorImage> images{depth_image(rec.depth), segmentation_image(rec.visible),
                                       heatmap_image(rec.heatmap, rec.depth.dim(0), rec.depth.dim(1)),
                                       overlay_image(rec.rgb_left, boxes, rec.station.left)};
  std::vector<fs::path> paths;
  for (std::size_t i = 0; i < images.size(); ++i) {
    paths.push_back(out / inspect_file_names()[i]);
    write_ppm(paths.back(), images[i]);
  }
  return paths;
}

}  // namespace mvtrans::app
