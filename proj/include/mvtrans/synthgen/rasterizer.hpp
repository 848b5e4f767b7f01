#pragma once

// Z-buffer triangle rasterizer sampling at pixel centres, plus a simple
// shader for the colour images.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "mvtrans/core/error.hpp"
#include "mvtrans/core/geometry.hpp"
#include "mvtrans/core/mesh.hpp"
#include "mvtrans/core/tensor.hpp"
#include "mvtrans/synthgen/scene.hpp"

namespace mvtrans::synthgen {

inline constexpr int kBackgroundLabel = 0;
inline constexpr int kTableLabel = 1;
inline constexpr int kFirstObjectLabel = 2;  // object id i has label i + 2
inline constexpr double kNearPlane = 1e-3;

using ColorImage = Tensor<std::uint8_t, 3>;  // (H, W, 3)
using NormalMap = Tensor<float, 3>;          // (H, W, 3), camera frame

/// Per-pixel nearest surface.
struct RasterTarget {
  Grid2<double> depth;  // +inf where empty
  LabelMap label;
  Grid3<double> normal;  // (H, W, 3) camera frame, facing the camera

  explicit RasterTarget(const Intrinsics& k)
      : depth({static_cast<std::size_t>(k.height), static_cast<std::size_t>(k.width)},
              std::numeric_limits<double>::infinity()),
        label(depth.shape(), kBackgroundLabel),
        normal({depth.dim(0), depth.dim(1), 3}, 0.0) {}
};

namespace detail {

struct ClipVertex {
  Vec3 p;  // camera frame
  Vec3 n;
};

inline std::vector<ClipVertex> clip_near(const std::array<ClipVertex, 3>& tri) {
  std::vector<ClipVertex> out;
  for (int i = 0; i < 3; ++i) {
    const ClipVertex& a = tri[i];
    const ClipVertex& b = tri[(i + 1) % 3];
    const bool ina = a.p.z() >= kNearPlane, inb = b.p.z() >= kNearPlane;
    if (ina) out.push_back(a);
    if (ina != inb) {
      const double t = (kNearPlane - a.p.z()) / (b.p.z() - a.p.z());
      out.push_back({a.p + t * (b.p - a.p), a.n + t * (b.n - a.n)});
    }
  }
  return out;
}

inline double edge(const Vec2& a, const Vec2& b, const Vec2& p) {
  return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
}

inline void draw_triangle(RasterTarget& target, const Intrinsics& k, const std::array<ClipVertex, 3>& v,
                          int label, Mask* coverage) {
  std::array<Vec2, 3> s;
  for (int i = 0; i < 3; ++i) s[i] = project(k, v[i].p);
  const double area = edge(s[0], s[1], s[2]);
  if (std::abs(area) < 1e-14) return;
  const int w = k.width, h = k.height;
  const int x0 = std::max(0, static_cast<int>(std::ceil(std::min({s[0].x(), s[1].x(), s[2].x()}))));
  const int x1 = std::min(w - 1, static_cast<int>(std::floor(std::max({s[0].x(), s[1].x(), s[2].x()}))));
  const int y0 = std::max(0, static_cast<int>(std::ceil(std::min({s[0].y(), s[1].y(), s[2].y()}))));
  const int y1 = std::min(h - 1, static_cast<int>(std::floor(std::max({s[0].y(), s[1].y(), s[2].y()}))));
  const Vec3 face = (v[1].p - v[0].p).cross(v[2].p - v[0].p).normalized();
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const Vec2 p(x, y);
      const double b0 = edge(s[1], s[2], p) / area, b1 = edge(s[2], s[0], p) / area, b2 = edge(s[0], s[1], p) / area;
      if (b0 < 0 || b1 < 0 || b2 < 0) continue;
      // 1/z is affine in screen space, so interpolate it and invert.
      const double q0 = b0 / v[0].p.z(), q1 = b1 / v[1].p.z(), q2 = b2 / v[2].p.z();
      const double inv_z = q0 + q1 + q2;
      // Ray-plane intersection is exact for fronto-parallel faces; the
      // interpolated 1/z takes over for rays nearly inside the plane.
      const Vec3 ray((p.x() - k.cx) / k.fx, (p.y() - k.cy) / k.fy, 1.0);  // z = 1
      const double denom = face.dot(ray);
      const double z = std::abs(denom) > 1e-6 * ray.norm() ? face.dot(v[0].p) / denom : 1.0 / inv_z;
      if (coverage) (*coverage)(y, x) = 1;
      if (!(z < target.depth(y, x))) continue;
      Vec3 n = (q0 * v[0].n + q1 * v[1].n + q2 * v[2].n) / inv_z;
      n = n.norm() > 1e-12 ? n.normalized() : face;
      if (n.dot(ray) > 0) n = -n;
      target.depth(y, x) = z;
      target.label(y, x) = label;
      for (int c = 0; c < 3; ++c) target.normal(y, x, c) = n[c];
    }
}

}  // namespace detail

/// Draws every triangle of `mesh` placed by `local_to_camera`. Pixels covered
/// by the mesh (regardless of occlusion) are set in `coverage` if given.
inline void draw_mesh(RasterTarget& target, const Intrinsics& k, const TriMesh& mesh,
                      const RigidTransform& local_to_camera, int label, Mask* coverage = nullptr) {
  std::vector<detail::ClipVertex> cam(mesh.vertices.size());
  for (std::size_t i = 0; i < cam.size(); ++i)
    cam[i] = {local_to_camera.apply(mesh.vertices[i]),
              mesh.normals.empty() ? Vec3::Zero() : Vec3(local_to_camera.rotation() * mesh.normals[i])};
  for (const auto& t : mesh.triangles) {
    const std::array<detail::ClipVertex, 3> tri{cam[t[0]], cam[t[1]], cam[t[2]]};
    const auto poly = detail::clip_near(tri);
    for (std::size_t i = 1; i + 1 < poly.size(); ++i)
      detail::draw_triangle(target, k, {poly[0], poly[i], poly[i + 1]}, label, coverage);
  }
}

struct RasterOutput {
  DepthMap depth;        // metres, 0 where nothing is hit
  LabelMap visible;      // background 0, table 1, object id + 2
  Tensor<std::uint8_t, 3> full;  // (K, H, W) per-object masks ignoring occlusion
  NormalMap normals;     // unit, camera frame, zero on background
};

/// Ground-truth geometry of one view; transparent objects count as opaque.
inline RasterOutput rasterize_view(const SceneSpec& scene, const CameraView& view) {
  const Intrinsics& k = view.intrinsics;
  require(k.width % 8 == 0 && k.height % 8 == 0, ErrorCode::BadScale, "resolution must be divisible by 8");
  const RigidTransform cam_from_world = view.camera_from_world();
  RasterTarget target(k);
  draw_mesh(target, k, make_table_mesh(scene.table_extent), cam_from_world, kTableLabel);
  const std::size_t h = target.depth.dim(0), w = target.depth.dim(1);
  RasterOutput out;
  out.full = Tensor<std::uint8_t, 3>({scene.objects.size(), h, w}, 0);
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const auto& o = scene.objects[i];
    Mask cover({h, w}, 0);
    draw_mesh(target, k, o.mesh, compose(cam_from_world, o.local_to_world), o.id + kFirstObjectLabel, &cover);
    std::copy(cover.values().begin(), cover.values().end(), out.full.data() + i * h * w);
  }
  out.depth = DepthMap({h, w}, 0.0);
  out.normals = NormalMap({h, w, 3}, 0.0f);
  out.visible = target.label;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      if (target.label(y, x) == kBackgroundLabel) continue;
      out.depth(y, x) = target.depth(y, x);
      for (int c = 0; c < 3; ++c) out.normals(y, x, c) = static_cast<float>(target.normal(y, x, c));
    }
  return out;
}

namespace detail {

inline Vec3 background_color(int background_id) {
  Rng rng(mix_seed(static_cast<std::uint64_t>(background_id), 17));
  return Vec3(rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8));
}

/// Procedural table texture in world coordinates, so all views agree.
inline Vec3 table_color(int background_id, const Vec3& base, const Vec3& p) {
  const double f = 0.5 + 0.25 * std::sin(61.0 * p.x() + 0.7 * background_id) * std::sin(47.0 * p.y()) +
                   0.25 * std::sin(23.0 * (p.x() + p.y()));
  return base * (0.55 + 0.45 * f);
}

inline double surface_pattern(const Vec3& p) {
  return 0.85 + 0.15 * std::sin(90.0 * p.x() + 40.0 * p.z()) * std::cos(70.0 * p.y() - 30.0 * p.z());
}

inline double lambert(const SceneSpec& scene, const Vec3& n_world) {
  double s = 0.35;
  for (const auto& l : scene.lights) s += l.intensity * std::abs(n_world.dot(-l.direction));
  return s;
}

}  // namespace detail

/// Colour image: Lambertian objects over a textured table, transparent
/// objects alpha-blended over the nearest opaque surface.
inline ColorImage shade_view(const SceneSpec& scene, const CameraView& view) {
  const Intrinsics& k = view.intrinsics;
  const RigidTransform cam_from_world = view.camera_from_world();
  RasterTarget all(k), opaque(k);
  const TriMesh table = make_table_mesh(scene.table_extent);
  draw_mesh(all, k, table, cam_from_world, kTableLabel);
  draw_mesh(opaque, k, table, cam_from_world, kTableLabel);
  for (const auto& o : scene.objects) {
    const RigidTransform l2c = compose(cam_from_world, o.local_to_world);
    draw_mesh(all, k, o.mesh, l2c, o.id + kFirstObjectLabel);
    if (!o.transparent) draw_mesh(opaque, k, o.mesh, l2c, o.id + kFirstObjectLabel);
  }

  const Mat3& r_wc = view.world_from_camera.rotation();
  const Vec3 backdrop = detail::background_color(scene.background_id);
  const Vec3 table_base = detail::background_color(scene.background_id + 101);
  auto surface_color = [&](const RasterTarget& t, int y, int x) -> Vec3 {
    const int label = t.label(y, x);
    if (label == kBackgroundLabel) return backdrop;
    const Vec3 p_world = view.world_from_camera.apply(backproject(k, Vec2(x, y), t.depth(y, x)));
    const Vec3 n_world = r_wc * Vec3(t.normal(y, x, 0), t.normal(y, x, 1), t.normal(y, x, 2));
    const double light = detail::lambert(scene, n_world);
    if (label == kTableLabel) return light * detail::table_color(scene.background_id, table_base, p_world);
    const auto& o = scene.objects[label - kFirstObjectLabel];
    Vec3 c(o.material.color[0], o.material.color[1], o.material.color[2]);
    if (o.fill.level > 0) {
      const Vec3 local = o.local_to_world.inverse().apply(p_world);
      const double top = o.profile ? o.profile->height : o.obb.size.z();
      if (local.z() <= o.fill.level * top)
        c = 0.4 * c + 0.6 * Vec3(o.fill.color[0], o.fill.color[1], o.fill.color[2]);
    }
    return light * detail::surface_pattern(p_world) * c;
  };

  ColorImage img({static_cast<std::size_t>(k.height), static_cast<std::size_t>(k.width), 3}, 0);
  for (int y = 0; y < k.height; ++y)
    for (int x = 0; x < k.width; ++x) {
      Vec3 c = surface_color(all, y, x);
      const int label = all.label(y, x);
      if (label >= kFirstObjectLabel) {
        const auto& o = scene.objects[label - kFirstObjectLabel];
        if (o.transparent) {
          const double alpha = std::max(0.15, 1.0 - o.material.transparency) + (o.fill.level > 0 ? 0.3 : 0.0);
          c = std::min(1.0, alpha) * c + (1.0 - std::min(1.0, alpha)) * surface_color(opaque, y, x);
        }
      }
      for (int ch = 0; ch < 3; ++ch)
        img(y, x, ch) = static_cast<std::uint8_t>(std::lround(std::clamp(c[ch], 0.0, 1.0) * 255.0));
    }
  return img;
}

/// Colour image as doubles in [0, 1] for the plane-sweep pipeline.
inline Image to_image(const ColorImage& c) {
  Image img({c.dim(0), c.dim(1), c.dim(2)});
  for (std::size_t i = 0; i < c.size(); ++i) img[i] = c[i] / 255.0;
  return img;
}

}  // namespace mvtrans::synthgen
