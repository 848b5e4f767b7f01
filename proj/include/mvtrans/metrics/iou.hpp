#pragma once

// Exact intersection volume of two oriented boxes by convex polytope clipping.

#include <array>
#include <cmath>
#include <vector>

#include "mvtrans/core/box.hpp"

namespace mvtrans::metrics {

namespace detail {

struct HalfSpace {
  Vec3 normal;  // outward, unit
  double offset;  // n.x <= offset inside
};

inline std::array<HalfSpace, 6> box_half_spaces(const OrientedBox3& b) {
  std::array<HalfSpace, 6> out;
  for (int axis = 0; axis < 3; ++axis)
    for (int side = 0; side < 2; ++side) {
      const Vec3 n = (side ? 1.0 : -1.0) * b.rotation.col(axis);
      out[2 * axis + side] = {n, n.dot(b.translation) + 0.5 * b.size[axis]};
    }
  return out;
}

/// Face polygons in boundary order, indexed like box_half_spaces.
inline std::array<std::vector<Vec3>, 6> box_faces(const OrientedBox3& b) {
  const auto v = box_vertices(b);
  static constexpr int faces[6][4] = {{0, 1, 3, 2}, {4, 6, 7, 5}, {0, 4, 5, 1},
                                      {2, 3, 7, 6}, {0, 2, 6, 4}, {1, 5, 7, 3}};
  std::array<std::vector<Vec3>, 6> out;
  for (int f = 0; f < 6; ++f)
    for (int i : faces[f]) out[f].push_back(v[i]);
  return out;
}

inline std::vector<Vec3> clip_polygon(const std::vector<Vec3>& poly, const HalfSpace& h, double eps) {
  std::vector<Vec3> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& a = poly[i];
    const Vec3& b = poly[(i + 1) % n];
    const double da = h.normal.dot(a) - h.offset, db = h.normal.dot(b) - h.offset;
    if (da <= eps) out.push_back(a);
    if ((da < -eps && db > eps) || (da > eps && db < -eps)) out.push_back(a + (b - a) * (da / (da - db)));
  }
  return out;
}

inline Vec3 polygon_area_vector(const std::vector<Vec3>& poly) {
  Vec3 s = Vec3::Zero();
  for (std::size_t i = 0; i + 2 < poly.size(); ++i) s += (poly[i + 1] - poly[0]).cross(poly[i + 2] - poly[0]);
  return 0.5 * s;
}

}  // namespace detail

inline double intersection_volume(const OrientedBox3& a, const OrientedBox3& b) {
  const double scale = std::max(a.size.maxCoeff(), b.size.maxCoeff());
  const double eps = 1e-12 * scale;
  const auto ha = detail::box_half_spaces(a), hb = detail::box_half_spaces(b);
  const auto fa = detail::box_faces(a), fb = detail::box_faces(b);

  struct Face {
    std::vector<Vec3> poly;
    Vec3 normal;
  };
  std::vector<Face> faces;
  auto clip_faces = [&](const auto& polys, const auto& own, const auto& other, bool skip_shared) {
    for (int f = 0; f < 6; ++f) {
      if (skip_shared) {
        bool shared = false;
        for (const auto& h : other)
          shared = shared || (own[f].normal.dot(h.normal) > 1 - 1e-12 && std::abs(own[f].offset - h.offset) <= eps);
        if (shared) continue;  // already contributed by the first box
      }
      std::vector<Vec3> poly = polys[f];
      for (const auto& h : other) {
        poly = detail::clip_polygon(poly, h, eps);
        if (poly.size() < 3) break;
      }
      if (poly.size() >= 3) faces.push_back({std::move(poly), own[f].normal});
    }
  };
  clip_faces(fa, ha, hb, false);
  clip_faces(fb, hb, ha, true);
  if (faces.empty()) return 0.0;

  Vec3 ref = Vec3::Zero();
  std::size_t count = 0;
  for (const auto& f : faces)
    for (const auto& p : f.poly) {
      ref += p;
      ++count;
    }
  ref /= static_cast<double>(count);
  double volume = 0.0;
  for (const auto& f : faces) {
    const double area = detail::polygon_area_vector(f.poly).norm();
    volume += area * f.normal.dot(f.poly[0] - ref) / 3.0;
  }
  return std::max(0.0, std::min({volume, a.volume(), b.volume()}));
}

inline double iou_obb(const OrientedBox3& a, const OrientedBox3& b) {
  a.validate();
  b.validate();
  if (a == b) return 1.0;  // clipping round-off would otherwise leave 1 - O(eps)
  const double inter = intersection_volume(a, b);
  const double uni = a.volume() + b.volume() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace mvtrans::metrics
