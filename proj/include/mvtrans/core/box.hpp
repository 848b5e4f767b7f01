#pragma once

#include <array>

#include "mvtrans/core/error.hpp"
#include "mvtrans/core/geometry.hpp"
#include "mvtrans/core/mesh.hpp"

namespace mvtrans {

/// Oriented 3D box: centre `translation`, axes = columns of `rotation`,
/// full extents `size` along those axes.
struct OrientedBox3 {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  Vec3 size = Vec3::Ones();

  bool valid() const {
    return (size.array() > 0).all() && RigidTransform::is_rotation(rotation, 1e-9);
  }
  void validate() const {
    require(valid(), ErrorCode::InvalidArgument, "box needs positive extents and a rotation");
  }

  double volume() const { return size.prod(); }
  RigidTransform pose() const { return RigidTransform(rotation, translation); }

  /// Coordinates of x in the box frame (centred, unscaled).
  Vec3 to_local(const Vec3& x) const { return rotation.transpose() * (x - translation); }

  bool contains(const Vec3& x, double slack = 0.0) const {
    return (to_local(x).cwiseAbs().array() <= (0.5 * size.array() + slack)).all();
  }

  bool operator==(const OrientedBox3&) const = default;
};

/// Sign (+1/-1) of corner k along axis a. Corners are numbered by binary
/// counting over (x, y, z) with x as the most significant bit:
/// k = 4*[x>0] + 2*[y>0] + [z>0], so corner 0 is (-,-,-) and 7 is (+,+,+).
constexpr double corner_sign(int k, int axis) { return ((k >> (2 - axis)) & 1) ? 1.0 : -1.0; }

inline std::array<Vec3, 8> box_vertices(const OrientedBox3& b) {
  std::array<Vec3, 8> out;
  for (int k = 0; k < 8; ++k) {
    const Vec3 half(corner_sign(k, 0) * 0.5 * b.size.x(), corner_sign(k, 1) * 0.5 * b.size.y(),
                    corner_sign(k, 2) * 0.5 * b.size.z());
    out[k] = b.translation + b.rotation * half;
  }
  return out;
}

inline OrientedBox3 transform_box(const RigidTransform& t, const OrientedBox3& b) {
  return OrientedBox3{t.rotation() * b.rotation, t.apply(b.translation), b.size};
}

/// Tight box around a mesh, aligned with the mesh frame, mapped by `pose`.
inline OrientedBox3 mesh_box(const TriMesh& mesh, const RigidTransform& pose) {
  auto [lo, hi] = mesh.bounds();
  return OrientedBox3{pose.rotation(), pose.apply(0.5 * (lo + hi)), (hi - lo).cwiseMax(1e-9)};
}

/// Closed box mesh with flat face normals (24 vertices).
inline TriMesh make_box_mesh(const Vec3& size) {
  TriMesh m;
  m.watertight = true;
  const Vec3 h = 0.5 * size;
  for (int axis = 0; axis < 3; ++axis) {
    for (int side = -1; side <= 1; side += 2) {
      Vec3 n = Vec3::Zero();
      n[axis] = side;
      const int u = (axis + 1) % 3, v = (axis + 2) % 3;
      const int base = static_cast<int>(m.vertices.size());
      const double su[4] = {-1, 1, 1, -1}, sv[4] = {-1, -1, 1, 1};
      for (int c = 0; c < 4; ++c) {
        Vec3 p;
        p[axis] = side * h[axis];
        p[u] = su[c] * h[u];
        p[v] = sv[c] * h[v];
        m.vertices.push_back(p);
        m.normals.push_back(n);
      }
      if (side > 0) {
        m.triangles.push_back({base, base + 1, base + 2});
        m.triangles.push_back({base, base + 2, base + 3});
      } else {
        m.triangles.push_back({base, base + 2, base + 1});
        m.triangles.push_back({base, base + 3, base + 2});
      }
    }
  }
  return m;
}

}  // namespace mvtrans
