#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "mvtrans/core/error.hpp"
#include "mvtrans/core/geometry.hpp"

namespace mvtrans {

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Vec3> normals;  // per vertex, unit length
  bool watertight = false;

  bool empty() const { return vertices.empty() || triangles.empty(); }

  void validate() const {
    const int n = static_cast<int>(vertices.size());
    require(normals.size() == vertices.size(), ErrorCode::InvalidArgument,
            "mesh needs one normal per vertex");
    for (const auto& t : triangles)
      for (int i : t)
        require(i >= 0 && i < n, ErrorCode::InvalidArgument, "triangle index out of range");
    for (const auto& nrm : normals)
      require(std::abs(nrm.norm() - 1.0) <= 1e-6, ErrorCode::InvalidArgument,
              "mesh normal not unit length");
  }

  double triangle_area(std::size_t t) const {
    const auto& tri = triangles[t];
    return 0.5 * (vertices[tri[1]] - vertices[tri[0]])
                     .cross(vertices[tri[2]] - vertices[tri[0]])
                     .norm();
  }

  double surface_area() const {
    double a = 0;
    for (std::size_t t = 0; t < triangles.size(); ++t) a += triangle_area(t);
    return a;
  }

  /// Axis-aligned bounds in the mesh frame: {min, max}.
  std::pair<Vec3, Vec3> bounds() const {
    require(!vertices.empty(), ErrorCode::EmptyMesh, "bounds of empty mesh");
    Vec3 lo = vertices.front(), hi = vertices.front();
    for (const auto& v : vertices) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    return {lo, hi};
  }

  bool operator==(const TriMesh&) const = default;
};

/// Appends `other` (already in this mesh's frame) to `mesh`.
inline void append(TriMesh& mesh, const TriMesh& other) {
  const int base = static_cast<int>(mesh.vertices.size());
  mesh.vertices.insert(mesh.vertices.end(), other.vertices.begin(), other.vertices.end());
  mesh.normals.insert(mesh.normals.end(), other.normals.begin(), other.normals.end());
  for (auto t : other.triangles) mesh.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
}

/// UV sphere centred at the origin. Used by tests and as a primitive.
inline TriMesh make_uv_sphere(double radius, int rings, int segments) {
  require(rings >= 2 && segments >= 3 && radius > 0, ErrorCode::InvalidArgument,
          "sphere needs rings>=2, segments>=3");
  TriMesh m;
  m.watertight = true;
  for (int i = 0; i <= rings; ++i) {
    const double theta = M_PI * i / rings;
    for (int j = 0; j < segments; ++j) {
      const double phi = 2.0 * M_PI * j / segments;
      const Vec3 n(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                   std::cos(theta));
      m.vertices.push_back(radius * n);
      m.normals.push_back(n);
    }
  }
  auto idx = [&](int i, int j) { return i * segments + (j % segments); };
  for (int i = 0; i < rings; ++i) {
    for (int j = 0; j < segments; ++j) {
      const int a = idx(i, j), b = idx(i + 1, j), c = idx(i + 1, j + 1), d = idx(i, j + 1);
      if (i != 0) m.triangles.push_back({a, b, d});
      if (i != rings - 1) m.triangles.push_back({d, b, c});
    }
  }
  return m;
}

}  // namespace mvtrans
