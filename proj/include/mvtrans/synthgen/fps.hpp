#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "mvtrans/core/error.hpp"
#include "mvtrans/core/mesh.hpp"

namespace mvtrans::synthgen {

/// Greedy furthest point sampling over mesh vertices. Starts from the vertex
/// furthest from the vertex centroid; ties resolve to the lowest index. The
/// seed is accepted for interface stability and currently unused.
inline std::vector<Vec3> fps_keypoints(const TriMesh& mesh, std::size_t k = 8, std::uint64_t /*seed*/ = 0) {
  const std::size_t n = mesh.vertices.size();
  require(n >= k, ErrorCode::TooFewVertices,
          "mesh has " + std::to_string(n) + " vertices, need " + std::to_string(k));
  std::vector<Vec3> out;
  if (k == 0) return out;
  Vec3 centroid = Vec3::Zero();
  for (const auto& v : mesh.vertices) centroid += v;
  centroid /= static_cast<double>(n);

  std::size_t first = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (mesh.vertices[i] - centroid).squaredNorm();
    if (d > best) {
      best = d;
      first = i;
    }
  }
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  std::size_t pick = first;
  for (std::size_t s = 0; s < k; ++s) {
    out.push_back(mesh.vertices[pick]);
    for (std::size_t i = 0; i < n; ++i)
      min_d2[i] = std::min(min_d2[i], (mesh.vertices[i] - mesh.vertices[pick]).squaredNorm());
    double far = -1.0;
    for (std::size_t i = 0; i < n; ++i)
      if (min_d2[i] > far) {
        far = min_d2[i];
        pick = i;
      }
  }
  return out;
}

}  // namespace mvtrans::synthgen
