#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/SVD>

#include "mvtrans/core/error.hpp"
#include "mvtrans/core/geometry.hpp"
#include "mvtrans/core/mesh.hpp"
#include "mvtrans/core/rng.hpp"

namespace mvtrans::instances {

using CovarianceVector = std::array<double, 6>;  // (xx, xy, xz, yy, yz, zz)

/// Area-weighted uniform samples on the mesh surface, in the mesh frame.
inline std::vector<Vec3> sample_surface(const TriMesh& mesh, std::size_t n, std::uint64_t seed) {
  require(!mesh.empty(), ErrorCode::EmptyMesh, "cannot sample an empty mesh");
  std::vector<double> cdf(mesh.triangles.size());
  double total = 0.0;
  for (std::size_t t = 0; t < cdf.size(); ++t) cdf[t] = (total += mesh.triangle_area(t));
  require(total > 0.0, ErrorCode::EmptyMesh, "mesh has zero surface area");

  Rng rng(seed);
  std::vector<Vec3> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pick = rng.uniform() * total;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), pick);
    const auto& tri = mesh.triangles[std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1)];
    const double r1 = std::sqrt(rng.uniform()), r2 = rng.uniform();
    out.push_back((1 - r1) * mesh.vertices[tri[0]] + r1 * (1 - r2) * mesh.vertices[tri[1]] +
                  r1 * r2 * mesh.vertices[tri[2]]);
  }
  return out;
}

/// Population covariance (divides by n).
inline Mat3 point_covariance(const std::vector<Vec3>& pts) {
  require(!pts.empty(), ErrorCode::EmptyList, "no points");
  Vec3 mean = Vec3::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : pts) {
    const Vec3 d = p - mean;
    cov.noalias() += d * d.transpose();
  }
  cov /= static_cast<double>(pts.size());
  return 0.5 * (cov + cov.transpose());
}

/// Camera-frame covariance of surface points of `mesh` placed by `local_to_camera`.
inline Mat3 object_covariance(const TriMesh& mesh, const RigidTransform& local_to_camera,
                              std::size_t n_samples, std::uint64_t seed) {
  require(n_samples >= 16, ErrorCode::InvalidArgument, "need at least 16 samples");
  std::vector<Vec3> pts = sample_surface(mesh, n_samples, seed);
  for (auto& p : pts) p = local_to_camera.apply(p);
  return point_covariance(pts);
}

inline CovarianceVector pack_covariance(const Mat3& cov) {
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  require((cov - cov.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * scale, ErrorCode::NotSymmetric,
          "covariance is not symmetric");
  return {cov(0, 0), cov(0, 1), cov(0, 2), cov(1, 1), cov(1, 2), cov(2, 2)};
}

inline Mat3 unpack_covariance(const CovarianceVector& v) {
  Mat3 m;
  m << v[0], v[1], v[2], v[1], v[3], v[4], v[2], v[4], v[5];
  return m;
}

struct RotationEstimate {
  Mat3 rotation = Mat3::Identity();
  Vec3 spectrum = Vec3::Zero();  // descending
  bool degenerate = false;       // some axis direction is not determined by the input
};

inline constexpr double kSpectralGapTolerance = 1e-9;

/// Principal axes of a PSD matrix as a proper rotation. Columns follow
/// descending eigenvalue; columns 1 and 2 have a positive largest-magnitude
/// entry and column 3 is their cross product.
inline RotationEstimate rotation_from_covariance(const Mat3& cov) {
  pack_covariance(cov);  // symmetry check
  RotationEstimate out;
  // Dividing by the largest diagonal entry makes the result independent of
  // the overall scale of the input.
  const double scale = cov.diagonal().cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) {
    out.degenerate = true;
    return out;
  }
  const Mat3 c = cov / scale;
  Eigen::JacobiSVD<Mat3> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Vec3 s = svd.singularValues();
  // For a PSD matrix U and V agree column by column; a sign mismatch means a
  // negative eigenvalue.
  for (int j = 0; j < 3; ++j) {
    const double agree = u.col(j).dot(svd.matrixV().col(j));
    require(agree > 0.0 || s[j] <= 1e-9, ErrorCode::InvalidArgument, "covariance is not PSD");
  }
  out.spectrum = s * scale;
  const bool gap12 = (s[0] - s[1]) < kSpectralGapTolerance;
  const bool gap23 = (s[1] - s[2]) < kSpectralGapTolerance;
  out.degenerate = gap12 || gap23;
  if (gap12 && gap23) return out;  // isotropic: any frame fits, report identity

  for (int j = 0; j < 2; ++j) {
    Eigen::Index k = 0;
    u.col(j).cwiseAbs().maxCoeff(&k);
    if (u(k, j) < 0) u.col(j) = -u.col(j);
  }
  u.col(2) = u.col(0).cross(u.col(1));
  out.rotation = u;
  return out;
}

}  // namespace mvtrans::instances
