#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "mvtrans/core/box.hpp"
#include "mvtrans/core/error.hpp"
#include "mvtrans/core/geometry.hpp"
#include "mvtrans/instances/covariance.hpp"
#include "mvtrans/instances/fields.hpp"

namespace mvtrans::instances {

/// World position of the centroid read at a field-grid peak. `k` is the
/// full-resolution intrinsics.
inline Vec3 recover_translation(const Peak& peak, const Grid2<double>& centroid_distance,
                                const Intrinsics& k, const RigidTransform& world_from_camera) {
  require(peak.y >= 0 && peak.x >= 0 && static_cast<std::size_t>(peak.y) < centroid_distance.dim(0) &&
              static_cast<std::size_t>(peak.x) < centroid_distance.dim(1),
          ErrorCode::IndexOutOfRange, "peak outside the field grid");
  const double dist = centroid_distance(peak.y, peak.x);
  require(dist > 0.0, ErrorCode::BackgroundPeak, "peak lies on background");
  const Vec3 ray = pixel_ray(k, to_full_pixel(Vec2(peak.x, peak.y))).normalized();
  return world_from_camera.apply(dist * ray);
}

struct Detection {
  Peak peak;
  double score = 0.0;
  Vec3 translation = Vec3::Zero();  // world, metres
  Mat3 rotation = Mat3::Identity();  // world
  Vec3 size = Vec3::Ones();
  OrientedBox3 obb;
  Mat3 covariance_rotation = Mat3::Identity();  // world frame, from the covariance field alone
  bool spectrum_degenerate = false;
  bool lifted = false;  // box recovered by the vertex lift (otherwise sphere fallback)
};

struct AssemblyFailure {
  Peak peak;
  ErrorCode code = ErrorCode::InvalidArgument;
  std::string message;
};

struct AssemblyResult {
  std::vector<Detection> detections;
  std::vector<AssemblyFailure> failures;
};

namespace detail {

/// Proper rotations that permute and flip coordinate axes (24 of them).
inline const std::vector<Mat3>& signed_permutations() {
  static const std::vector<Mat3> perms = [] {
    std::vector<Mat3> out;
    const std::array<std::array<int, 3>, 6> orders{
        {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
    for (const auto& o : orders)
      for (int s = 0; s < 8; ++s) {
        Mat3 p = Mat3::Zero();
        for (int c = 0; c < 3; ++c) p(o[c], c) = ((s >> c) & 1) ? -1.0 : 1.0;
        if (p.determinant() > 0) out.push_back(p);
      }
    return out;
  }();
  return perms;
}

struct Lift {
  Vec3 center;
  std::array<Vec3, 3> half_edges;
};

/// Box whose 8 corners lie on the given camera rays: a homogeneous linear
/// system in the centre and three half-edge vectors, solved by SVD and scaled
/// so the centre sits at `distance`. Returns false if poorly determined.
inline bool lift_box(const std::array<Vec3, 8>& rays, double distance, Lift& out) {
  Eigen::Matrix<double, 24, 12> a = Eigen::Matrix<double, 24, 12>::Zero();
  for (int k = 0; k < 8; ++k) {
    Mat3 cross;
    const Vec3& d = rays[k];
    cross << 0, -d.z(), d.y(), d.z(), 0, -d.x(), -d.y(), d.x(), 0;
    a.block<3, 3>(3 * k, 0) = cross;
    for (int j = 0; j < 3; ++j) a.block<3, 3>(3 * k, 3 + 3 * j) = corner_sign(k, j) * cross;
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, 24, 12>> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (!(s[10] > 1e-6 * s[0]) || s[11] > 1e-3 * s[10]) return false;
  Eigen::Matrix<double, 12, 1> x = svd.matrixV().col(11);
  Vec3 c = x.head<3>();
  if (c.norm() < 1e-12) return false;
  if (c.z() < 0) x = -x;
  x *= distance / c.norm();
  out.center = x.head<3>();
  for (int j = 0; j < 3; ++j) out.half_edges[j] = x.segment<3>(3 + 3 * j);
  for (int k = 0; k < 8; ++k) {
    Vec3 corner = out.center;
    for (int j = 0; j < 3; ++j) corner += corner_sign(k, j) * out.half_edges[j];
    if (corner.dot(rays[k]) <= 0.0) return false;
  }
  for (int j = 0; j < 3; ++j)
    if (out.half_edges[j].norm() < 1e-9) return false;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (std::abs(out.half_edges[i].normalized().dot(out.half_edges[j].normalized())) > 0.5) return false;
  return true;
}

}  // namespace detail

/// One detection from the fields at a peak. Rotation labels come from the
/// covariance; the box itself from lifting the 8 displaced vertices.
inline Detection assemble_detection(const InstanceFieldSet& fields, const Peak& peak, const Intrinsics& k,
                                    const RigidTransform& world_from_camera) {
  fields.validate();
  const Vec3 t_world = recover_translation(peak, fields.centroid_distance, k, world_from_camera);
  const Vec3 centroid_cam = world_from_camera.inverse().apply(t_world);
  const double distance = centroid_cam.norm();

  CovarianceVector packed;
  for (int i = 0; i < 6; ++i) packed[i] = fields.covariance(peak.y, peak.x, i);
  const RotationEstimate rot = rotation_from_covariance(unpack_covariance(packed));

  const Vec2 p_full = to_full_pixel(Vec2(peak.x, peak.y));
  std::array<Vec3, 8> rays;
  for (int c = 0; c < 8; ++c) {
    const Vec2 v = p_full + Vec2(fields.displacement(peak.y, peak.x, 2 * c),
                                 fields.displacement(peak.y, peak.x, 2 * c + 1));
    rays[c] = pixel_ray(k, v).normalized();
  }

  Detection det;
  det.peak = peak;
  det.score = peak.score;
  det.spectrum_degenerate = rot.degenerate;
  Vec3 center_cam;
  Mat3 r_cam;
  std::array<Vec3, 8> corners_cam;
  detail::Lift lift;
  if (detail::lift_box(rays, distance, lift)) {
    det.lifted = true;
    center_cam = lift.center;
    Mat3 e;
    for (int j = 0; j < 3; ++j) e.col(j) = lift.half_edges[j].normalized();
    Eigen::JacobiSVD<Mat3> svd(e, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 frame = svd.matrixU() * svd.matrixV().transpose();
    if (frame.determinant() < 0) frame.col(2) = -frame.col(2);
    // Relabel the box axes to agree with the covariance frame.
    double best = -1e300;
    for (const Mat3& p : detail::signed_permutations()) {
      const double score = (rot.rotation.transpose() * frame * p).trace();
      if (score > best) {
        best = score;
        r_cam = frame * p;
      }
    }
    for (int c = 0; c < 8; ++c) {
      corners_cam[c] = lift.center;
      for (int j = 0; j < 3; ++j) corners_cam[c] += corner_sign(c, j) * lift.half_edges[j];
    }
  } else {
    center_cam = centroid_cam;
    r_cam = rot.rotation;
    for (int c = 0; c < 8; ++c) corners_cam[c] = distance * rays[c];
  }

  Vec3 lo = Vec3::Constant(1e300), hi = Vec3::Constant(-1e300);
  for (const auto& x : corners_cam) {
    const Vec3 local = r_cam.transpose() * (x - center_cam);
    lo = lo.cwiseMin(local);
    hi = hi.cwiseMax(local);
  }
  det.size = (hi - lo).cwiseMax(1e-9);
  det.rotation = RigidTransform::orthonormalize(world_from_camera.rotation() * r_cam);
  det.translation = world_from_camera.apply(center_cam);
  det.covariance_rotation = world_from_camera.rotation() * rot.rotation;
  det.obb = OrientedBox3{det.rotation, det.translation, det.size};
  return det;
}

/// Detections for every peak; peaks that fail are reported, not thrown.
inline AssemblyResult assemble_detections(const InstanceFieldSet& fields, const std::vector<Peak>& peaks,
                                          const Intrinsics& k, const RigidTransform& world_from_camera) {
  fields.validate();
  AssemblyResult out;
  for (const auto& p : peaks) {
    try {
      out.detections.push_back(assemble_detection(fields, p, k, world_from_camera));
    } catch (const Error& e) {
      out.failures.push_back({p, e.code(), e.what()});
    }
  }
  return out;
}

}  // namespace mvtrans::instances
