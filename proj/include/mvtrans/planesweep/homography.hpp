#pragma once

#include <array>
#include <cmath>

#include "mvtrans/core/geometry.hpp"

namespace mvtrans::planesweep {

/// Maps homogeneous pixel coordinates; `w` is the pre-division denominator.
struct HomographyMapping {
  Vec2 pixel;
  double w = 0.0;
};

inline HomographyMapping apply_homography(const Mat3& h, const Vec2& u) {
  const Vec3 p = h * Vec3(u.x(), u.y(), 1.0);
  return {Vec2(p.x() / p.z(), p.y() / p.z()), p.z()};
}

/// Homography sending a reference pixel to the support pixel that observes the
/// same point on the fronto-parallel plane z = `depth` of the reference camera:
///   H = K_s (R + t e3^T / z) K_r^-1,  {R, t} = support_from_reference.
/// Scale is fixed so that the denominator equals the support-camera depth / z.
inline Mat3 homography_for_plane(const Intrinsics& ref_k, const Intrinsics& sup_k,
                                 const RigidTransform& support_from_reference, double depth) {
  if (!(depth > kMinDepth)) fail(ErrorCode::NonPositiveDepth, "plane depth must be positive");
  const Mat3& r = support_from_reference.rotation();
  const Vec3& t = support_from_reference.translation();
  Mat3 plane_term = r;
  plane_term.col(2) += t / depth;
  const Mat3 h = sup_k.matrix() * plane_term * ref_k.inverse_matrix();

  // The plane contains the support centre iff its reference-frame z equals depth.
  const Vec3 sup_center_in_ref = support_from_reference.inverse().translation();
  if (std::abs(sup_center_in_ref.z() - depth) < 1e-12)
    fail(ErrorCode::DegenerateGeometry, "plane passes through the support camera centre");
  const double w = ref_k.width - 1.0, hgt = ref_k.height - 1.0;
  const std::array<Vec2, 5> probes{Vec2(0, 0), Vec2(w, 0), Vec2(0, hgt), Vec2(w, hgt),
                                   Vec2(ref_k.cx, ref_k.cy)};
  for (const auto& u : probes)
    if (std::abs(apply_homography(h, u).w) < 1e-12)
      fail(ErrorCode::DegenerateGeometry, "homography denominator vanishes inside the image");
  return h;
}

inline Mat3 homography_for_plane(const CameraView& ref, const CameraView& sup, double depth) {
  const RigidTransform sup_from_ref = compose(sup.camera_from_world(), ref.world_from_camera);
  return homography_for_plane(ref.intrinsics, sup.intrinsics, sup_from_ref, depth);
}

}  // namespace mvtrans::planesweep
