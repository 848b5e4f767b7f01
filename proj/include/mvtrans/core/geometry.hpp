#pragma once

// Pinhole cameras and rigid transforms.
//
// Conventions: right-handed frames, the camera looks down +z with image x to
// the right and y down. Pixel centres sit at integer coordinates, so (0,0) is
// the centre of the top-left pixel.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "mvtrans/core/error.hpp"
#include "mvtrans/core/tensor.hpp"

namespace mvtrans {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kMinDepth = 1e-9;

struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  bool valid() const {
    return fx > 0 && fy > 0 && width > 0 && height > 0 && cx >= 0 && cx < width && cy >= 0 &&
           cy < height;
  }

  void validate() const {
    require(valid(), ErrorCode::InvalidArgument, "intrinsics violate fx,fy>0, 0<=c<size");
  }

  Mat3 matrix() const {
    Mat3 k;
    k << fx, 0, cx, 0, fy, cy, 0, 0, 1;
    return k;
  }

  Mat3 inverse_matrix() const {
    Mat3 k;
    k << 1.0 / fx, 0, -cx / fx, 0, 1.0 / fy, -cy / fy, 0, 0, 1;
    return k;
  }

  /// Intrinsics of the grid obtained by averaging scale x scale pixel blocks.
  /// Block j covers pixels [s*j, s*j+s), whose centre is s*j + (s-1)/2.
  Intrinsics downscaled(int scale) const {
    require(scale >= 1 && width % scale == 0 && height % scale == 0, ErrorCode::BadScale,
            "image size must be divisible by scale " + std::to_string(scale));
    const double s = scale;
    const double shift = 0.5 * (s - 1.0);
    return Intrinsics{fx / s, fy / s, (cx - shift) / s, (cy - shift) / s, width / scale,
                      height / scale};
  }

  bool operator==(const Intrinsics&) const = default;
};

/// Maps points x -> rotation * x + translation.
class RigidTransform {
 public:
  RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

  /// Validates orthonormality (1e-9) and det = +1.
  RigidTransform(const Mat3& rotation, const Vec3& translation)
      : rotation_(rotation), translation_(translation) {
    require(is_rotation(rotation_, 1e-9), ErrorCode::InvalidArgument,
            "rotation is not orthonormal with det +1");
  }

  static RigidTransform identity() { return {}; }

  static RigidTransform from_matrix(const Mat4& m) {
    return RigidTransform(m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>());
  }

  static bool is_rotation(const Mat3& r, double tol) {
    return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(r.determinant() - 1.0) <= tol;
  }

  /// Closest rotation in the Frobenius sense.
  static Mat3 orthonormalize(const Mat3& r) {
    Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 d = Mat3::Identity();
    d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
    return svd.matrixU() * d * svd.matrixV().transpose();
  }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& x) const { return rotation_ * x + translation_; }
  Vec3 operator()(const Vec3& x) const { return apply(x); }

  RigidTransform inverse() const {
    RigidTransform inv;
    inv.rotation_ = rotation_.transpose();
    inv.translation_ = -(inv.rotation_ * translation_);
    return inv;
  }

  Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rotation_;
    m.topRightCorner<3, 1>() = translation_;
    return m;
  }

  bool operator==(const RigidTransform& o) const {
    return rotation_ == o.rotation_ && translation_ == o.translation_;
  }

  friend RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

/// x -> a(b(x)). Re-projects onto SO(3) when round-off drift exceeds 1e-12.
inline RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform out;
  out.rotation_ = a.rotation_ * b.rotation_;
  out.translation_ = a.rotation_ * b.translation_ + a.translation_;
  if ((out.rotation_.transpose() * out.rotation_ - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-12)
    out.rotation_ = RigidTransform::orthonormalize(out.rotation_);
  return out;
}

inline RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
  return compose(a, b);
}

inline Mat3 rotation_about(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}
inline Mat3 rot_x(double a) { return rotation_about(Vec3::UnitX(), a); }
inline Mat3 rot_y(double a) { return rotation_about(Vec3::UnitY(), a); }
inline Mat3 rot_z(double a) { return rotation_about(Vec3::UnitZ(), a); }

inline Vec2 project(const Intrinsics& k, const Vec3& p_cam) {
  if (!(p_cam.z() > kMinDepth))
    fail(ErrorCode::NonPositiveDepth, "point has camera depth " + std::to_string(p_cam.z()));
  return {k.fx * p_cam.x() / p_cam.z() + k.cx, k.fy * p_cam.y() / p_cam.z() + k.cy};
}

inline Vec3 backproject(const Intrinsics& k, const Vec2& pixel, double z) {
  if (!(z > kMinDepth)) fail(ErrorCode::NonPositiveDepth, "depth " + std::to_string(z));
  return {(pixel.x() - k.cx) / k.fx * z, (pixel.y() - k.cy) / k.fy * z, z};
}

/// Unit-length viewing ray through a pixel, camera frame.
inline Vec3 pixel_ray(const Intrinsics& k, const Vec2& pixel) {
  return Vec3((pixel.x() - k.cx) / k.fx, (pixel.y() - k.cy) / k.fy, 1.0).normalized();
}

struct CameraView {
  Intrinsics intrinsics;
  RigidTransform world_from_camera;
  std::optional<Image> image;  // (H, W, 3)

  RigidTransform camera_from_world() const { return world_from_camera.inverse(); }
  Vec3 center() const { return world_from_camera.translation(); }

  void validate() const {
    intrinsics.validate();
    if (image) {
      require(image->dim(0) == static_cast<std::size_t>(intrinsics.height) &&
                  image->dim(1) == static_cast<std::size_t>(intrinsics.width) &&
                  image->dim(2) == 3,
              ErrorCode::ShapeMismatch, "view image does not match intrinsics");
    }
  }
};

struct MultiViewRig {
  CameraView reference;
  std::vector<CameraView> supports;

  std::size_t view_count() const { return supports.size() + 1; }

  void validate() const {
    require(!supports.empty(), ErrorCode::InvalidArgument, "rig needs at least one support view");
    reference.validate();
    for (const auto& s : supports) {
      s.validate();
      require(s.intrinsics.width == reference.intrinsics.width &&
                  s.intrinsics.height == reference.intrinsics.height,
              ErrorCode::ShapeMismatch, "all rig views must share image dimensions");
    }
  }
};

/// Transform taking support-camera coordinates to reference-camera coordinates.
inline RigidTransform reference_from_support(const CameraView& ref, const CameraView& sup) {
  return compose(ref.camera_from_world(), sup.world_from_camera);
}

/// Camera pose looking from `eye` towards `target`; image y points away from `up`.
inline RigidTransform look_at(const Vec3& eye, const Vec3& target, const Vec3& up = Vec3::UnitZ()) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 right = forward.cross(up);
  if (right.norm() < 1e-9) right = forward.cross(Vec3::UnitY());
  right.normalize();
  const Vec3 down = forward.cross(right);
  Mat3 r;
  r.col(0) = right;
  r.col(1) = down;
  r.col(2) = forward;
  return RigidTransform(r, eye);
}

}  // namespace mvtrans
