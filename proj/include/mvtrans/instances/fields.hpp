#pragma once

// Per-instance dense fields on the H/8 x W/8 grid: Gaussian centre heatmap,
// vertex displacement, centroid distance and packed covariance.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mvtrans/core/box.hpp"
#include "mvtrans/core/error.hpp"
#include "mvtrans/core/geometry.hpp"
#include "mvtrans/core/mesh.hpp"
#include "mvtrans/core/tensor.hpp"
#include "mvtrans/instances/covariance.hpp"

namespace mvtrans::instances {

inline constexpr int kFieldStride = 8;
inline constexpr double kStrideOffset = 0.5 * (kFieldStride - 1);  // 3.5
inline constexpr double kMinBlobVariance = 0.5;                    // low-res px^2
inline constexpr double kOwnershipMahalanobis2 = 9.0;              // 3 sigma
inline constexpr std::size_t kMinMaskPixels = 4;

inline Vec2 to_field_pixel(const Vec2& full) { return (full.array() - kStrideOffset) / kFieldStride; }
inline Vec2 to_full_pixel(const Vec2& field) { return field * kFieldStride + Vec2::Constant(kStrideOffset); }

struct Instance {
  int id = 0;
  TriMesh mesh;
  RigidTransform local_to_world;
  OrientedBox3 obb;  // world frame

  void validate() const {
    obb.validate();
    for (const auto& v : mesh.vertices)
      require(obb.contains(local_to_world.apply(v), 1e-6), ErrorCode::InvalidArgument,
              "instance box does not contain its mesh");
  }
};

/// What one view knows about one instance.
struct InstanceObservation {
  int id = 0;
  OrientedBox3 obb;           // world frame
  Mask visible;               // full-resolution (H, W)
  Mat3 covariance = Mat3::Zero();  // camera-frame surface covariance
};

inline InstanceObservation observe(const Instance& inst, const Mask& visible, const CameraView& view,
                                   std::size_t n_samples = 4096, std::uint64_t seed = 0) {
  const RigidTransform local_to_camera = compose(view.camera_from_world(), inst.local_to_world);
  return {inst.id, inst.obb, visible, object_covariance(inst.mesh, local_to_camera, n_samples, seed)};
}

/// Bivariate normal on the field grid.
struct GaussianBlob {
  int id = 0;
  Vec2 mean = Vec2::Zero();
  Mat2 cov = Mat2::Identity();

  double mahalanobis2(const Vec2& p) const {
    const Vec2 d = p - mean;
    return d.dot(cov.ldlt().solve(d));
  }
  double density(const Vec2& p) const {
    return std::exp(-0.5 * mahalanobis2(p)) / (2.0 * M_PI * std::sqrt(cov.determinant()));
  }
  double peak_density() const { return 1.0 / (2.0 * M_PI * std::sqrt(cov.determinant())); }
};

/// Second moments of the nonzero mask pixels, mapped to field-grid units with
/// eigenvalues floored at kMinBlobVariance.
inline Mat2 mask_field_covariance(const Mask& visible) {
  std::size_t n = 0;
  Vec2 sum = Vec2::Zero();
  Mat2 sq = Mat2::Zero();
  for (std::size_t y = 0; y < visible.dim(0); ++y)
    for (std::size_t x = 0; x < visible.dim(1); ++x)
      if (visible(y, x)) {
        const Vec2 p(static_cast<double>(x), static_cast<double>(y));
        ++n;
        sum += p;
        sq += p * p.transpose();
      }
  require(n >= kMinMaskPixels, ErrorCode::DegenerateMask,
          "visible mask has " + std::to_string(n) + " pixels");
  const Vec2 mean = sum / static_cast<double>(n);
  Mat2 cov = sq / static_cast<double>(n) - mean * mean.transpose();
  cov /= static_cast<double>(kFieldStride * kFieldStride);
  Eigen::SelfAdjointEigenSolver<Mat2> eig(0.5 * (cov + cov.transpose()));
  const Vec2 vals = eig.eigenvalues().cwiseMax(kMinBlobVariance);
  return eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
}

/// Record of an instance left out of the fields.
struct SkippedInstance {
  int id = 0;
  ErrorCode reason = ErrorCode::DegenerateMask;
  std::string message;
};

struct Heatmap {
  Grid2<double> grid;  // (H/8, W/8)
  std::vector<GaussianBlob> blobs;
  std::vector<SkippedInstance> skipped;
};

/// Dense per-instance targets on the field grid. Background pixels hold 0 in
/// every field and -1 in `ownership`.
struct InstanceFieldSet {
  Heatmap heatmap;
  Grid3<double> displacement;       // (H/8, W/8, 16): v_k - p in full-res pixels
  Grid2<double> centroid_distance;  // (H/8, W/8), metres
  Grid3<double> covariance;         // (H/8, W/8, 6), packed upper triangle
  LabelMap ownership;               // (H/8, W/8), instance id or -1

  std::size_t height() const { return centroid_distance.dim(0); }
  std::size_t width() const { return centroid_distance.dim(1); }

  void validate() const {
    const std::size_t h = heatmap.grid.dim(0), w = heatmap.grid.dim(1);
    require(displacement.shape() == Grid3<double>::Shape{h, w, 16} &&
                centroid_distance.shape() == Grid2<double>::Shape{h, w} &&
                covariance.shape() == Grid3<double>::Shape{h, w, 6} &&
                ownership.shape() == LabelMap::Shape{h, w},
            ErrorCode::ShapeMismatch, "instance fields disagree in shape");
  }
};

inline std::pair<std::size_t, std::size_t> field_shape(const Intrinsics& k) {
  require(k.width % kFieldStride == 0 && k.height % kFieldStride == 0, ErrorCode::BadScale,
          "image size must be divisible by 8");
  return {static_cast<std::size_t>(k.height / kFieldStride),
          static_cast<std::size_t>(k.width / kFieldStride)};
}

/// Blob for one observation: mean at the projected box centre, covariance
/// from the visible mask.
inline GaussianBlob instance_blob(const InstanceObservation& obs, const Intrinsics& k,
                                  const RigidTransform& camera_from_world) {
  require(obs.visible.dim(0) == static_cast<std::size_t>(k.height) &&
              obs.visible.dim(1) == static_cast<std::size_t>(k.width),
          ErrorCode::ShapeMismatch, "visible mask does not match the image size");
  GaussianBlob b;
  b.id = obs.id;
  b.cov = mask_field_covariance(obs.visible);
  b.mean = to_field_pixel(project(k, camera_from_world.apply(obs.obb.translation)));
  return b;
}

/// Grid of max-over-instances densities. Instances whose blob cannot be
/// formed are listed in `skipped`.
inline Heatmap render_heatmap(const std::vector<InstanceObservation>& instances, const Intrinsics& k,
                              const RigidTransform& world_from_camera) {
  const auto [h, w] = field_shape(k);
  const RigidTransform camera_from_world = world_from_camera.inverse();
  Heatmap out;
  out.grid = Grid2<double>({h, w}, 0.0);
  std::vector<const InstanceObservation*> order;
  for (const auto& o : instances) order.push_back(&o);
  std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->id < b->id; });
  for (const auto* o : order) {
    try {
      out.blobs.push_back(instance_blob(*o, k, camera_from_world));
    } catch (const Error& e) {
      out.skipped.push_back({o->id, e.code(), e.what()});
    }
  }
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const Vec2 p(static_cast<double>(x), static_cast<double>(y));
      for (const auto& b : out.blobs) out.grid(y, x) = std::max(out.grid(y, x), b.density(p));
    }
  return out;
}

/// Index into heatmap.blobs of the instance owning field pixel p, or -1.
/// Highest density wins; ties go to the earlier (lower id) blob.
inline int owning_blob(const Heatmap& hm, const Vec2& p) {
  int best = -1;
  double best_density = -1.0;
  for (std::size_t i = 0; i < hm.blobs.size(); ++i) {
    const double d = hm.blobs[i].density(p);
    if (d > best_density) {
      best_density = d;
      best = static_cast<int>(i);
    }
  }
  if (best >= 0 && hm.blobs[best].mahalanobis2(p) > kOwnershipMahalanobis2) return -1;
  return best;
}

/// All fields for one view. Instances that cannot be projected (box corner
/// behind the camera) are skipped like degenerate masks.
inline InstanceFieldSet render_instance_fields(const std::vector<InstanceObservation>& instances,
                                               const Intrinsics& k,
                                               const RigidTransform& world_from_camera) {
  InstanceFieldSet f;
  f.heatmap = render_heatmap(instances, k, world_from_camera);
  const auto [h, w] = field_shape(k);
  const RigidTransform camera_from_world = world_from_camera.inverse();

  struct Targets {
    std::array<Vec2, 8> vertices;
    double distance;
    CovarianceVector cov;
  };
  std::vector<Targets> targets;
  std::vector<GaussianBlob> kept;
  for (const auto& blob : f.heatmap.blobs) {
    const auto& obs = *std::find_if(instances.begin(), instances.end(),
                                    [&](const auto& o) { return o.id == blob.id; });
    try {
      Targets t;
      const auto corners = box_vertices(obs.obb);
      for (int c = 0; c < 8; ++c) t.vertices[c] = project(k, camera_from_world.apply(corners[c]));
      t.distance = camera_from_world.apply(obs.obb.translation).norm();
      t.cov = pack_covariance(obs.covariance);
      targets.push_back(t);
      kept.push_back(blob);
    } catch (const Error& e) {
      f.heatmap.skipped.push_back({obs.id, e.code(), e.what()});
    }
  }
  if (kept.size() != f.heatmap.blobs.size()) {
    f.heatmap.blobs = kept;
    f.heatmap.grid.fill(0.0);
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        for (const auto& b : kept)
          f.heatmap.grid(y, x) = std::max(f.heatmap.grid(y, x), b.density(Vec2(x, y)));
  }

  f.displacement = Grid3<double>({h, w, 16}, 0.0);
  f.centroid_distance = Grid2<double>({h, w}, 0.0);
  f.covariance = Grid3<double>({h, w, 6}, 0.0);
  f.ownership = LabelMap({h, w}, -1);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const Vec2 p(static_cast<double>(x), static_cast<double>(y));
      const int owner = owning_blob(f.heatmap, p);
      if (owner < 0) continue;
      const Targets& t = targets[owner];
      const Vec2 full = to_full_pixel(p);
      f.ownership(y, x) = f.heatmap.blobs[owner].id;
      for (int c = 0; c < 8; ++c) {
        f.displacement(y, x, 2 * c) = t.vertices[c].x() - full.x();
        f.displacement(y, x, 2 * c + 1) = t.vertices[c].y() - full.y();
      }
      f.centroid_distance(y, x) = t.distance;
      for (int i = 0; i < 6; ++i) f.covariance(y, x, i) = t.cov[i];
    }
  return f;
}

struct Peak {
  int x = 0;  // field-grid column
  int y = 0;  // field-grid row
  double score = 0.0;
};

/// Smallest-blob density two standard deviations from the mode.
inline double default_min_score() {
  return std::exp(-2.0) / (2.0 * M_PI * kMinBlobVariance);
}

/// Pixels that are the maximum of their window with score >= min_score.
/// Within an equal-valued plateau only the first pixel in row-major order
/// counts. Sorted by descending score, then row-major order.
inline std::vector<Peak> detect_peaks(const Grid2<double>& heatmap, double min_score = default_min_score(),
                                      int window = 5) {
  require(window >= 3 && window % 2 == 1, ErrorCode::InvalidArgument, "window must be odd and >= 3");
  const int h = static_cast<int>(heatmap.dim(0)), w = static_cast<int>(heatmap.dim(1));
  const int r = window / 2;
  std::vector<Peak> peaks;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = heatmap(y, x);
      if (!(v >= min_score) || v <= 0.0) continue;
      bool strict = true;
      for (int dy = -r; dy <= r && strict; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          if ((dx == 0 && dy == 0) || y + dy < 0 || y + dy >= h || x + dx < 0 || x + dx >= w) continue;
          // Plateaus keep their first pixel in row-major order.
          const bool earlier = dy < 0 || (dy == 0 && dx < 0);
          const double n = heatmap(y + dy, x + dx);
          if (n > v || (earlier && n == v)) {
            strict = false;
            break;
          }
        }
      if (strict) peaks.push_back({x, y, v});
    }
  std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.score > b.score; });
  return peaks;
}

}  // namespace mvtrans::instances
