#pragma once

// Per-view ground-truth records.

#include <array>
#include <cstdint>
#include <vector>

#include "mvtrans/core/box.hpp"
#include "mvtrans/core/geometry.hpp"
#include "mvtrans/core/rng.hpp"
#include "mvtrans/instances/covariance.hpp"
#include "mvtrans/instances/fields.hpp"
#include "mvtrans/synthgen/fps.hpp"
#include "mvtrans/synthgen/rasterizer.hpp"
#include "mvtrans/synthgen/scene.hpp"
#include "mvtrans/synthgen/viewpoints.hpp"

namespace mvtrans::synthgen {

inline constexpr std::size_t kCovarianceSamples = 2048;
inline constexpr std::size_t kKeypoints = 8;

struct InstanceAnnotation {
  int id = 0;
  std::array<double, 4> bbox2d{-1, -1, -1, -1};  // x_min, y_min, x_max, y_max (inclusive) of the full mask
  std::array<Vec2, 8> vertices_image;
  std::array<Vec3, 8> vertices_local;
  std::array<Vec3, 8> vertices_camera;
  Mat4 local_to_camera = Mat4::Identity();
  Mat3 covariance = Mat3::Zero();  // camera frame
  std::array<Vec3, kKeypoints> keypoints;  // local frame
  std::int64_t visible_pixels = 0;
  std::int64_t full_pixels = 0;

  /// Flat numeric row used by the annotation files.
  static constexpr std::size_t kRowSize = 1 + 4 + 16 + 24 + 24 + 16 + 9 + 3 * kKeypoints + 2;

  std::array<double, kRowSize> to_row() const {
    std::array<double, kRowSize> r{};
    std::size_t i = 0;
    r[i++] = id;
    for (double v : bbox2d) r[i++] = v;
    for (const auto& v : vertices_image) r[i++] = v.x(), r[i++] = v.y();
    for (const auto* set : {&vertices_local, &vertices_camera})
      for (const auto& v : *set) r[i++] = v.x(), r[i++] = v.y(), r[i++] = v.z();
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) r[i++] = local_to_camera(a, b);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) r[i++] = covariance(a, b);
    for (const auto& v : keypoints) r[i++] = v.x(), r[i++] = v.y(), r[i++] = v.z();
    r[i++] = static_cast<double>(visible_pixels);
    r[i++] = static_cast<double>(full_pixels);
    return r;
  }

  static InstanceAnnotation from_row(const double* r) {
    InstanceAnnotation a;
    std::size_t i = 0;
    a.id = static_cast<int>(r[i++]);
    for (double& v : a.bbox2d) v = r[i++];
    for (auto& v : a.vertices_image) v = Vec2(r[i], r[i + 1]), i += 2;
    for (auto* set : {&a.vertices_local, &a.vertices_camera})
      for (auto& v : *set) v = Vec3(r[i], r[i + 1], r[i + 2]), i += 3;
    for (int x = 0; x < 4; ++x)
      for (int y = 0; y < 4; ++y) a.local_to_camera(x, y) = r[i++];
    for (int x = 0; x < 3; ++x)
      for (int y = 0; y < 3; ++y) a.covariance(x, y) = r[i++];
    for (auto& v : a.keypoints) v = Vec3(r[i], r[i + 1], r[i + 2]), i += 3;
    a.visible_pixels = static_cast<std::int64_t>(r[i++]);
    a.full_pixels = static_cast<std::int64_t>(r[i++]);
    return a;
  }

  bool operator==(const InstanceAnnotation& o) const { return to_row() == o.to_row(); }
};

struct ViewRecord {
  int index = 0;
  ViewStation station;  // cameras without images
  std::vector<InstanceAnnotation> instances;  // one per scene object, by id
  DepthMap depth;
  LabelMap visible;
  Tensor<std::uint8_t, 3> full;
  NormalMap normals;
  Grid2<double> heatmap;  // (H/8, W/8)
  ColorImage rgb_left, rgb_right;

  bool operator==(const ViewRecord& o) const {
    return index == o.index && station.left.intrinsics == o.station.left.intrinsics &&
           station.left.world_from_camera == o.station.left.world_from_camera &&
           station.right.world_from_camera == o.station.right.world_from_camera && instances == o.instances &&
           depth == o.depth && visible == o.visible && full == o.full && normals == o.normals &&
           heatmap == o.heatmap && rgb_left == o.rgb_left && rgb_right == o.rgb_right;
  }
};

/// Surface-covariance samples are seeded per (scene, object) so every view of
/// an object uses the same points.
inline std::uint64_t covariance_seed(const SceneSpec& scene, int object_id) {
  return mix_seed(scene.seed, 1000 + static_cast<std::uint64_t>(object_id));
}

inline Mask label_mask(const LabelMap& labels, int label) {
  Mask m(labels.shape(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) m[i] = labels[i] == label;
  return m;
}

/// Observation inputs for the instance fields of one view.
inline std::vector<instances::InstanceObservation> view_observations(const SceneSpec& scene,
                                                                     const ViewRecord& rec) {
  std::vector<instances::InstanceObservation> out;
  for (const auto& o : scene.objects) {
    const auto& a = rec.instances[o.id];
    out.push_back({o.id, o.obb, label_mask(rec.visible, o.id + kFirstObjectLabel), a.covariance});
  }
  return out;
}

/// Centre heatmap from the visible segmentation. Instances with too few
/// visible pixels are left out and listed in `skipped`.
inline instances::Heatmap render_gt_heatmap(const LabelMap& visible, const SceneSpec& scene,
                                            const CameraView& view) {
  std::vector<instances::InstanceObservation> obs;
  for (const auto& o : scene.objects)
    obs.push_back({o.id, o.obb, label_mask(visible, o.id + kFirstObjectLabel), Mat3::Zero()});
  return instances::render_heatmap(obs, view.intrinsics, view.world_from_camera);
}

inline InstanceAnnotation annotate_instance(const SceneSpec& scene, const PlacedObject& o, const CameraView& view,
                                            const RasterOutput& raster) {
  InstanceAnnotation a;
  a.id = o.id;
  const RigidTransform l2c = compose(view.camera_from_world(), o.local_to_world);
  const OrientedBox3 local_box = mesh_box(o.mesh, RigidTransform::identity());
  const auto local = box_vertices(local_box);
  const Intrinsics& k = view.intrinsics;
  for (int c = 0; c < 8; ++c) {
    a.vertices_local[c] = local[c];
    a.vertices_camera[c] = l2c.apply(local[c]);
    const Vec3& p = a.vertices_camera[c];
    a.vertices_image[c] = Vec2(k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy);
  }
  a.local_to_camera = l2c.matrix();
  a.covariance = instances::object_covariance(o.mesh, l2c, kCovarianceSamples, covariance_seed(scene, o.id));
  const auto kp = fps_keypoints(o.mesh, kKeypoints);
  std::copy(kp.begin(), kp.end(), a.keypoints.begin());

  const std::size_t h = raster.depth.dim(0), w = raster.depth.dim(1);
  const std::uint8_t* full = raster.full.data() + static_cast<std::size_t>(o.id) * h * w;
  int x0 = static_cast<int>(w), y0 = static_cast<int>(h), x1 = -1, y1 = -1;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      if (raster.visible(y, x) == o.id + kFirstObjectLabel) ++a.visible_pixels;
      if (!full[y * w + x]) continue;
      ++a.full_pixels;
      x0 = std::min(x0, static_cast<int>(x));
      y0 = std::min(y0, static_cast<int>(y));
      x1 = std::max(x1, static_cast<int>(x));
      y1 = std::max(y1, static_cast<int>(y));
    }
  if (a.full_pixels > 0) a.bbox2d = {double(x0), double(y0), double(x1), double(y1)};
  return a;
}

inline ViewRecord build_view_record(const SceneSpec& scene, const ViewStation& station) {
  ViewRecord rec;
  rec.index = station.index;
  rec.station = station;
  const RasterOutput raster = rasterize_view(scene, station.left);
  for (const auto& o : scene.objects) rec.instances.push_back(annotate_instance(scene, o, station.left, raster));
  rec.heatmap = render_gt_heatmap(raster.visible, scene, station.left).grid;
  rec.depth = raster.depth;
  rec.visible = raster.visible;
  rec.full = raster.full;
  rec.normals = raster.normals;
  rec.rgb_left = shade_view(scene, station.left);
  rec.rgb_right = shade_view(scene, station.right);
  return rec;
}

}  // namespace mvtrans::synthgen
