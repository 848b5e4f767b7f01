#pragma once

// Randomized tabletop scenes: object library, materials and non-overlapping
// placement on the table plane z = 0.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mvtrans/core/box.hpp"
#include "mvtrans/core/error.hpp"
#include "mvtrans/core/geometry.hpp"
#include "mvtrans/core/mesh.hpp"
#include "mvtrans/core/rng.hpp"
#include "mvtrans/synthgen/vessel.hpp"

namespace mvtrans::synthgen {

enum class ObjectKind { Vessel, Box, Cylinder, Cone };

inline std::string to_string(ObjectKind k) {
  switch (k) {
    case ObjectKind::Vessel: return "vessel";
    case ObjectKind::Box: return "box";
    case ObjectKind::Cylinder: return "cylinder";
    case ObjectKind::Cone: return "cone";
  }
  return "unknown";
}

inline ObjectKind object_kind_from_string(const std::string& s) {
  for (auto k : {ObjectKind::Vessel, ObjectKind::Box, ObjectKind::Cylinder, ObjectKind::Cone})
    if (to_string(k) == s) return k;
  fail(ErrorCode::FormatError, "unknown object kind '" + s + "'");
}

struct MaterialParams {
  std::array<double, 4> color{0.5, 0.5, 0.5, 1.0};  // RGBA
  double index_of_refraction = 1.0;
  double transparency = 0.0;
  double reflection = 0.0;
  double roughness = 0.5;

  void validate() const {
    for (double c : color) require(c >= 0 && c <= 1, ErrorCode::InvalidArgument, "colour out of range");
    require(index_of_refraction >= 1.0 && index_of_refraction <= 2.0, ErrorCode::InvalidArgument,
            "index of refraction outside [1, 2]");
    for (double v : {transparency, reflection, roughness})
      require(v >= 0 && v <= 1, ErrorCode::InvalidArgument, "material parameter outside [0, 1]");
  }
  bool operator==(const MaterialParams&) const = default;
};

/// Liquid inside a vessel; affects shading only.
struct FillState {
  double level = 0.0;  // fraction of the height, 0 = empty
  std::array<double, 3> color{0, 0, 0};
  bool operator==(const FillState&) const = default;
};

struct PlacedObject {
  int id = 0;
  ObjectKind kind = ObjectKind::Box;
  TriMesh mesh;  // local frame, base on z = 0
  RigidTransform local_to_world;
  OrientedBox3 obb;  // world frame, tight in the local frame
  MaterialParams material;
  bool transparent = false;
  FillState fill;
  std::optional<VesselProfile> profile;

  bool operator==(const PlacedObject&) const = default;
};

struct Light {
  Vec3 direction = -Vec3::UnitZ();  // world frame, direction light travels
  double intensity = 1.0;
  bool operator==(const Light&) const = default;
};

struct SceneSpec {
  std::uint64_t seed = 0;
  Vec2 table_extent = Vec2(0.5, 0.5);  // centred on the origin
  std::vector<PlacedObject> objects;
  int background_id = 0;
  std::vector<Light> lights;
  double z_min = 0.05, z_max = 2.0;  // depth range over all views

  std::size_t transparent_count() const {
    std::size_t n = 0;
    for (const auto& o : objects) n += o.transparent;
    return n;
  }

  bool operator==(const SceneSpec&) const = default;
};

struct SceneConfig {
  Vec2 table_extent = Vec2(0.5, 0.5);
  int max_transparent = 7;
  int max_opaque = 8;
  double scale_min = 0.8, scale_max = 1.2;
  double gap = 0.005;  // minimum clearance between object boxes
  int placement_attempts = 200;
  double radius_min = 0.7, radius_max = 1.1;  // viewpoint radius, used for depth metadata
  VesselConfig vessel;

  void validate() const {
    require(max_transparent >= 1 && max_transparent <= 7 && max_opaque >= 0 && max_opaque <= 8,
            ErrorCode::InvalidArgument, "object counts must be transparent in [1,7], opaque in [0,8]");
    require(table_extent.x() > 0 && table_extent.y() > 0 && scale_min > 0 && scale_min <= scale_max &&
                radius_min > 0 && radius_min <= radius_max && placement_attempts >= 1,
            ErrorCode::InvalidArgument, "invalid scene config");
    vessel.validate();
  }
};

/// True if the boxes overlap by more than `tol` along every separating axis
/// candidate (3 + 3 face normals and 9 edge cross products).
inline bool boxes_interpenetrate(const OrientedBox3& a, const OrientedBox3& b, double tol = 1e-6) {
  std::vector<Vec3> axes;
  for (int i = 0; i < 3; ++i) {
    axes.push_back(a.rotation.col(i));
    axes.push_back(b.rotation.col(i));
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const Vec3 c = a.rotation.col(i).cross(b.rotation.col(j));
      if (c.norm() > 1e-9) axes.push_back(c.normalized());
    }
  const Vec3 d = b.translation - a.translation;
  for (const auto& ax : axes) {
    double ra = 0, rb = 0;
    for (int i = 0; i < 3; ++i) {
      ra += 0.5 * a.size[i] * std::abs(ax.dot(a.rotation.col(i)));
      rb += 0.5 * b.size[i] * std::abs(ax.dot(b.rotation.col(i)));
    }
    if (std::abs(ax.dot(d)) >= ra + rb - tol) return false;
  }
  return true;
}

namespace detail {

inline std::array<double, 3> random_color(Rng& rng) {
  return {rng.uniform(0.1, 0.95), rng.uniform(0.1, 0.95), rng.uniform(0.1, 0.95)};
}

inline MaterialParams random_material(Rng& rng, bool transparent) {
  MaterialParams m;
  const auto c = random_color(rng);
  m.color = {c[0], c[1], c[2], 1.0};
  if (transparent) {
    m.index_of_refraction = rng.uniform(1.3, 1.6);
    m.transparency = rng.uniform(0.7, 0.95);
    m.color[3] = 1.0 - m.transparency;
  } else {
    m.index_of_refraction = rng.uniform(1.0, 1.6);
  }
  m.reflection = rng.uniform(0.0, 0.5);
  m.roughness = rng.uniform(0.0, 1.0);
  return m;
}

inline void scale_mesh(TriMesh& m, double s) {
  for (auto& v : m.vertices) v *= s;
}

/// Mesh (local frame, base on z = 0) for one library draw.
inline void random_shape(Rng& rng, const SceneConfig& cfg, bool transparent, PlacedObject& obj) {
  // Transparent objects are mostly vessels; opaque ones mostly primitives.
  const double pick = rng.uniform();
  const double vessel_share = transparent ? 0.7 : 0.25;
  if (pick < vessel_share) {
    obj.kind = ObjectKind::Vessel;
    obj.profile = sample_vessel_profile(rng, cfg.vessel);
    obj.mesh = revolve_profile(*obj.profile, cfg.vessel.angular_segments, cfg.vessel.vertical_segments);
    return;
  }
  const double rest = (pick - vessel_share) / (1 - vessel_share);
  if (rest < 0.4) {
    obj.kind = ObjectKind::Box;
    const Vec3 size(rng.uniform(0.04, 0.12), rng.uniform(0.04, 0.12), rng.uniform(0.03, 0.15));
    obj.mesh = make_box_mesh(size);
    for (auto& v : obj.mesh.vertices) v.z() += 0.5 * size.z();
  } else if (rest < 0.7) {
    obj.kind = ObjectKind::Cylinder;
    const double r = rng.uniform(0.02, 0.05);
    obj.mesh = make_frustum(r, r, rng.uniform(0.04, 0.15));
  } else {
    obj.kind = ObjectKind::Cone;
    const double r = rng.uniform(0.025, 0.06);
    obj.mesh = make_frustum(r, r * rng.uniform(0.2, 0.6), rng.uniform(0.05, 0.15));
  }
}

}  // namespace detail

/// Places up to the configured number of objects by rejection sampling.
/// Objects that cannot be placed are dropped; the scene needs at least one
/// transparent object.
inline SceneSpec assemble_scene(std::uint64_t seed, const SceneConfig& cfg = {}) {
  cfg.validate();
  Rng rng(seed);
  SceneSpec scene;
  scene.seed = seed;
  scene.table_extent = cfg.table_extent;
  scene.background_id = rng.uniform_int(0, 15);
  const int n_lights = rng.uniform_int(1, 3);
  for (int i = 0; i < n_lights; ++i) {
    const double az = rng.uniform(0, 2 * M_PI), el = rng.uniform(0.3, 1.4);
    scene.lights.push_back({-Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)),
                            rng.uniform(0.4, 1.0)});
  }

  const int n_transparent = rng.uniform_int(1, cfg.max_transparent);
  const int n_opaque = rng.uniform_int(0, cfg.max_opaque);
  const Vec2 half = 0.5 * cfg.table_extent;
  for (int slot = 0; slot < n_transparent + n_opaque; ++slot) {
    const bool transparent = slot < n_transparent;
    PlacedObject obj;
    detail::random_shape(rng, cfg, transparent, obj);
    detail::scale_mesh(obj.mesh, rng.uniform(cfg.scale_min, cfg.scale_max));
    obj.transparent = transparent;
    obj.material = detail::random_material(rng, transparent);
    if (transparent && obj.kind == ObjectKind::Vessel && rng.bernoulli(0.5))
      obj.fill = {rng.uniform(0.1, 0.9), detail::random_color(rng)};

    bool placed = false;
    for (int attempt = 0; attempt < cfg.placement_attempts && !placed; ++attempt) {
      const double yaw = rng.uniform(0, 2 * M_PI);
      const Vec3 pos(rng.uniform(-half.x(), half.x()), rng.uniform(-half.y(), half.y()), 0.0);
      const RigidTransform pose(rot_z(yaw), pos);
      const OrientedBox3 obb = mesh_box(obj.mesh, pose);
      bool ok = true;
      for (const auto& v : box_vertices(obb))
        ok = ok && std::abs(v.x()) <= half.x() && std::abs(v.y()) <= half.y();
      OrientedBox3 grown = obb;
      grown.size += Vec3::Constant(cfg.gap);
      for (const auto& other : scene.objects) ok = ok && !boxes_interpenetrate(grown, other.obb, 0.0);
      if (!ok) continue;
      obj.local_to_world = pose;
      obj.obb = obb;
      placed = true;
    }
    if (!placed) continue;
    obj.id = static_cast<int>(scene.objects.size());
    scene.objects.push_back(std::move(obj));
  }
  require(scene.transparent_count() > 0, ErrorCode::PlacementExhausted,
          "could not place any transparent object");

  double reach = 0.0;
  for (const auto& o : scene.objects)
    for (const auto& v : box_vertices(o.obb)) reach = std::max(reach, v.norm());
  reach = std::max(reach, 0.5 * cfg.table_extent.norm());
  scene.z_min = std::max(0.05, cfg.radius_min - reach);
  scene.z_max = cfg.radius_max + reach;
  return scene;
}

/// Table top as two triangles on z = 0 (world frame), upward normals.
inline TriMesh make_table_mesh(const Vec2& extent) {
  TriMesh m;
  const double x = 0.5 * extent.x(), y = 0.5 * extent.y();
  m.vertices = {Vec3(-x, -y, 0), Vec3(x, -y, 0), Vec3(x, y, 0), Vec3(-x, y, 0)};
  m.normals.assign(4, Vec3::UnitZ());
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

}  // namespace mvtrans::synthgen
