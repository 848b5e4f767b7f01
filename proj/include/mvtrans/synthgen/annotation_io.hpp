#pragma once

// Scene directories: manifest.json (scene metadata, object table, view
// table) plus binary array files for meshes and per-view ground truth. The
// manifest is written last and acts as the commit point.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mvtrans/synthgen/annotations.hpp"
#include "mvtrans/synthgen/array_io.hpp"

namespace mvtrans::synthgen {

namespace fs = std::filesystem;
using Json = nlohmann::json;

inline constexpr int kManifestVersion = 1;
inline constexpr const char* kManifestName = "manifest.json";
inline constexpr const char* kManifestFormat = "mvtrans-scene";

struct SceneAnnotations {
  SceneSpec scene;
  int azimuths = 0, elevations = 0;
  std::vector<ViewRecord> records;
};

/// Manifest contents without the per-view arrays.
struct SceneManifest {
  SceneSpec scene;
  int azimuths = 0, elevations = 0;
  std::vector<ViewStation> stations;  // one per stored view, in file order
};

namespace detail {

template <class V>
Json vec_json(const V& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

/// Row-major flattening.
template <class M>
Json mat_json(const M& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) a.push_back(m(r, c));
  return a;
}

template <class M>
M json_mat(const Json& j) {
  M m;
  require(j.is_array() && j.size() == static_cast<std::size_t>(m.size()), ErrorCode::FormatError,
          "matrix entry has wrong length");
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = j.at(i++).get<double>();
  return m;
}

inline Json transform_json(const RigidTransform& t) { return mat_json(t.matrix()); }

inline RigidTransform json_transform(const Json& j) {
  const Mat4 m = json_mat<Mat4>(j);
  return RigidTransform(m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>());
}

inline Json intrinsics_json(const Intrinsics& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
}

inline Intrinsics json_intrinsics(const Json& j) {
  return Intrinsics{j.at("fx").get<double>(), j.at("fy").get<double>(), j.at("cx").get<double>(),
                    j.at("cy").get<double>(), j.at("width").get<int>(),  j.at("height").get<int>()};
}

inline Json object_json(const PlacedObject& o, const std::string& prefix) {
  Json j;
  j["id"] = o.id;
  j["kind"] = to_string(o.kind);
  j["transparent"] = o.transparent;
  j["local_to_world"] = transform_json(o.local_to_world);
  j["obb"] = {{"rotation", mat_json(o.obb.rotation)},
              {"translation", vec_json(o.obb.translation)},
              {"size", vec_json(o.obb.size)}};
  j["material"] = {{"color", o.material.color},
                   {"index_of_refraction", o.material.index_of_refraction},
                   {"transparency", o.material.transparency},
                   {"reflection", o.material.reflection},
                   {"roughness", o.material.roughness}};
  j["fill"] = {{"level", o.fill.level}, {"color", o.fill.color}};
  if (o.profile) {
    const auto& p = *o.profile;
    j["profile"] = {{"poly", p.poly},           {"amplitude", p.amplitude}, {"frequency", p.frequency},
                    {"phase", p.phase},         {"height", p.height},       {"wall_thickness", p.wall_thickness}};
  } else {
    j["profile"] = nullptr;
  }
  j["mesh"] = {{"vertices", prefix + "_vertices.mvta"},
               {"normals", prefix + "_normals.mvta"},
               {"triangles", prefix + "_triangles.mvta"},
               {"watertight", o.mesh.watertight}};
  return j;
}

inline Tensor<double, 2> points_array(const std::vector<Vec3>& pts) {
  Tensor<double, 2> t({pts.size(), 3});
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (int a = 0; a < 3; ++a) t(i, a) = pts[i](a);
  return t;
}

inline std::vector<Vec3> array_points(const Tensor<double, 2>& t, const std::string& name) {
  require(t.dim(1) == 3, ErrorCode::FormatError, name + ": expected (n, 3)");
  std::vector<Vec3> out(t.dim(0));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = Vec3(t(i, 0), t(i, 1), t(i, 2));
  return out;
}

inline void write_mesh(const fs::path& dir, const Json& entry, const TriMesh& m) {
  write_array(dir / entry.at("vertices").get<std::string>(), points_array(m.vertices));
  write_array(dir / entry.at("normals").get<std::string>(), points_array(m.normals));
  Tensor<std::int32_t, 2> tri({m.triangles.size(), 3});
  for (std::size_t i = 0; i < m.triangles.size(); ++i)
    for (int a = 0; a < 3; ++a) tri(i, a) = m.triangles[i][a];
  write_array(dir / entry.at("triangles").get<std::string>(), tri);
}

inline TriMesh read_mesh(const fs::path& dir, const Json& entry) {
  TriMesh m;
  const fs::path vp = dir / entry.at("vertices").get<std::string>();
  const fs::path np = dir / entry.at("normals").get<std::string>();
  const fs::path tp = dir / entry.at("triangles").get<std::string>();
  m.vertices = array_points(read_array<double, 2>(vp), vp.string());
  m.normals = array_points(read_array<double, 2>(np), np.string());
  const auto tri = read_array<std::int32_t, 2>(tp);
  require(tri.dim(1) == 3, ErrorCode::FormatError, tp.string() + ": expected (m, 3)");
  for (std::size_t i = 0; i < tri.dim(0); ++i) m.triangles.push_back({tri(i, 0), tri(i, 1), tri(i, 2)});
  m.watertight = entry.at("watertight").get<bool>();
  return m;
}

inline PlacedObject json_object(const fs::path& dir, const Json& j) {
  PlacedObject o;
  o.id = j.at("id").get<int>();
  o.kind = object_kind_from_string(j.at("kind").get<std::string>());
  o.transparent = j.at("transparent").get<bool>();
  o.local_to_world = json_transform(j.at("local_to_world"));
  const Json& b = j.at("obb");
  o.obb.rotation = json_mat<Mat3>(b.at("rotation"));
  o.obb.translation = json_mat<Vec3>(b.at("translation"));
  o.obb.size = json_mat<Vec3>(b.at("size"));
  const Json& m = j.at("material");
  o.material.color = m.at("color").get<std::array<double, 4>>();
  o.material.index_of_refraction = m.at("index_of_refraction").get<double>();
  o.material.transparency = m.at("transparency").get<double>();
  o.material.reflection = m.at("reflection").get<double>();
  o.material.roughness = m.at("roughness").get<double>();
  o.fill.level = j.at("fill").at("level").get<double>();
  o.fill.color = j.at("fill").at("color").get<std::array<double, 3>>();
  if (!j.at("profile").is_null()) {
    const Json& p = j.at("profile");
    VesselProfile v;
    v.poly = p.at("poly").get<std::array<double, 5>>();
    v.amplitude = p.at("amplitude").get<double>();
    v.frequency = p.at("frequency").get<double>();
    v.phase = p.at("phase").get<double>();
    v.height = p.at("height").get<double>();
    v.wall_thickness = p.at("wall_thickness").get<double>();
    o.profile = v;
  }
  o.mesh = read_mesh(dir, j.at("mesh"));
  return o;
}

inline std::string view_dir_name(int index) {
  std::ostringstream s;
  s << "views/" << std::setw(3) << std::setfill('0') << index;
  return s.str();
}

inline std::string object_prefix(int id) {
  std::ostringstream s;
  s << "objects/" << std::setw(2) << std::setfill('0') << id;
  return s.str();
}

inline const std::vector<std::string>& view_array_names() {
  static const std::vector<std::string> names = {"depth",   "visible",  "full",      "normals",
                                                 "heatmap", "rgb_left", "rgb_right", "instances"};
  return names;
}

inline Json view_json(const ViewStation& s) {
  Json j;
  j["index"] = s.index;
  j["azimuth"] = s.azimuth;
  j["elevation"] = s.elevation;
  j["radius"] = s.radius;
  j["intrinsics"] = intrinsics_json(s.left.intrinsics);
  j["left_world_from_camera"] = transform_json(s.left.world_from_camera);
  j["right_world_from_camera"] = transform_json(s.right.world_from_camera);
  Json files;
  for (const auto& n : view_array_names()) files[n] = view_dir_name(s.index) + "/" + n + ".mvta";
  j["files"] = files;
  return j;
}

inline ViewStation json_view(const Json& j) {
  ViewStation s;
  s.index = j.at("index").get<int>();
  s.azimuth = j.at("azimuth").get<double>();
  s.elevation = j.at("elevation").get<double>();
  s.radius = j.at("radius").get<double>();
  const Intrinsics k = json_intrinsics(j.at("intrinsics"));
  s.left = CameraView{k, json_transform(j.at("left_world_from_camera")), std::nullopt};
  s.right = CameraView{k, json_transform(j.at("right_world_from_camera")), std::nullopt};
  return s;
}

inline Tensor<double, 2> instance_rows(const std::vector<InstanceAnnotation>& inst) {
  Tensor<double, 2> t({inst.size(), InstanceAnnotation::kRowSize});
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const auto row = inst[i].to_row();
    std::copy(row.begin(), row.end(), t.data() + i * InstanceAnnotation::kRowSize);
  }
  return t;
}

inline void write_view(const fs::path& dir, const ViewRecord& r) {
  const std::string base = view_dir_name(r.index) + "/";
  fs::create_directories(dir / base);
  write_array(dir / (base + "depth.mvta"), r.depth);
  write_array(dir / (base + "visible.mvta"), r.visible);
  write_array(dir / (base + "full.mvta"), r.full);
  write_array(dir / (base + "normals.mvta"), r.normals);
  write_array(dir / (base + "heatmap.mvta"), r.heatmap);
  write_array(dir / (base + "rgb_left.mvta"), r.rgb_left);
  write_array(dir / (base + "rgb_right.mvta"), r.rgb_right);
  write_array(dir / (base + "instances.mvta"), instance_rows(r.instances));
}

}  // namespace detail

inline Json manifest_json(const SceneSpec& scene, int azimuths, int elevations,
                          const std::vector<ViewStation>& stations) {
  Json j;
  j["format"] = kManifestFormat;
  j["version"] = kManifestVersion;
  j["seed"] = scene.seed;
  j["table_extent"] = detail::vec_json(scene.table_extent);
  j["background_id"] = scene.background_id;
  j["depth_range"] = {scene.z_min, scene.z_max};
  j["lights"] = Json::array();
  for (const auto& l : scene.lights)
    j["lights"].push_back({{"direction", detail::vec_json(l.direction)}, {"intensity", l.intensity}});
  j["grid"] = {{"azimuths", azimuths}, {"elevations", elevations}};
  j["objects"] = Json::array();
  for (const auto& o : scene.objects) j["objects"].push_back(detail::object_json(o, detail::object_prefix(o.id)));
  j["views"] = Json::array();
  for (const auto& s : stations) j["views"].push_back(detail::view_json(s));
  return j;
}

/// Writes every array file, then the manifest.
inline void write_annotations(const SceneSpec& scene, int azimuths, int elevations,
                              const std::vector<ViewRecord>& records, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / "objects", ec);
  require(!ec, ErrorCode::IoError, "cannot create " + (dir / "objects").string() + ": " + ec.message());
  std::vector<ViewStation> stations;
  for (const auto& r : records) stations.push_back(r.station);
  const Json manifest = manifest_json(scene, azimuths, elevations, stations);
  for (std::size_t i = 0; i < scene.objects.size(); ++i)
    detail::write_mesh(dir, manifest["objects"][i]["mesh"], scene.objects[i].mesh);
  for (const auto& r : records) detail::write_view(dir, r);

  const fs::path path = dir / kManifestName;
  std::ofstream f(path, std::ios::trunc);
  require(f.good(), ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  f << manifest.dump(1) << '\n';
  require(f.good(), ErrorCode::IoError, "failed writing " + path.string());
}

inline void write_annotations(const SceneAnnotations& a, const fs::path& dir) {
  write_annotations(a.scene, a.azimuths, a.elevations, a.records, dir);
}

inline SceneManifest read_manifest(const fs::path& dir) {
  const fs::path path = dir / kManifestName;
  std::ifstream f(path);
  require(f.good(), ErrorCode::IoError, "cannot open " + path.string());
  SceneManifest m;
  try {
    const Json j = Json::parse(f);
    require(j.at("format").get<std::string>() == kManifestFormat, ErrorCode::FormatError,
            "not a scene manifest");
    const int version = j.at("version").get<int>();
    require(version == kManifestVersion, ErrorCode::VersionMismatch,
            path.string() + ": manifest version " + std::to_string(version) + ", expected " +
                std::to_string(kManifestVersion));
    m.scene.seed = j.at("seed").get<std::uint64_t>();
    m.scene.table_extent = detail::json_mat<Vec2>(j.at("table_extent"));
    m.scene.background_id = j.at("background_id").get<int>();
    m.scene.z_min = j.at("depth_range").at(0).get<double>();
    m.scene.z_max = j.at("depth_range").at(1).get<double>();
    for (const auto& l : j.at("lights"))
      m.scene.lights.push_back({detail::json_mat<Vec3>(l.at("direction")), l.at("intensity").get<double>()});
    m.azimuths = j.at("grid").at("azimuths").get<int>();
    m.elevations = j.at("grid").at("elevations").get<int>();
    for (const auto& o : j.at("objects")) m.scene.objects.push_back(detail::json_object(dir, o));
    for (const auto& v : j.at("views")) m.stations.push_back(detail::json_view(v));
  } catch (const Json::exception& e) {
    fail(ErrorCode::FormatError, path.string() + ": " + e.what());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::FormatError || std::string(e.what()).find(path.string()) != std::string::npos) throw;
    fail(ErrorCode::FormatError, path.string() + ": " + e.what());
  }
  return m;
}

/// Loads the arrays of one stored view.
inline ViewRecord read_view(const fs::path& dir, const ViewStation& station) {
  const std::string base = detail::view_dir_name(station.index) + "/";
  ViewRecord r;
  r.index = station.index;
  r.station = station;
  r.depth = read_array<double, 2>(dir / (base + "depth.mvta"));
  r.visible = read_array<std::int32_t, 2>(dir / (base + "visible.mvta"));
  r.full = read_array<std::uint8_t, 3>(dir / (base + "full.mvta"));
  r.normals = read_array<float, 3>(dir / (base + "normals.mvta"));
  r.heatmap = read_array<double, 2>(dir / (base + "heatmap.mvta"));
  r.rgb_left = read_array<std::uint8_t, 3>(dir / (base + "rgb_left.mvta"));
  r.rgb_right = read_array<std::uint8_t, 3>(dir / (base + "rgb_right.mvta"));
  const fs::path ip = dir / (base + "instances.mvta");
  const auto rows = read_array<double, 2>(ip);
  require(rows.dim(1) == InstanceAnnotation::kRowSize, ErrorCode::FormatError,
          ip.string() + ": expected " + std::to_string(InstanceAnnotation::kRowSize) + " columns");
  for (std::size_t i = 0; i < rows.dim(0); ++i)
    r.instances.push_back(InstanceAnnotation::from_row(rows.data() + i * InstanceAnnotation::kRowSize));
  return r;
}

inline SceneAnnotations read_annotations(const fs::path& dir) {
  SceneManifest m = read_manifest(dir);
  SceneAnnotations a;
  a.scene = std::move(m.scene);
  a.azimuths = m.azimuths;
  a.elevations = m.elevations;
  for (const auto& s : m.stations) a.records.push_back(read_view(dir, s));
  return a;
}

}  // namespace mvtrans::synthgen
