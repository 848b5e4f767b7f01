#pragma once

// Generation config and its JSON form. Every section is optional; keys that
// are present override the defaults and unknown keys are rejected.

#include <algorithm>
#include <array>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mvtrans/synthgen/scene.hpp"
#include "mvtrans/synthgen/viewpoints.hpp"

namespace mvtrans::synthgen {

struct SplitShare {
  std::string name;
  int weight = 1;
  bool operator==(const SplitShare&) const = default;
};

struct GenerationConfig {
  std::uint64_t seed = 0;
  int scenes = 1;
  int threads = 1;
  SceneConfig scene;
  ViewConfig views;
  std::vector<SplitShare> splits{{"all", 1}};

  void validate() const {
    require(scenes >= 1, ErrorCode::InvalidArgument, "scene count must be at least 1");
    require(threads >= 1, ErrorCode::InvalidArgument, "thread count must be at least 1");
    require(!splits.empty(), ErrorCode::InvalidArgument, "need at least one split");
    for (const auto& s : splits)
      require(!s.name.empty() && s.weight >= 0, ErrorCode::InvalidArgument, "bad split '" + s.name + "'");
    scene.validate();
    views.validate();
  }
};

/// Train/val shares of the full synthetic benchmark (1575 and 421 scenes).
inline std::vector<SplitShare> syntodd_splits() { return {{"train", 1575}, {"val", 421}}; }

/// Split name for every scene index: contiguous blocks sized by the
/// largest-remainder rounding of the weights, earlier splits winning ties.
inline std::vector<std::string> assign_splits(int scenes, const std::vector<SplitShare>& shares) {
  long total = 0;
  for (const auto& s : shares) total += s.weight;
  require(total > 0, ErrorCode::InvalidArgument, "split weights sum to zero");
  std::vector<long> count(shares.size());
  std::vector<std::pair<long, std::size_t>> rem;
  long used = 0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    const long num = static_cast<long>(scenes) * shares[i].weight;
    count[i] = num / total;
    used += count[i];
    rem.push_back({num % total, i});
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; used < scenes; ++k, ++used) ++count[rem[k].second];
  std::vector<std::string> out;
  for (std::size_t i = 0; i < shares.size(); ++i) out.insert(out.end(), count[i], shares[i].name);
  return out;
}

namespace config_detail {

using Json = nlohmann::json;

inline void check_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  require(j.is_object(), ErrorCode::FormatError, where + " must be an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || item.key() == k;
    require(ok, ErrorCode::FormatError, "unknown key '" + item.key() + "' in " + where);
  }
}

template <class T>
void read(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline void read_vec2(const Json& j, const char* key, Vec2& out) {
  if (!j.contains(key)) return;
  const auto v = j.at(key).get<std::array<double, 2>>();
  out = Vec2(v[0], v[1]);
}

}  // namespace config_detail

inline nlohmann::json to_json(const VesselConfig& c) {
  return {{"height_min", c.height_min},
          {"height_max", c.height_max},
          {"base_radius_min", c.base_radius_min},
          {"base_radius_max", c.base_radius_max},
          {"radius_min", c.radius_min},
          {"radius_max", c.radius_max},
          {"linear_max", c.linear_max},
          {"poly_max", c.poly_max},
          {"wave_amplitude_max", c.wave_amplitude_max},
          {"wave_cycles_max", c.wave_cycles_max},
          {"wall_min", c.wall_min},
          {"wall_max", c.wall_max},
          {"angular_segments", c.angular_segments},
          {"vertical_segments", c.vertical_segments},
          {"max_attempts", c.max_attempts}};
}

inline void from_json(const nlohmann::json& j, VesselConfig& c) {
  using namespace config_detail;
  check_keys(j, "vessel",
             {"height_min", "height_max", "base_radius_min", "base_radius_max", "radius_min", "radius_max",
              "linear_max", "poly_max", "wave_amplitude_max", "wave_cycles_max", "wall_min", "wall_max",
              "angular_segments", "vertical_segments", "max_attempts"});
  read(j, "height_min", c.height_min);
  read(j, "height_max", c.height_max);
  read(j, "base_radius_min", c.base_radius_min);
  read(j, "base_radius_max", c.base_radius_max);
  read(j, "radius_min", c.radius_min);
  read(j, "radius_max", c.radius_max);
  read(j, "linear_max", c.linear_max);
  read(j, "poly_max", c.poly_max);
  read(j, "wave_amplitude_max", c.wave_amplitude_max);
  read(j, "wave_cycles_max", c.wave_cycles_max);
  read(j, "wall_min", c.wall_min);
  read(j, "wall_max", c.wall_max);
  read(j, "angular_segments", c.angular_segments);
  read(j, "vertical_segments", c.vertical_segments);
  read(j, "max_attempts", c.max_attempts);
}

/// The viewpoint radius range lives in the views section; scene depth
/// metadata copies it at generation time.
inline nlohmann::json to_json(const SceneConfig& c) {
  return {{"table_extent", {c.table_extent.x(), c.table_extent.y()}},
          {"max_transparent", c.max_transparent},
          {"max_opaque", c.max_opaque},
          {"scale_min", c.scale_min},
          {"scale_max", c.scale_max},
          {"gap", c.gap},
          {"placement_attempts", c.placement_attempts},
          {"vessel", to_json(c.vessel)}};
}

inline void from_json(const nlohmann::json& j, SceneConfig& c) {
  using namespace config_detail;
  check_keys(j, "scene",
             {"table_extent", "max_transparent", "max_opaque", "scale_min", "scale_max", "gap",
              "placement_attempts", "vessel"});
  read_vec2(j, "table_extent", c.table_extent);
  read(j, "max_transparent", c.max_transparent);
  read(j, "max_opaque", c.max_opaque);
  read(j, "scale_min", c.scale_min);
  read(j, "scale_max", c.scale_max);
  read(j, "gap", c.gap);
  read(j, "placement_attempts", c.placement_attempts);
  if (j.contains("vessel")) from_json(j.at("vessel"), c.vessel);
}

inline nlohmann::json to_json(const ViewConfig& c) {
  return {{"count", c.count},
          {"radius_min", c.radius_min},
          {"radius_max", c.radius_max},
          {"elevation_min_deg", c.elevation_min_deg},
          {"elevation_max_deg", c.elevation_max_deg},
          {"baseline", c.baseline},
          {"hfov_deg", c.hfov_deg},
          {"width", c.width},
          {"height", c.height}};
}

inline void from_json(const nlohmann::json& j, ViewConfig& c) {
  using namespace config_detail;
  check_keys(j, "views",
             {"count", "radius_min", "radius_max", "elevation_min_deg", "elevation_max_deg", "baseline",
              "hfov_deg", "width", "height"});
  read(j, "count", c.count);
  read(j, "radius_min", c.radius_min);
  read(j, "radius_max", c.radius_max);
  read(j, "elevation_min_deg", c.elevation_min_deg);
  read(j, "elevation_max_deg", c.elevation_max_deg);
  read(j, "baseline", c.baseline);
  read(j, "hfov_deg", c.hfov_deg);
  read(j, "width", c.width);
  read(j, "height", c.height);
}

/// Thread count is a runtime setting and stays out of the serialized form so
/// datasets do not depend on it.
inline nlohmann::json to_json(const GenerationConfig& c) {
  nlohmann::json splits = nlohmann::json::array();
  for (const auto& s : c.splits) splits.push_back({{"name", s.name}, {"weight", s.weight}});
  return {{"seed", c.seed}, {"scenes", c.scenes}, {"scene", to_json(c.scene)},
          {"views", to_json(c.views)}, {"splits", splits}};
}

inline void from_json(const nlohmann::json& j, GenerationConfig& c) {
  using namespace config_detail;
  check_keys(j, "generation", {"seed", "scenes", "threads", "scene", "views", "splits", "preset"});
  if (j.contains("preset")) {
    const auto name = j.at("preset").get<std::string>();
    require(name == "syntodd-mini", ErrorCode::FormatError, "unknown preset '" + name + "'");
    c.splits = syntodd_splits();
  }
  read(j, "seed", c.seed);
  read(j, "scenes", c.scenes);
  read(j, "threads", c.threads);
  if (j.contains("scene")) from_json(j.at("scene"), c.scene);
  if (j.contains("views")) from_json(j.at("views"), c.views);
  if (j.contains("splits")) {
    c.splits.clear();
    for (const auto& s : j.at("splits")) {
      check_keys(s, "split", {"name", "weight"});
      c.splits.push_back({s.at("name").get<std::string>(), s.at("weight").get<int>()});
    }
  }
}

}  // namespace mvtrans::synthgen
