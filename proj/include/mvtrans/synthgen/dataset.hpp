#pragma once

// Whole-dataset generation: one directory per scene plus dataset.json (scene
// list, splits, config) and summary.json (counts).

#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "mvtrans/synthgen/annotation_io.hpp"
#include "mvtrans/synthgen/config.hpp"

namespace mvtrans::synthgen {

inline constexpr const char* kDatasetName = "dataset.json";
inline constexpr const char* kSummaryName = "summary.json";
inline constexpr int kDatasetVersion = 1;

inline std::string scene_name(int index) {
  std::ostringstream s;
  s << "scene_" << std::setw(4) << std::setfill('0') << index;
  return s.str();
}

inline std::uint64_t scene_seed(std::uint64_t dataset_seed, int index) {
  return mix_seed(dataset_seed, static_cast<std::uint64_t>(index));
}

/// Scene and viewpoints derived from one scene seed.
inline std::pair<SceneSpec, ViewpointGrid> make_scene(std::uint64_t seed, const GenerationConfig& cfg) {
  SceneConfig sc = cfg.scene;
  sc.radius_min = cfg.views.radius_min;
  sc.radius_max = cfg.views.radius_max;
  SceneSpec scene = assemble_scene(mix_seed(seed, 0), sc);
  scene.seed = seed;
  return {std::move(scene), sample_viewpoints(mix_seed(seed, 1), cfg.views)};
}

inline SceneAnnotations generate_scene(std::uint64_t seed, const GenerationConfig& cfg) {
  auto [scene, grid] = make_scene(seed, cfg);
  SceneAnnotations a;
  a.azimuths = grid.azimuths;
  a.elevations = grid.elevations;
  for (const auto& s : grid.stations) a.records.push_back(build_view_record(scene, s));
  a.scene = std::move(scene);
  return a;
}

struct SceneOutcome {
  int index = 0;
  std::string name;
  std::string split;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  int views = 0, objects = 0, transparent = 0;
};

struct DatasetSummary {
  std::vector<SceneOutcome> scenes;  // sorted by index

  int generated() const {
    int n = 0;
    for (const auto& s : scenes) n += s.ok;
    return n;
  }
};

namespace detail {

inline void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream f(path, std::ios::trunc);
  require(f.good(), ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  f << j.dump(1) << '\n';
  require(f.good(), ErrorCode::IoError, "failed writing " + path.string());
}

}  // namespace detail

/// Generates every scene into `out`. Scenes that fail (for example with
/// PlacementExhausted) are recorded and skipped; I/O failures propagate.
inline DatasetSummary generate_dataset(const GenerationConfig& cfg, const fs::path& out) {
  cfg.validate();
  std::error_code ec;
  fs::create_directories(out, ec);
  require(!ec, ErrorCode::IoError, "cannot create " + out.string() + ": " + ec.message());

  const auto splits = assign_splits(cfg.scenes, cfg.splits);
  DatasetSummary summary;
  summary.scenes.resize(cfg.scenes);
  std::atomic<int> next{0};
  std::mutex io_error_mutex;
  std::exception_ptr io_error;

  auto worker = [&] {
    for (int i = next++; i < cfg.scenes; i = next++) {
      SceneOutcome& o = summary.scenes[i];
      o.index = i;
      o.name = scene_name(i);
      o.split = splits[i];
      o.seed = scene_seed(cfg.seed, i);
      try {
        const SceneAnnotations a = generate_scene(o.seed, cfg);
        write_annotations(a, out / o.name);
        o.ok = true;
        o.views = static_cast<int>(a.records.size());
        o.objects = static_cast<int>(a.scene.objects.size());
        o.transparent = static_cast<int>(a.scene.transparent_count());
      } catch (const Error& e) {
        if (e.code() == ErrorCode::IoError) {
          std::lock_guard lock(io_error_mutex);
          if (!io_error) io_error = std::current_exception();
        }
        o.error = e.what();
        std::error_code rm;
        fs::remove_all(out / o.name, rm);
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < std::min(cfg.threads, cfg.scenes); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (io_error) std::rethrow_exception(io_error);

  nlohmann::json scenes = nlohmann::json::array(), failed = nlohmann::json::array();
  int views = 0, objects = 0, transparent = 0;
  for (const auto& s : summary.scenes) {
    if (s.ok) {
      scenes.push_back({{"name", s.name}, {"split", s.split}, {"seed", s.seed}});
      views += s.views;
      objects += s.objects;
      transparent += s.transparent;
    } else {
      failed.push_back({{"index", s.index}, {"seed", s.seed}, {"error", s.error}});
    }
  }
  detail::write_json(out / kDatasetName, {{"format", "mvtrans-dataset"},
                                          {"version", kDatasetVersion},
                                          {"config", to_json(cfg)},
                                          {"scenes", scenes},
                                          {"failed", failed}});
  detail::write_json(out / kSummaryName, {{"scenes_requested", cfg.scenes},
                                          {"scenes_generated", summary.generated()},
                                          {"scenes_failed", cfg.scenes - summary.generated()},
                                          {"view_bundles", views},
                                          {"objects", objects},
                                          {"transparent_objects", transparent}});
  return summary;
}

struct DatasetEntry {
  std::string name;
  std::string split;
};

/// Scene list of a dataset directory in stored order.
inline std::vector<DatasetEntry> read_dataset_index(const fs::path& dir) {
  const fs::path path = dir / kDatasetName;
  std::ifstream f(path);
  require(f.good(), ErrorCode::IoError, "cannot open " + path.string());
  std::vector<DatasetEntry> out;
  try {
    const auto j = nlohmann::json::parse(f);
    require(j.at("format").get<std::string>() == "mvtrans-dataset", ErrorCode::FormatError,
            path.string() + ": not a dataset index");
    const int version = j.at("version").get<int>();
    require(version == kDatasetVersion, ErrorCode::VersionMismatch,
            path.string() + ": dataset version " + std::to_string(version));
    for (const auto& s : j.at("scenes"))
      out.push_back({s.at("name").get<std::string>(), s.at("split").get<std::string>()});
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::FormatError, path.string() + ": " + e.what());
  }
  return out;
}

}  // namespace mvtrans::synthgen
