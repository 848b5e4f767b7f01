#pragma once

// Run configuration shared by the CLI subcommands. A JSON file supplies any
// subset of the keys; command-line flags override the file.

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "json.hpp"
#include "mvtrans/planesweep/planes.hpp"
#include "mvtrans/synthgen/config.hpp"

namespace mvtrans::app {

namespace fs = std::filesystem;

enum class DepthRangePolicy { Scene, Fixed };

struct PipelineConfig {
  int planes = 32;
  DepthRangePolicy depth_range = DepthRangePolicy::Scene;
  double z_min = 0.3, z_max = 2.0;  // used by the fixed policy
  planesweep::Spacing spacing = planesweep::Spacing::Uniform;
  int scale = 2;
  std::string extractor = "pyramid";
  int channels = 15;
  int views = 2;  // reference plus supports per inference
  double inverse_temperature = 2000.0;
  int references = 3;  // reference stations per scene

  void validate() const {
    require(planes >= 2, ErrorCode::InvalidArgument, "need at least two depth planes");
    require(depth_range == DepthRangePolicy::Scene || (z_min > 0 && z_max > z_min), ErrorCode::BadRange,
            "fixed depth range needs 0 < z_min < z_max");
    require(scale >= 1 && 8 % scale == 0, ErrorCode::BadScale, "scale must divide 8");
    require(extractor == "pyramid", ErrorCode::InvalidArgument, "unknown extractor '" + extractor + "'");
    require(channels >= 1 && channels <= 15, ErrorCode::InvalidArgument, "channels must lie in [1, 15]");
    require(views == 2 || views == 3 || views == 5, ErrorCode::InvalidArgument,
            "views per inference must be 2, 3 or 5, got " + std::to_string(views));
    require(inverse_temperature > 0, ErrorCode::InvalidArgument, "inverse temperature must be positive");
    require(references >= 1, ErrorCode::InvalidArgument, "need at least one reference view per scene");
  }
};

struct RunConfig {
  synthgen::GenerationConfig generation;
  PipelineConfig pipeline;
  fs::path out = "out";
  int threads = 1;

  void validate() const {
    generation.validate();
    pipeline.validate();
    require(threads >= 1, ErrorCode::InvalidArgument, "thread count must be at least 1");
  }
};

inline nlohmann::json to_json(const PipelineConfig& c) {
  return {{"planes", c.planes},
          {"depth_range", c.depth_range == DepthRangePolicy::Scene ? "scene" : "fixed"},
          {"z_min", c.z_min},
          {"z_max", c.z_max},
          {"spacing", c.spacing == planesweep::Spacing::Uniform ? "uniform" : "inverse"},
          {"scale", c.scale},
          {"extractor", c.extractor},
          {"channels", c.channels},
          {"views", c.views},
          {"inverse_temperature", c.inverse_temperature},
          {"references", c.references}};
}

inline void from_json(const nlohmann::json& j, PipelineConfig& c) {
  using namespace synthgen::config_detail;
  check_keys(j, "pipeline",
             {"planes", "depth_range", "z_min", "z_max", "spacing", "scale", "extractor", "channels", "views",
              "inverse_temperature", "references"});
  read(j, "planes", c.planes);
  if (j.contains("depth_range")) {
    const auto p = j.at("depth_range").get<std::string>();
    require(p == "scene" || p == "fixed", ErrorCode::FormatError, "depth_range must be 'scene' or 'fixed'");
    c.depth_range = p == "scene" ? DepthRangePolicy::Scene : DepthRangePolicy::Fixed;
  }
  read(j, "z_min", c.z_min);
  read(j, "z_max", c.z_max);
  if (j.contains("spacing")) {
    const auto s = j.at("spacing").get<std::string>();
    require(s == "uniform" || s == "inverse", ErrorCode::FormatError, "spacing must be 'uniform' or 'inverse'");
    c.spacing = s == "uniform" ? planesweep::Spacing::Uniform : planesweep::Spacing::InverseDepth;
  }
  read(j, "scale", c.scale);
  read(j, "extractor", c.extractor);
  read(j, "channels", c.channels);
  read(j, "views", c.views);
  read(j, "inverse_temperature", c.inverse_temperature);
  read(j, "references", c.references);
}

inline nlohmann::json to_json(const RunConfig& c) {
  return {{"generation", synthgen::to_json(c.generation)},
          {"pipeline", to_json(c.pipeline)},
          {"out", c.out.string()},
          {"threads", c.threads}};
}

inline void from_json(const nlohmann::json& j, RunConfig& c) {
  using namespace synthgen::config_detail;
  check_keys(j, "config", {"generation", "pipeline", "out", "threads"});
  if (j.contains("generation")) synthgen::from_json(j.at("generation"), c.generation);
  if (j.contains("pipeline")) from_json(j.at("pipeline"), c.pipeline);
  if (j.contains("out")) c.out = j.at("out").get<std::string>();
  read(j, "threads", c.threads);
}

inline RunConfig parse_config(const std::string& text, const std::string& origin = "config") {
  RunConfig c;
  try {
    from_json(nlohmann::json::parse(text), c);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::FormatError, origin + ": " + e.what());
  }
  return c;
}

inline RunConfig load_config(const fs::path& path) {
  std::ifstream f(path);
  require(f.good(), ErrorCode::IoError, "cannot open config " + path.string());
  const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_config(text, path.string());
}

/// Flag values that replace config entries when present.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> scenes, views, threads;
  std::optional<fs::path> out;
};

inline void apply(const Overrides& o, RunConfig& c) {
  if (o.seed) c.generation.seed = *o.seed;
  if (o.scenes) c.generation.scenes = *o.scenes;
  if (o.views) c.generation.views.count = *o.views;
  if (o.threads) c.threads = c.generation.threads = *o.threads;
  if (o.out) c.out = *o.out;
}

}  // namespace mvtrans::app
