#pragma once

// Prediction bundles written by `run` and read by `evaluate`.
//
//   <out>/predictions.json                      index of scenes
//   <out>/scene_NNNN/prediction.json            per-scene view list
//   <out>/scene_NNNN/views/VVV/depth.mvta       f64 (h, w), metres
//   <out>/scene_NNNN/views/VVV/boxes.mvta       f64 (K, 16): score, R (9, row-major), t (3), size (3)
//   <out>/scene_NNNN/views/VVV/segmentation.mvta  i32 (H, W): box index or -1

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mvtrans/metrics/detection.hpp"
#include "mvtrans/synthgen/annotation_io.hpp"
#include "mvtrans/synthgen/array_io.hpp"

namespace mvtrans::app {

namespace fs = std::filesystem;

inline constexpr const char* kPredictionIndexName = "predictions.json";
inline constexpr const char* kScenePredictionName = "prediction.json";
inline constexpr const char* kPredictionFormat = "mvtrans-predictions";
inline constexpr int kPredictionVersion = 1;
inline constexpr std::size_t kBoxRowSize = 16;

struct ViewPrediction {
  int index = 0;  // station index in the scene
  DepthMap depth;
  std::vector<metrics::ScoredBox> boxes;  // world frame
  LabelMap segmentation;                  // index into boxes, -1 for background

  bool operator==(const ViewPrediction& o) const {
    if (index != o.index || !(depth == o.depth) || !(segmentation == o.segmentation) ||
        boxes.size() != o.boxes.size())
      return false;
    for (std::size_t i = 0; i < boxes.size(); ++i)
      if (boxes[i].score != o.boxes[i].score || !(boxes[i].box == o.boxes[i].box)) return false;
    return true;
  }
};

struct ScenePrediction {
  std::string scene;
  std::vector<ViewPrediction> views;  // ascending station index
};

/// Instance masks of the predicted segmentation, scored like their boxes.
inline std::vector<metrics::ScoredMask> predicted_masks(const ViewPrediction& v) {
  std::vector<metrics::ScoredMask> out(v.boxes.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].score = v.boxes[i].score;
    out[i].mask = Mask(v.segmentation.shape(), 0);
  }
  for (std::size_t p = 0; p < v.segmentation.size(); ++p) {
    const int label = v.segmentation[p];
    if (label < 0) continue;
    require(static_cast<std::size_t>(label) < out.size(), ErrorCode::FormatError,
            "segmentation label " + std::to_string(label) + " has no box");
    out[label].mask[p] = 1;
  }
  return out;
}

namespace detail {

inline std::string view_dir(int index) { return synthgen::detail::view_dir_name(index); }

inline Tensor<double, 2> box_rows(const std::vector<metrics::ScoredBox>& boxes) {
  Tensor<double, 2> t({boxes.size(), kBoxRowSize});
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& b = boxes[i];
    double* r = t.data() + i * kBoxRowSize;
    r[0] = b.score;
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c) r[1 + 3 * a + c] = b.box.rotation(a, c);
    for (int a = 0; a < 3; ++a) r[10 + a] = b.box.translation(a), r[13 + a] = b.box.size(a);
  }
  return t;
}

inline std::vector<metrics::ScoredBox> rows_boxes(const Tensor<double, 2>& t, const std::string& name) {
  require(t.dim(1) == kBoxRowSize, ErrorCode::FormatError,
          name + ": expected " + std::to_string(kBoxRowSize) + " columns");
  std::vector<metrics::ScoredBox> out(t.dim(0));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double* r = t.data() + i * kBoxRowSize;
    out[i].score = r[0];
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c) out[i].box.rotation(a, c) = r[1 + 3 * a + c];
    for (int a = 0; a < 3; ++a) out[i].box.translation(a) = r[10 + a], out[i].box.size(a) = r[13 + a];
  }
  return out;
}

inline void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream f(path, std::ios::trunc);
  require(f.good(), ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  f << j.dump(1) << '\n';
  require(f.good(), ErrorCode::IoError, "failed writing " + path.string());
}

inline nlohmann::json read_json(const fs::path& path) {
  std::ifstream f(path);
  require(f.good(), ErrorCode::IoError, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::FormatError, path.string() + ": " + e.what());
  }
}

inline void check_header(const nlohmann::json& j, const fs::path& path) {
  try {
    require(j.at("format").get<std::string>() == kPredictionFormat, ErrorCode::FormatError,
            path.string() + ": not a prediction file");
    const int version = j.at("version").get<int>();
    require(version == kPredictionVersion, ErrorCode::VersionMismatch,
            path.string() + ": prediction version " + std::to_string(version) + ", expected " +
                std::to_string(kPredictionVersion));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::FormatError, path.string() + ": " + e.what());
  }
}

}  // namespace detail

/// Arrays first, then the per-scene json.
inline void write_scene_prediction(const ScenePrediction& p, const fs::path& dir) {
  nlohmann::json views = nlohmann::json::array();
  for (const auto& v : p.views) {
    const std::string base = detail::view_dir(v.index) + "/";
    std::error_code ec;
    fs::create_directories(dir / base, ec);
    require(!ec, ErrorCode::IoError, "cannot create " + (dir / base).string() + ": " + ec.message());
    synthgen::write_array(dir / (base + "depth.mvta"), v.depth);
    synthgen::write_array(dir / (base + "boxes.mvta"), detail::box_rows(v.boxes));
    synthgen::write_array(dir / (base + "segmentation.mvta"), v.segmentation);
    views.push_back({{"index", v.index},
                     {"files",
                      {{"depth", base + "depth.mvta"},
                       {"boxes", base + "boxes.mvta"},
                       {"segmentation", base + "segmentation.mvta"}}}});
  }
  detail::write_json(dir / kScenePredictionName,
                     {{"format", kPredictionFormat}, {"version", kPredictionVersion}, {"scene", p.scene},
                      {"views", views}});
}

inline ScenePrediction read_scene_prediction(const fs::path& dir) {
  const fs::path path = dir / kScenePredictionName;
  const auto j = detail::read_json(path);
  detail::check_header(j, path);
  ScenePrediction p;
  try {
    p.scene = j.at("scene").get<std::string>();
    for (const auto& v : j.at("views")) {
      ViewPrediction vp;
      vp.index = v.at("index").get<int>();
      const auto& files = v.at("files");
      vp.depth = synthgen::read_array<double, 2>(dir / files.at("depth").get<std::string>());
      const fs::path bp = dir / files.at("boxes").get<std::string>();
      vp.boxes = detail::rows_boxes(synthgen::read_array<double, 2>(bp), bp.string());
      vp.segmentation = synthgen::read_array<std::int32_t, 2>(dir / files.at("segmentation").get<std::string>());
      p.views.push_back(std::move(vp));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::FormatError, path.string() + ": " + e.what());
  }
  return p;
}

inline void write_prediction_index(const fs::path& dir, const std::vector<std::string>& scenes,
                                   const nlohmann::json& config) {
  detail::write_json(dir / kPredictionIndexName, {{"format", kPredictionFormat},
                                                  {"version", kPredictionVersion},
                                                  {"config", config},
                                                  {"scenes", scenes}});
}

inline std::vector<std::string> read_prediction_index(const fs::path& dir) {
  const fs::path path = dir / kPredictionIndexName;
  const auto j = detail::read_json(path);
  detail::check_header(j, path);
  try {
    return j.at("scenes").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::FormatError, path.string() + ": " + e.what());
  }
}

}  // namespace mvtrans::app
