#pragma once

// The `evaluate` command: depth, pose, 3D detection and segmentation metrics
// per scene and pooled over the dataset. A generated dataset is accepted in
// place of predictions and stands for perfect predictions.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mvtrans/app/pool.hpp"
#include "mvtrans/app/predictions.hpp"
#include "mvtrans/instances/fields.hpp"
#include "mvtrans/metrics/depth.hpp"
#include "mvtrans/metrics/detection.hpp"
#include "mvtrans/metrics/pose.hpp"
#include "mvtrans/synthgen/dataset.hpp"

namespace mvtrans::app {

inline constexpr const char* kAggregateRow = "ALL";

struct ReportRow {
  std::string scene;
  std::size_t views = 0;
  std::optional<metrics::DepthMetrics> depth;
  std::optional<metrics::PoseMetrics> pose;
  metrics::DetectionMetrics detection;
  metrics::SegMetrics segmentation;
  std::vector<double> pose_errors;  // metres, per matched keypoint
};

struct Report {
  std::vector<ReportRow> rows;  // one per scene, sorted by name, then the aggregate
  metrics::Warnings warnings;

  const ReportRow& aggregate() const { return rows.back(); }
  std::string text() const;
  std::string csv() const;
  nlohmann::json json() const;
};

/// Ground-truth instances that count for evaluation in one view.
inline std::vector<int> evaluated_instances(const synthgen::SceneSpec& scene, const synthgen::ViewRecord& rec) {
  std::vector<int> ids;
  for (const auto& o : scene.objects)
    if (rec.instances.at(o.id).visible_pixels >= static_cast<std::int64_t>(instances::kMinMaskPixels))
      ids.push_back(o.id);
  return ids;
}

/// The annotations of a generated view recast as a perfect prediction.
inline ViewPrediction ground_truth_prediction(const synthgen::SceneSpec& scene, const synthgen::ViewRecord& rec) {
  ViewPrediction p;
  p.index = rec.index;
  p.depth = rec.depth;
  p.segmentation = LabelMap(rec.visible.shape(), -1);
  const auto ids = evaluated_instances(scene, rec);
  for (std::size_t k = 0; k < ids.size(); ++k) {
    p.boxes.push_back({1.0, scene.objects[ids[k]].obb});
    const int label = ids[k] + synthgen::kFirstObjectLabel;
    for (std::size_t i = 0; i < rec.visible.size(); ++i)
      if (rec.visible[i] == label) p.segmentation[i] = static_cast<int>(k);
  }
  return p;
}

inline bool is_dataset_dir(const fs::path& dir) { return fs::exists(dir / synthgen::kDatasetName); }

inline std::vector<std::string> scene_names(const fs::path& dir) {
  std::vector<std::string> names;
  if (is_dataset_dir(dir)) {
    for (const auto& e : synthgen::read_dataset_index(dir)) names.push_back(e.name);
  } else {
    names = read_prediction_index(dir);
  }
  std::sort(names.begin(), names.end());
  return names;
}

namespace detail {

inline ReportRow summarize(std::string name, std::size_t views, const std::vector<metrics::DepthMetrics>& depth,
                           const std::vector<metrics::DetectionMetrics>& det,
                           const std::vector<metrics::SegMetrics>& seg, std::vector<double> pose_errors,
                           metrics::Warnings& warnings) {
  ReportRow row;
  row.scene = std::move(name);
  row.views = views;
  if (!depth.empty())
    row.depth = metrics::pool(depth);
  else
    warnings.push_back(row.scene + ": no pixels with valid depth");
  row.detection = metrics::pool(det);
  row.segmentation = metrics::pool(seg);
  if (row.detection.gts == 0) warnings.push_back(row.scene + ": no ground-truth boxes; detection mAP defined as 0");
  if (row.segmentation.gts == 0)
    warnings.push_back(row.scene + ": no ground-truth masks; segmentation mAP defined as 0");
  if (row.detection.detections == 0) warnings.push_back(row.scene + ": no predictions");
  if (!pose_errors.empty())
    row.pose = metrics::pose_metrics_from_errors(pose_errors);
  else
    warnings.push_back(row.scene + ": no matched boxes; pose metrics defined as 0");
  row.pose_errors = std::move(pose_errors);
  return row;
}

}  // namespace detail

/// Per-view results of one scene, kept unpooled so the aggregate can be
/// pooled over all scenes, and the scene's own row.
struct SceneParts {
  std::vector<metrics::DepthMetrics> depth;
  std::vector<metrics::DetectionMetrics> detection;
  std::vector<metrics::SegMetrics> segmentation;
  std::vector<double> pose_errors;
  metrics::Warnings warnings;
  ReportRow row;
};

inline SceneParts evaluate_scene(const ScenePrediction& pred, const fs::path& gt_dir, const std::string& name) {
  const synthgen::SceneManifest m = synthgen::read_manifest(gt_dir);
  SceneParts out;
  for (const auto& v : pred.views) {
    require(v.index >= 0 && static_cast<std::size_t>(v.index) < m.stations.size(), ErrorCode::FormatError,
            name + ": predicted view " + std::to_string(v.index) + " is not in the ground truth");
    const auto rec = synthgen::read_view(gt_dir, m.stations[v.index]);
    try {
      out.depth.push_back(metrics::depth_metrics(v.depth, rec.depth));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyMask) throw;
      out.warnings.push_back(name + ": view " + std::to_string(v.index) + " has no valid depth pixels");
    }
    metrics::SceneBoxes boxes;
    metrics::SceneMasks masks;
    boxes.detections = v.boxes;
    masks.predictions = predicted_masks(v);
    require(v.segmentation.shape() == rec.visible.shape(), ErrorCode::FormatError,
            name + ": segmentation of view " + std::to_string(v.index) + " has the wrong size");
    for (int id : evaluated_instances(m.scene, rec)) {
      boxes.gts.push_back(m.scene.objects[id].obb);
      masks.gts.push_back(synthgen::label_mask(rec.visible, id + synthgen::kFirstObjectLabel));
    }
    auto det = metrics::detection_metrics({boxes});
    for (const auto& x : det.matches) {
      const auto e = metrics::box_keypoint_errors(boxes.detections[x.prediction].box, boxes.gts[x.gt]);
      out.pose_errors.insert(out.pose_errors.end(), e.begin(), e.end());
    }
    out.detection.push_back(std::move(det));
    out.segmentation.push_back(metrics::seg_metrics({masks}));
  }
  out.row = detail::summarize(name, pred.views.size(), out.depth, out.detection, out.segmentation, out.pose_errors,
                              out.warnings);
  return out;
}

inline ScenePrediction load_prediction(const fs::path& pred_root, const std::string& name) {
  const fs::path dir = pred_root / name;
  if (!is_dataset_dir(pred_root)) return read_scene_prediction(dir);
  const auto a = synthgen::read_annotations(dir);
  ScenePrediction p;
  p.scene = name;
  for (const auto& rec : a.records) p.views.push_back(ground_truth_prediction(a.scene, rec));
  return p;
}

inline Report evaluate(const fs::path& pred_root, const fs::path& gt_root, int threads = 1) {
  const auto gt_names = scene_names(gt_root);
  const auto pred_names = scene_names(pred_root);
  std::vector<std::string> missing, unknown;
  std::set_difference(gt_names.begin(), gt_names.end(), pred_names.begin(), pred_names.end(),
                      std::back_inserter(missing));
  std::set_difference(pred_names.begin(), pred_names.end(), gt_names.begin(), gt_names.end(),
                      std::back_inserter(unknown));
  if (!missing.empty() || !unknown.empty()) {
    std::string msg;
    auto list = [&](const char* what, const std::vector<std::string>& v) {
      if (v.empty()) return;
      if (!msg.empty()) msg += "; ";
      msg += what;
      for (std::size_t i = 0; i < v.size(); ++i) msg += (i ? ", " : " ") + v[i];
    };
    list("no predictions for", missing);
    list("predictions for unknown scenes", unknown);
    fail(ErrorCode::MissingScene, msg);
  }

  std::vector<SceneParts> parts(gt_names.size());
  parallel_for(gt_names.size(), threads, [&](std::size_t i) {
    parts[i] = evaluate_scene(load_prediction(pred_root, gt_names[i]), gt_root / gt_names[i], gt_names[i]);
  });

  Report report;
  SceneParts all;
  std::size_t views = 0;
  for (auto& p : parts) {
    report.rows.push_back(p.row);
    report.warnings.insert(report.warnings.end(), p.warnings.begin(), p.warnings.end());
    all.depth.insert(all.depth.end(), p.depth.begin(), p.depth.end());
    all.detection.insert(all.detection.end(), p.detection.begin(), p.detection.end());
    all.segmentation.insert(all.segmentation.end(), p.segmentation.begin(), p.segmentation.end());
    all.pose_errors.insert(all.pose_errors.end(), p.pose_errors.begin(), p.pose_errors.end());
    views += p.row.views;
  }
  metrics::Warnings aggregate_warnings;
  report.rows.push_back(detail::summarize(kAggregateRow, views, all.depth, all.detection, all.segmentation,
                                          all.pose_errors, aggregate_warnings));
  report.warnings.insert(report.warnings.end(), aggregate_warnings.begin(), aggregate_warnings.end());
  return report;
}

namespace detail {

inline std::vector<std::string> report_columns() {
  return {"scene", "views",   "rmse",   "mae",     "rel",    "pose_auc",
          "pct_under_2cm", "pose_mae_mm", "map_3d", "iou_3d", "seg_map", "seg_iou"};
}

inline std::string number(double v, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

inline std::vector<std::string> row_cells(const ReportRow& r, const char* fmt) {
  auto opt = [&](bool has, double v) { return has ? number(v, fmt) : std::string("-"); };
  return {r.scene,
          std::to_string(r.views),
          opt(r.depth.has_value(), r.depth ? r.depth->rmse : 0),
          opt(r.depth.has_value(), r.depth ? r.depth->mae : 0),
          opt(r.depth.has_value(), r.depth ? r.depth->rel : 0),
          number(r.pose ? r.pose->auc : 0.0, fmt),
          number(r.pose ? r.pose->pct_under_2cm : 0.0, fmt),
          number(r.pose ? r.pose->mae_mm : 0.0, fmt),
          number(r.detection.map_3d, fmt),
          number(r.detection.mean_iou_3d, fmt),
          number(r.segmentation.map, fmt),
          number(r.segmentation.iou, fmt)};
}

}  // namespace detail

inline std::string Report::text() const {
  const auto head = detail::report_columns();
  std::vector<std::vector<std::string>> table{head};
  for (const auto& r : rows) table.push_back(detail::row_cells(r, "%.4f"));
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : table)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::ostringstream s;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (i + 1 == table.size()) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      s << std::string(total - 2, '-') << '\n';
    }
    for (std::size_t c = 0; c < table[i].size(); ++c) {
      const auto& cell = table[i][c];
      if (c == 0)
        s << cell << std::string(width[c] - cell.size(), ' ');
      else
        s << "  " << std::string(width[c] - cell.size(), ' ') << cell;
    }
    s << '\n';
  }
  for (const auto& w : warnings) s << "warning: " << w << '\n';
  return s.str();
}

inline std::string Report::csv() const {
  std::ostringstream s;
  const auto head = detail::report_columns();
  for (std::size_t c = 0; c < head.size(); ++c) s << (c ? "," : "") << head[c];
  s << '\n';
  for (const auto& r : rows) {
    const auto cells = detail::row_cells(r, "%.17g");
    for (std::size_t c = 0; c < cells.size(); ++c) s << (c ? "," : "") << cells[c];
    s << '\n';
  }
  return s.str();
}

inline nlohmann::json Report::json() const {
  nlohmann::json out;
  out["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j;
    j["scene"] = r.scene;
    j["views"] = r.views;
    j["depth"] = r.depth ? nlohmann::json{{"rmse", r.depth->rmse},
                                          {"mae", r.depth->mae},
                                          {"rel", r.depth->rel},
                                          {"pixels", r.depth->pixels}}
                         : nlohmann::json(nullptr);
    j["pose"] = r.pose ? nlohmann::json{{"auc", r.pose->auc},
                                        {"pct_under_2cm", r.pose->pct_under_2cm},
                                        {"mae_mm", r.pose->mae_mm},
                                        {"keypoints", r.pose->count}}
                       : nlohmann::json(nullptr);
    j["detection"] = {{"map_3d", r.detection.map_3d},
                      {"mean_iou_3d", r.detection.mean_iou_3d},
                      {"true_positives", r.detection.true_positives},
                      {"detections", r.detection.detections},
                      {"ground_truth", r.detection.gts}};
    j["segmentation"] = {{"map", r.segmentation.map},
                         {"iou", r.segmentation.iou},
                         {"matched", r.segmentation.matched},
                         {"ground_truth", r.segmentation.gts}};
    out["rows"].push_back(j);
  }
  out["warnings"] = warnings;
  return out;
}

}  // namespace mvtrans::app
