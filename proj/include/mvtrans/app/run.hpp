#pragma once

// The `run` command: per reference view, rough depth from the plane sweep and
// detections assembled from instance fields.
//
// No trained heads exist here, so the instance fields are rendered from the
// ground-truth annotations of the view and only peak detection and assembly
// run on them. The predicted segmentation is the field ownership of each
// detected instance, upsampled to full resolution. Scores from this mode
// verify the pipeline, not a learned model.

#include <filesystem>
#include <string>
#include <vector>

#include "mvtrans/app/config.hpp"
#include "mvtrans/app/pool.hpp"
#include "mvtrans/app/predictions.hpp"
#include "mvtrans/instances/assemble.hpp"
#include "mvtrans/planesweep/features.hpp"
#include "mvtrans/planesweep/pipeline.hpp"
#include "mvtrans/synthgen/dataset.hpp"

namespace mvtrans::app {

/// `count` station indices spread evenly over [0, stations).
inline std::vector<int> reference_stations(int stations, int count) {
  require(stations >= 1, ErrorCode::EmptyList, "scene has no views");
  std::vector<int> out;
  for (int i = 0; i < std::min(count, stations); ++i) {
    const int s = static_cast<int>(static_cast<long>(i) * stations / std::min(count, stations));
    if (out.empty() || out.back() != s) out.push_back(s);
  }
  return out;
}

/// A support camera: station index and which eye.
struct SupportRef {
  int station = 0;
  bool right = false;
  bool operator==(const SupportRef&) const = default;
};

/// Supports for a reference station: its own right eye, then the left eyes
/// of ring neighbours at azimuth offsets +1, -1, +2, -2, ... If the ring is
/// too small the list repeats, which leaves the pooled cost unchanged.
inline std::vector<SupportRef> support_stations(int reference, int azimuths, int elevations, int supports) {
  require(azimuths >= 1 && elevations >= 1 && reference >= 0 && reference < azimuths * elevations,
          ErrorCode::IndexOutOfRange, "reference station outside the viewpoint grid");
  const int ring = reference / azimuths, a = reference % azimuths;
  std::vector<SupportRef> cand{{reference, true}};
  for (int step = 1; step <= azimuths / 2; ++step)
    for (int sign : {1, -1}) {
      const SupportRef s{ring * azimuths + ((a + sign * step) % azimuths + azimuths) % azimuths, false};
      if (s.station != reference && std::find(cand.begin(), cand.end(), s) == cand.end()) cand.push_back(s);
    }
  std::vector<SupportRef> out;
  for (int i = 0; i < supports; ++i) out.push_back(cand[i % cand.size()]);
  return out;
}

inline planesweep::PlaneStack depth_planes(const PipelineConfig& cfg, const synthgen::SceneSpec& scene) {
  if (cfg.depth_range == DepthRangePolicy::Scene)
    return planesweep::sample_depth_planes(scene.z_min, scene.z_max, cfg.planes, cfg.spacing);
  return planesweep::sample_depth_planes(cfg.z_min, cfg.z_max, cfg.planes, cfg.spacing);
}

inline planesweep::RoughDepth infer_depth(const MultiViewRig& rig, const planesweep::PlaneStack& planes,
                                          const PipelineConfig& cfg) {
  const planesweep::PyramidPoolingExtractor extractor(cfg.channels, cfg.scale);
  planesweep::PipelineOptions options;
  options.inverse_temperature = cfg.inverse_temperature;
  return planesweep::rough_depth_pipeline(rig, planes, extractor, options);
}

/// Detections from instance fields rendered out of the view's annotations.
inline instances::AssemblyResult oracle_detections(const synthgen::SceneSpec& scene,
                                                   const synthgen::ViewRecord& rec,
                                                   instances::InstanceFieldSet* fields_out = nullptr) {
  const CameraView& cam = rec.station.left;
  auto fields = instances::render_instance_fields(synthgen::view_observations(scene, rec), cam.intrinsics,
                                                  cam.world_from_camera);
  auto result = instances::assemble_detections(fields, instances::detect_peaks(fields.heatmap.grid),
                                               cam.intrinsics, cam.world_from_camera);
  if (fields_out) *fields_out = std::move(fields);
  return result;
}

/// Full-resolution segmentation: every field cell owned by the instance under
/// a detection's peak is labelled with that detection's index.
inline LabelMap ownership_segmentation(const instances::InstanceFieldSet& fields,
                                       const std::vector<instances::Detection>& detections, std::size_t height,
                                       std::size_t width) {
  LabelMap seg({height, width}, -1);
  for (std::size_t k = 0; k < detections.size(); ++k) {
    const int owner = fields.ownership(detections[k].peak.y, detections[k].peak.x);
    if (owner < 0) continue;
    for (std::size_t y = 0; y < height; ++y)
      for (std::size_t x = 0; x < width; ++x) {
        const std::size_t fy = y / instances::kFieldStride, fx = x / instances::kFieldStride;
        if (fy < fields.height() && fx < fields.width() && fields.ownership(fy, fx) == owner && seg(y, x) < 0)
          seg(y, x) = static_cast<int>(k);
      }
  }
  return seg;
}

inline CameraView with_image(CameraView cam, const synthgen::ColorImage& rgb) {
  cam.image = synthgen::to_image(rgb);
  return cam;
}

inline ViewPrediction predict_view(const synthgen::SceneManifest& m, const fs::path& scene_dir, int reference,
                                   const PipelineConfig& cfg) {
  require(reference >= 0 && static_cast<std::size_t>(reference) < m.stations.size(), ErrorCode::IndexOutOfRange,
          "view " + std::to_string(reference) + " outside [0, " + std::to_string(m.stations.size()) + ")");
  const synthgen::ViewRecord rec = synthgen::read_view(scene_dir, m.stations[reference]);
  MultiViewRig rig;
  rig.reference = with_image(rec.station.left, rec.rgb_left);
  for (const auto& s : support_stations(reference, m.azimuths, m.elevations, cfg.views - 1)) {
    if (s.station == reference) {
      rig.supports.push_back(with_image(rec.station.right, rec.rgb_right));
    } else {
      const auto other = synthgen::read_view(scene_dir, m.stations[s.station]);
      rig.supports.push_back(s.right ? with_image(other.station.right, other.rgb_right)
                                     : with_image(other.station.left, other.rgb_left));
    }
  }
  ViewPrediction out;
  out.index = reference;
  out.depth = infer_depth(rig, depth_planes(cfg, m.scene), cfg).depth;

  instances::InstanceFieldSet fields;
  const auto assembled = oracle_detections(m.scene, rec, &fields);
  for (const auto& d : assembled.detections) out.boxes.push_back({d.score, d.obb});
  out.segmentation = ownership_segmentation(fields, assembled.detections, rec.depth.dim(0), rec.depth.dim(1));
  return out;
}

inline ScenePrediction predict_scene(const fs::path& scene_dir, const std::string& name, const PipelineConfig& cfg) {
  const auto m = synthgen::read_manifest(scene_dir);
  ScenePrediction p;
  p.scene = name;
  for (int r : reference_stations(static_cast<int>(m.stations.size()), cfg.references))
    p.views.push_back(predict_view(m, scene_dir, r, cfg));
  return p;
}

/// Predictions for every scene of a dataset, written under `out`.
inline std::vector<ScenePrediction> run_dataset(const RunConfig& cfg, const fs::path& dataset, const fs::path& out,
                                                bool keep = false) {
  cfg.pipeline.validate();
  const auto entries = synthgen::read_dataset_index(dataset);
  std::error_code ec;
  fs::create_directories(out, ec);
  require(!ec, ErrorCode::IoError, "cannot create " + out.string() + ": " + ec.message());
  std::vector<ScenePrediction> kept(keep ? entries.size() : 0);
  parallel_for(entries.size(), cfg.threads, [&](std::size_t i) {
    auto p = predict_scene(dataset / entries[i].name, entries[i].name, cfg.pipeline);
    write_scene_prediction(p, out / entries[i].name);
    if (keep) kept[i] = std::move(p);
  });
  std::vector<std::string> names;
  for (const auto& e : entries) names.push_back(e.name);
  write_prediction_index(out, names, {{"pipeline", to_json(cfg.pipeline)}});
  return kept;
}

}  // namespace mvtrans::app
