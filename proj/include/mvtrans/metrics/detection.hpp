#pragma once

// Average precision for 3D boxes and instance masks, pooled over scenes.

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "mvtrans/core/box.hpp"
#include "mvtrans/core/tensor.hpp"
#include "mvtrans/metrics/iou.hpp"

namespace mvtrans::metrics {

inline constexpr double kBoxIouThreshold = 0.25;
inline constexpr double kMaskIouThreshold = 0.5;

using Warnings = std::vector<std::string>;

struct ScoredBox {
  double score = 0;
  OrientedBox3 box;
};

struct SceneBoxes {
  std::vector<ScoredBox> detections;
  std::vector<OrientedBox3> gts;
};

/// One prediction in ranked order and whether it was a true positive.
struct RankedHit {
  double score = 0;
  bool hit = false;
};

/// A true-positive pair; `scene` indexes the input list.
struct Match {
  std::size_t scene = 0, prediction = 0, gt = 0;
  double overlap = 0;
};

struct DetectionMetrics {
  double map_3d = 0;
  double mean_iou_3d = 0;  // over true-positive pairs
  std::size_t true_positives = 0, detections = 0, gts = 0;
  std::vector<RankedHit> ranked;
  std::vector<Match> matches;
};

struct ScoredMask {
  double score = 0;
  Mask mask;
};

struct SceneMasks {
  std::vector<ScoredMask> predictions;
  std::vector<Mask> gts;
};

struct SegMetrics {
  double map = 0;
  double iou = 0;  // mean over matched pairs
  std::size_t matched = 0, gts = 0;
  std::vector<RankedHit> ranked;
  std::vector<double> pair_ious;
};

/// All-points interpolated AP: precision is replaced by its running maximum
/// from the right and integrated over recall steps. `tp` is in descending
/// score order.
inline double average_precision(const std::vector<bool>& tp, std::size_t n_gt) {
  if (n_gt == 0 || tp.empty()) return 0.0;
  std::vector<double> precision, recall;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < tp.size(); ++i) {
    hits += tp[i];
    precision.push_back(static_cast<double>(hits) / static_cast<double>(i + 1));
    recall.push_back(static_cast<double>(hits) / static_cast<double>(n_gt));
  }
  for (std::size_t i = precision.size(); i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double ap = 0, prev_recall = 0;
  for (std::size_t i = 0; i < tp.size(); ++i) {
    if (recall[i] > prev_recall) ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

namespace detail {

struct Candidate {
  double score;
  std::size_t scene, index;
};

/// Pooled detections in descending score; ties keep scene then index order.
template <class Scenes, class Get>
std::vector<Candidate> ranked(const Scenes& scenes, Get predictions) {
  std::vector<Candidate> out;
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    const auto& p = predictions(scenes[s]);
    for (std::size_t i = 0; i < p.size(); ++i) out.push_back({p[i].score, s, i});
  }
  std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  return out;
}

/// Greedy matching in score order: each prediction takes the unmatched
/// ground truth of highest overlap and is a hit if that overlap exceeds the
/// threshold (strictly).
template <class Scenes, class Get, class Overlap>
std::pair<std::vector<RankedHit>, std::vector<Match>> match(const Scenes& scenes, Get predictions,
                                                            Overlap overlap, double threshold) {
  std::vector<std::vector<bool>> taken(scenes.size());
  for (std::size_t s = 0; s < scenes.size(); ++s) taken[s].assign(scenes[s].gts.size(), false);
  std::vector<RankedHit> ranked_hits;
  std::vector<Match> matches;
  for (const auto& c : ranked(scenes, predictions)) {
    const auto& scene = scenes[c.scene];
    double best = 0;
    std::size_t best_j = scene.gts.size();
    for (std::size_t j = 0; j < scene.gts.size(); ++j) {
      if (taken[c.scene][j]) continue;
      const double o = overlap(predictions(scene)[c.index], scene.gts[j]);
      if (o > best) best = o, best_j = j;
    }
    const bool hit = best_j < scene.gts.size() && best > threshold;
    if (hit) {
      taken[c.scene][best_j] = true;
      matches.push_back({c.scene, c.index, best_j, best});
    }
    ranked_hits.push_back({c.score, hit});
  }
  return {ranked_hits, matches};
}

inline std::vector<bool> hit_flags(const std::vector<RankedHit>& ranked) {
  std::vector<bool> tp;
  for (const auto& r : ranked) tp.push_back(r.hit);
  return tp;
}

/// Merges per-part ranked lists (parts in order) into one descending list;
/// equal scores keep part order, matching a single pooled ranking.
inline std::vector<RankedHit> merge_ranked(const std::vector<const std::vector<RankedHit>*>& parts) {
  std::vector<RankedHit> out;
  for (const auto* p : parts) out.insert(out.end(), p->begin(), p->end());
  std::stable_sort(out.begin(), out.end(), [](const RankedHit& a, const RankedHit& b) { return a.score > b.score; });
  return out;
}

inline double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace detail

/// Single-class 3D mAP at IoU > threshold. With no ground truth the result is
/// 0 and a warning is added.
inline DetectionMetrics detection_metrics(const std::vector<SceneBoxes>& scenes, double threshold = kBoxIouThreshold,
                                          Warnings* warnings = nullptr) {
  DetectionMetrics m;
  for (const auto& s : scenes) {
    for (const auto& d : s.detections)
      require(std::isfinite(d.score), ErrorCode::InvalidArgument, "detection score is not finite");
    m.detections += s.detections.size();
    m.gts += s.gts.size();
  }
  if (m.gts == 0 && warnings) warnings->push_back("no ground-truth boxes; detection mAP defined as 0");
  auto [ranked, matches] = detail::match(
      scenes, [](const SceneBoxes& s) -> const std::vector<ScoredBox>& { return s.detections; },
      [](const ScoredBox& d, const OrientedBox3& g) { return iou_obb(d.box, g); }, threshold);
  m.map_3d = average_precision(detail::hit_flags(ranked), m.gts);
  std::vector<double> ious;
  for (const auto& x : matches) ious.push_back(x.overlap);
  m.true_positives = ious.size();
  m.mean_iou_3d = detail::mean(ious);
  m.ranked = std::move(ranked);
  m.matches = std::move(matches);
  return m;
}

/// Combines results computed on disjoint parts of an evaluation set. The
/// result equals evaluating the concatenated parts at once, except that
/// `matches` keep the scene indices of their part.
inline DetectionMetrics pool(const std::vector<DetectionMetrics>& parts) {
  DetectionMetrics m;
  std::vector<const std::vector<RankedHit>*> lists;
  std::vector<double> ious;
  for (const auto& p : parts) {
    m.detections += p.detections;
    m.gts += p.gts;
    lists.push_back(&p.ranked);
    for (const auto& x : p.matches) ious.push_back(x.overlap);
    m.matches.insert(m.matches.end(), p.matches.begin(), p.matches.end());
  }
  m.ranked = detail::merge_ranked(lists);
  m.map_3d = average_precision(detail::hit_flags(m.ranked), m.gts);
  m.true_positives = ious.size();
  m.mean_iou_3d = detail::mean(ious);
  return m;
}

inline double map_3d(const std::vector<SceneBoxes>& scenes, double threshold = kBoxIouThreshold,
                     Warnings* warnings = nullptr) {
  return detection_metrics(scenes, threshold, warnings).map_3d;
}

inline double mask_iou(const Mask& a, const Mask& b) {
  require(a.shape() == b.shape(), ErrorCode::ShapeMismatch, "masks differ in size");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inter += a[i] && b[i];
    uni += a[i] || b[i];
  }
  return uni ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

/// Mask mAP at IoU > threshold (score-ordered greedy matching) and the mean
/// IoU of pairs formed by greedily pairing the highest-overlap masks.
inline SegMetrics seg_metrics(const std::vector<SceneMasks>& scenes, double threshold = kMaskIouThreshold,
                              Warnings* warnings = nullptr) {
  SegMetrics m;
  for (const auto& s : scenes) m.gts += s.gts.size();
  if (m.gts == 0 && warnings) warnings->push_back("no ground-truth masks; segmentation mAP defined as 0");
  auto ranked = detail::match(
      scenes, [](const SceneMasks& s) -> const std::vector<ScoredMask>& { return s.predictions; },
      [](const ScoredMask& p, const Mask& g) { return mask_iou(p.mask, g); }, threshold).first;
  m.map = average_precision(detail::hit_flags(ranked), m.gts);
  m.ranked = std::move(ranked);

  std::vector<double>& pair_ious = m.pair_ious;
  for (const auto& s : scenes) {
    struct Pair {
      double iou;
      std::size_t p, g;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < s.predictions.size(); ++i)
      for (std::size_t j = 0; j < s.gts.size(); ++j) {
        const double v = mask_iou(s.predictions[i].mask, s.gts[j]);
        if (v > 0) pairs.push_back({v, i, j});
      }
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.iou > b.iou; });
    std::vector<bool> used_p(s.predictions.size()), used_g(s.gts.size());
    for (const auto& pr : pairs) {
      if (used_p[pr.p] || used_g[pr.g]) continue;
      used_p[pr.p] = used_g[pr.g] = true;
      pair_ious.push_back(pr.iou);
    }
  }
  m.matched = pair_ious.size();
  m.iou = detail::mean(pair_ious);
  return m;
}

inline SegMetrics pool(const std::vector<SegMetrics>& parts) {
  SegMetrics m;
  std::vector<const std::vector<RankedHit>*> lists;
  for (const auto& p : parts) {
    m.gts += p.gts;
    lists.push_back(&p.ranked);
    m.pair_ious.insert(m.pair_ious.end(), p.pair_ious.begin(), p.pair_ious.end());
  }
  m.ranked = detail::merge_ranked(lists);
  m.map = average_precision(detail::hit_flags(m.ranked), m.gts);
  m.matched = m.pair_ious.size();
  m.iou = detail::mean(m.pair_ious);
  return m;
}

}  // namespace mvtrans::metrics
