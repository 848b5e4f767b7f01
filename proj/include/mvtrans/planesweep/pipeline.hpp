#pragma once

#include <memory>
#include <vector>

#include "mvtrans/planesweep/features.hpp"
#include "mvtrans/planesweep/homography.hpp"
#include "mvtrans/planesweep/planes.hpp"
#include "mvtrans/planesweep/volume.hpp"

namespace mvtrans::planesweep {

struct PipelineOptions {
  const ContextExtractor* context = nullptr;  // defaults to ZeroContext
  const VolumeReducer* reducer = nullptr;     // defaults to SquaredDifferenceReducer
  /// Gain applied to the channel-mean score before the softmax over planes.
  double inverse_temperature = 2000.0;
};

struct RoughDepth {
  DepthMap depth;           // (H/scale, W/scale), metres
  GridVolume probability;   // (1, D, H/scale, W/scale)
};

/// One support view's contribution: warp, stack with the reference, reduce.
inline GridVolume support_matching_volume(const FeatureMap& ref_feats, const CameraView& ref,
                                          const CameraView& sup, const FeatureExtractor& extractor,
                                          const PlaneStack& planes, const VolumeReducer& reducer) {
  require(sup.image.has_value(), ErrorCode::InvalidArgument, "support view has no image");
  const FeatureMap sup_feats = extractor.extract(*sup.image);
  const Intrinsics ref_k = ref.intrinsics.downscaled(extractor.scale());
  const Intrinsics sup_k = sup.intrinsics.downscaled(extractor.scale());
  const RigidTransform sup_from_ref = compose(sup.camera_from_world(), ref.world_from_camera);
  std::vector<Mat3> homs;
  homs.reserve(planes.size());
  for (double z : planes.depths) homs.push_back(homography_for_plane(ref_k, sup_k, sup_from_ref, z));
  const WarpedVolume warped = warp_support_features(sup_feats, homs);
  return reducer.reduce(build_raw_matching_volume(ref_feats, warped.volume), &warped.valid);
}

/// extract -> warp per support -> raw volumes -> reduce -> view average ->
/// fuse context -> softmax over planes -> soft argmax.
inline RoughDepth rough_depth_pipeline(const MultiViewRig& rig, const PlaneStack& planes,
                                       const FeatureExtractor& extractor,
                                       const PipelineOptions& options = {}) {
  rig.validate();
  planes.validate();
  require(rig.reference.image.has_value(), ErrorCode::InvalidArgument, "reference view has no image");
  const ZeroContext zero_context;
  const SquaredDifferenceReducer default_reducer;
  const ContextExtractor& context = options.context ? *options.context : zero_context;
  const VolumeReducer& reducer = options.reducer ? *options.reducer : default_reducer;

  const FeatureMap ref_feats = extractor.extract(*rig.reference.image);
  std::vector<GridVolume> per_view;
  per_view.reserve(rig.supports.size());
  for (const auto& sup : rig.supports)
    per_view.push_back(
        support_matching_volume(ref_feats, rig.reference, sup, extractor, planes, reducer));
  const GridVolume matching = view_average_pool(per_view);
  const FeatureMap ctx = context.extract(*rig.reference.image, planes.size(), extractor.scale());
  const GridVolume cost = fuse_context(matching, ctx);
  RoughDepth out;
  out.probability = volume_to_probability(cost, options.inverse_temperature);
  out.depth = expected_depth(out.probability, planes);
  return out;
}

}  // namespace mvtrans::planesweep
