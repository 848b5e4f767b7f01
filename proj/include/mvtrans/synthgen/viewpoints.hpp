#pragma once

// Stereo camera stations on an upper-hemisphere grid around the scene centre.

#include <cmath>
#include <cstdint>
#include <vector>

#include "mvtrans/core/error.hpp"
#include "mvtrans/core/geometry.hpp"
#include "mvtrans/core/rng.hpp"

namespace mvtrans::synthgen {

struct ViewConfig {
  int count = 57;
  double radius_min = 0.7, radius_max = 1.1;
  double elevation_min_deg = 20.0, elevation_max_deg = 75.0;
  double baseline = 0.06;  // metres between left and right camera centres
  double hfov_deg = 60.0;
  int width = 160, height = 128;
  Vec3 center = Vec3::Zero();

  void validate() const {
    require(count >= 1, ErrorCode::InvalidArgument, "need at least one view");
    require(radius_min > 0 && radius_min <= radius_max, ErrorCode::InvalidArgument, "bad radius range");
    require(elevation_min_deg > 0 && elevation_min_deg <= elevation_max_deg && elevation_max_deg < 90,
            ErrorCode::InvalidArgument, "elevations must lie in (0, 90) degrees");
    require(baseline >= 0 && hfov_deg > 0 && hfov_deg < 180, ErrorCode::InvalidArgument,
            "bad baseline or field of view");
    require(width > 0 && height > 0 && width % 8 == 0 && height % 8 == 0, ErrorCode::BadScale,
            "resolution must be divisible by 8");
  }

  Intrinsics intrinsics() const {
    const double f = 0.5 * width / std::tan(0.5 * hfov_deg * M_PI / 180.0);
    return Intrinsics{f, f, 0.5 * (width - 1), 0.5 * (height - 1), width, height};
  }
};

struct ViewStation {
  int index = 0;
  double azimuth = 0, elevation = 0, radius = 0;  // radians, metres
  CameraView left, right;
};

struct ViewpointGrid {
  int azimuths = 0, elevations = 0;
  std::vector<ViewStation> stations;
};

/// count = azimuths * elevations with elevations the largest divisor of
/// count not exceeding sqrt(count); 57 gives 19 x 3.
inline std::pair<int, int> grid_factorization(int count) {
  int el = 1;
  for (int d = 1; d * d <= count; ++d)
    if (count % d == 0) el = d;
  return {count / el, el};
}

inline ViewpointGrid sample_viewpoints(std::uint64_t seed, const ViewConfig& cfg = {}) {
  cfg.validate();
  Rng rng(seed);
  ViewpointGrid grid;
  std::tie(grid.azimuths, grid.elevations) = grid_factorization(cfg.count);
  const Intrinsics k = cfg.intrinsics();
  const double el_lo = cfg.elevation_min_deg * M_PI / 180, el_hi = cfg.elevation_max_deg * M_PI / 180;
  const double az0 = rng.uniform(0, 2 * M_PI);
  for (int e = 0; e < grid.elevations; ++e) {
    // A single ring sits at the top of the range, closest to looking straight down.
    const double el = grid.elevations == 1 ? el_hi : el_lo + (el_hi - el_lo) * e / (grid.elevations - 1);
    for (int a = 0; a < grid.azimuths; ++a) {
      ViewStation s;
      s.index = static_cast<int>(grid.stations.size());
      s.azimuth = std::fmod(az0 + 2 * M_PI * a / grid.azimuths, 2 * M_PI);
      s.elevation = el;
      s.radius = rng.uniform(cfg.radius_min, cfg.radius_max);
      const Vec3 eye = cfg.center + s.radius * Vec3(std::cos(el) * std::cos(s.azimuth),
                                                    std::cos(el) * std::sin(s.azimuth), std::sin(el));
      const RigidTransform left = look_at(eye, cfg.center);
      const Vec3 right_eye = eye + cfg.baseline * left.rotation().col(0);
      s.left = CameraView{k, left, std::nullopt};
      s.right = CameraView{k, look_at(right_eye, cfg.center), std::nullopt};
      grid.stations.push_back(std::move(s));
    }
  }
  return grid;
}

}  // namespace mvtrans::synthgen
