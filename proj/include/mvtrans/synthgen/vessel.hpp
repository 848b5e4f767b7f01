#pragma once

// Vessels as surfaces of revolution about the local z axis, base at z = 0.

#include <array>
#include <cmath>
#include <cstdint>

#include "mvtrans/core/error.hpp"
#include "mvtrans/core/mesh.hpp"
#include "mvtrans/core/rng.hpp"

namespace mvtrans::synthgen {

/// r(h) = a0 + a1 h + a2 h^2 + a3 h^3 + a4 h^4 + A sin(w h + phi), h in [0, height].
struct VesselProfile {
  std::array<double, 5> poly{0.05, 0, 0, 0, 0};
  double amplitude = 0.0;
  double frequency = 0.0;
  double phase = 0.0;
  double height = 0.1;
  double wall_thickness = 0.002;

  double radius(double h) const {
    double r = 0, hk = 1;
    for (double a : poly) {
      r += a * hk;
      hk *= h;
    }
    return r + amplitude * std::sin(frequency * h + phase);
  }
  double slope(double h) const {
    double d = 0, hk = 1;
    for (int k = 1; k < 5; ++k) {
      d += k * poly[k] * hk;
      hk *= h;
    }
    return d + amplitude * frequency * std::cos(frequency * h + phase);
  }

  /// Extremes of r over [0, height] sampled every `step` metres (endpoints included).
  std::pair<double, double> radius_range(double step = 1e-3) const {
    const int n = static_cast<int>(std::ceil(height / step));
    double lo = radius(0.0), hi = lo;
    for (int i = 1; i <= n; ++i) {
      const double r = radius(std::min(height, i * step));
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    return {lo, hi};
  }

  bool operator==(const VesselProfile&) const = default;
};

struct VesselConfig {
  double height_min = 0.06, height_max = 0.18;
  double base_radius_min = 0.02, base_radius_max = 0.045;
  double radius_min = 0.012;  // r(h) must stay at or above this
  double radius_max = 0.07;
  double linear_max = 0.15;      // |a1|, metres per metre
  double poly_max = 0.02;        // |a_k h_max^k| for k = 2..4
  double wave_amplitude_max = 0.006;
  double wave_cycles_max = 2.0;  // sinusoid periods over the height
  double wall_min = 0.0015, wall_max = 0.004;
  int angular_segments = 24;
  int vertical_segments = 12;
  int max_attempts = 1000;

  void validate() const {
    require(height_min > 0 && height_min <= height_max && base_radius_min > 0 &&
                base_radius_min <= base_radius_max && radius_min > 0 && radius_min < radius_max &&
                angular_segments >= 3 && vertical_segments >= 1 && max_attempts >= 1,
            ErrorCode::InvalidArgument, "invalid vessel config");
  }
};

/// Surface of revolution: rings of `angular` vertices at `vertical`+1 heights,
/// bottom closed by a fan over ring 0, top left open.
inline TriMesh revolve_profile(const VesselProfile& p, int angular, int vertical) {
  require(angular >= 3 && vertical >= 1, ErrorCode::InvalidArgument, "too few segments");
  TriMesh m;
  for (int i = 0; i <= vertical; ++i) {
    const double h = p.height * i / vertical;
    const double r = p.radius(h), dr = p.slope(h);
    for (int j = 0; j < angular; ++j) {
      const double th = 2 * M_PI * j / angular;
      const double c = std::cos(th), s = std::sin(th);
      m.vertices.emplace_back(r * c, r * s, h);
      m.normals.push_back(Vec3(c, s, -dr).normalized());
    }
  }
  auto idx = [&](int i, int j) { return i * angular + (j % angular); };
  for (int i = 0; i < vertical; ++i)
    for (int j = 0; j < angular; ++j) {
      m.triangles.push_back({idx(i, j), idx(i, j + 1), idx(i + 1, j + 1)});
      m.triangles.push_back({idx(i, j), idx(i + 1, j + 1), idx(i + 1, j)});
    }
  for (int j = 1; j + 1 < angular; ++j) m.triangles.push_back({idx(0, 0), idx(0, j + 1), idx(0, j)});
  m.watertight = false;
  return m;
}

inline VesselProfile sample_vessel_profile(Rng& rng, const VesselConfig& cfg) {
  cfg.validate();
  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    VesselProfile p;
    p.height = rng.uniform(cfg.height_min, cfg.height_max);
    p.poly[0] = rng.uniform(cfg.base_radius_min, cfg.base_radius_max);
    p.poly[1] = rng.uniform(-cfg.linear_max, cfg.linear_max);
    for (int k = 2; k <= 4; ++k) p.poly[k] = rng.uniform(-cfg.poly_max, cfg.poly_max) / std::pow(p.height, k);
    p.amplitude = rng.uniform(0.0, cfg.wave_amplitude_max);
    p.frequency = 2 * M_PI * rng.uniform(0.0, cfg.wave_cycles_max) / p.height;
    p.phase = rng.uniform(0.0, 2 * M_PI);
    p.wall_thickness = rng.uniform(cfg.wall_min, cfg.wall_max);
    const auto [lo, hi] = p.radius_range();
    if (lo >= cfg.radius_min && hi <= cfg.radius_max) return p;
  }
  fail(ErrorCode::GenerationExhausted, "no valid vessel profile after " + std::to_string(cfg.max_attempts) + " attempts");
}

struct Vessel {
  VesselProfile profile;
  TriMesh mesh;
};

inline Vessel generate_vessel(std::uint64_t seed, const VesselConfig& cfg = {}) {
  Rng rng(seed);
  Vessel v;
  v.profile = sample_vessel_profile(rng, cfg);
  v.mesh = revolve_profile(v.profile, cfg.angular_segments, cfg.vertical_segments);
  return v;
}

/// Closed cylinder or truncated cone (top_radius < radius) with flat caps.
inline TriMesh make_frustum(double radius, double top_radius, double height, int angular = 24) {
  VesselProfile p;
  p.poly = {radius, (top_radius - radius) / height, 0, 0, 0};
  p.height = height;
  TriMesh m = revolve_profile(p, angular, 1);
  // Top cap with its own centre vertex and upward normals.
  const int base = static_cast<int>(m.vertices.size());
  for (int j = 0; j < angular; ++j) {
    m.vertices.push_back(m.vertices[angular + j]);
    m.normals.push_back(Vec3::UnitZ());
  }
  m.vertices.emplace_back(0, 0, height);
  m.normals.push_back(Vec3::UnitZ());
  for (int j = 0; j < angular; ++j)
    m.triangles.push_back({base + angular, base + j, base + (j + 1) % angular});
  m.watertight = true;
  return m;
}

}  // namespace mvtrans::synthgen
