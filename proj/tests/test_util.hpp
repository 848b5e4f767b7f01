#pragma once

// Shared generators for the test suites.

#include "mvtrans/core/geometry.hpp"
#include "mvtrans/core/rng.hpp"

namespace mvtrans::testing {

inline Mat3 random_rotation(Rng& rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  q.normalize();
  return q.toRotationMatrix();
}

inline RigidTransform random_transform(Rng& rng, double extent = 2.0) {
  return RigidTransform(random_rotation(rng), Vec3(rng.uniform(-extent, extent),
                                                   rng.uniform(-extent, extent),
                                                   rng.uniform(-extent, extent)));
}

}  // namespace mvtrans::testing
