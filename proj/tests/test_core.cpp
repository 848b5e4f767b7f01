#include <gtest/gtest.h>

#include "mvtrans/core/box.hpp"
#include "mvtrans/core/geometry.hpp"
#include "mvtrans/core/rng.hpp"
#include "mvtrans/core/sampling.hpp"
#include "test_util.hpp"

using namespace mvtrans;
using mvtrans::testing::random_rotation;
using mvtrans::testing::random_transform;

namespace {

Intrinsics square_camera() { return Intrinsics{100, 100, 50, 50, 101, 101}; }

}  // namespace

TEST(Compose, IdentityIsNeutral) {
  Rng rng(1);
  const RigidTransform t = random_transform(rng);
  const RigidTransform c = compose(RigidTransform::identity(), t);
  EXPECT_EQ(c.rotation(), t.rotation());
  EXPECT_EQ(c.translation(), t.translation());
}

TEST(Compose, InverseGivesIdentity) {
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const RigidTransform t = random_transform(rng);
    const RigidTransform c = compose(t, t.inverse());
    EXPECT_LT((c.rotation() - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(c.translation().cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Compose, QuarterTurnsAddUp) {
  // Rz(90) * Rz(90), multiplied out by hand: [[0,-1],[1,0]]^2 = -I in the xy block.
  Mat3 expected;
  expected << -1, 0, 0, 0, -1, 0, 0, 0, 1;
  const RigidTransform q(rot_z(M_PI / 2), Vec3::Zero());
  EXPECT_LT((compose(q, q).rotation() - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Compose, MapsThroughBothTransforms) {
  Rng rng(3);
  const RigidTransform a = random_transform(rng), b = random_transform(rng);
  const Vec3 x(0.3, -1.2, 2.0);
  EXPECT_LT((compose(a, b).apply(x) - a.apply(b.apply(x))).norm(), 1e-12);
}

TEST(Compose, IsAssociative) {
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const RigidTransform a = random_transform(rng), b = random_transform(rng),
                         c = random_transform(rng);
    const RigidTransform l = compose(compose(a, b), c), r = compose(a, compose(b, c));
    EXPECT_LT((l.rotation() - r.rotation()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((l.translation() - r.translation()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(RigidTransform, RejectsNonRotation) {
  Mat3 m = Mat3::Identity();
  m(0, 0) = -1;  // reflection
  EXPECT_THROW(RigidTransform(m, Vec3::Zero()), Error);
}

TEST(Project, OpticalAxisHitsPrincipalPoint) {
  const Vec2 p = project(square_camera(), Vec3(0, 0, 1));
  EXPECT_DOUBLE_EQ(p.x(), 50);
  EXPECT_DOUBLE_EQ(p.y(), 50);
}

TEST(Project, OffAxisPoint) {
  // 100 * 1 / 2 + 50 = 100
  const Vec2 p = project(square_camera(), Vec3(1, 0, 2));
  EXPECT_DOUBLE_EQ(p.x(), 100);
  EXPECT_DOUBLE_EQ(p.y(), 50);
}

TEST(Project, BehindCameraThrows) {
  try {
    project(square_camera(), Vec3(0, 0, -1));
    FAIL() << "expected NonPositiveDepth";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveDepth);
  }
}

TEST(Backproject, PrincipalPoint) {
  const Vec3 p = backproject(square_camera(), Vec2(50, 50), 2.0);
  EXPECT_EQ(p, Vec3(0, 0, 2));
}

TEST(Backproject, InvertsProjectOracle) {
  const Vec3 p = backproject(square_camera(), Vec2(100, 50), 2.0);
  EXPECT_NEAR((p - Vec3(1, 0, 2)).norm(), 0.0, 1e-15);
}

TEST(Backproject, RoundTripProperty) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Intrinsics k{rng.uniform(50, 800), rng.uniform(50, 800), rng.uniform(0, 639),
                       rng.uniform(0, 479), 640, 480};
    const Vec2 u(rng.uniform(-100, 740), rng.uniform(-100, 580));
    const double z = rng.uniform(0.01, 50);
    const Vec3 x = backproject(k, u, z);
    EXPECT_EQ(x.z(), z);
    EXPECT_LT((project(k, x) - u).norm(), 1e-9);
  }
}

TEST(Backproject, NonPositiveDepthThrows) {
  EXPECT_THROW(backproject(square_camera(), Vec2(1, 1), 0.0), Error);
}

TEST(Intrinsics, DownscaleKeepsPixelCentresAligned) {
  const Intrinsics k{120, 110, 79.5, 63.5, 160, 128};
  const Intrinsics s = k.downscaled(4);
  EXPECT_EQ(s.width, 40);
  EXPECT_EQ(s.height, 32);
  // Block j of the coarse grid is centred on fine pixel 4j + 1.5.
  const Vec3 x(0.1, -0.05, 1.3);
  const Vec2 fine = project(k, x), coarse = project(s, x);
  EXPECT_NEAR(coarse.x(), (fine.x() - 1.5) / 4.0, 1e-12);
  EXPECT_NEAR(coarse.y(), (fine.y() - 1.5) / 4.0, 1e-12);
  EXPECT_THROW(k.downscaled(3), Error);
}

TEST(BoxVertices, UnitCubeAtOrigin) {
  const auto v = box_vertices(OrientedBox3{});
  for (int k = 0; k < 8; ++k)
    for (int a = 0; a < 3; ++a) EXPECT_DOUBLE_EQ(std::abs(v[k][a]), 0.5);
  EXPECT_EQ(v[0], Vec3(-0.5, -0.5, -0.5));
  EXPECT_EQ(v[1], Vec3(-0.5, -0.5, 0.5));
  EXPECT_EQ(v[4], Vec3(0.5, -0.5, -0.5));
  EXPECT_EQ(v[7], Vec3(0.5, 0.5, 0.5));
}

TEST(BoxVertices, TranslationShiftsExactly) {
  OrientedBox3 b;
  const auto base = box_vertices(b);
  b.translation = Vec3(1.5, -2.0, 0.25);
  const auto moved = box_vertices(b);
  for (int k = 0; k < 8; ++k) EXPECT_EQ(moved[k], base[k] + b.translation);
}

TEST(BoxVertices, RotatedBoxMatchesMatrixOracle) {
  const OrientedBox3 b{rot_z(M_PI / 2), Vec3(0.1, 0.2, 0.3), Vec3(2, 1, 1)};
  const auto v = box_vertices(b);
  int k = 0;
  for (double sx : {-1.0, 1.0})
    for (double sy : {-1.0, 1.0})
      for (double sz : {-1.0, 1.0}) {
        Vec3 local(sx * 1.0, sy * 0.5, sz * 0.5);
        // Rz(90) sends (x, y, z) to (-y, x, z).
        const Vec3 expected = Vec3(-local.y(), local.x(), local.z()) + b.translation;
        EXPECT_LT((v[k++] - expected).norm(), 1e-12);
      }
}

TEST(BoxVertices, EquivariantUnderRigidMotion) {
  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    const OrientedBox3 b{random_rotation(rng), Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), 0),
                         Vec3(rng.uniform(0.1, 2), rng.uniform(0.1, 2), rng.uniform(0.1, 2))};
    const RigidTransform t = random_transform(rng);
    const auto lhs = box_vertices(transform_box(t, b));
    const auto rhs = box_vertices(b);
    for (int k = 0; k < 8; ++k) EXPECT_LT((lhs[k] - t.apply(rhs[k])).norm(), 1e-12);
  }
}

TEST(BilinearSample, NodeReturnsNodeValue) {
  Grid2<double> g({3, 4});
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<double>(i * i);
  const Sample s = bilinear_sample(g, Vec2(2, 1));
  EXPECT_TRUE(s.in_bounds);
  EXPECT_EQ(s.value, g(1, 2));
}

TEST(BilinearSample, MidpointIsAverage) {
  Grid2<double> g({1, 2});
  g(0, 0) = 0;
  g(0, 1) = 1;
  EXPECT_DOUBLE_EQ(bilinear_sample(g, Vec2(0.5, 0)).value, 0.5);
}

TEST(BilinearSample, OutOfBoundsFlagged) {
  Grid2<double> g({4, 4}, 7.0);
  const Sample s = bilinear_sample(g, Vec2(-5, -5));
  EXPECT_FALSE(s.in_bounds);
  EXPECT_EQ(s.value, 0.0);
  Grid3<double> g3({2, 4, 4}, 1.0);
  const VectorSample v = bilinear_sample(g3, Vec2(3.5, 0));
  EXPECT_FALSE(v.in_bounds);
  EXPECT_EQ(v.values, std::vector<double>({0.0, 0.0}));
}

TEST(BilinearSample, AffineFieldReproducedExactly) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = rng.uniform(-3, 3), b = rng.uniform(-3, 3), c = rng.uniform(-3, 3);
    Grid3<double> g({2, 9, 13});
    for (std::size_t y = 0; y < 9; ++y)
      for (std::size_t x = 0; x < 13; ++x) {
        g(0, y, x) = a * x + b * y + c;
        g(1, y, x) = -b * x + c * y + a;
      }
    for (int i = 0; i < 100; ++i) {
      const double u = rng.uniform(0, 12), v = rng.uniform(0, 8);
      const VectorSample s = bilinear_sample(g, Vec2(u, v));
      ASSERT_TRUE(s.in_bounds);
      EXPECT_NEAR(s.values[0], a * u + b * v + c, 1e-9);
      EXPECT_NEAR(s.values[1], -b * u + c * v + a, 1e-9);
    }
  }
}

TEST(LookAt, FacesTargetWithImageYDown) {
  const RigidTransform pose = look_at(Vec3(1, 0, 0.5), Vec3::Zero());
  EXPECT_TRUE(RigidTransform::is_rotation(pose.rotation(), 1e-12));
  const Vec3 fwd = pose.rotation().col(2);
  EXPECT_LT((fwd - (-Vec3(1, 0, 0.5)).normalized()).norm(), 1e-12);
  EXPECT_LT(pose.rotation().col(1).z(), 0.0);  // image down is world down-ish
}
