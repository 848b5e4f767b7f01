#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>

#include "mvtrans/synthgen/annotation_io.hpp"
#include "mvtrans/synthgen/config.hpp"
#include "mvtrans/synthgen/dataset.hpp"
#include "mvtrans/synthgen/fps.hpp"
#include "tree_compare.hpp"

using namespace mvtrans;
using namespace mvtrans::synthgen;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mvtrans_test_synthgen_" + name);
  fs::remove_all(p);
  return p;
}

/// Horner evaluation, written independently of VesselProfile::radius.
double profile_radius(const VesselProfile& p, double h) {
  double r = 0;
  for (int k = 4; k >= 0; --k) r = r * h + p.poly[k];
  return r + p.amplitude * std::sin(p.frequency * h + p.phase);
}

/// Separating-axis test by projecting all 8 corners onto the 15 candidates.
bool sat_overlap(const OrientedBox3& a, const OrientedBox3& b, double tol) {
  std::vector<Vec3> axes;
  for (int i = 0; i < 3; ++i) {
    axes.push_back(a.rotation.col(i));
    axes.push_back(b.rotation.col(i));
    for (int j = 0; j < 3; ++j) {
      const Vec3 c = a.rotation.col(i).cross(b.rotation.col(j));
      if (c.norm() > 1e-9) axes.push_back(c.normalized());
    }
  }
  const auto va = box_vertices(a), vb = box_vertices(b);
  for (const auto& ax : axes) {
    double alo = 1e300, ahi = -1e300, blo = 1e300, bhi = -1e300;
    for (const auto& v : va) alo = std::min(alo, v.dot(ax)), ahi = std::max(ahi, v.dot(ax));
    for (const auto& v : vb) blo = std::min(blo, v.dot(ax)), bhi = std::max(bhi, v.dot(ax));
    if (std::min(ahi, bhi) - std::max(alo, blo) <= tol) return false;
  }
  return true;
}

Intrinsics small_camera() { return Intrinsics{100, 100, 39.5, 31.5, 80, 64}; }

TriMesh triangle_mesh(const Vec3& a, const Vec3& b, const Vec3& c) {
  TriMesh m;
  m.vertices = {a, b, c};
  const Vec3 n = (b - a).cross(c - a).normalized();
  m.normals = {n, n, n};
  m.triangles = {{0, 1, 2}};
  return m;
}

PlacedObject object_from_mesh(int id, TriMesh mesh) {
  PlacedObject o;
  o.id = id;
  o.mesh = std::move(mesh);
  o.obb = mesh_box(o.mesh, RigidTransform::identity());
  return o;
}

GenerationConfig small_generation(int views) {
  GenerationConfig c;
  c.views.count = views;
  c.views.width = 80;
  c.views.height = 64;
  return c;
}

}  // namespace

// ---------------------------------------------------------------- vessels

TEST(Vessel, ConstantProfileIsCylinder) {
  VesselProfile p;
  p.poly = {0.05, 0, 0, 0, 0};
  p.height = 0.1;
  const TriMesh m = revolve_profile(p, 24, 12);
  for (const auto& v : m.vertices) EXPECT_NEAR(std::hypot(v.x(), v.y()), 0.05, 1e-9);
  double zmax = 0;
  for (const auto& v : m.vertices) zmax = std::max(zmax, v.z());
  EXPECT_NEAR(zmax, 0.1, 1e-12);
}

TEST(Vessel, SameSeedIsBitIdentical) {
  const Vessel a = generate_vessel(77), b = generate_vessel(77);
  EXPECT_EQ(a.profile, b.profile);
  EXPECT_EQ(a.mesh, b.mesh);
  EXPECT_FALSE(generate_vessel(78).mesh == a.mesh);
}

TEST(Vessel, BatchRespectsMinimumRadius) {
  const VesselConfig cfg;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Vessel v = generate_vessel(seed, cfg);
    const int n = static_cast<int>(std::ceil(v.profile.height / 1e-3));
    for (int i = 0; i <= n; ++i) {
      const double h = std::min(v.profile.height, i * 1e-3);
      ASSERT_GE(profile_radius(v.profile, h), cfg.radius_min) << "seed " << seed << " h " << h;
    }
    for (const auto& p : v.mesh.vertices) ASSERT_GE(std::hypot(p.x(), p.y()), cfg.radius_min - 1e-12);
    ASSERT_EQ(v.mesh.vertices.size(), static_cast<std::size_t>(cfg.angular_segments * (cfg.vertical_segments + 1)));
  }
}

TEST(Vessel, NormalsPointOutward) {
  const Vessel v = generate_vessel(5);
  ASSERT_EQ(v.mesh.normals.size(), v.mesh.vertices.size());
  for (std::size_t i = 0; i < v.mesh.vertices.size(); ++i) {
    const Vec3& p = v.mesh.vertices[i];
    EXPECT_GT(v.mesh.normals[i].dot(Vec3(p.x(), p.y(), 0)), 0.0);
    EXPECT_NEAR(v.mesh.normals[i].norm(), 1.0, 1e-12);
  }
}

TEST(Vessel, ClosedBottomOpenTop) {
  const Vessel v = generate_vessel(9);
  const VesselConfig cfg;
  // Bottom fan has angular - 2 triangles, all on z = 0.
  int bottom = 0;
  for (const auto& t : v.mesh.triangles) {
    bool flat = true;
    for (int i : t) flat = flat && v.mesh.vertices[i].z() == 0.0;
    bottom += flat;
  }
  EXPECT_EQ(bottom, cfg.angular_segments - 2);
  EXPECT_EQ(v.mesh.triangles.size(),
            static_cast<std::size_t>(2 * cfg.angular_segments * cfg.vertical_segments + cfg.angular_segments - 2));
  EXPECT_FALSE(v.mesh.watertight);
}

TEST(Vessel, ImpossibleConfigExhausts) {
  VesselConfig cfg;
  cfg.radius_min = 0.05;
  cfg.base_radius_max = 0.03;
  cfg.max_attempts = 50;
  try {
    generate_vessel(1, cfg);
    FAIL() << "expected GenerationExhausted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GenerationExhausted);
  }
}

// ---------------------------------------------------------------- scenes

TEST(Scene, SingleObjectRestsOnTable) {
  SceneConfig cfg;
  cfg.max_transparent = 1;
  cfg.max_opaque = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SceneSpec s = assemble_scene(seed, cfg);
    ASSERT_EQ(s.objects.size(), 1u);
    double zmin = 1e9;
    for (const auto& v : box_vertices(s.objects[0].obb)) zmin = std::min(zmin, v.z());
    EXPECT_NEAR(zmin, 0.0, 1e-9);
    EXPECT_TRUE(s.objects[0].transparent);
  }
}

TEST(Scene, SameSeedIsIdentical) {
  EXPECT_EQ(assemble_scene(42), assemble_scene(42));
  EXPECT_FALSE(assemble_scene(42) == assemble_scene(43));
}

TEST(Scene, HundredScenesHaveNoInterpenetration) {
  const SceneConfig cfg;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SceneSpec s = assemble_scene(seed, cfg);
    std::size_t transparent = 0;
    for (const auto& o : s.objects) transparent += o.transparent;
    ASSERT_GE(transparent, 1u);
    ASSERT_LE(transparent, 7u);
    ASSERT_LE(s.objects.size() - transparent, 8u);
    for (std::size_t i = 0; i < s.objects.size(); ++i) {
      EXPECT_EQ(s.objects[i].id, static_cast<int>(i));
      s.objects[i].material.validate();
      for (const auto& v : box_vertices(s.objects[i].obb)) {
        EXPECT_GE(v.z(), -1e-9);
        EXPECT_LE(std::abs(v.x()), 0.5 * cfg.table_extent.x() + 1e-12);
        EXPECT_LE(std::abs(v.y()), 0.5 * cfg.table_extent.y() + 1e-12);
      }
      for (std::size_t j = i + 1; j < s.objects.size(); ++j)
        ASSERT_FALSE(sat_overlap(s.objects[i].obb, s.objects[j].obb, 1e-6)) << "seed " << seed;
    }
    EXPECT_LT(s.z_min, s.z_max);
  }
}

TEST(Scene, SatAgreesWithBruteForce) {
  Rng rng(3);
  for (int i = 0; i < 300; ++i) {
    auto random_box = [&] {
      OrientedBox3 b;
      b.rotation = Eigen::Quaterniond(rng.normal(), rng.normal(), rng.normal(), rng.normal())
                       .normalized()
                       .toRotationMatrix();
      b.translation = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
      b.size = Vec3(rng.uniform(0.2, 1.2), rng.uniform(0.2, 1.2), rng.uniform(0.2, 1.2));
      return b;
    };
    const OrientedBox3 a = random_box(), b = random_box();
    EXPECT_EQ(boxes_interpenetrate(a, b), sat_overlap(a, b, 1e-6));
  }
}

TEST(Scene, CrowdedTableThrows) {
  SceneConfig cfg;
  cfg.table_extent = Vec2(0.01, 0.01);
  try {
    assemble_scene(1, cfg);
    FAIL() << "expected PlacementExhausted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PlacementExhausted);
  }
}

// ---------------------------------------------------------------- viewpoints

TEST(Viewpoints, SingleStationLooksDownAtCentre) {
  ViewConfig cfg;
  cfg.count = 1;
  const ViewpointGrid g = sample_viewpoints(4, cfg);
  ASSERT_EQ(g.stations.size(), 1u);
  EXPECT_EQ(g.azimuths, 1);
  EXPECT_EQ(g.elevations, 1);
  const auto& s = g.stations[0];
  EXPECT_NEAR(s.elevation, cfg.elevation_max_deg * M_PI / 180, 1e-12);
  const Vec3 forward = s.left.world_from_camera.rotation().col(2);
  EXPECT_NEAR(forward.dot((cfg.center - s.left.center()).normalized()), 1.0, 1e-12);
  EXPECT_LT(forward.z(), 0.0);
}

TEST(Viewpoints, GridConstraintsHold) {
  const ViewConfig cfg;
  const ViewpointGrid g = sample_viewpoints(11, cfg);
  ASSERT_EQ(g.stations.size(), 57u);
  EXPECT_EQ(g.azimuths, 19);
  EXPECT_EQ(g.elevations, 3);
  for (const auto& s : g.stations) {
    const Vec3 c = s.left.center() - cfg.center;
    EXPECT_GT(c.z(), 0.0);
    EXPECT_GT(s.elevation, 0.0);
    EXPECT_GE(c.norm(), cfg.radius_min - 1e-12);
    EXPECT_LE(c.norm(), cfg.radius_max + 1e-12);
    EXPECT_NEAR(c.norm(), s.radius, 1e-12);
    EXPECT_NEAR(s.left.world_from_camera.rotation().col(2).dot(-c.normalized()), 1.0, 1e-12);
    EXPECT_NEAR(s.right.world_from_camera.rotation().col(2).dot((cfg.center - s.right.center()).normalized()), 1.0,
                1e-12);
  }
}

TEST(Viewpoints, StereoBaselineAlongLeftX) {
  const ViewConfig cfg;
  for (const auto& s : sample_viewpoints(12, cfg).stations) {
    const Vec3 expect = s.left.center() + cfg.baseline * s.left.world_from_camera.rotation().col(0);
    EXPECT_LE((s.right.center() - expect).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Viewpoints, FactorizationIsNearSquare) {
  EXPECT_EQ(grid_factorization(57), std::make_pair(19, 3));
  EXPECT_EQ(grid_factorization(16), std::make_pair(4, 4));
  EXPECT_EQ(grid_factorization(7), std::make_pair(7, 1));
}

// ---------------------------------------------------------------- rasterizer

TEST(Rasterizer, FlatTriangleDepthIsExact) {
  const Intrinsics k = small_camera();
  RasterTarget t(k);
  const TriMesh tri = triangle_mesh(Vec3(-1, -1, 2), Vec3(1, -1, 2), Vec3(0, 1, 2));
  draw_mesh(t, k, tri, RigidTransform::identity(), 5);
  int covered = 0;
  for (int y = 0; y < k.height; ++y)
    for (int x = 0; x < k.width; ++x)
      if (t.label(y, x) == 5) {
        ++covered;
        EXPECT_EQ(t.depth(y, x), 2.0);
      }
  EXPECT_GT(covered, 100);
}

TEST(Rasterizer, TiltedTriangleMatchesRayPlane) {
  const Intrinsics k = small_camera();
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    RasterTarget t(k);
    std::array<Vec3, 3> v;
    for (auto& p : v) p = Vec3(rng.uniform(-0.6, 0.6), rng.uniform(-0.5, 0.5), rng.uniform(1.0, 3.0));
    draw_mesh(t, k, triangle_mesh(v[0], v[1], v[2]), RigidTransform::identity(), 2);
    const Vec3 n = (v[1] - v[0]).cross(v[2] - v[0]);
    for (int y = 0; y < k.height; ++y)
      for (int x = 0; x < k.width; ++x) {
        if (t.label(y, x) != 2) continue;
        const Vec3 ray = pixel_ray(k, Vec2(x, y));
        const double s = n.dot(v[0]) / n.dot(ray);
        EXPECT_NEAR(t.depth(y, x), s * ray.z(), 1e-6);
      }
  }
}

TEST(Rasterizer, NearerTriangleWinsAndFullIgnoresOcclusion) {
  SceneSpec scene;
  scene.table_extent = Vec2(1e-3, 1e-3);
  scene.objects.push_back(object_from_mesh(0, triangle_mesh(Vec3(-2, -2, 2), Vec3(2, -2, 2), Vec3(0, 2, 2))));
  scene.objects.push_back(object_from_mesh(1, triangle_mesh(Vec3(-0.2, -0.2, 1), Vec3(0.2, -0.2, 1), Vec3(0, 0.2, 1))));
  const CameraView view{small_camera(), RigidTransform::identity(), std::nullopt};
  const RasterOutput r = rasterize_view(scene, view);
  const std::size_t h = 64, w = 80;
  int overlap = 0;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const bool far = r.full(0, y, x), near = r.full(1, y, x);
      if (near) {
        EXPECT_EQ(r.visible(y, x), 1 + kFirstObjectLabel);
        EXPECT_DOUBLE_EQ(r.depth(y, x), 1.0);
      } else if (far) {
        EXPECT_EQ(r.visible(y, x), kFirstObjectLabel);
      }
      overlap += near && far;
    }
  EXPECT_GT(overlap, 50);
}

TEST(Rasterizer, SphereDepthWithinChordSag) {
  const double radius = 0.5;
  const int rings = 24, segments = 48;
  const TriMesh sphere = make_uv_sphere(radius, rings, segments);
  // Largest angular edge over all triangles, then the sag of that chord.
  double alpha = 0;
  for (const auto& t : sphere.triangles)
    for (int i = 0; i < 3; ++i) {
      const Vec3 a = sphere.vertices[t[i]].normalized(), b = sphere.vertices[t[(i + 1) % 3]].normalized();
      alpha = std::max(alpha, std::acos(std::clamp(a.dot(b), -1.0, 1.0)));
    }
  const double sag = radius * (1 - std::cos(alpha / 2));

  const Intrinsics k{120, 120, 39.5, 31.5, 80, 64};
  const Vec3 centre(0.05, -0.03, 2.0);
  RasterTarget t(k);
  draw_mesh(t, k, sphere, RigidTransform(Mat3::Identity(), centre), 3);
  int tested = 0;
  for (int y = 0; y < k.height; ++y)
    for (int x = 0; x < k.width; ++x) {
      if (t.label(y, x) != 3) continue;
      const Vec3 d = pixel_ray(k, Vec2(x, y)).normalized();
      const double b = d.dot(centre), disc = b * b - (centre.squaredNorm() - radius * radius);
      if (disc <= 0) continue;
      const double s = b - std::sqrt(disc);
      const Vec3 hit = s * d;
      // Keep away from grazing rays, where depth error is amplified.
      if ((hit - centre).normalized().dot(-d) < 0.7) continue;
      ++tested;
      EXPECT_LT(std::abs(t.depth(y, x) - hit.z()), 2 * sag);
    }
  EXPECT_GT(tested, 200);
}

TEST(Rasterizer, GeneratedViewsAreConsistent) {
  const GenerationConfig cfg = small_generation(6);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto [scene, grid] = make_scene(seed, cfg);
    for (const auto& st : grid.stations) {
      const RasterOutput r = rasterize_view(scene, st.left);
      const std::size_t h = r.depth.dim(0), w = r.depth.dim(1);
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
          const int label = r.visible(y, x);
          if (label >= kFirstObjectLabel) ASSERT_TRUE(r.full(label - kFirstObjectLabel, y, x));
          if (label == kBackgroundLabel) {
            EXPECT_EQ(r.depth(y, x), 0.0);
            continue;
          }
          ASSERT_GT(r.depth(y, x), 0.0);
          const Vec3 n(r.normals(y, x, 0), r.normals(y, x, 1), r.normals(y, x, 2));
          EXPECT_NEAR(n.norm(), 1.0, 1e-6);
          EXPECT_LE(n.dot(pixel_ray(st.left.intrinsics, Vec2(x, y))), 1e-6);
        }
    }
  }
}

// ---------------------------------------------------------------- annotations

TEST(Annotations, FramesAreMutuallyConsistent) {
  const GenerationConfig cfg = small_generation(4);
  const SceneAnnotations a = generate_scene(21, cfg);
  for (const auto& rec : a.records) {
    const Intrinsics& k = rec.station.left.intrinsics;
    for (const auto& inst : rec.instances) {
      const RigidTransform l2c = RigidTransform::from_matrix(inst.local_to_camera);
      for (int c = 0; c < 8; ++c) {
        EXPECT_LE((l2c.apply(inst.vertices_local[c]) - inst.vertices_camera[c]).norm(), 1e-12);
        EXPECT_LE((project(k, inst.vertices_camera[c]) - inst.vertices_image[c]).norm(), 1e-9);
      }
      EXPECT_LE(inst.visible_pixels, inst.full_pixels);
      EXPECT_TRUE(inst.covariance.isApprox(inst.covariance.transpose(), 1e-12));
    }
  }
}

TEST(Annotations, RowRoundTrip) {
  const SceneAnnotations a = generate_scene(3, small_generation(1));
  for (const auto& inst : a.records[0].instances) {
    const auto row = inst.to_row();
    EXPECT_EQ(InstanceAnnotation::from_row(row.data()), inst);
  }
}

TEST(Annotations, DiskMaskHeatmapVariance) {
  const double rho = 24.0;
  const Intrinsics k{200, 200, 79.5, 63.5, 160, 128};
  Mask disk({128, 160}, 0);
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 160; ++x) disk(y, x) = std::hypot(x - 80.0, y - 64.0) <= rho;
  const Mat2 cov = instances::mask_field_covariance(disk);
  const double expect = rho * rho / 4 / (instances::kFieldStride * instances::kFieldStride);
  EXPECT_NEAR(cov(0, 0), expect, 0.05 * expect);
  EXPECT_NEAR(cov(1, 1), expect, 0.05 * expect);
  EXPECT_NEAR(cov(0, 1), 0.0, 0.01 * expect);
  (void)k;
}

TEST(Annotations, OccludedInstanceIsSkipped) {
  SceneSpec scene;
  scene.objects.push_back(object_from_mesh(0, make_box_mesh(Vec3(0.1, 0.1, 0.1))));
  scene.objects.push_back(object_from_mesh(1, make_box_mesh(Vec3(0.1, 0.1, 0.1))));
  scene.objects[1].obb.translation = Vec3(0.05, 0, 0.05);
  const CameraView view{small_camera(), look_at(Vec3(0, -1, 0.5), Vec3(0, 0, 0)), std::nullopt};
  LabelMap visible({64, 80}, kBackgroundLabel);
  for (int y = 20; y < 40; ++y)
    for (int x = 30; x < 50; ++x) visible(y, x) = kFirstObjectLabel;
  const instances::Heatmap hm = render_gt_heatmap(visible, scene, view);
  ASSERT_EQ(hm.skipped.size(), 1u);
  EXPECT_EQ(hm.skipped[0].id, 1);
  EXPECT_EQ(hm.blobs.size(), 1u);
}

TEST(Annotations, TwoInstanceHeatmapIsMaxOfSingles) {
  SceneSpec scene;
  for (int i = 0; i < 2; ++i) {
    scene.objects.push_back(object_from_mesh(i, make_box_mesh(Vec3(0.1, 0.1, 0.1))));
    scene.objects[i].obb.translation = Vec3(i == 0 ? -0.1 : 0.1, 0, 0.05);
  }
  const CameraView view{small_camera(), look_at(Vec3(0, -1, 0.5), Vec3(0, 0, 0)), std::nullopt};
  LabelMap both({64, 80}, kBackgroundLabel), a({64, 80}, kBackgroundLabel), b({64, 80}, kBackgroundLabel);
  for (int y = 20; y < 40; ++y)
    for (int x = 10; x < 70; ++x) {
      const int label = kFirstObjectLabel + (x >= 40);
      both(y, x) = label;
      (x < 40 ? a : b)(y, x) = label;
    }
  const auto hb = render_gt_heatmap(both, scene, view).grid;
  const auto ha = render_gt_heatmap(a, scene, view).grid;
  const auto hs = render_gt_heatmap(b, scene, view).grid;
  for (std::size_t i = 0; i < hb.size(); ++i) EXPECT_EQ(hb[i], std::max(ha[i], hs[i]));
}

// ---------------------------------------------------------------- FPS

TEST(Fps, EightVerticesReturnsAll) {
  TriMesh box;
  for (int c = 0; c < 8; ++c) box.vertices.push_back(Vec3(corner_sign(c, 0), 2 * corner_sign(c, 1), 3 * corner_sign(c, 2)));
  const auto kp = fps_keypoints(box, 8);
  std::set<std::array<double, 3>> got, want;
  for (const auto& v : kp) got.insert({v.x(), v.y(), v.z()});
  for (const auto& v : box.vertices) want.insert({v.x(), v.y(), v.z()});
  EXPECT_EQ(got, want);
}

TEST(Fps, CubeGivesAntipodalPair) {
  const TriMesh cube = make_box_mesh(Vec3(1, 1, 1));
  const auto kp = fps_keypoints(cube, 2);
  double best = 0;
  for (const auto& a : cube.vertices)
    for (const auto& b : cube.vertices) best = std::max(best, (a - b).norm());
  EXPECT_NEAR((kp[0] - kp[1]).norm(), best, 1e-12);
  EXPECT_NEAR(best, std::sqrt(3.0), 1e-12);
  EXPECT_EQ(kp[0], cube.vertices[0]);
}

TEST(Fps, SegmentGivesEndpoints) {
  TriMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(0.5, 0, 0), Vec3(1, 0, 0)};
  const auto kp = fps_keypoints(m, 2);
  EXPECT_EQ(kp[0], Vec3(0, 0, 0));
  EXPECT_EQ(kp[1], Vec3(1, 0, 0));
}

TEST(Fps, TooFewVerticesThrows) {
  TriMesh m;
  m.vertices = {Vec3::Zero(), Vec3::Ones()};
  try {
    fps_keypoints(m, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewVertices);
  }
}

TEST(Fps, MinPairwiseDistanceNonIncreasing) {
  const TriMesh m = generate_vessel(14).mesh;
  double prev = 1e300;
  for (std::size_t k = 2; k <= 40; ++k) {
    const auto kp = fps_keypoints(m, k);
    double d = 1e300;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) d = std::min(d, (kp[i] - kp[j]).norm());
    EXPECT_LE(d, prev + 1e-15);
    prev = d;
    // Prefix property: the first k-1 picks do not change.
    const auto shorter = fps_keypoints(m, k - 1);
    for (std::size_t i = 0; i + 1 < k; ++i) EXPECT_EQ(kp[i], shorter[i]);
  }
  std::set<std::array<double, 3>> all;
  for (const auto& v : fps_keypoints(m, m.vertices.size())) all.insert({v.x(), v.y(), v.z()});
  std::set<std::array<double, 3>> verts;
  for (const auto& v : m.vertices) verts.insert({v.x(), v.y(), v.z()});
  EXPECT_EQ(all, verts);
}

// ---------------------------------------------------------------- files

TEST(ArrayIo, RoundTripsEveryDtype) {
  const fs::path dir = scratch_dir("arrays");
  fs::create_directories(dir);
  Rng rng(1);
  Tensor<double, 2> d({3, 5});
  for (auto& v : d.values()) v = rng.normal();
  d[0] = -0.0;
  d[1] = 1e-310;
  Tensor<float, 3> f({2, 2, 2});
  for (auto& v : f.values()) v = static_cast<float>(rng.normal());
  Tensor<std::int32_t, 1> i({4});
  i[0] = -7, i[1] = 0, i[2] = 1 << 30, i[3] = -(1 << 30);
  Tensor<std::uint8_t, 2> u({0, 3});
  write_array(dir / "d.mvta", d);
  write_array(dir / "f.mvta", f);
  write_array(dir / "i.mvta", i);
  write_array(dir / "u.mvta", u);
  const auto d2 = read_array<double, 2>(dir / "d.mvta");
  EXPECT_EQ(d2, d);
  EXPECT_TRUE(std::signbit(d2[0]));
  EXPECT_EQ((read_array<float, 3>(dir / "f.mvta")), f);
  EXPECT_EQ((read_array<std::int32_t, 1>(dir / "i.mvta")), i);
  EXPECT_EQ((read_array<std::uint8_t, 2>(dir / "u.mvta")), u);
  // Header layout: magic, version 1, dtype 4, rank 2, then two u64 dims.
  std::ifstream in(dir / "d.mvta", std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ASSERT_EQ(bytes.size(), 4u + 2 + 1 + 1 + 16 + 15 * 8);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "MVTA");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5], 0);
  EXPECT_EQ(bytes[6], 4);
  EXPECT_EQ(bytes[7], 2);
  EXPECT_EQ(bytes[8], 3);
  EXPECT_EQ(bytes[16], 5);
  fs::remove_all(dir);
}

TEST(ArrayIo, CorruptFilesAreReported) {
  const fs::path dir = scratch_dir("corrupt");
  fs::create_directories(dir);
  Tensor<double, 2> d({4, 4}, 1.5);
  const fs::path p = dir / "depth.mvta";
  write_array(p, d);
  auto expect_error = [&](ErrorCode code, auto&& read) {
    try {
      read();
      FAIL() << "expected " << to_string(code);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code);
      EXPECT_NE(std::string(e.what()).find(p.string()), std::string::npos) << e.what();
    }
  };
  fs::resize_file(p, fs::file_size(p) - 3);
  expect_error(ErrorCode::FormatError, [&] { read_array<double, 2>(p); });
  fs::resize_file(p, 6);
  expect_error(ErrorCode::FormatError, [&] { read_array<double, 2>(p); });

  write_array(p, d);
  expect_error(ErrorCode::FormatError, [&] { read_array<float, 2>(p); });
  expect_error(ErrorCode::FormatError, [&] { read_array<double, 3>(p); });
  {
    std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(4);
    const char v = 9;
    f.write(&v, 1);
  }
  expect_error(ErrorCode::VersionMismatch, [&] { read_array<double, 2>(p); });
  {
    std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXX", 4);
  }
  expect_error(ErrorCode::FormatError, [&] { read_array<double, 2>(p); });
  try {
    read_array<double, 2>(dir / "missing.mvta");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
  fs::remove_all(dir);
}

TEST(AnnotationIo, RoundTripIsBitExact) {
  const fs::path dir = scratch_dir("roundtrip");
  const SceneAnnotations a = generate_scene(17, small_generation(3));
  write_annotations(a, dir);
  const SceneAnnotations b = read_annotations(dir);
  EXPECT_EQ(b.scene, a.scene);
  EXPECT_EQ(b.azimuths, a.azimuths);
  EXPECT_EQ(b.elevations, a.elevations);
  ASSERT_EQ(b.records.size(), a.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) EXPECT_TRUE(b.records[i] == a.records[i]) << "view " << i;
  fs::remove_all(dir);
}

TEST(AnnotationIo, TruncatedViewFileNamesTheFile) {
  const fs::path dir = scratch_dir("truncated");
  write_annotations(generate_scene(2, small_generation(1)), dir);
  const fs::path victim = dir / "views/000/visible.mvta";
  ASSERT_TRUE(fs::exists(victim));
  fs::resize_file(victim, fs::file_size(victim) / 2);
  try {
    read_annotations(dir);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FormatError);
    EXPECT_NE(std::string(e.what()).find("visible.mvta"), std::string::npos) << e.what();
  }
  fs::remove_all(dir);
}

TEST(AnnotationIo, ManifestVersionIsChecked) {
  const fs::path dir = scratch_dir("version");
  write_annotations(generate_scene(2, small_generation(1)), dir);
  std::ifstream in(dir / kManifestName);
  Json j = Json::parse(in);
  in.close();
  j["version"] = 99;
  std::ofstream(dir / kManifestName) << j.dump();
  try {
    read_manifest(dir);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::VersionMismatch);
  }
  std::ofstream(dir / kManifestName) << "{ not json";
  try {
    read_manifest(dir);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FormatError);
    EXPECT_NE(std::string(e.what()).find("manifest.json"), std::string::npos);
  }
  fs::remove_all(dir);
}

TEST(AnnotationIo, FullGridManifestListsFiftySevenViews) {
  const fs::path dir = scratch_dir("grid57");
  GenerationConfig cfg = small_generation(57);
  write_annotations(generate_scene(8, cfg), dir);
  std::ifstream in(dir / kManifestName);
  const Json j = Json::parse(in);
  EXPECT_EQ(j.at("views").size(), 57u);
  EXPECT_EQ(j.at("grid").at("azimuths"), 19);
  EXPECT_EQ(j.at("grid").at("elevations"), 3);
  fs::remove_all(dir);
}

// ---------------------------------------------------------------- datasets

TEST(Dataset, CountsScenesAndViewBundles) {
  const fs::path dir = scratch_dir("counts");
  GenerationConfig cfg = small_generation(5);
  cfg.scenes = 2;
  const DatasetSummary s = generate_dataset(cfg, dir);
  EXPECT_EQ(s.generated(), 2);
  int manifests = 0, bundles = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    manifests += e.path().filename() == kManifestName;
    bundles += e.is_directory() && e.path().parent_path().filename() == "views";
  }
  EXPECT_EQ(manifests, 2);
  EXPECT_EQ(bundles, 10);
  std::ifstream in(dir / kSummaryName);
  const Json j = Json::parse(in);
  EXPECT_EQ(j.at("scenes_generated"), 2);
  EXPECT_EQ(j.at("view_bundles"), 10);
  const auto index = read_dataset_index(dir);
  ASSERT_EQ(index.size(), 2u);
  EXPECT_EQ(index[1].name, "scene_0001");
  fs::remove_all(dir);
}

TEST(Dataset, RegenerationIsByteIdenticalAcrossThreadCounts) {
  const fs::path a = scratch_dir("det_a"), b = scratch_dir("det_b");
  GenerationConfig cfg = small_generation(3);
  cfg.scenes = 3;
  cfg.seed = 99;
  generate_dataset(cfg, a);
  cfg.threads = 3;
  generate_dataset(cfg, b);
  EXPECT_EQ(mvtrans::testing::tree_difference(a, b), "");
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Dataset, SplitsFollowBenchmarkRatio) {
  const auto shares = syntodd_splits();
  auto count = [](const std::vector<std::string>& v, const std::string& s) {
    return std::count(v.begin(), v.end(), s);
  };
  const auto full = assign_splits(1996, shares);
  EXPECT_EQ(count(full, "train"), 1575);
  EXPECT_EQ(count(full, "val"), 421);
  const auto ten = assign_splits(10, shares);
  EXPECT_EQ(count(ten, "train"), 8);  // 7.89 rounds up
  EXPECT_EQ(count(ten, "val"), 2);
  EXPECT_EQ(ten.front(), "train");
  EXPECT_EQ(ten.back(), "val");
  const auto one = assign_splits(1, shares);
  EXPECT_EQ(one, std::vector<std::string>{"train"});
}

TEST(Config, JsonRoundTripAndUnknownKeys) {
  GenerationConfig c;
  c.seed = 123456789012345ull;
  c.scenes = 4;
  c.views.count = 9;
  c.scene.vessel.angular_segments = 16;
  c.splits = syntodd_splits();
  GenerationConfig d;
  from_json(to_json(c), d);
  EXPECT_EQ(to_json(d), to_json(c));
  EXPECT_EQ(d.splits, c.splits);

  GenerationConfig preset;
  from_json(Json{{"preset", "syntodd-mini"}}, preset);
  EXPECT_EQ(preset.splits, syntodd_splits());

  for (const Json& bad : {Json{{"sceens", 3}}, Json{{"views", {{"radius", 1.0}}}},
                          Json{{"scene", {{"vessel", {{"height", 0.1}}}}}}, Json{{"preset", "full"}}}) {
    GenerationConfig e;
    try {
      from_json(bad, e);
      FAIL() << bad.dump();
    } catch (const Error& err) {
      EXPECT_EQ(err.code(), ErrorCode::FormatError);
    }
  }
}
