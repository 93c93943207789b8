#include "lanekit/synth.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "lanekit/metrics.hpp"

namespace lanekit {
namespace {

namespace fs = std::filesystem;

TEST(GenerateScene, EmptySpecYieldsEmptyScene) {
  SceneSpec spec;
  spec.point_density = 0.0;
  const auto [cloud, truth] = generate_scene(spec);
  EXPECT_TRUE(cloud.points.empty());
  EXPECT_TRUE(truth.polylines.empty());
  EXPECT_TRUE(truth.point_labels.empty());
}

TEST(GenerateScene, CleanSolidLaneStaysInsideTheMarking) {
  SceneSpec spec;
  spec.point_density = 20.0;
  spec.lanes.push_back({{1.75, 0.0, 0.0, 0.0}, LaneClass::White, false, 1.0, 2.0});
  const auto [cloud, truth] = generate_scene(spec);
  ASSERT_EQ(truth.point_labels.size(), cloud.points.size());
  std::int64_t paint = 0;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    if (truth.point_labels[i] != LaneClass::White) continue;
    ++paint;
    EXPECT_LE(std::abs(cloud.points[i].y - 1.75), kMarkingHalfWidth + 1e-6);
    EXPECT_EQ(cloud.points[i].z, 0.0);
  }
  // no dropout, no jitter: the full paint budget is emitted
  // (density * painted length * marking width)
  EXPECT_EQ(paint, std::llround(20.0 * 40.0 * 2.0 * kMarkingHalfWidth));
}

TEST(GenerateScene, JitteredPaintObeysTheConstructionBound) {
  SceneSpec spec;
  spec.point_density = 30.0;
  spec.lateral_noise_sd = 0.05;
  spec.lanes.push_back({{-1.75, 0.01, 0.0, 0.0}, LaneClass::White, false, 1.0, 2.0});
  const auto [cloud, truth] = generate_scene(spec);
  const LaneSpec& lane = spec.lanes[0];
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    if (truth.point_labels[i] != LaneClass::White) continue;
    const double dist = std::abs(cloud.points[i].y - lane.eval(cloud.points[i].x));
    EXPECT_LE(dist, kMarkingHalfWidth + 4.0 * spec.lateral_noise_sd + 1e-6);
  }
}

TEST(GenerateScene, DashPatternLeavesGaps) {
  SceneSpec spec;
  spec.point_density = 40.0;
  spec.lanes.push_back({{0.0, 0.0, 0.0, 0.0}, LaneClass::White, true, 1.0, 2.0});
  const auto [cloud, truth] = generate_scene(spec);
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    if (truth.point_labels[i] != LaneClass::White) continue;
    EXPECT_LT(std::fmod(cloud.points[i].x, 3.0), 1.0 + 1e-9);
  }
}

TEST(GenerateScene, FixedSeedIsBitStable) {
  SceneSpec spec;
  spec.point_density = 15.0;
  spec.clutter_points = 50;
  spec.dropout = 0.3;
  spec.lateral_noise_sd = 0.02;
  spec.lanes.push_back({{1.75, -0.02, 0.001, 0.0}, LaneClass::White, true, 1.0, 2.0});
  spec.rng_seed = 1234;
  const auto [cloud_a, truth_a] = generate_scene(spec);
  const auto [cloud_b, truth_b] = generate_scene(spec);
  ASSERT_EQ(cloud_a.points.size(), cloud_b.points.size());
  for (std::size_t i = 0; i < cloud_a.points.size(); ++i) {
    EXPECT_EQ(cloud_a.points[i].x, cloud_b.points[i].x);
    EXPECT_EQ(cloud_a.points[i].y, cloud_b.points[i].y);
    EXPECT_EQ(cloud_a.points[i].z, cloud_b.points[i].z);
    EXPECT_EQ(cloud_a.points[i].intensity, cloud_b.points[i].intensity);
  }
  EXPECT_EQ(truth_a.point_labels, truth_b.point_labels);
}

TEST(GenerateScene, ClutterSitsAboveTheRoad) {
  SceneSpec spec;
  spec.point_density = 0.0;
  spec.clutter_points = 100;
  const auto [cloud, truth] = generate_scene(spec);
  ASSERT_EQ(cloud.points.size(), 100u);
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    EXPECT_GE(cloud.points[i].z, 0.5);
    EXPECT_LE(cloud.points[i].z, 3.0);
    EXPECT_EQ(truth.point_labels[i], LaneClass::Background);
  }
}

TEST(GenerateScene, TruthMatchesItselfPerfectly) {
  SceneSpec spec;
  spec.point_density = 1.0;
  spec.lanes.push_back({{1.75, 0.01, -0.001, 0.0}, LaneClass::White, false, 1.0, 2.0});
  spec.lanes.push_back({{-1.75, 0.0, 0.0, 0.0}, LaneClass::Yellow, true, 1.0, 2.0});
  const auto [cloud, truth] = generate_scene(spec);
  ASSERT_EQ(truth.polylines.size(), 2u);
  for (const auto& line : truth.polylines) {
    const Polyline2D p = canonicalize_polyline(to_bev(line));
    EXPECT_EQ(iam_match_pair(MatchConfig{}, p, p).counts.f1(), 1.0);
  }
}

TEST(GenerateScene, TruthSamplingFollowsTheGeneratingPolynomial) {
  SceneSpec spec;
  spec.point_density = 0.0;
  spec.lanes.push_back({{2.0, 0.05, -0.002, 0.00001}, LaneClass::White, false, 1.0, 2.0});
  const auto [cloud, truth] = generate_scene(spec);
  ASSERT_EQ(truth.polylines.size(), 1u);
  const auto& v = truth.polylines[0].vertices;
  EXPECT_EQ(v.size(), 80u);  // every 0.5 m over [0, 40)
  EXPECT_EQ(v.front().x, 0.0);
  for (const auto& vert : v) EXPECT_EQ(vert.y, spec.lanes[0].eval(vert.x));
}

TEST(GenerateScene, RejectsLanesOutsideTheRoi) {
  SceneSpec spec;
  spec.lanes.push_back({{14.0, 0.1, 0.0, 0.0}, LaneClass::White, false, 1.0, 2.0});
  try {
    generate_scene(spec);
    FAIL() << "expected invalid_spec";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_spec);
  }
}

TEST(GenerateTrace, SingleFrameHasNoOdometryLink) {
  const fs::path dir = fs::path(::testing::TempDir()) / "trace_single";
  fs::remove_all(dir);
  TraceSpec spec;
  SceneSpec scene;
  scene.point_density = 2.0;
  spec.frames.push_back(scene);
  const Trace trace = load_trace(generate_trace(spec, dir));
  ASSERT_EQ(trace.frame_count(), 1u);
  EXPECT_FALSE(trace.manifest().frames[0].odom_to_next.has_value());
}

TEST(GenerateTrace, FusionGrowsTheCloudExtent) {
  const fs::path dir = fs::path(::testing::TempDir()) / "trace_fuse";
  fs::remove_all(dir);
  TraceSpec spec;
  spec.motion.step_m = 1.0;
  SceneSpec scene;
  scene.point_density = 6.0;
  for (int i = 0; i < 10; ++i) {
    scene.rng_seed = static_cast<std::uint64_t>(i);
    spec.frames.push_back(scene);
  }
  const Trace trace = load_trace(generate_trace(spec, dir));
  const PointCloud single = trace.load_cloud(9);
  const PointCloud fused = fuse_frames(trace, "000009", 9);
  auto x_min = [](const PointCloud& pc) {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& p : pc.points) lo = std::min(lo, p.x);
    return lo;
  };
  EXPECT_GE(x_min(single), 0.0);
  EXPECT_NEAR(x_min(fused), -9.0, 0.2);  // oldest frame slid 9 m back
  EXPECT_GT(fused.points.size(), single.points.size());
}

TEST(GenerateTrace, FeedsStatsAndSplitValidationCleanly) {
  const fs::path dir = fs::path(::testing::TempDir()) / "trace_stats";
  fs::remove_all(dir);
  TraceSpec spec;
  spec.attributes.weather = Weather::rainy;
  SceneSpec scene;
  scene.point_density = 2.0;
  scene.lanes.push_back({{1.75, 0.0, 0.0, 0.0}, LaneClass::White, false, 1.0, 2.0});
  spec.frames.push_back(scene);
  spec.frames.push_back(scene);
  const Trace trace = load_trace(generate_trace(spec, dir));
  const StatsReport stats = dataset_stats({trace});
  EXPECT_EQ(stats.frame_count, 2);
  EXPECT_EQ(stats.polyline_count, 2);
  const SplitReport split = validate_split({trace.manifest()});
  EXPECT_EQ(split.train_count, 1);
  EXPECT_FALSE(split.ok());  // a single trace cannot stratify three splits
}

TEST(GenerateTrace, RejectsEmptyFrameList) {
  try {
    generate_trace(TraceSpec{}, fs::path(::testing::TempDir()) / "trace_empty");
    FAIL() << "expected invalid_spec";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_spec);
  }
}

}  // namespace
}  // namespace lanekit
