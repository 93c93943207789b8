#include "lanekit/segment.hpp"

#include <gtest/gtest.h>

#include <random>

#include "lanekit/rng.hpp"

namespace lanekit {
namespace {

BevConfig small_cfg() {
  BevConfig cfg;
  cfg.x_max = 2.0;
  cfg.y_min = -1.0;
  cfg.y_max = 1.0;
  return cfg;  // 40 x 40 cells
}

TEST(SegmentHeuristic, EmptyGridStaysBackground) {
  const BevGrid g = make_empty_grid(small_cfg());
  const BevLabelGrid out = segment_heuristic(HeuristicSegmenterParams{}, g);
  for (const auto v : out.labels) EXPECT_EQ(v, 0);
}

TEST(SegmentHeuristic, BrightGroundCellBecomesWhite) {
  BevGrid g = make_empty_grid(small_cfg());
  const std::size_t i = g.index(10, 20);
  g.point_count[i] = 3;
  g.max_intensity[i] = 0.9f;
  g.max_height[i] = 0.02f;
  const BevLabelGrid out = segment_heuristic(HeuristicSegmenterParams{}, g);
  EXPECT_EQ(out.at(10, 20), LaneClass::White);
  std::int64_t lane_cells = 0;
  for (const auto v : out.labels) lane_cells += (v != 0);
  EXPECT_EQ(lane_cells, 1);
}

TEST(SegmentHeuristic, RejectsDimAndElevatedCells) {
  BevGrid g = make_empty_grid(small_cfg());
  const std::size_t dim = g.index(1, 1);
  g.point_count[dim] = 2;
  g.max_intensity[dim] = 0.2f;  // below threshold
  const std::size_t high = g.index(2, 2);
  g.point_count[high] = 2;
  g.max_intensity[high] = 0.9f;
  g.max_height[high] = 1.5f;  // above the ground band
  const BevLabelGrid out = segment_heuristic(HeuristicSegmenterParams{}, g);
  EXPECT_EQ(out.at(1, 1), LaneClass::Background);
  EXPECT_EQ(out.at(2, 2), LaneClass::Background);
}

TEST(SegmentHeuristic, MonotoneInIntensityThreshold) {
  std::mt19937_64 rng(5);
  BevGrid g = make_empty_grid(small_cfg());
  for (std::size_t i = 0; i < g.point_count.size(); ++i) {
    if (uniform_double(rng) < 0.5) continue;
    g.point_count[i] = 1 + static_cast<std::int32_t>(uniform_index(rng, 4));
    g.max_intensity[i] = static_cast<float>(uniform_double(rng));
    g.max_height[i] = static_cast<float>(uniform_range(rng, -0.1, 0.6));
  }
  HeuristicSegmenterParams lo_params;
  lo_params.intensity_threshold = 0.3;
  HeuristicSegmenterParams hi_params;
  hi_params.intensity_threshold = 0.7;
  const BevLabelGrid lo = segment_heuristic(lo_params, g);
  const BevLabelGrid hi = segment_heuristic(hi_params, g);
  for (std::size_t i = 0; i < lo.labels.size(); ++i) {
    if (hi.labels[i] != 0) EXPECT_NE(lo.labels[i], 0);  // raising tau never adds cells
  }
}

TEST(RunSegmenter, ValidatesOutputConfig) {
  const BevGrid g = make_empty_grid(small_cfg());
  const Segmenter broken = [](const BevGrid&) {
    BevConfig other;
    return make_empty_label_grid(other);
  };
  try {
    run_segmenter(broken, g);
    FAIL() << "expected dims_mismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::dims_mismatch);
  }
  const BevLabelGrid ok = run_segmenter(make_heuristic_segmenter({}), g);
  EXPECT_TRUE(ok.config == g.config);
}

TEST(ExternalMask, RoundTripsThroughDisk) {
  const BevConfig cfg = small_cfg();
  BevLabelGrid g = make_empty_label_grid(cfg);
  g.labels[g.index(3, 7)] = static_cast<std::uint8_t>(LaneClass::White);
  g.labels[g.index(8, 8)] = static_cast<std::uint8_t>(LaneClass::Yellow);
  const std::string path = ::testing::TempDir() + "mask.lkm";
  save_external_mask(path, g);
  const BevLabelGrid back = load_external_mask(path, cfg);
  EXPECT_EQ(back.labels, g.labels);
}

TEST(ExternalMask, AllZerosLoadsAsBackground) {
  const BevConfig cfg = small_cfg();
  const std::string path = ::testing::TempDir() + "zeros.lkm";
  save_external_mask(path, make_empty_label_grid(cfg));
  const BevLabelGrid back = load_external_mask(path, cfg);
  for (const auto v : back.labels) EXPECT_EQ(v, 0);
}

TEST(ExternalMask, DimsMismatchIsRejected) {
  const std::string path = ::testing::TempDir() + "small.lkm";
  save_external_mask(path, make_empty_label_grid(small_cfg()));
  try {
    load_external_mask(path, BevConfig{});  // 800 x 600 expected
    FAIL() << "expected dims_mismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::dims_mismatch);
  }
}

TEST(ExternalMask, InvalidLabelValueIsRejected) {
  const BevConfig cfg = small_cfg();
  BevLabelGrid g = make_empty_label_grid(cfg);
  g.labels[0] = 7;
  const std::string path = ::testing::TempDir() + "badlabel.lkm";
  save_external_mask(path, g);
  try {
    load_external_mask(path, cfg);
    FAIL() << "expected invalid_label_value";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_label_value);
  }
}

TEST(ExternalMask, MissingFileIsAnIoError) {
  try {
    load_external_mask(::testing::TempDir() + "does_not_exist.lkm", small_cfg());
    FAIL() << "expected io";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::io);
  }
}

}  // namespace
}  // namespace lanekit
