#include "lanekit/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lanekit/rng.hpp"
#include "support/oracles.hpp"

namespace lanekit {
namespace {

Polyline2D line2(std::initializer_list<Vec2> vs) {
  Polyline2D p;
  p.vertices = vs;
  return p;
}

TEST(IamMatchPair, IdentityScoresPerfectly) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Polyline2D p = testsupport::random_grid_polyline(rng, 1, 10);
    const PairMatch m = iam_match_pair(MatchConfig{}, p, p);
    EXPECT_EQ(m.counts.tp, static_cast<std::int64_t>(p.vertices.size()));
    EXPECT_EQ(m.counts.fn, 0);
    EXPECT_EQ(m.counts.fp, 0);
    EXPECT_EQ(m.counts.f1(), 1.0);
  }
}

TEST(IamMatchPair, LargeShiftScoresZero) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Polyline2D gt = testsupport::random_grid_polyline(rng);
    const Polyline2D pred = testsupport::shifted_laterally(gt, 0.3);
    const PairMatch m = iam_match_pair(MatchConfig{}, gt, pred);
    EXPECT_EQ(m.counts.tp, 0);
    EXPECT_EQ(m.counts.fn, static_cast<std::int64_t>(gt.vertices.size()));
    EXPECT_EQ(m.counts.fp, static_cast<std::int64_t>(pred.vertices.size()));
    EXPECT_EQ(m.counts.f1(), 0.0);
  }
}

TEST(IamMatchPair, MixedDomainCase) {
  // gt x=0 and x=20 fall outside dom(pred) = [5,15] -> FN; x=10 matches at
  // delta 0.1; both pred vertices interpolate gt within 0.1 -> no FP.
  // F1 = 2*1 / (2*1 + 0 + 2) = 0.5.
  const Polyline2D gt = line2({{0.0, 0.0}, {10.0, 0.0}, {20.0, 0.0}});
  const Polyline2D pred = line2({{5.0, 0.1}, {15.0, 0.1}});
  const PairMatch m = iam_match_pair(MatchConfig{}, gt, pred);
  EXPECT_EQ(m.counts.tp, 1);
  EXPECT_EQ(m.counts.fn, 2);
  EXPECT_EQ(m.counts.fp, 0);
  EXPECT_EQ(m.counts.f1(), 0.5);
  ASSERT_EQ(m.gt_records.size(), 3u);
  EXPECT_EQ(m.gt_records[0].verdict, Verdict::FN);
  EXPECT_FALSE(m.gt_records[0].delta.has_value());  // outside the domain
  EXPECT_EQ(m.gt_records[1].verdict, Verdict::TP);
  EXPECT_DOUBLE_EQ(*m.gt_records[1].delta, 0.1);
  EXPECT_EQ(m.gt_records[2].verdict, Verdict::FN);
}

TEST(IamMatchPair, DeltaExactlyTauIsNotAMatch) {
  // tau itself must fall on the FN/FP side of the strict comparison.
  const MatchConfig cfg;
  const Polyline2D gt = line2({{0.0, 0.0}, {10.0, 0.0}});
  const Polyline2D pred = line2({{0.0, cfg.tau}, {10.0, cfg.tau}});
  const PairMatch m = iam_match_pair(cfg, gt, pred);
  EXPECT_EQ(m.counts.tp, 0);
  EXPECT_EQ(m.counts.fn, 2);
  EXPECT_EQ(m.counts.fp, 2);
}

TEST(IamMatchPair, RejectsEmptyPolylines) {
  try {
    iam_match_pair(MatchConfig{}, Polyline2D{}, line2({{0.0, 0.0}}));
    FAIL() << "expected empty_polyline";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::empty_polyline);
  }
}

TEST(IamMatchPair, LateralShiftStepBehavior) {
  // Grid-aligned y values and shifts make y+s exact in floating point, so
  // the step at tau is sharp: F1 == 1 below, F1 == 0 at or above.
  std::mt19937_64 rng(7);
  const MatchConfig cfg;
  for (int trial = 0; trial < 300; ++trial) {
    const Polyline2D gt = testsupport::random_grid_polyline(rng);
    const bool below = (trial % 2) == 0;
    double s;
    if (below) {
      s = static_cast<double>(1 + uniform_index(rng, 204)) * (1.0 / 1024.0);  // < 0.2
    } else {
      s = static_cast<double>(205 + uniform_index(rng, 820)) * (1.0 / 1024.0);  // > 0.2
    }
    const Polyline2D pred = testsupport::shifted_laterally(gt, s);
    const double f1 = iam_match_pair(cfg, gt, pred).counts.f1();
    if (s < cfg.tau)
      EXPECT_EQ(f1, 1.0) << "s=" << s;
    else
      EXPECT_EQ(f1, 0.0) << "s=" << s;
  }
}

TEST(IamMatchPair, ForwardReverseSymmetrySkeleton) {
  // With both polylines sharing the same x grid, the FN set of (a,b) over
  // a-vertices equals the FP set of (b,a) over a-vertices.
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    Polyline2D a = testsupport::random_grid_polyline(rng, 3, 10);
    Polyline2D b = a;
    for (auto& v : b.vertices)
      v.y += (static_cast<double>(uniform_index(rng, 1024)) - 512.0) * (1.0 / 1024.0);
    const PairMatch ab = iam_match_pair(MatchConfig{}, a, b);
    const PairMatch ba = iam_match_pair(MatchConfig{}, b, a);
    EXPECT_EQ(ab.counts.fn, ba.counts.fp);
    EXPECT_EQ(ab.counts.fp, ba.counts.fn);
    EXPECT_EQ(ab.counts.tp + ab.counts.fn,
              static_cast<std::int64_t>(a.vertices.size()));
  }
}

TEST(IamMatchPair, TauMonotonicity) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Polyline2D gt = testsupport::random_grid_polyline(rng);
    Polyline2D pred = testsupport::random_grid_polyline(rng);
    MatchConfig small_tau{0.1};
    MatchConfig large_tau{0.35};
    const MatchCounts a = iam_match_pair(small_tau, gt, pred).counts;
    const MatchCounts b = iam_match_pair(large_tau, gt, pred).counts;
    EXPECT_GE(b.tp, a.tp);
    EXPECT_LE(b.fn, a.fn);
    EXPECT_LE(b.fp, a.fp);
  }
}

TEST(IamMatchPair, TranslationInvariance) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const Polyline2D gt = testsupport::random_grid_polyline(rng);
    const Polyline2D pred = testsupport::random_grid_polyline(rng);
    const double dx = static_cast<double>(uniform_index(rng, 101)) - 50.0;
    const double dy = static_cast<double>(uniform_index(rng, 101)) - 50.0;
    const MatchCounts base = iam_match_pair(MatchConfig{}, gt, pred).counts;
    const MatchCounts moved = iam_match_pair(MatchConfig{}, testsupport::translated(gt, dx, dy),
                                             testsupport::translated(pred, dx, dy))
                                  .counts;
    EXPECT_EQ(base.tp, moved.tp);
    EXPECT_EQ(base.fn, moved.fn);
    EXPECT_EQ(base.fp, moved.fp);
  }
}

TEST(MatchCounts, F1IsOneIffNoErrorsWithSomeTp) {
  EXPECT_EQ((MatchCounts{5, 0, 0}).f1(), 1.0);
  EXPECT_EQ((MatchCounts{0, 0, 0}).f1(), 0.0);
  EXPECT_LT((MatchCounts{5, 1, 0}).f1(), 1.0);
  EXPECT_LT((MatchCounts{5, 0, 1}).f1(), 1.0);
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 200; ++trial) {
    const MatchCounts c{static_cast<std::int64_t>(uniform_index(rng, 20)),
                        static_cast<std::int64_t>(uniform_index(rng, 20)),
                        static_cast<std::int64_t>(uniform_index(rng, 20))};
    const double f1 = c.f1();
    EXPECT_GE(f1, 0.0);
    EXPECT_LE(f1, 1.0);
    if (f1 == 1.0) {
      EXPECT_GT(c.tp, 0);
      EXPECT_EQ(c.fn, 0);
      EXPECT_EQ(c.fp, 0);
    }
  }
}

TEST(MatchPolylineSets, SinglePairDelegatesToPairMatch) {
  const std::vector<Polyline2D> gts{line2({{0.0, 0.0}, {10.0, 0.0}, {20.0, 0.0}})};
  const std::vector<Polyline2D> preds{line2({{5.0, 0.1}, {15.0, 0.1}})};
  const auto [assignment, counts] = match_polyline_sets(MatchConfig{}, gts, preds);
  ASSERT_EQ(assignment.pairs.size(), 1u);
  const MatchCounts direct = iam_match_pair(MatchConfig{}, gts[0], preds[0]).counts;
  EXPECT_EQ(counts.tp, direct.tp);
  EXPECT_EQ(counts.fn, direct.fn);
  EXPECT_EQ(counts.fp, direct.fp);
}

TEST(MatchPolylineSets, PairsNearestLanesWithoutCrossing) {
  // Crossing the assignment would cost mean |delta| ~3.45 per pair instead
  // of ~0.05, so the optimum pairs nearest lanes.
  const std::vector<Polyline2D> gts{line2({{0.0, 0.0}, {20.0, 0.0}}),
                                    line2({{0.0, 3.5}, {20.0, 3.5}})};
  const std::vector<Polyline2D> preds{line2({{0.0, 3.45}, {20.0, 3.45}}),
                                      line2({{0.0, 0.05}, {20.0, 0.05}})};
  const auto [assignment, counts] = match_polyline_sets(MatchConfig{}, gts, preds);
  ASSERT_EQ(assignment.pairs.size(), 2u);
  EXPECT_EQ(assignment.pairs[0], (std::pair<std::size_t, std::size_t>{0, 1}));
  EXPECT_EQ(assignment.pairs[1], (std::pair<std::size_t, std::size_t>{1, 0}));
  EXPECT_EQ(counts.tp, 4);
  EXPECT_EQ(counts.fn, 0);
  EXPECT_EQ(counts.fp, 0);
}

TEST(MatchPolylineSets, UnmatchedGtCountsAllVerticesAsFn) {
  const std::vector<Polyline2D> gts{line2({{0.0, 0.0}, {10.0, 0.0}, {20.0, 0.0}})};
  const auto [assignment, counts] = match_polyline_sets(MatchConfig{}, gts, {});
  EXPECT_TRUE(assignment.pairs.empty());
  ASSERT_EQ(assignment.unmatched_gt.size(), 1u);
  EXPECT_EQ(counts.tp, 0);
  EXPECT_EQ(counts.fn, 3);
  EXPECT_EQ(counts.fp, 0);
  EXPECT_EQ(counts.f1(), 0.0);
}

TEST(MatchPolylineSets, DistantLanesAreNotForcedTogether) {
  // mean |delta| = 5 m > 5 * tau -> pairing forbidden, both sides unmatched
  const std::vector<Polyline2D> gts{line2({{0.0, 0.0}, {20.0, 0.0}})};
  const std::vector<Polyline2D> preds{line2({{0.0, 5.0}, {20.0, 5.0}})};
  const auto [assignment, counts] = match_polyline_sets(MatchConfig{}, gts, preds);
  EXPECT_TRUE(assignment.pairs.empty());
  EXPECT_EQ(counts.fn, 2);
  EXPECT_EQ(counts.fp, 2);
}

TEST(MatchPolylineSets, NoXOverlapForbidsPairing) {
  const std::vector<Polyline2D> gts{line2({{0.0, 0.0}, {5.0, 0.0}})};
  const std::vector<Polyline2D> preds{line2({{6.0, 0.0}, {10.0, 0.0}})};
  const auto [assignment, counts] = match_polyline_sets(MatchConfig{}, gts, preds);
  EXPECT_TRUE(assignment.pairs.empty());
  EXPECT_EQ(counts.fn, 2);
  EXPECT_EQ(counts.fp, 2);
}

TEST(EvaluateFrame, EmptyVsEmptyIsVacuous) {
  const FrameEvaluation eval = evaluate_frame(MatchConfig{}, {}, {});
  EXPECT_TRUE(eval.vacuous);
  EXPECT_EQ(eval.counts.tp, 0);
  EXPECT_EQ(eval.counts.fn, 0);
  EXPECT_EQ(eval.counts.fp, 0);
}

TEST(EvaluateFrame, PerfectFrame) {
  const std::vector<Polyline2D> gts{line2({{0.0, 0.0}, {10.0, 1.0}})};
  const FrameEvaluation eval = evaluate_frame(MatchConfig{}, gts, gts);
  EXPECT_FALSE(eval.vacuous);
  EXPECT_EQ(eval.f1, 1.0);
}

TEST(EvaluateFrame, MixedDomainCaseCarriesOver) {
  const std::vector<Polyline2D> gts{line2({{0.0, 0.0}, {10.0, 0.0}, {20.0, 0.0}})};
  const std::vector<Polyline2D> preds{line2({{5.0, 0.1}, {15.0, 0.1}})};
  const FrameEvaluation eval = evaluate_frame(MatchConfig{}, gts, preds);
  EXPECT_EQ(eval.f1, 0.5);
}

BevConfig tiny_cfg() {
  BevConfig cfg;
  cfg.x_max = 4.0;
  cfg.y_min = -2.0;
  cfg.y_max = 2.0;
  return cfg;  // 80 x 80 cells
}

TEST(SegmentationF1, IdenticalGridsScoreOne) {
  BevLabelGrid g = make_empty_label_grid(tiny_cfg());
  g.labels[g.index(3, 4)] = 1;
  g.labels[g.index(5, 6)] = 2;
  const SegmentationScores s = segmentation_f1(g, g);
  EXPECT_EQ(s.lane.f1(), 1.0);
  EXPECT_EQ(s.white.f1(), 1.0);
  EXPECT_EQ(s.yellow.f1(), 1.0);
}

TEST(SegmentationF1, HalfCoverageClosedForm) {
  // pred covers half of gt's lane cells, nothing extra:
  // precision 1, recall 0.5, F1 = 2/3
  BevLabelGrid gt = make_empty_label_grid(tiny_cfg());
  BevLabelGrid pred = make_empty_label_grid(tiny_cfg());
  for (int c = 0; c < 40; ++c) {
    gt.labels[gt.index(10, c)] = 1;
    if (c < 20) pred.labels[pred.index(10, c)] = 1;
  }
  const SegmentationScores s = segmentation_f1(gt, pred);
  EXPECT_DOUBLE_EQ(s.lane.precision(), 1.0);
  EXPECT_DOUBLE_EQ(s.lane.recall(), 0.5);
  EXPECT_DOUBLE_EQ(s.lane.f1(), 2.0 / 3.0);
}

TEST(SegmentationF1, DisjointMasksScoreZero) {
  BevLabelGrid gt = make_empty_label_grid(tiny_cfg());
  BevLabelGrid pred = make_empty_label_grid(tiny_cfg());
  gt.labels[gt.index(1, 1)] = 1;
  pred.labels[pred.index(2, 2)] = 1;
  EXPECT_EQ(segmentation_f1(gt, pred).lane.f1(), 0.0);
}

TEST(SegmentationF1, PerClassCountsSeparateWhiteAndYellow) {
  BevLabelGrid gt = make_empty_label_grid(tiny_cfg());
  BevLabelGrid pred = make_empty_label_grid(tiny_cfg());
  gt.labels[gt.index(1, 1)] = 1;
  pred.labels[pred.index(1, 1)] = 2;  // right cell, wrong color
  const SegmentationScores s = segmentation_f1(gt, pred);
  EXPECT_EQ(s.lane.tp, 1);
  EXPECT_EQ(s.white.tp, 0);
  EXPECT_EQ(s.white.fn, 1);
  EXPECT_EQ(s.yellow.fp, 1);
}

TEST(SegmentationF1, DimsMismatch) {
  try {
    segmentation_f1(make_empty_label_grid(tiny_cfg()), make_empty_label_grid(BevConfig{}));
    FAIL() << "expected dims_mismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::dims_mismatch);
  }
}

TEST(RasterizePolylines, EmptySetIsAllZero) {
  const BevLabelGrid mask = rasterize_polylines(BevConfig{}, {});
  for (const auto v : mask.labels) EXPECT_EQ(v, 0);
}

TEST(RasterizePolylines, AxisAlignedSegmentMarksCrossedCells) {
  // [(0,0),(2,0)] runs along x at y=0 -> column 300, rows 0..40
  const BevConfig cfg;
  const BevLabelGrid mask = rasterize_polylines(cfg, {line2({{0.0, 0.0}, {2.0, 0.0}})});
  std::int64_t marked = 0;
  for (const auto v : mask.labels) marked += v;
  EXPECT_EQ(marked, 41);
  for (int r = 0; r <= 40; ++r) EXPECT_EQ(mask.labels[mask.index(r, 300)], 1) << "row " << r;
}

TEST(RasterizePolylines, WidthThreeDilatesByOneCell) {
  const BevConfig cfg;
  const auto thin = rasterize_polylines(cfg, {line2({{0.0, 0.0}, {2.0, 0.0}})}, 1);
  const auto wide = rasterize_polylines(cfg, {line2({{0.0, 0.0}, {2.0, 0.0}})}, 3);
  std::int64_t thin_cells = 0, wide_cells = 0;
  for (const auto v : thin.labels) thin_cells += v;
  for (const auto v : wide.labels) wide_cells += v;
  EXPECT_EQ(thin_cells, 41);
  // rows 0..41 (the cap at row -1 is clamped at the grid edge), 3 columns
  EXPECT_EQ(wide_cells, 42 * 3);
  for (int r = 0; r <= 41; ++r)
    for (int c = 299; c <= 301; ++c) EXPECT_EQ(wide.labels[wide.index(r, c)], 1);
}

TEST(RasterizePolylines, OutOfRoiSegmentsAreClippedAtTheBoundary) {
  const BevConfig cfg;
  const BevLabelGrid mask =
      rasterize_polylines(cfg, {line2({{-5.0, 0.0}, {1.0, 0.0}})});
  std::int64_t marked = 0;
  for (const auto v : mask.labels) marked += v;
  EXPECT_EQ(marked, 21);  // rows 0..20 only
  EXPECT_EQ(mask.labels[mask.index(0, 300)], 1);
}

TEST(QuantizationContrast, OneCellShiftZeroesRasterButNotIam) {
  // The raster baseline is pinned to the 5 cm grid: a 0.05 m lateral shift
  // lands every cell one column over (F1 = 0) while the lateral error stays
  // far below tau (IAM-F1 = 1).
  const BevConfig cfg;
  const std::vector<Polyline2D> gts{line2({{0.0, 0.0}, {39.0, 0.0}}),
                                    line2({{0.0, 3.5}, {39.0, 3.5}})};
  std::vector<Polyline2D> preds;
  for (const auto& g : gts) preds.push_back(testsupport::shifted_laterally(g, 0.05));
  EXPECT_EQ(raster_polyline_f1(cfg, gts, preds, 1).f1(), 0.0);
  EXPECT_EQ(match_polyline_sets(MatchConfig{}, gts, preds).second.f1(), 1.0);
}

TEST(RasterPolylineF1, IdenticalSetsScoreOne) {
  const std::vector<Polyline2D> lines{line2({{0.0, 0.0}, {10.0, 0.5}}),
                                      line2({{0.0, 3.5}, {10.0, 3.0}})};
  EXPECT_EQ(raster_polyline_f1(BevConfig{}, lines, lines, 1).f1(), 1.0);
}

FrameScores frame_with_iam(std::int64_t tp, std::int64_t fn, std::int64_t fp) {
  FrameScores f;
  f.iam = {tp, fn, fp};
  return f;
}

TEST(Aggregate, SingleFrameReportEqualsThatFrame) {
  const std::vector<TraceScores> traces{{"t0", {frame_with_iam(4, 1, 1)}}};
  const EvalReport report = aggregate(traces);
  ASSERT_EQ(report.rows.size(), 1u);
  EXPECT_DOUBLE_EQ(report.rows[0].iam_f1, (MatchCounts{4, 1, 1}).f1());
  EXPECT_DOUBLE_EQ(report.average.iam_f1, report.rows[0].iam_f1);
}

TEST(Aggregate, MicroSumsCountsBeforeF1) {
  // (1,1,0) + (1,0,1) -> TP=2, FN=1, FP=1 -> F1 = 4/6
  const std::vector<TraceScores> traces{
      {"t0", {frame_with_iam(1, 1, 0), frame_with_iam(1, 0, 1)}}};
  const EvalReport report = aggregate(traces, AggMode::micro);
  EXPECT_NEAR(report.rows[0].iam_f1, 2.0 * 2.0 / 6.0, 1e-12);
  EXPECT_EQ(report.rows[0].iam_counts.tp, 2);
  EXPECT_EQ(report.rows[0].iam_counts.fn, 1);
  EXPECT_EQ(report.rows[0].iam_counts.fp, 1);
}

TEST(Aggregate, MacroAveragesPerFrameF1) {
  const std::vector<TraceScores> traces{
      {"t0", {frame_with_iam(1, 1, 0), frame_with_iam(1, 0, 1)}}};
  const EvalReport report = aggregate(traces, AggMode::macro);
  const double f1a = (MatchCounts{1, 1, 0}).f1();
  const double f1b = (MatchCounts{1, 0, 1}).f1();
  EXPECT_NEAR(report.rows[0].iam_f1, 0.5 * (f1a + f1b), 1e-12);
}

TEST(Aggregate, VacuousFramesDoNotCount) {
  FrameScores vacuous;
  vacuous.iam_vacuous = true;
  const std::vector<TraceScores> traces{{"t0", {vacuous, frame_with_iam(2, 0, 0)}}};
  const EvalReport report = aggregate(traces, AggMode::macro);
  EXPECT_DOUBLE_EQ(report.rows[0].iam_f1, 1.0);
}

TEST(Aggregate, AllVacuousThrowsNoFrames) {
  FrameScores vacuous;
  vacuous.iam_vacuous = true;
  try {
    aggregate({{"t0", {vacuous, vacuous}}});
    FAIL() << "expected no_frames";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::no_frames);
  }
}

TEST(Aggregate, AverageRowIsTheMeanOfTraceRows) {
  const std::vector<TraceScores> traces{{"a", {frame_with_iam(1, 0, 0)}},
                                        {"b", {frame_with_iam(1, 1, 1)}}};
  const EvalReport report = aggregate(traces);
  ASSERT_EQ(report.rows.size(), 2u);
  EXPECT_DOUBLE_EQ(report.average.iam_f1,
                   0.5 * (report.rows[0].iam_f1 + report.rows[1].iam_f1));
  EXPECT_EQ(report.average.trace, "Average");
}

}  // namespace
}  // namespace lanekit
