#pragma once

// Polyline and grid evaluation.
//
// The headline metric is interpolation-aware matching F1 (IAM-F1): ground
// truth and prediction are compared as functions y(x) in the BEV plane by
// linearly interpolating each polyline at the other's vertex positions. A
// ground-truth vertex is a true positive when the prediction interpolates
// within tau of it (strictly below tau), a false negative otherwise --
// including vertices outside the prediction's interpolation domain. The
// reverse pass over prediction vertices produces false positives. The z
// component plays no role; lane lines steer laterally.
//
// Two grid-based baselines are provided for comparison: cell-wise
// segmentation F1 and F1 over rasterized polyline masks. The latter is
// quantized by the cell size -- a prediction shifted by one cell width
// scores zero there while IAM-F1 still sees a sub-tau lateral error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lanekit/bev.hpp"
#include "lanekit/core.hpp"

namespace lanekit {

struct MatchConfig {
  double tau = 0.2;  // m

  void validate() const {
    if (!(tau > 0.0)) throw Error(Errc::invalid_config, "tau must be > 0");
  }
};

enum class Verdict { TP, FN, FP };

/// Per-vertex match outcome. `y_interp` and `delta` are present iff the
/// vertex lies inside the counterpart's interpolation domain. Prediction
/// vertices that match within tau are recorded with verdict TP for
/// inspection but only ground-truth TPs enter the counts.
struct PointMatchRecord {
  Vec2 point;
  std::optional<double> y_interp;
  std::optional<double> delta;
  Verdict verdict = Verdict::FN;
};

/// TP/FN/FP accumulator shared by all F1-style metrics. Derived ratios use
/// the 0/0 -> 0 convention.
struct MatchCounts {
  std::int64_t tp = 0;
  std::int64_t fn = 0;
  std::int64_t fp = 0;

  MatchCounts& operator+=(const MatchCounts& o) {
    tp += o.tp;
    fn += o.fn;
    fp += o.fp;
    return *this;
  }

  bool empty() const { return tp == 0 && fn == 0 && fp == 0; }

  double precision() const {
    return (tp + fp) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  double recall() const {
    return (tp + fn) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  double f1() const {
    const std::int64_t denom = 2 * tp + fp + fn;
    return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  }
};

struct PairMatch {
  MatchCounts counts;
  std::vector<PointMatchRecord> gt_records;
  std::vector<PointMatchRecord> pred_records;
};

/// Matches one ground-truth polyline against one predicted polyline. Both
/// must be canonical and non-empty.
inline PairMatch iam_match_pair(const MatchConfig& cfg, const Polyline2D& gt,
                                const Polyline2D& pred) {
  cfg.validate();
  if (gt.vertices.empty() || pred.vertices.empty())
    throw Error(Errc::empty_polyline, "cannot match an empty polyline");

  PairMatch out;
  out.gt_records.reserve(gt.vertices.size());
  out.pred_records.reserve(pred.vertices.size());

  for (const Vec2& g : gt.vertices) {
    PointMatchRecord rec;
    rec.point = g;
    if (const auto yi = interp_lateral(pred, g.x)) {
      rec.y_interp = *yi;
      rec.delta = std::abs(*yi - g.y);
      rec.verdict = (*rec.delta < cfg.tau) ? Verdict::TP : Verdict::FN;
    } else {
      rec.verdict = Verdict::FN;  // outside the interpolation domain
    }
    (rec.verdict == Verdict::TP) ? ++out.counts.tp : ++out.counts.fn;
    out.gt_records.push_back(rec);
  }

  for (const Vec2& p : pred.vertices) {
    PointMatchRecord rec;
    rec.point = p;
    if (const auto yi = interp_lateral(gt, p.x)) {
      rec.y_interp = *yi;
      rec.delta = std::abs(p.y - *yi);
      rec.verdict = (*rec.delta >= cfg.tau) ? Verdict::FP : Verdict::TP;
    } else {
      rec.verdict = Verdict::FP;
    }
    if (rec.verdict == Verdict::FP) ++out.counts.fp;
    out.pred_records.push_back(rec);
  }
  return out;
}

/// One-to-one pairing between ground-truth and prediction indices.
struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (gt, pred)
  std::vector<std::size_t> unmatched_gt;
  std::vector<std::size_t> unmatched_pred;
};

namespace detail {

/// Pair cost: mean |delta| over both polylines' vertices inside the shared
/// x-interval. Nullopt when the domains do not overlap or the mean exceeds
/// the gate (5*tau) -- such pairings are forbidden.
inline std::optional<double> pair_cost(const MatchConfig& cfg, const Polyline2D& gt,
                                       const Polyline2D& pred) {
  const double lo = std::max(gt.vertices.front().x, pred.vertices.front().x);
  const double hi = std::min(gt.vertices.back().x, pred.vertices.back().x);
  if (lo > hi) return std::nullopt;
  double sum = 0.0;
  std::size_t count = 0;
  for (const Vec2& g : gt.vertices) {
    if (g.x < lo || g.x > hi) continue;
    if (const auto yi = interp_lateral(pred, g.x)) {
      sum += std::abs(*yi - g.y);
      ++count;
    }
  }
  for (const Vec2& p : pred.vertices) {
    if (p.x < lo || p.x > hi) continue;
    if (const auto yi = interp_lateral(gt, p.x)) {
      sum += std::abs(p.y - *yi);
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  const double mean = sum / static_cast<double>(count);
  if (mean > 5.0 * cfg.tau) return std::nullopt;
  return mean;
}

}  // namespace detail

/// Matches two polyline sets. The assignment is the exact optimum over
/// one-to-one pairings restricted to allowed pairs (overlapping x-domains,
/// mean |delta| within 5*tau): maximum pair count first, minimum total cost
/// among those. Matched pairs are scored by iam_match_pair; every vertex of
/// an unmatched ground-truth polyline counts FN and every vertex of an
/// unmatched prediction counts FP. Exhaustive search is affordable because
/// frames carry at most a handful of lanes.
inline std::pair<Assignment, MatchCounts> match_polyline_sets(const MatchConfig& cfg,
                                                              const std::vector<Polyline2D>& gts,
                                                              const std::vector<Polyline2D>& preds) {
  cfg.validate();
  for (const auto& g : gts)
    if (g.vertices.empty()) throw Error(Errc::empty_polyline, "empty ground-truth polyline");
  for (const auto& p : preds)
    if (p.vertices.empty()) throw Error(Errc::empty_polyline, "empty predicted polyline");

  const std::size_t ng = gts.size();
  const std::size_t np = preds.size();
  // Bitmask DP over the smaller side keeps the exact search tiny.
  const bool mask_preds = np <= ng;
  const std::size_t rows = mask_preds ? ng : np;
  const std::size_t cols = mask_preds ? np : ng;
  if (cols > 12)
    throw Error(Errc::invalid_config, "too many polylines in one frame to match exactly");

  const double forbidden = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> cost(rows, std::vector<double>(cols, forbidden));
  for (std::size_t gi = 0; gi < ng; ++gi) {
    for (std::size_t pi = 0; pi < np; ++pi) {
      const auto c = detail::pair_cost(cfg, gts[gi], preds[pi]);
      if (!c) continue;
      if (mask_preds)
        cost[gi][pi] = *c;
      else
        cost[pi][gi] = *c;
    }
  }

  struct Cell {
    int matched = 0;
    double total = 0.0;
    int choice = -2;  // -1 = leave row unmatched, >=0 = column index
  };
  const std::size_t nmask = std::size_t{1} << cols;
  // dp[r][m]: best result for rows r.. with columns in m still available.
  std::vector<std::vector<Cell>> dp(rows + 1, std::vector<Cell>(nmask));
  for (std::size_t r = rows; r-- > 0;) {
    for (std::size_t m = 0; m < nmask; ++m) {
      Cell best = dp[r + 1][m];
      best.choice = -1;
      for (std::size_t c = 0; c < cols; ++c) {
        if (!(m & (std::size_t{1} << c))) continue;
        if (cost[r][c] == forbidden) continue;
        const Cell& rest = dp[r + 1][m & ~(std::size_t{1} << c)];
        const int matched = rest.matched + 1;
        const double total = rest.total + cost[r][c];
        if (matched > best.matched || (matched == best.matched && total < best.total)) {
          best.matched = matched;
          best.total = total;
          best.choice = static_cast<int>(c);
        }
      }
      dp[r][m] = best;
    }
  }

  Assignment assignment;
  std::vector<bool> col_used(cols, false);
  std::size_t m = nmask - 1;
  for (std::size_t r = 0; r < rows; ++r) {
    const int choice = dp[r][m].choice;
    if (choice >= 0) {
      const auto c = static_cast<std::size_t>(choice);
      col_used[c] = true;
      m &= ~(std::size_t{1} << c);
      if (mask_preds)
        assignment.pairs.emplace_back(r, c);
      else
        assignment.pairs.emplace_back(c, r);
    } else if (mask_preds) {
      assignment.unmatched_gt.push_back(r);
    } else {
      assignment.unmatched_pred.push_back(r);
    }
  }
  for (std::size_t c = 0; c < cols; ++c) {
    if (col_used[c]) continue;
    if (mask_preds)
      assignment.unmatched_pred.push_back(c);
    else
      assignment.unmatched_gt.push_back(c);
  }
  std::sort(assignment.pairs.begin(), assignment.pairs.end());
  std::sort(assignment.unmatched_gt.begin(), assignment.unmatched_gt.end());
  std::sort(assignment.unmatched_pred.begin(), assignment.unmatched_pred.end());

  MatchCounts counts;
  for (const auto& [gi, pi] : assignment.pairs)
    counts += iam_match_pair(cfg, gts[gi], preds[pi]).counts;
  for (const std::size_t gi : assignment.unmatched_gt)
    counts.fn += static_cast<std::int64_t>(gts[gi].vertices.size());
  for (const std::size_t pi : assignment.unmatched_pred)
    counts.fp += static_cast<std::int64_t>(preds[pi].vertices.size());
  return {assignment, counts};
}

/// IAM-F1 result for one frame. A frame with neither ground truth nor
/// predictions is vacuous: it contributes zero counts and is excluded from
/// per-frame (macro) averages so empty stretches cannot inflate scores.
struct FrameEvaluation {
  MatchCounts counts;
  bool vacuous = false;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline FrameEvaluation evaluate_frame(const MatchConfig& cfg, const std::vector<Polyline2D>& gts,
                                      const std::vector<Polyline2D>& preds) {
  FrameEvaluation out;
  if (gts.empty() && preds.empty()) {
    out.vacuous = true;
    return out;
  }
  out.counts = match_polyline_sets(cfg, gts, preds).second;
  out.precision = out.counts.precision();
  out.recall = out.counts.recall();
  out.f1 = out.counts.f1();
  return out;
}

// ---------------------------------------------------------------------------
// Grid-based baselines
// ---------------------------------------------------------------------------

/// Cell-wise confusion counts between two label grids over the same config:
/// binary lane-vs-background, plus per-class counts for White and Yellow.
struct SegmentationScores {
  MatchCounts lane;
  MatchCounts white;
  MatchCounts yellow;
};

inline SegmentationScores segmentation_f1(const BevLabelGrid& gt, const BevLabelGrid& pred) {
  if (!(gt.config == pred.config) || gt.labels.size() != pred.labels.size())
    throw Error(Errc::dims_mismatch, "label grids have different configs");
  SegmentationScores s;
  auto tally = [](MatchCounts& c, bool in_gt, bool in_pred) {
    if (in_gt && in_pred)
      ++c.tp;
    else if (in_gt)
      ++c.fn;
    else if (in_pred)
      ++c.fp;
  };
  for (std::size_t i = 0; i < gt.labels.size(); ++i) {
    const auto g = static_cast<LaneClass>(gt.labels[i]);
    const auto p = static_cast<LaneClass>(pred.labels[i]);
    tally(s.lane, is_lane(g), is_lane(p));
    tally(s.white, g == LaneClass::White, p == LaneClass::White);
    tally(s.yellow, g == LaneClass::Yellow, p == LaneClass::Yellow);
  }
  return s;
}

namespace detail {

/// Marks every cell crossed by the segment a->b (grid traversal in the
/// spirit of Amanatides & Woo), after clipping the segment to the ROI box.
inline void mark_segment(BevLabelGrid& mask, const Vec2& a, const Vec2& b) {
  const BevConfig& cfg = mask.config;
  // Liang-Barsky clip to the closed ROI box.
  double t0 = 0.0, t1 = 1.0;
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {a.x - cfg.x_min, cfg.x_max - a.x, a.y - cfg.y_min, cfg.y_max - a.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return;  // parallel and outside
      continue;
    }
    const double t = q[i] / p[i];
    if (p[i] < 0.0)
      t0 = std::max(t0, t);
    else
      t1 = std::min(t1, t);
  }
  if (t0 > t1) return;
  const Vec2 p0{a.x + t0 * dx, a.y + t0 * dy};
  const Vec2 p1{a.x + t1 * dx, a.y + t1 * dy};

  const int rows = cfg.rows();
  const int cols = cfg.cols();
  const double inv = 1.0 / cfg.cell_size;
  auto cell_of = [&](const Vec2& p) {
    return CellIndex{
        std::clamp(static_cast<int>(std::floor((p.x - cfg.x_min) * inv)), 0, rows - 1),
        std::clamp(static_cast<int>(std::floor((p.y - cfg.y_min) * inv)), 0, cols - 1)};
  };
  CellIndex cur = cell_of(p0);
  const CellIndex end = cell_of(p1);
  const int step_r = (dx > 0.0) ? 1 : (dx < 0.0 ? -1 : 0);
  const int step_c = (dy > 0.0) ? 1 : (dy < 0.0 ? -1 : 0);

  auto boundary_t = [&](int cell, double lo, double origin, double delta, int step) {
    if (step == 0) return std::numeric_limits<double>::infinity();
    const double edge = lo + (cell + (step > 0 ? 1 : 0)) * cfg.cell_size;
    return (edge - origin) / delta;
  };
  double t_max_r = boundary_t(cur.row, cfg.x_min, p0.x, dx, step_r);
  double t_max_c = boundary_t(cur.col, cfg.y_min, p0.y, dy, step_c);
  const double t_delta_r = (step_r != 0) ? cfg.cell_size / std::abs(dx) : 0.0;
  const double t_delta_c = (step_c != 0) ? cfg.cell_size / std::abs(dy) : 0.0;

  const int max_steps = rows + cols + 4;
  for (int i = 0; i <= max_steps; ++i) {
    mask.labels[mask.index(cur.row, cur.col)] = 1;
    if (cur == end) break;
    if (t_max_r <= t_max_c) {
      cur.row += step_r;
      t_max_r += t_delta_r;
    } else {
      cur.col += step_c;
      t_max_c += t_delta_c;
    }
    if (cur.row < 0 || cur.row >= rows || cur.col < 0 || cur.col >= cols) break;
  }
}

}  // namespace detail

/// Rasterizes polylines into a binary lane mask (labels 0/1). Consecutive
/// vertex pairs are traversed cell by cell; segments reaching outside the
/// ROI are clipped at its boundary. width_cells >= 1 applies a square
/// dilation of radius (width_cells - 1) / 2 afterwards.
inline BevLabelGrid rasterize_polylines(const BevConfig& cfg, const std::vector<Polyline2D>& lines,
                                        int width_cells = 1) {
  if (width_cells < 1) throw Error(Errc::invalid_config, "width_cells must be >= 1");
  BevLabelGrid mask = make_empty_label_grid(cfg);
  for (const auto& line : lines) {
    if (line.vertices.empty()) continue;
    if (line.vertices.size() == 1) {
      if (const auto cell = cell_index(cfg, line.vertices[0].x, line.vertices[0].y))
        mask.labels[mask.index(cell->row, cell->col)] = 1;
      continue;
    }
    for (std::size_t i = 0; i + 1 < line.vertices.size(); ++i)
      detail::mark_segment(mask, line.vertices[i], line.vertices[i + 1]);
  }

  const int radius = (width_cells - 1) / 2;
  if (radius > 0) {
    const int rows = cfg.rows();
    const int cols = cfg.cols();
    BevLabelGrid dilated = make_empty_label_grid(cfg);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        if (!mask.labels[mask.index(r, c)]) continue;
        for (int dr = -radius; dr <= radius; ++dr) {
          for (int dc = -radius; dc <= radius; ++dc) {
            const int rr = r + dr;
            const int cc = c + dc;
            if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
            dilated.labels[dilated.index(rr, cc)] = 1;
          }
        }
      }
    }
    return dilated;
  }
  return mask;
}

/// K-Lane-style baseline: rasterize both polyline sets with the same width
/// and compare the binary masks cell-wise.
inline MatchCounts raster_polyline_f1(const BevConfig& cfg, const std::vector<Polyline2D>& gts,
                                      const std::vector<Polyline2D>& preds, int width_cells = 1) {
  const BevLabelGrid gt_mask = rasterize_polylines(cfg, gts, width_cells);
  const BevLabelGrid pred_mask = rasterize_polylines(cfg, preds, width_cells);
  return segmentation_f1(gt_mask, pred_mask).lane;
}

// ---------------------------------------------------------------------------
// Dataset aggregation
// ---------------------------------------------------------------------------

enum class AggMode { micro, macro };

/// Per-frame counts for the three report columns. `seg` is absent when a
/// frame carries no point-label ground truth.
struct FrameScores {
  std::optional<MatchCounts> seg;
  MatchCounts raster;
  MatchCounts iam;
  bool iam_vacuous = false;
};

struct TraceScores {
  std::string name;
  std::vector<FrameScores> frames;
};

struct ReportRow {
  std::string trace;
  std::optional<double> seg_f1;
  double raster_f1 = 0.0;
  double iam_f1 = 0.0;
  MatchCounts iam_counts;
};

/// Table-style report: one row per trace plus an Average row whose metric
/// columns are the arithmetic means of the per-trace values.
struct EvalReport {
  std::vector<ReportRow> rows;
  ReportRow average;
};

namespace detail {

/// Trace-level value of one metric column. Micro sums counts then derives
/// F1; macro averages per-frame F1 over frames where the metric is
/// non-vacuous (tp+fn+fp > 0).
template <typename GetCounts>
inline std::pair<std::optional<double>, MatchCounts> column_value(
    const std::vector<FrameScores>& frames, AggMode mode, GetCounts get) {
  MatchCounts total;
  double f1_sum = 0.0;
  std::int64_t scored = 0;
  bool any = false;
  for (const FrameScores& f : frames) {
    const std::optional<MatchCounts> c = get(f);
    if (!c) continue;
    any = true;
    total += *c;
    if (!c->empty()) {
      f1_sum += c->f1();
      ++scored;
    }
  }
  if (!any) return {std::nullopt, total};
  if (mode == AggMode::macro)
    return {scored == 0 ? 0.0 : f1_sum / static_cast<double>(scored), total};
  return {total.f1(), total};
}

}  // namespace detail

/// Builds the per-trace report. Throws Errc::no_frames when every frame is
/// IAM-vacuous (nothing to evaluate).
inline EvalReport aggregate(const std::vector<TraceScores>& traces, AggMode mode = AggMode::micro) {
  std::int64_t non_vacuous = 0;
  for (const auto& t : traces)
    for (const auto& f : t.frames)
      if (!f.iam_vacuous) ++non_vacuous;
  if (non_vacuous == 0) throw Error(Errc::no_frames, "no non-vacuous frames to aggregate");

  EvalReport report;
  double seg_sum = 0.0, raster_sum = 0.0, iam_sum = 0.0;
  std::int64_t seg_rows = 0;
  for (const auto& t : traces) {
    ReportRow row;
    row.trace = t.name;
    auto [seg_f1, seg_counts] = detail::column_value(
        t.frames, mode, [](const FrameScores& f) { return f.seg; });
    auto [raster_f1, raster_counts] = detail::column_value(
        t.frames, mode, [](const FrameScores& f) { return std::optional<MatchCounts>(f.raster); });
    auto [iam_f1, iam_counts] = detail::column_value(
        t.frames, mode,
        [](const FrameScores& f) {
          return f.iam_vacuous ? std::nullopt : std::optional<MatchCounts>(f.iam);
        });
    row.seg_f1 = seg_f1;
    row.raster_f1 = raster_f1.value_or(0.0);
    row.iam_f1 = iam_f1.value_or(0.0);
    row.iam_counts = iam_counts;
    if (row.seg_f1) {
      seg_sum += *row.seg_f1;
      ++seg_rows;
    }
    raster_sum += row.raster_f1;
    iam_sum += row.iam_f1;
    report.rows.push_back(row);
  }

  const auto n = static_cast<double>(report.rows.size());
  report.average.trace = "Average";
  if (seg_rows > 0) report.average.seg_f1 = seg_sum / static_cast<double>(seg_rows);
  report.average.raster_f1 = raster_sum / n;
  report.average.iam_f1 = iam_sum / n;
  for (const auto& row : report.rows) report.average.iam_counts += row.iam_counts;
  return report;
}

}  // namespace lanekit
