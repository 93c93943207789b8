#pragma once

// Lane extraction from a predicted BEV label grid: lane cells become 2D
// points, anisotropic scaling shrinks longitudinal distances relative to
// lateral ones so dashed segments merge while adjacent lanes stay apart,
// DBSCAN groups the points into lane instances, and a seeded RANSAC fits one
// polynomial y = f(x) per instance that is then sampled into a polyline.
//
// Every step is deterministic for a fixed input order and seed.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "lanekit/bev.hpp"
#include "lanekit/core.hpp"
#include "lanekit/rng.hpp"

namespace lanekit {

struct ExtractParams {
  // Clustering-space scaling (x longitudinal, y lateral). With defaults, a
  // 9 m dash gap contracts to 0.9 while a 3.5 m lane spacing stays 3.5, so
  // eps below separates lanes but bridges dashes.
  double scale_x = 0.1;
  double scale_y = 1.0;
  double dbscan_eps = 0.8;  // in scaled meters
  int dbscan_min_pts = 5;
  int ransac_iters = 200;
  double ransac_inlier_tol = 0.10;  // m
  int poly_degree = 3;
  int min_cluster_cells = 20;
  double sample_step = 1.0;  // m between output polyline vertices
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (!(scale_x > 0.0 && scale_y > 0.0))
      throw Error(Errc::non_positive_scale, "scale factors must be > 0");
    if (!(dbscan_eps > 0.0)) throw Error(Errc::invalid_config, "dbscan_eps must be > 0");
    if (dbscan_min_pts < 1) throw Error(Errc::invalid_config, "dbscan_min_pts must be >= 1");
    if (ransac_iters < 1) throw Error(Errc::invalid_config, "ransac_iters must be >= 1");
    if (!(ransac_inlier_tol > 0.0))
      throw Error(Errc::invalid_config, "ransac_inlier_tol must be > 0");
    if (poly_degree < 1) throw Error(Errc::invalid_config, "poly_degree must be >= 1");
    if (min_cluster_cells < 1) throw Error(Errc::invalid_config, "min_cluster_cells must be >= 1");
    if (!(sample_step > 0.0)) throw Error(Errc::invalid_config, "sample_step must be > 0");
  }
};

struct Cluster {
  std::vector<Vec2> points;  // unscaled BEV coordinates
  LaneClass cls = LaneClass::White;
};

/// Lane cells of one class turned into their center coordinates.
struct ClassPoints {
  LaneClass cls = LaneClass::White;
  std::vector<Vec2> points;
};

/// Emits the center coordinate of every non-background cell, grouped by
/// class. Cells are visited row-major, so point order is deterministic.
inline std::vector<ClassPoints> cells_to_points(const BevLabelGrid& grid) {
  std::vector<ClassPoints> out;
  out.push_back({LaneClass::White, {}});
  out.push_back({LaneClass::Yellow, {}});
  const int rows = grid.config.rows();
  const int cols = grid.config.cols();
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const LaneClass cls = grid.at(r, c);
      if (!is_lane(cls)) continue;
      const Vec2 center = cell_center(grid.config, r, c);
      out[cls == LaneClass::White ? 0 : 1].points.push_back(center);
    }
  }
  return out;
}

/// Componentwise (x,y) -> (sx*x, sy*y). Used only inside the clustering
/// distance space; fitting happens on unscaled coordinates.
inline std::vector<Vec2> anisotropic_scale(double sx, double sy, const std::vector<Vec2>& pts) {
  if (!(sx > 0.0 && sy > 0.0))
    throw Error(Errc::non_positive_scale, "scale factors must be > 0");
  std::vector<Vec2> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back({p.x * sx, p.y * sy});
  return out;
}

/// DBSCAN with standard semantics: a core point has >= min_pts neighbors
/// within eps (Euclidean, inclusive, counting itself); clusters are maximal
/// density-connected sets. Returns one label per point: cluster id >= 0 or
/// -1 for noise. Points are scanned in index order and neighbor lists are
/// index-sorted, so border points attach to the first-created cluster that
/// reaches them and the labeling is deterministic for a fixed input order.
inline std::vector<int> dbscan(double eps, int min_pts, const std::vector<Vec2>& pts) {
  const std::size_t n = pts.size();
  std::vector<int> labels(n, -2);  // -2 unvisited, -1 noise
  if (n == 0) return labels;

  // eps-sized buckets so neighborhood queries only touch the 3x3 block.
  const double inv_eps = 1.0 / eps;
  auto bucket_key = [&](const Vec2& p) {
    const auto bx = static_cast<std::int64_t>(std::floor(p.x * inv_eps));
    const auto by = static_cast<std::int64_t>(std::floor(p.y * inv_eps));
    return (static_cast<std::uint64_t>(bx) << 32) ^ static_cast<std::uint32_t>(by);
  };
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets;
  buckets.reserve(n);
  for (std::size_t i = 0; i < n; ++i) buckets[bucket_key(pts[i])].push_back(static_cast<std::uint32_t>(i));

  const double eps2 = eps * eps;
  std::vector<std::uint32_t> nb;
  auto neighbors = [&](std::size_t i, std::vector<std::uint32_t>& out) {
    out.clear();
    const auto bx = static_cast<std::int64_t>(std::floor(pts[i].x * inv_eps));
    const auto by = static_cast<std::int64_t>(std::floor(pts[i].y * inv_eps));
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const std::uint64_t key =
            (static_cast<std::uint64_t>(bx + dx) << 32) ^ static_cast<std::uint32_t>(by + dy);
        const auto it = buckets.find(key);
        if (it == buckets.end()) continue;
        for (const std::uint32_t j : it->second) {
          const double ddx = pts[i].x - pts[j].x;
          const double ddy = pts[i].y - pts[j].y;
          if (ddx * ddx + ddy * ddy <= eps2) out.push_back(j);
        }
      }
    }
    std::sort(out.begin(), out.end());
  };

  int next_cluster = 0;
  std::vector<std::uint32_t> seed_nb;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != -2) continue;
    neighbors(i, nb);
    if (nb.size() < static_cast<std::size_t>(min_pts)) {
      labels[i] = -1;
      continue;
    }
    const int cluster = next_cluster++;
    labels[i] = cluster;
    std::queue<std::uint32_t> frontier;
    for (const std::uint32_t j : nb)
      if (j != i) frontier.push(j);
    while (!frontier.empty()) {
      const std::uint32_t q = frontier.front();
      frontier.pop();
      if (labels[q] == -1) labels[q] = cluster;  // border point
      if (labels[q] != -2) continue;
      labels[q] = cluster;
      neighbors(q, seed_nb);
      if (seed_nb.size() >= static_cast<std::size_t>(min_pts)) {
        for (const std::uint32_t j : seed_nb)
          if (labels[j] == -2 || labels[j] == -1) frontier.push(j);
      }
    }
  }
  return labels;
}

/// A fitted polynomial y = sum_i coeffs[i] * x^i plus the indices of the
/// cluster points it counted as inliers.
struct PolyFit {
  std::vector<double> coeffs;
  std::vector<std::size_t> inliers;

  double eval(double x) const {
    double acc = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * x + coeffs[i];
    return acc;
  }
};

namespace detail {

/// Exact polynomial through degree+1 points with pairwise distinct x.
inline std::vector<double> solve_exact_poly(const std::vector<Vec2>& pts,
                                            const std::vector<std::size_t>& idx, int degree) {
  const int k = degree + 1;
  Eigen::MatrixXd a(k, k);
  Eigen::VectorXd b(k);
  for (int r = 0; r < k; ++r) {
    const Vec2& p = pts[idx[static_cast<std::size_t>(r)]];
    double pw = 1.0;
    for (int c = 0; c < k; ++c) {
      a(r, c) = pw;
      pw *= p.x;
    }
    b(r) = p.y;
  }
  const Eigen::VectorXd sol = a.partialPivLu().solve(b);
  return std::vector<double>(sol.data(), sol.data() + k);
}

/// Least-squares polynomial over the given point subset.
inline std::vector<double> solve_ls_poly(const std::vector<Vec2>& pts,
                                         const std::vector<std::size_t>& idx, int degree) {
  const int k = degree + 1;
  const int n = static_cast<int>(idx.size());
  Eigen::MatrixXd a(n, k);
  Eigen::VectorXd b(n);
  for (int r = 0; r < n; ++r) {
    const Vec2& p = pts[idx[static_cast<std::size_t>(r)]];
    double pw = 1.0;
    for (int c = 0; c < k; ++c) {
      a(r, c) = pw;
      pw *= p.x;
    }
    b(r) = p.y;
  }
  const Eigen::VectorXd sol = a.colPivHouseholderQr().solve(b);
  return std::vector<double>(sol.data(), sol.data() + k);
}

}  // namespace detail

/// Robust polynomial fit. Draws `ransac_iters` minimal samples of degree+1
/// points from the seeded engine, keeps the model with the most inliers
/// (|y - f(x)| <= ransac_inlier_tol; ties broken by lower mean absolute
/// inlier residual, then by earlier iteration), and refits the winner by
/// least squares on its inliers. Samples with duplicated x cannot pin a
/// polynomial and are skipped, consuming their iteration.
///
/// Throws Errc::too_few_points below degree+1 points; returns nullopt when
/// every iteration drew a degenerate sample.
inline std::optional<PolyFit> ransac_poly_fit(const ExtractParams& params, const Cluster& cluster) {
  params.validate();
  const std::vector<Vec2>& pts = cluster.points;
  const std::size_t n = pts.size();
  const std::size_t k = static_cast<std::size_t>(params.poly_degree) + 1;
  if (n < k)
    throw Error(Errc::too_few_points,
                "cluster has " + std::to_string(n) + " points, need " + std::to_string(k));

  std::mt19937_64 rng(params.rng_seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  bool have_best = false;
  std::size_t best_inliers = 0;
  double best_residual = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_sample;

  std::vector<std::size_t> sample(k);
  std::vector<double> xs(k);
  for (int it = 0; it < params.ransac_iters; ++it) {
    // partial Fisher-Yates; `order` stays a permutation across iterations
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t r = j + uniform_index(rng, n - j);
      std::swap(order[j], order[r]);
      sample[j] = order[j];
    }
    for (std::size_t j = 0; j < k; ++j) xs[j] = pts[sample[j]].x;
    std::sort(xs.begin(), xs.end());
    if (std::adjacent_find(xs.begin(), xs.end()) != xs.end()) continue;  // degenerate

    const std::vector<double> coeffs = detail::solve_exact_poly(pts, sample, params.poly_degree);
    PolyFit candidate{coeffs, {}};

    std::size_t inliers = 0;
    double residual_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = std::abs(pts[i].y - candidate.eval(pts[i].x));
      if (r <= params.ransac_inlier_tol) {
        ++inliers;
        residual_sum += r;
      }
    }
    const double mean_residual = residual_sum / static_cast<double>(inliers);
    if (!have_best || inliers > best_inliers ||
        (inliers == best_inliers && mean_residual < best_residual)) {
      have_best = true;
      best_inliers = inliers;
      best_residual = mean_residual;
      best_sample = sample;
    }
  }
  if (!have_best) return std::nullopt;

  // rebuild the winning model and its inlier set, then refit on the inliers
  const std::vector<double> winner = detail::solve_exact_poly(pts, best_sample, params.poly_degree);
  PolyFit fit{winner, {}};
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(pts[i].y - fit.eval(pts[i].x)) <= params.ransac_inlier_tol)
      fit.inliers.push_back(i);
  }
  fit.coeffs = detail::solve_ls_poly(pts, fit.inliers, params.poly_degree);
  return fit;
}

/// Full extraction: label grid in, lane polylines out. Per class, lane cells
/// become points, clusters below min_cluster_cells are dropped, each
/// surviving cluster is RANSAC-fitted, and the fit is sampled every
/// sample_step meters over the inliers' x extent (z = 0; the pipeline works
/// in the BEV plane). Output is sorted by lateral position at the domain
/// midpoint. Frames without lane cells yield an empty result.
inline std::vector<Polyline3D> extract_lanes(const ExtractParams& params,
                                             const BevLabelGrid& grid) {
  params.validate();
  struct Keyed {
    double mid_y;
    Polyline3D line;
  };
  std::vector<Keyed> keyed;

  for (const ClassPoints& cp : cells_to_points(grid)) {
    if (cp.points.empty()) continue;
    const std::vector<Vec2> scaled = anisotropic_scale(params.scale_x, params.scale_y, cp.points);
    const std::vector<int> labels = dbscan(params.dbscan_eps, params.dbscan_min_pts, scaled);

    int num_clusters = 0;
    for (const int l : labels) num_clusters = std::max(num_clusters, l + 1);
    std::vector<Cluster> clusters(static_cast<std::size_t>(num_clusters));
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] < 0) continue;
      auto& cluster = clusters[static_cast<std::size_t>(labels[i])];
      cluster.cls = cp.cls;
      cluster.points.push_back(cp.points[i]);  // unscaled coordinates
    }

    for (const Cluster& cluster : clusters) {
      if (cluster.points.size() < static_cast<std::size_t>(params.min_cluster_cells)) continue;
      if (cluster.points.size() < static_cast<std::size_t>(params.poly_degree) + 1) continue;
      const auto fit = ransac_poly_fit(params, cluster);
      if (!fit) continue;

      double x_lo = std::numeric_limits<double>::infinity();
      double x_hi = -std::numeric_limits<double>::infinity();
      for (const std::size_t i : fit->inliers) {
        x_lo = std::min(x_lo, cluster.points[i].x);
        x_hi = std::max(x_hi, cluster.points[i].x);
      }
      if (!(x_hi > x_lo)) continue;  // degenerate single-column cluster

      Polyline3D line;
      line.cls = cluster.cls;
      for (int s = 0;; ++s) {
        const double x = x_lo + s * params.sample_step;
        if (x >= x_hi) break;
        line.vertices.push_back({x, fit->eval(x), 0.0});
      }
      if (line.vertices.empty() || x_hi - line.vertices.back().x > 1e-9)
        line.vertices.push_back({x_hi, fit->eval(x_hi), 0.0});
      if (line.vertices.size() < 2) continue;

      keyed.push_back({fit->eval(0.5 * (x_lo + x_hi)), std::move(line)});
    }
  }

  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const Keyed& a, const Keyed& b) { return a.mid_y < b.mid_y; });
  std::vector<Polyline3D> out;
  out.reserve(keyed.size());
  for (auto& k : keyed) out.push_back(std::move(k.line));
  return out;
}

}  // namespace lanekit
