#pragma once

// Bird's-eye-view rasterization: project point clouds onto a fixed 2D cell
// grid in front of the vehicle and accumulate per-cell feature channels.
//
// The default grid covers x in [0,40) m, y in [-15,15) m at 5 cm cells,
// i.e. 800 rows by 600 columns, row 0 at the x=0 edge. ROI intervals are
// half-open so every in-ROI point maps to exactly one cell.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "lanekit/core.hpp"

namespace lanekit {

struct BevConfig {
  double x_min = 0.0;
  double x_max = 40.0;
  double y_min = -15.0;
  double y_max = 15.0;
  double cell_size = 0.05;

  int rows() const { return static_cast<int>(std::llround((x_max - x_min) / cell_size)); }
  int cols() const { return static_cast<int>(std::llround((y_max - y_min) / cell_size)); }

  /// Ranges must be positive and divisible by the cell size.
  void validate() const {
    if (!(cell_size > 0.0) || !(x_max > x_min) || !(y_max > y_min))
      throw Error(Errc::invalid_config, "BEV ranges must be positive");
    const int r = rows();
    const int c = cols();
    if (r < 1 || c < 1 || std::abs(r * cell_size - (x_max - x_min)) > 1e-9 ||
        std::abs(c * cell_size - (y_max - y_min)) > 1e-9)
      throw Error(Errc::invalid_config, "BEV ranges must be divisible by the cell size");
  }

  bool operator==(const BevConfig&) const = default;
};

struct CellIndex {
  int row = 0;
  int col = 0;
  bool operator==(const CellIndex&) const = default;
};

/// Cell containing (x,y), or nullopt outside the half-open ROI.
inline std::optional<CellIndex> cell_index(const BevConfig& cfg, double x, double y) {
  if (!(x >= cfg.x_min && x < cfg.x_max && y >= cfg.y_min && y < cfg.y_max)) return std::nullopt;
  const double inv = 1.0 / cfg.cell_size;
  int row = static_cast<int>(std::floor((x - cfg.x_min) * inv));
  int col = static_cast<int>(std::floor((y - cfg.y_min) * inv));
  // guard rounding at the upper edge
  row = std::min(row, cfg.rows() - 1);
  col = std::min(col, cfg.cols() - 1);
  return CellIndex{row, col};
}

/// Center coordinate of a cell.
inline Vec2 cell_center(const BevConfig& cfg, int row, int col) {
  return {cfg.x_min + (row + 0.5) * cfg.cell_size, cfg.y_min + (col + 0.5) * cfg.cell_size};
}

/// Per-cell feature channels accumulated from a cloud. Cells with
/// point_count == 0 hold zeros in every channel; consumers must check the
/// count before trusting the height channels.
struct BevGrid {
  BevConfig config;
  std::vector<float> max_intensity;
  std::vector<float> max_height;
  std::vector<float> min_height;
  std::vector<std::int32_t> point_count;

  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(config.cols()) +
           static_cast<std::size_t>(col);
  }
};

/// Per-cell class labels (codes 0/1/2), same layout as BevGrid.
struct BevLabelGrid {
  BevConfig config;
  std::vector<std::uint8_t> labels;

  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(config.cols()) +
           static_cast<std::size_t>(col);
  }

  LaneClass at(int row, int col) const { return static_cast<LaneClass>(labels[index(row, col)]); }
};

inline BevGrid make_empty_grid(const BevConfig& cfg) {
  cfg.validate();
  BevGrid g;
  g.config = cfg;
  const std::size_t n = static_cast<std::size_t>(cfg.rows()) * static_cast<std::size_t>(cfg.cols());
  g.max_intensity.assign(n, 0.0f);
  g.max_height.assign(n, 0.0f);
  g.min_height.assign(n, 0.0f);
  g.point_count.assign(n, 0);
  return g;
}

inline BevLabelGrid make_empty_label_grid(const BevConfig& cfg) {
  cfg.validate();
  BevLabelGrid g;
  g.config = cfg;
  g.labels.assign(static_cast<std::size_t>(cfg.rows()) * static_cast<std::size_t>(cfg.cols()), 0);
  return g;
}

/// Projects a cloud onto the grid. Each in-ROI point bumps its cell's count
/// and folds into the max-intensity / max-height / min-height channels;
/// out-of-ROI points are dropped. All channel updates are commutative, so the
/// result does not depend on point order.
inline BevGrid rasterize_cloud(const BevConfig& cfg, const PointCloud& pc) {
  BevGrid g = make_empty_grid(cfg);
  for (const auto& p : pc.points) {
    const auto cell = cell_index(cfg, p.x, p.y);
    if (!cell) continue;
    const std::size_t i = g.index(cell->row, cell->col);
    const float z = static_cast<float>(p.z);
    const float inten = static_cast<float>(p.intensity);
    if (g.point_count[i] == 0) {
      g.max_height[i] = z;
      g.min_height[i] = z;
      g.max_intensity[i] = inten;
    } else {
      g.max_height[i] = std::max(g.max_height[i], z);
      g.min_height[i] = std::min(g.min_height[i], z);
      g.max_intensity[i] = std::max(g.max_intensity[i], inten);
    }
    g.point_count[i] += 1;
  }
  return g;
}

/// Rasterizes per-point class labels. A cell's label is the highest-priority
/// class among its points, with Yellow > White > Background (any lane point
/// makes a lane cell). Label count must match the cloud.
inline BevLabelGrid rasterize_labels(const BevConfig& cfg, const PointCloud& pc,
                                     const std::vector<LaneClass>& labels) {
  if (labels.size() != pc.points.size())
    throw Error(Errc::length_mismatch, "per-point label count does not match cloud size");
  BevLabelGrid g = make_empty_label_grid(cfg);
  for (std::size_t k = 0; k < pc.points.size(); ++k) {
    const auto& p = pc.points[k];
    const auto cell = cell_index(cfg, p.x, p.y);
    if (!cell) continue;
    const std::size_t i = g.index(cell->row, cell->col);
    g.labels[i] = std::max(g.labels[i], static_cast<std::uint8_t>(labels[k]));
  }
  return g;
}

// ---------------------------------------------------------------------------
// Debug image export (binary PGM, row 0 = x=0 edge)
// ---------------------------------------------------------------------------

enum class BevChannel { max_intensity, max_height, min_height, point_count };

inline const char* channel_name(BevChannel c) {
  switch (c) {
    case BevChannel::max_intensity: return "max_intensity";
    case BevChannel::max_height: return "max_height";
    case BevChannel::min_height: return "min_height";
    case BevChannel::point_count: return "point_count";
  }
  return "unknown";
}

/// Writes one channel as an 8-bit binary PGM. Intensity maps [0,1] to
/// [0,255], counts saturate at 255, and heights are min-max normalized over
/// occupied cells (empty cells render black).
inline void write_channel_pgm(const BevGrid& g, BevChannel channel, const std::string& path) {
  const int rows = g.config.rows();
  const int cols = g.config.cols();
  const std::size_t n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  std::vector<std::uint8_t> img(n, 0);

  auto clamp_byte = [](double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0l, 255l));
  };

  switch (channel) {
    case BevChannel::max_intensity:
      for (std::size_t i = 0; i < n; ++i) img[i] = clamp_byte(g.max_intensity[i] * 255.0);
      break;
    case BevChannel::point_count:
      for (std::size_t i = 0; i < n; ++i)
        img[i] = static_cast<std::uint8_t>(std::min<std::int32_t>(g.point_count[i], 255));
      break;
    case BevChannel::max_height:
    case BevChannel::min_height: {
      const auto& h = (channel == BevChannel::max_height) ? g.max_height : g.min_height;
      float lo = 0.0f, hi = 0.0f;
      bool seen = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (g.point_count[i] == 0) continue;
        if (!seen) {
          lo = hi = h[i];
          seen = true;
        } else {
          lo = std::min(lo, h[i]);
          hi = std::max(hi, h[i]);
        }
      }
      const double span = (hi > lo) ? static_cast<double>(hi - lo) : 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (g.point_count[i] == 0) continue;
        img[i] = clamp_byte((h[i] - lo) / span * 255.0);
      }
      break;
    }
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot open for writing: " + path);
  out << "P5\n" << cols << " " << rows << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
  if (!out) throw Error(Errc::io, "short write: " + path);
}

}  // namespace lanekit
