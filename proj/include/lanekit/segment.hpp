#pragma once

// BEV segmentation stage. The segmenter is a pluggable contract
// (BevGrid -> BevLabelGrid over the same config), with two implementations:
// a heuristic intensity/height segmenter and a loader for externally
// computed masks (e.g. a neural model run elsewhere).
//
// External mask file layout (binary, little-endian):
//   magic "LKM1" | u32 rows | u32 cols | rows*cols label bytes, row-major,
//   row 0 = x=0 edge.

#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "lanekit/bev.hpp"
#include "lanekit/core.hpp"

namespace lanekit {

using Segmenter = std::function<BevLabelGrid(const BevGrid&)>;

struct HeuristicSegmenterParams {
  double intensity_threshold = 0.45;  // in [0,1]
  double ground_band = 0.30;          // m above ego_ground a cell may reach
  int min_cell_count = 1;
  double ego_ground = 0.0;  // road height in the vehicle frame, m

  void validate() const {
    if (!(intensity_threshold >= 0.0 && intensity_threshold <= 1.0))
      throw Error(Errc::invalid_config, "intensity_threshold must be in [0,1]");
    if (!(ground_band > 0.0)) throw Error(Errc::invalid_config, "ground_band must be > 0");
    if (min_cell_count < 1) throw Error(Errc::invalid_config, "min_cell_count must be >= 1");
  }
};

/// Marks a cell White when it is populated, bright, and near the road plane:
/// point_count >= min_cell_count, max_intensity >= intensity_threshold, and
/// max_height - ego_ground <= ground_band. Everything else is Background.
/// The heuristic never emits Yellow; color comes from external masks or
/// dataset labels. Raising the threshold never adds lane cells.
inline BevLabelGrid segment_heuristic(const HeuristicSegmenterParams& params, const BevGrid& grid) {
  params.validate();
  BevLabelGrid out = make_empty_label_grid(grid.config);
  const std::size_t n = out.labels.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (grid.point_count[i] < params.min_cell_count) continue;
    if (grid.max_intensity[i] < params.intensity_threshold) continue;
    if (grid.max_height[i] - params.ego_ground > params.ground_band) continue;
    out.labels[i] = static_cast<std::uint8_t>(LaneClass::White);
  }
  return out;
}

inline Segmenter make_heuristic_segmenter(const HeuristicSegmenterParams& params) {
  params.validate();
  return [params](const BevGrid& grid) { return segment_heuristic(params, grid); };
}

/// Calls a segmenter and enforces its contract: the output grid must carry
/// the input config (hence dims) and only valid label codes.
inline BevLabelGrid run_segmenter(const Segmenter& segmenter, const BevGrid& grid) {
  BevLabelGrid out = segmenter(grid);
  if (!(out.config == grid.config))
    throw Error(Errc::dims_mismatch, "segmenter changed the grid config");
  const std::size_t n =
      static_cast<std::size_t>(grid.config.rows()) * static_cast<std::size_t>(grid.config.cols());
  if (out.labels.size() != n)
    throw Error(Errc::dims_mismatch, "segmenter output has wrong cell count");
  for (const std::uint8_t v : out.labels)
    if (v > 2) throw Error(Errc::invalid_label_value, "segmenter emitted label code > 2");
  return out;
}

namespace detail {

inline void write_u32_le(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

inline std::uint32_t read_u32_le(std::istream& in, const std::string& path) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  if (!in) throw Error(Errc::io, "truncated file: " + path);
  return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
         (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
}

inline void expect_magic(std::istream& in, const char* magic, const std::string& path) {
  char buf[4];
  in.read(buf, 4);
  if (!in || std::string(buf, 4) != magic)
    throw Error(Errc::parse_error, "bad magic, expected " + std::string(magic) + ": " + path);
}

}  // namespace detail

inline void save_external_mask(const std::string& path, const BevLabelGrid& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot open for writing: " + path);
  out.write("LKM1", 4);
  detail::write_u32_le(out, static_cast<std::uint32_t>(grid.config.rows()));
  detail::write_u32_le(out, static_cast<std::uint32_t>(grid.config.cols()));
  out.write(reinterpret_cast<const char*>(grid.labels.data()),
            static_cast<std::streamsize>(grid.labels.size()));
  if (!out) throw Error(Errc::io, "short write: " + path);
}

/// Loads an externally computed label mask and validates it against `cfg`.
inline BevLabelGrid load_external_mask(const std::string& path, const BevConfig& cfg) {
  cfg.validate();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open: " + path);
  detail::expect_magic(in, "LKM1", path);
  const std::uint32_t rows = detail::read_u32_le(in, path);
  const std::uint32_t cols = detail::read_u32_le(in, path);
  if (rows != static_cast<std::uint32_t>(cfg.rows()) ||
      cols != static_cast<std::uint32_t>(cfg.cols()))
    throw Error(Errc::dims_mismatch, "mask dims " + std::to_string(rows) + "x" +
                                         std::to_string(cols) + " do not match the BEV config: " + path);
  BevLabelGrid g = make_empty_label_grid(cfg);
  in.read(reinterpret_cast<char*>(g.labels.data()), static_cast<std::streamsize>(g.labels.size()));
  if (!in) throw Error(Errc::io, "truncated file: " + path);
  for (const std::uint8_t v : g.labels)
    if (v > 2) throw Error(Errc::invalid_label_value, "mask holds label code > 2: " + path);
  return g;
}

}  // namespace lanekit
