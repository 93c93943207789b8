#pragma once

// Canonical on-disk dataset model and its loaders.
//
// A trace (one continuous driving sequence) is a manifest.json next to its
// payload files; all paths inside a manifest resolve relative to the
// manifest's directory. Formats:
//
//   point cloud   binary: "LKC1" | u32 LE count | count * 4 f32 LE (x,y,z,i)
//   point labels  binary: "LKL1" | u32 LE count | count label bytes
//   polylines     JSON:   [{"class": 1|2, "points": [[x,y,z], ...]}, ...]
//   manifest      JSON:   trace_id, split, attributes, frames[]; each frame
//                 entry holds frame_id, timestamp_us, cloud_path, optional
//                 labels_path / polylines_path, and optional odom_to_next --
//                 a 4x4 row-major matrix taking this frame's coordinates
//                 into the NEXT frame's coordinates.
//
// Third-party layouts plug in through the adapter registry at the bottom;
// everything downstream consumes the canonical model only.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "lanekit/core.hpp"
#include "lanekit/segment.hpp"

namespace lanekit {

// ---------------------------------------------------------------------------
// Bulk payload formats
// ---------------------------------------------------------------------------

namespace detail {

inline void write_f32_le(std::ostream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32_le(out, bits);
}

inline float read_f32_le(std::istream& in, const std::string& path) {
  const std::uint32_t bits = read_u32_le(in, path);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace detail

/// Coordinates and intensity are stored as f32; values already representable
/// in f32 round-trip losslessly.
inline void write_point_cloud(const std::filesystem::path& path, const PointCloud& pc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot open for writing: " + path.string());
  out.write("LKC1", 4);
  detail::write_u32_le(out, static_cast<std::uint32_t>(pc.points.size()));
  for (const auto& p : pc.points) {
    detail::write_f32_le(out, static_cast<float>(p.x));
    detail::write_f32_le(out, static_cast<float>(p.y));
    detail::write_f32_le(out, static_cast<float>(p.z));
    detail::write_f32_le(out, static_cast<float>(p.intensity));
  }
  if (!out) throw Error(Errc::io, "short write: " + path.string());
}

inline PointCloud read_point_cloud(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::missing_file, "cannot open: " + path.string());
  const std::string name = path.string();
  detail::expect_magic(in, "LKC1", name);
  const std::uint32_t count = detail::read_u32_le(in, name);
  PointCloud pc;
  pc.points.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Point3 p;
    p.x = detail::read_f32_le(in, name);
    p.y = detail::read_f32_le(in, name);
    p.z = detail::read_f32_le(in, name);
    p.intensity = detail::read_f32_le(in, name);
    if (!is_finite(p)) throw Error(Errc::parse_error, "non-finite point in " + name);
    pc.points.push_back(p);
  }
  return pc;
}

inline void write_point_labels(const std::filesystem::path& path,
                               const std::vector<LaneClass>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot open for writing: " + path.string());
  out.write("LKL1", 4);
  detail::write_u32_le(out, static_cast<std::uint32_t>(labels.size()));
  for (const LaneClass c : labels) out.put(static_cast<char>(c));
  if (!out) throw Error(Errc::io, "short write: " + path.string());
}

inline std::vector<LaneClass> read_point_labels(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::missing_file, "cannot open: " + path.string());
  const std::string name = path.string();
  detail::expect_magic(in, "LKL1", name);
  const std::uint32_t count = detail::read_u32_le(in, name);
  std::vector<LaneClass> labels;
  labels.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const int byte = in.get();
    if (byte == std::char_traits<char>::eof()) throw Error(Errc::io, "truncated file: " + name);
    const auto cls = lane_class_from_code(static_cast<unsigned>(byte));
    if (!cls) throw Error(Errc::invalid_label_value, "label code > 2 in " + name);
    labels.push_back(*cls);
  }
  return labels;
}

inline void write_polylines(const std::filesystem::path& path,
                            const std::vector<Polyline3D>& lines) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& line : lines) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& v : line.vertices) pts.push_back({v.x, v.y, v.z});
    arr.push_back({{"class", static_cast<int>(line.cls)}, {"points", std::move(pts)}});
  }
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot open for writing: " + path.string());
  out << arr.dump(2) << "\n";
  if (!out) throw Error(Errc::io, "short write: " + path.string());
}

inline std::vector<Polyline3D> read_polylines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::missing_file, "cannot open: " + path.string());
  nlohmann::json arr;
  try {
    in >> arr;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, path.string() + ": " + e.what());
  }
  if (!arr.is_array()) throw Error(Errc::parse_error, path.string() + ": expected a JSON array");
  std::vector<Polyline3D> lines;
  for (const auto& item : arr) {
    Polyline3D line;
    const int code = item.at("class").get<int>();
    const auto cls = lane_class_from_code(static_cast<unsigned>(code));
    if (!cls || !is_lane(*cls))
      throw Error(Errc::invalid_label_value,
                  path.string() + ": polyline class must be 1 or 2, got " + std::to_string(code));
    line.cls = *cls;
    for (const auto& pt : item.at("points")) {
      if (!pt.is_array() || pt.size() != 3)
        throw Error(Errc::parse_error, path.string() + ": polyline points must be [x,y,z]");
      line.vertices.push_back({pt[0].get<double>(), pt[1].get<double>(), pt[2].get<double>()});
    }
    validate_lane_polyline(line, path.string());
    lines.push_back(std::move(line));
  }
  return lines;
}

// ---------------------------------------------------------------------------
// Manifest model
// ---------------------------------------------------------------------------

enum class Split { train, val, test };
enum class RoadType { city, expressway, highway };
enum class Weather { sunny, cloudy, rainy };
enum class Traffic { low, mid };

struct TraceAttributes {
  RoadType road_type = RoadType::highway;
  Weather weather = Weather::sunny;
  Traffic traffic = Traffic::low;
  bool roadwork = false;
};

struct FrameEntry {
  std::string frame_id;
  std::int64_t timestamp_us = 0;
  std::string cloud_path;
  std::optional<std::string> labels_path;
  std::optional<std::string> polylines_path;
  std::optional<RigidTransform> odom_to_next;
};

struct TraceManifest {
  std::string trace_id;
  Split split = Split::train;
  TraceAttributes attributes;
  std::vector<FrameEntry> frames;
};

namespace detail {

template <typename Enum>
inline Enum parse_enum(const std::string& s, std::initializer_list<std::pair<const char*, Enum>> table,
                       Errc errc, const std::string& what) {
  for (const auto& [name, value] : table)
    if (s == name) return value;
  throw Error(errc, "invalid " + what + ": '" + s + "'");
}

}  // namespace detail

inline Split parse_split(const std::string& s) {
  return detail::parse_enum<Split>(
      s, {{"train", Split::train}, {"val", Split::val}, {"test", Split::test}}, Errc::invalid_split,
      "split");
}
inline const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

inline RoadType parse_road_type(const std::string& s) {
  return detail::parse_enum<RoadType>(s,
                                      {{"city", RoadType::city},
                                       {"expressway", RoadType::expressway},
                                       {"highway", RoadType::highway}},
                                      Errc::parse_error, "road_type");
}
inline const char* road_type_name(RoadType r) {
  switch (r) {
    case RoadType::city: return "city";
    case RoadType::expressway: return "expressway";
    case RoadType::highway: return "highway";
  }
  return "?";
}

inline Weather parse_weather(const std::string& s) {
  return detail::parse_enum<Weather>(
      s, {{"sunny", Weather::sunny}, {"cloudy", Weather::cloudy}, {"rainy", Weather::rainy}},
      Errc::parse_error, "weather");
}
inline const char* weather_name(Weather w) {
  switch (w) {
    case Weather::sunny: return "sunny";
    case Weather::cloudy: return "cloudy";
    case Weather::rainy: return "rainy";
  }
  return "?";
}

inline Traffic parse_traffic(const std::string& s) {
  return detail::parse_enum<Traffic>(s, {{"low", Traffic::low}, {"mid", Traffic::mid}},
                                     Errc::parse_error, "traffic");
}
inline const char* traffic_name(Traffic t) {
  switch (t) {
    case Traffic::low: return "low";
    case Traffic::mid: return "mid";
  }
  return "?";
}

namespace detail {

inline nlohmann::json transform_to_json(const RigidTransform& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < 4; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < 4; ++c) row.push_back(t.m[r][c]);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline RigidTransform transform_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4)
    throw Error(Errc::parse_error, where + ": odometry must be a 4x4 row-major array");
  RigidTransform t;
  for (int r = 0; r < 4; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || row.size() != 4)
      throw Error(Errc::parse_error, where + ": odometry must be a 4x4 row-major array");
    for (int c = 0; c < 4; ++c) t.m[r][c] = row[static_cast<std::size_t>(c)].get<double>();
  }
  if (!t.valid())
    throw Error(Errc::invalid_transform, where + ": odometry is not a rigid motion");
  return t;
}

}  // namespace detail

inline void write_manifest(const std::filesystem::path& path, const TraceManifest& m) {
  nlohmann::json j;
  j["trace_id"] = m.trace_id;
  j["split"] = split_name(m.split);
  j["attributes"] = {{"road_type", road_type_name(m.attributes.road_type)},
                     {"weather", weather_name(m.attributes.weather)},
                     {"traffic", traffic_name(m.attributes.traffic)},
                     {"roadwork", m.attributes.roadwork}};
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& f : m.frames) {
    nlohmann::json entry;
    entry["frame_id"] = f.frame_id;
    entry["timestamp_us"] = f.timestamp_us;
    entry["cloud_path"] = f.cloud_path;
    if (f.labels_path) entry["labels_path"] = *f.labels_path;
    if (f.polylines_path) entry["polylines_path"] = *f.polylines_path;
    if (f.odom_to_next) entry["odom_to_next"] = detail::transform_to_json(*f.odom_to_next);
    frames.push_back(std::move(entry));
  }
  j["frames"] = std::move(frames);
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw Error(Errc::io, "short write: " + path.string());
}

/// Annotations attached to one frame. Point labels parallel the cloud's
/// point order; polylines may extend beyond the BEV ROI (they are clipped at
/// evaluation time, never on load).
struct FrameAnnotations {
  std::optional<std::vector<LaneClass>> point_labels;
  std::vector<Polyline3D> polylines;
};

struct FrameData {
  PointCloud cloud;
  FrameAnnotations annotations;
};

/// A loaded trace: validated manifest plus lazy, per-frame payload access.
/// Frame payloads are read from disk on each call; a Trace is immutable and
/// safe to share across threads.
class Trace {
 public:
  static Trace load(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw Error(Errc::missing_file, "cannot open: " + manifest_path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::parse_error, manifest_path.string() + ": " + e.what());
    }

    Trace t;
    t.base_dir_ = manifest_path.parent_path();
    try {
      t.manifest_.trace_id = j.at("trace_id").get<std::string>();
      t.manifest_.split = parse_split(j.at("split").get<std::string>());
      const auto& attrs = j.at("attributes");
      t.manifest_.attributes.road_type = parse_road_type(attrs.at("road_type").get<std::string>());
      t.manifest_.attributes.weather = parse_weather(attrs.at("weather").get<std::string>());
      t.manifest_.attributes.traffic = parse_traffic(attrs.at("traffic").get<std::string>());
      t.manifest_.attributes.roadwork = attrs.at("roadwork").get<bool>();
      for (const auto& entry : j.at("frames")) {
        FrameEntry f;
        f.frame_id = entry.at("frame_id").get<std::string>();
        f.timestamp_us = entry.at("timestamp_us").get<std::int64_t>();
        f.cloud_path = entry.at("cloud_path").get<std::string>();
        if (entry.contains("labels_path")) f.labels_path = entry["labels_path"].get<std::string>();
        if (entry.contains("polylines_path"))
          f.polylines_path = entry["polylines_path"].get<std::string>();
        if (entry.contains("odom_to_next"))
          f.odom_to_next = detail::transform_from_json(
              entry["odom_to_next"], manifest_path.string() + " frame " + f.frame_id);
        t.manifest_.frames.push_back(std::move(f));
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::parse_error, manifest_path.string() + ": " + e.what());
    }

    // frame ids unique, timestamps ordered, referenced files present
    std::map<std::string, int> seen;
    std::int64_t prev_ts = std::numeric_limits<std::int64_t>::min();
    for (const auto& f : t.manifest_.frames) {
      if (++seen[f.frame_id] > 1)
        throw Error(Errc::parse_error, "duplicate frame_id '" + f.frame_id + "' in " +
                                           manifest_path.string());
      if (f.timestamp_us <= prev_ts)
        throw Error(Errc::parse_error,
                    "frames out of timestamp order at '" + f.frame_id + "' in " +
                        manifest_path.string());
      prev_ts = f.timestamp_us;
      for (const auto* rel : {&f.cloud_path}) {
        if (!std::filesystem::exists(t.base_dir_ / *rel))
          throw Error(Errc::missing_file, "missing payload: " + (t.base_dir_ / *rel).string());
      }
      for (const auto& opt : {f.labels_path, f.polylines_path}) {
        if (opt && !std::filesystem::exists(t.base_dir_ / *opt))
          throw Error(Errc::missing_file, "missing payload: " + (t.base_dir_ / *opt).string());
      }
    }
    return t;
  }

  const TraceManifest& manifest() const { return manifest_; }
  const std::filesystem::path& base_dir() const { return base_dir_; }
  std::size_t frame_count() const { return manifest_.frames.size(); }

  std::size_t index_of(const std::string& frame_id) const {
    for (std::size_t i = 0; i < manifest_.frames.size(); ++i)
      if (manifest_.frames[i].frame_id == frame_id) return i;
    throw Error(Errc::unknown_frame,
                "frame '" + frame_id + "' not in trace " + manifest_.trace_id);
  }

  PointCloud load_cloud(std::size_t index) const {
    const FrameEntry& f = entry(index);
    PointCloud pc = read_point_cloud(base_dir_ / f.cloud_path);
    pc.frame_id = f.frame_id;
    pc.timestamp_us = f.timestamp_us;
    return pc;
  }

  /// Loads cloud plus annotations and cross-validates them (label count must
  /// match the cloud's point count).
  FrameData load_frame(std::size_t index) const {
    const FrameEntry& f = entry(index);
    FrameData data;
    data.cloud = load_cloud(index);
    if (f.labels_path) {
      auto labels = read_point_labels(base_dir_ / *f.labels_path);
      if (labels.size() != data.cloud.points.size())
        throw Error(Errc::label_count_mismatch,
                    "frame '" + f.frame_id + "': " + std::to_string(labels.size()) +
                        " labels for " + std::to_string(data.cloud.points.size()) + " points");
      data.annotations.point_labels = std::move(labels);
    }
    if (f.polylines_path)
      data.annotations.polylines = read_polylines(base_dir_ / *f.polylines_path);
    return data;
  }

 private:
  const FrameEntry& entry(std::size_t index) const {
    if (index >= manifest_.frames.size())
      throw Error(Errc::unknown_frame, "frame index " + std::to_string(index) +
                                           " out of range in trace " + manifest_.trace_id);
    return manifest_.frames[index];
  }

  TraceManifest manifest_;
  std::filesystem::path base_dir_;
};

inline Trace load_trace(const std::filesystem::path& manifest_path) {
  return Trace::load(manifest_path);
}

// ---------------------------------------------------------------------------
// Multi-frame fusion
// ---------------------------------------------------------------------------

/// Fuses frames center-k .. center into the center frame by composing the
/// per-step odometry transforms (T_center<-i = odom_{center-1} * ... *
/// odom_i). Points are concatenated oldest first; the center cloud passes
/// through unchanged. k = 0 is the identity on the center cloud.
inline PointCloud fuse_frames(const Trace& trace, const std::string& center_frame_id, int k) {
  if (k < 0) throw Error(Errc::invalid_config, "fusion depth k must be >= 0");
  const std::size_t center = trace.index_of(center_frame_id);
  if (static_cast<std::size_t>(k) > center)
    throw Error(Errc::unknown_frame,
                "fusion needs " + std::to_string(k) + " frames before '" + center_frame_id + "'");

  // to_center[j] transforms frame (center-k+j) into the center frame.
  std::vector<RigidTransform> to_center(static_cast<std::size_t>(k) + 1);
  to_center[static_cast<std::size_t>(k)] = RigidTransform::identity();
  for (int j = k - 1; j >= 0; --j) {
    const std::size_t frame_index = center - static_cast<std::size_t>(k) + static_cast<std::size_t>(j);
    const auto& odom = trace.manifest().frames[frame_index].odom_to_next;
    if (!odom)
      throw Error(Errc::missing_odometry,
                  "frame '" + trace.manifest().frames[frame_index].frame_id +
                      "' has no odometry link");
    to_center[static_cast<std::size_t>(j)] =
        to_center[static_cast<std::size_t>(j) + 1].compose(*odom);
  }

  PointCloud fused;
  for (int j = 0; j <= k; ++j) {
    const std::size_t frame_index = center - static_cast<std::size_t>(k) + static_cast<std::size_t>(j);
    const PointCloud cloud =
        apply_transform(to_center[static_cast<std::size_t>(j)], trace.load_cloud(frame_index));
    fused.points.insert(fused.points.end(), cloud.points.begin(), cloud.points.end());
    if (j == k) {
      fused.frame_id = cloud.frame_id;
      fused.timestamp_us = cloud.timestamp_us;
    }
  }
  return fused;
}

// ---------------------------------------------------------------------------
// Dataset statistics
// ---------------------------------------------------------------------------

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::int64_t> bins;
  std::int64_t total = 0;

  void add(double v) {
    const auto n = static_cast<std::int64_t>(bins.size());
    auto b = static_cast<std::int64_t>(std::floor((v - lo) / (hi - lo) * static_cast<double>(n)));
    b = std::clamp<std::int64_t>(b, 0, n - 1);
    ++bins[static_cast<std::size_t>(b)];
    ++total;
  }
};

struct AttributeCount {
  std::string label;
  std::int64_t count = 0;
  double percent = 0.0;  // of traces
};

struct StatsReport {
  std::int64_t trace_count = 0;
  std::int64_t frame_count = 0;
  std::int64_t polyline_count = 0;
  Histogram straightness{0.0, 1.0, std::vector<std::int64_t>(20, 0), 0};
  std::map<std::int64_t, std::int64_t> lanes_per_frame;  // lane count -> frames
  std::vector<AttributeCount> road_type;
  std::vector<AttributeCount> weather;
  std::vector<AttributeCount> traffic;
  std::vector<AttributeCount> roadwork;
};

/// Dataset statistics over one or more traces: per-polyline straightness
/// histogram (20 bins over [0,1]), lane-line count per frame, and the
/// trace-attribute distribution with percentages.
inline StatsReport dataset_stats(const std::vector<Trace>& traces) {
  StatsReport report;
  report.trace_count = static_cast<std::int64_t>(traces.size());

  std::map<RoadType, std::int64_t> roads;
  std::map<Weather, std::int64_t> weathers;
  std::map<Traffic, std::int64_t> traffics;
  std::int64_t roadwork_yes = 0;

  for (const Trace& trace : traces) {
    const auto& attrs = trace.manifest().attributes;
    ++roads[attrs.road_type];
    ++weathers[attrs.weather];
    ++traffics[attrs.traffic];
    if (attrs.roadwork) ++roadwork_yes;

    for (std::size_t i = 0; i < trace.frame_count(); ++i) {
      ++report.frame_count;
      const auto& entry = trace.manifest().frames[i];
      std::vector<Polyline3D> polylines;
      if (entry.polylines_path)
        polylines = read_polylines(trace.base_dir() / *entry.polylines_path);
      ++report.lanes_per_frame[static_cast<std::int64_t>(polylines.size())];
      for (const auto& line : polylines) {
        ++report.polyline_count;
        report.straightness.add(pearson_straightness(line));
      }
    }
  }

  const auto pct = [&](std::int64_t c) {
    return report.trace_count == 0
               ? 0.0
               : 100.0 * static_cast<double>(c) / static_cast<double>(report.trace_count);
  };
  for (const RoadType r : {RoadType::city, RoadType::expressway, RoadType::highway})
    report.road_type.push_back({road_type_name(r), roads[r], pct(roads[r])});
  for (const Weather w : {Weather::sunny, Weather::cloudy, Weather::rainy})
    report.weather.push_back({weather_name(w), weathers[w], pct(weathers[w])});
  for (const Traffic t : {Traffic::mid, Traffic::low})
    report.traffic.push_back({traffic_name(t), traffics[t], pct(traffics[t])});
  report.roadwork.push_back({"no", report.trace_count - roadwork_yes,
                             pct(report.trace_count - roadwork_yes)});
  report.roadwork.push_back({"yes", roadwork_yes, pct(roadwork_yes)});
  return report;
}

// ---------------------------------------------------------------------------
// Split validation
// ---------------------------------------------------------------------------

struct SplitReport {
  std::int64_t train_count = 0;
  std::int64_t val_count = 0;
  std::int64_t test_count = 0;
  std::vector<std::string> warnings;

  bool ok() const { return warnings.empty(); }
};

/// Checks the stratification expected of a split: every split should be
/// non-empty and contain at least one trace with each rare condition (rain,
/// mid traffic, roadwork, city driving). Violations come back as warnings.
inline SplitReport validate_split(const std::vector<TraceManifest>& manifests) {
  SplitReport report;
  struct Coverage {
    std::int64_t count = 0;
    bool rainy = false, mid = false, roadwork = false, city = false;
  };
  std::map<Split, Coverage> per_split;
  for (const auto& m : manifests) {
    Coverage& c = per_split[m.split];
    ++c.count;
    c.rainy |= m.attributes.weather == Weather::rainy;
    c.mid |= m.attributes.traffic == Traffic::mid;
    c.roadwork |= m.attributes.roadwork;
    c.city |= m.attributes.road_type == RoadType::city;
  }
  report.train_count = per_split[Split::train].count;
  report.val_count = per_split[Split::val].count;
  report.test_count = per_split[Split::test].count;

  for (const Split s : {Split::train, Split::val, Split::test}) {
    const Coverage& c = per_split[s];
    const std::string name = split_name(s);
    if (c.count == 0) {
      report.warnings.push_back("split '" + name + "' has no traces");
      continue;
    }
    if (!c.rainy) report.warnings.push_back("split '" + name + "' has no rainy trace");
    if (!c.mid) report.warnings.push_back("split '" + name + "' has no mid-traffic trace");
    if (!c.roadwork) report.warnings.push_back("split '" + name + "' has no roadwork trace");
    if (!c.city) report.warnings.push_back("split '" + name + "' has no city trace");
  }
  return report;
}

// ---------------------------------------------------------------------------
// Adapter registry (extension point for third-party dataset layouts)
// ---------------------------------------------------------------------------

/// An adapter converts some external dataset layout into a canonical trace
/// on disk and returns the written manifest path. Register one under a name
/// and fetch it where ingestion happens; the rest of the toolkit only ever
/// sees canonical traces.
using DatasetAdapter =
    std::function<std::filesystem::path(const std::filesystem::path& source,
                                        const std::filesystem::path& out_dir)>;

inline std::map<std::string, DatasetAdapter>& adapter_registry() {
  static std::map<std::string, DatasetAdapter> registry;
  return registry;
}

inline void register_adapter(const std::string& name, DatasetAdapter adapter) {
  adapter_registry()[name] = std::move(adapter);
}

inline const DatasetAdapter* find_adapter(const std::string& name) {
  const auto& registry = adapter_registry();
  const auto it = registry.find(name);
  return it == registry.end() ? nullptr : &it->second;
}

}  // namespace lanekit
