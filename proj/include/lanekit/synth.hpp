#pragma once

// Synthetic scene generation with exactly known lane geometry. Scenes plant
// polynomial lane lines on a flat road, sample ground and retroreflective
// paint returns around them, and hand back both the cloud and its ground
// truth (per-point labels + truth polylines on the generating curves).
// Scenario knobs mirror real degradations: rain is approximated by high
// dropout and low density.
//
// Everything is deterministic for a fixed seed, and emitted coordinates are
// quantized to f32 so written traces reload bit-exactly.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lanekit/bev.hpp"
#include "lanekit/core.hpp"
#include "lanekit/dataio.hpp"
#include "lanekit/rng.hpp"

namespace lanekit {

/// Half-width of a painted marking: a standard 15 cm stripe.
inline constexpr double kMarkingHalfWidth = 0.075;

struct LaneSpec {
  std::array<double, 4> coeffs{0.0, 0.0, 0.0, 0.0};  // y = c0 + c1 x + c2 x^2 + c3 x^3
  LaneClass cls = LaneClass::White;
  bool dashed = false;
  double dash_len = 1.0;  // m, used when dashed
  double gap_len = 2.0;   // m

  double eval(double x) const {
    return ((coeffs[3] * x + coeffs[2]) * x + coeffs[1]) * x + coeffs[0];
  }
};

struct SceneSpec {
  std::vector<LaneSpec> lanes;
  double x_start = 0.0;
  double x_end = 40.0;  // lanes span [x_start, x_end)
  BevConfig roi;        // ground points fill the whole ROI
  double road_intensity_mean = 0.1;
  double road_intensity_sd = 0.05;
  double paint_intensity_mean = 0.8;
  double paint_intensity_sd = 0.1;
  double point_density = 60.0;  // points per m^2 on the ground
  double lateral_noise_sd = 0.0;
  double dropout = 0.0;  // fraction of ground/paint returns removed, [0,1)
  int clutter_points = 0;
  std::uint64_t rng_seed = 0;

  void validate() const {
    roi.validate();
    if (!(point_density >= 0.0)) throw Error(Errc::invalid_spec, "point_density must be >= 0");
    if (!(lateral_noise_sd >= 0.0)) throw Error(Errc::invalid_spec, "lateral_noise_sd must be >= 0");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw Error(Errc::invalid_spec, "dropout must be in [0,1)");
    if (clutter_points < 0) throw Error(Errc::invalid_spec, "clutter_points must be >= 0");
    if (!(x_end > x_start)) throw Error(Errc::invalid_spec, "x extent must be non-empty");
    for (const auto& lane : lanes) {
      if (!is_lane(lane.cls)) throw Error(Errc::invalid_spec, "lane class may not be background");
      if (lane.dashed && !(lane.dash_len > 0.0 && lane.gap_len > 0.0))
        throw Error(Errc::invalid_spec, "dash and gap lengths must be > 0");
      for (const double c : lane.coeffs)
        if (!std::isfinite(c)) throw Error(Errc::invalid_spec, "lane coefficients must be finite");
      for (double x = x_start; x < x_end; x += 0.1) {
        const double y = lane.eval(x);
        if (!(y >= roi.y_min && y < roi.y_max))
          throw Error(Errc::invalid_spec, "lane polynomial leaves the ROI laterally");
      }
    }
  }
};

/// Exact ground truth for a generated scene. Truth polylines are sampled
/// every 0.5 m over [x_start, x_end) directly from the lane polynomials;
/// point_labels parallels the emitted cloud.
struct SceneTruth {
  std::vector<Polyline3D> polylines;
  std::vector<LaneClass> point_labels;
};

namespace detail {

// noinline: GCC 11's -O3 loop vectorizer drops the narrowing in the
// double->float->double chain when this gets inlined into generation loops.
#if defined(__GNUC__) && !defined(__clang__)
[[gnu::noinline]]
#endif
inline double f32_quantize(double v) { return static_cast<double>(static_cast<float>(v)); }

/// Is world position x inside the painted part of the lane's pattern?
inline bool on_dash(const LaneSpec& lane, double x_start, double x) {
  if (!lane.dashed) return true;
  const double period = lane.dash_len + lane.gap_len;
  const double phase = std::fmod(x - x_start, period);
  return phase < lane.dash_len;
}

/// Total painted length of the lane over [x_start, x_end).
inline double painted_length(const LaneSpec& lane, double x_start, double x_end) {
  const double extent = x_end - x_start;
  if (!lane.dashed) return extent;
  const double period = lane.dash_len + lane.gap_len;
  const double full = std::floor(extent / period);
  const double rest = extent - full * period;
  return full * lane.dash_len + std::min(rest, lane.dash_len);
}

}  // namespace detail

/// Generates one frame. Ground returns fill the ROI uniformly at
/// point_density with road-level intensity; each lane adds paint returns
/// along its polynomial (same areal density over the painted stripe) with
/// elevated intensity, lateral jitter of lateral_noise_sd, and the dash
/// pattern honored. Dropout then removes ground/paint returns uniformly,
/// and clutter returns are sprinkled at 0.5-3 m height with random
/// intensity. Labels are recorded per emitted point.
inline std::pair<PointCloud, SceneTruth> generate_scene(const SceneSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.rng_seed);
  PointCloud cloud;
  SceneTruth truth;

  auto keep = [&](double drop) { return uniform_double(rng) >= drop; };
  auto emit = [&](double x, double y, double z, double intensity, LaneClass label) {
    cloud.points.push_back({detail::f32_quantize(x), detail::f32_quantize(y),
                            detail::f32_quantize(z),
                            detail::f32_quantize(std::clamp(intensity, 0.0, 1.0))});
    truth.point_labels.push_back(label);
  };

  const double ground_area = (spec.roi.x_max - spec.roi.x_min) * (spec.roi.y_max - spec.roi.y_min);
  const auto n_ground = static_cast<std::int64_t>(std::llround(spec.point_density * ground_area));
  for (std::int64_t i = 0; i < n_ground; ++i) {
    const double x = uniform_range(rng, spec.roi.x_min, spec.roi.x_max);
    const double y = uniform_range(rng, spec.roi.y_min, spec.roi.y_max);
    const double intensity = normal(rng, spec.road_intensity_mean, spec.road_intensity_sd);
    if (!keep(spec.dropout)) continue;
    emit(x, y, 0.0, intensity, LaneClass::Background);
  }

  for (const LaneSpec& lane : spec.lanes) {
    const double painted = detail::painted_length(lane, spec.x_start, spec.x_end);
    const auto n_paint = static_cast<std::int64_t>(
        std::llround(spec.point_density * painted * 2.0 * kMarkingHalfWidth));
    std::int64_t emitted = 0;
    std::int64_t attempts = 0;
    const std::int64_t max_attempts = n_paint * 64 + 256;
    while (emitted < n_paint && attempts < max_attempts) {
      ++attempts;
      const double x = uniform_range(rng, spec.x_start, spec.x_end);
      if (!detail::on_dash(lane, spec.x_start, x)) continue;
      const double offset = uniform_range(rng, -kMarkingHalfWidth, kMarkingHalfWidth);
      // jitter is truncated at 4 sigma so the paint stays within a hard
      // half-width + 4*sigma band around its curve
      double jitter = 0.0;
      if (spec.lateral_noise_sd > 0.0) {
        do {
          jitter = normal(rng, 0.0, spec.lateral_noise_sd);
        } while (std::abs(jitter) > 4.0 * spec.lateral_noise_sd);
      }
      const double y = lane.eval(x) + offset + jitter;
      const double intensity = normal(rng, spec.paint_intensity_mean, spec.paint_intensity_sd);
      ++emitted;
      if (!keep(spec.dropout)) continue;
      if (!(y >= spec.roi.y_min && y < spec.roi.y_max)) continue;  // jitter may leave the ROI
      emit(x, y, 0.0, intensity, lane.cls);
    }
  }

  for (int i = 0; i < spec.clutter_points; ++i) {
    const double x = uniform_range(rng, spec.roi.x_min, spec.roi.x_max);
    const double y = uniform_range(rng, spec.roi.y_min, spec.roi.y_max);
    const double z = uniform_range(rng, 0.5, 3.0);
    const double intensity = uniform_double(rng);
    emit(x, y, z, intensity, LaneClass::Background);
  }

  for (const LaneSpec& lane : spec.lanes) {
    Polyline3D line;
    line.cls = lane.cls;
    for (int s = 0;; ++s) {
      const double x = spec.x_start + 0.5 * s;
      if (x >= spec.x_end) break;
      line.vertices.push_back({x, lane.eval(x), 0.0});
    }
    if (line.vertices.size() >= 2) truth.polylines.push_back(std::move(line));
  }
  return {std::move(cloud), std::move(truth)};
}

// ---------------------------------------------------------------------------
// Trace emission
// ---------------------------------------------------------------------------

/// Straight constant-velocity forward motion.
struct EgoMotion {
  double step_m = 1.0;
  std::int64_t frame_dt_us = 100000;
};

struct TraceSpec {
  std::string trace_id = "synth_000";
  Split split = Split::train;
  TraceAttributes attributes;
  EgoMotion motion;
  std::vector<SceneSpec> frames;  // one scene per frame, replayed in the ego frame
};

/// Writes a fully annotated canonical trace (manifest + per-frame cloud,
/// labels, polylines, odometry) and returns the manifest path. Each frame's
/// scene is generated in the ego frame; odometry records the forward motion,
/// so the transform into the next frame is a translation by -step_m along x.
inline std::filesystem::path generate_trace(const TraceSpec& spec,
                                            const std::filesystem::path& out_dir) {
  if (spec.frames.empty()) throw Error(Errc::invalid_spec, "a trace needs at least one frame");
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "frames", ec);
  if (ec) throw Error(Errc::io, "cannot create " + (out_dir / "frames").string());

  TraceManifest manifest;
  manifest.trace_id = spec.trace_id;
  manifest.split = spec.split;
  manifest.attributes = spec.attributes;

  char name[32];
  for (std::size_t i = 0; i < spec.frames.size(); ++i) {
    std::snprintf(name, sizeof(name), "%06zu", i);
    auto [cloud, truth] = generate_scene(spec.frames[i]);
    cloud.frame_id = name;
    cloud.timestamp_us = static_cast<std::int64_t>(i) * spec.motion.frame_dt_us;

    FrameEntry entry;
    entry.frame_id = name;
    entry.timestamp_us = cloud.timestamp_us;
    entry.cloud_path = std::string("frames/") + name + ".cloud.lkc";
    entry.labels_path = std::string("frames/") + name + ".labels.lkl";
    entry.polylines_path = std::string("frames/") + name + ".polylines.json";
    if (i + 1 < spec.frames.size())
      entry.odom_to_next = RigidTransform::translation(-spec.motion.step_m, 0.0, 0.0);

    write_point_cloud(out_dir / entry.cloud_path, cloud);
    write_point_labels(out_dir / *entry.labels_path, truth.point_labels);
    write_polylines(out_dir / *entry.polylines_path, truth.polylines);
    manifest.frames.push_back(std::move(entry));
  }

  const std::filesystem::path manifest_path = out_dir / "manifest.json";
  write_manifest(manifest_path, manifest);
  return manifest_path;
}

}  // namespace lanekit
