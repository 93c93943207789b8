// Command-line front end: extract lanes from traces, evaluate predictions,
// generate synthetic traces, compute dataset statistics, and export BEV
// channel images.
//
// Exit codes: 0 success, 1 frame-level failures during a run (each one
// listed on stderr), 2 configuration / manifest / usage errors.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "lanekit/lanekit.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunConfig {
  lanekit::BevConfig bev;
  lanekit::ExtractParams extract;
  lanekit::MatchConfig match;
  lanekit::HeuristicSegmenterParams heuristic;
  std::string segmenter = "heuristic";  // or "external:<dir>"
  int jobs = 0;                         // 0 = all hardware threads
  lanekit::AggMode agg = lanekit::AggMode::micro;
  int raster_width = 1;
  std::optional<double> max_x;  // restrict evaluation to x <= max_x

  void validate() const {
    bev.validate();
    extract.validate();
    match.validate();
    heuristic.validate();
    if (raster_width < 1)
      throw lanekit::Error(lanekit::Errc::invalid_config, "raster_width must be >= 1");
    if (jobs < 0) throw lanekit::Error(lanekit::Errc::invalid_config, "jobs must be >= 0");
    if (segmenter != "heuristic" && segmenter.rfind("external:", 0) != 0)
      throw lanekit::Error(lanekit::Errc::invalid_config,
                           "segmenter must be 'heuristic' or 'external:<dir>'");
  }
};

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* k) { return key == k; }) == allowed.end())
      throw lanekit::Error(lanekit::Errc::invalid_config,
                           where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void maybe_set(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

lanekit::AggMode parse_agg(const std::string& s) {
  if (s == "micro") return lanekit::AggMode::micro;
  if (s == "macro") return lanekit::AggMode::macro;
  throw lanekit::Error(lanekit::Errc::invalid_config, "agg must be 'micro' or 'macro'");
}

RunConfig load_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw lanekit::Error(lanekit::Errc::missing_file, "cannot open: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw lanekit::Error(lanekit::Errc::parse_error, path.string() + ": " + e.what());
  }
  const std::string where = path.string();
  check_keys(j,
             {"bev", "extract", "match", "heuristic", "segmenter", "jobs", "agg", "raster_width",
              "max_x"},
             where);
  RunConfig cfg;
  if (j.contains("bev")) {
    const json& b = j["bev"];
    check_keys(b, {"x_min", "x_max", "y_min", "y_max", "cell_size"}, where + ":bev");
    maybe_set(b, "x_min", cfg.bev.x_min);
    maybe_set(b, "x_max", cfg.bev.x_max);
    maybe_set(b, "y_min", cfg.bev.y_min);
    maybe_set(b, "y_max", cfg.bev.y_max);
    maybe_set(b, "cell_size", cfg.bev.cell_size);
  }
  if (j.contains("extract")) {
    const json& e = j["extract"];
    check_keys(e,
               {"scale_x", "scale_y", "dbscan_eps", "dbscan_min_pts", "ransac_iters",
                "ransac_inlier_tol", "poly_degree", "min_cluster_cells", "sample_step", "rng_seed"},
               where + ":extract");
    maybe_set(e, "scale_x", cfg.extract.scale_x);
    maybe_set(e, "scale_y", cfg.extract.scale_y);
    maybe_set(e, "dbscan_eps", cfg.extract.dbscan_eps);
    maybe_set(e, "dbscan_min_pts", cfg.extract.dbscan_min_pts);
    maybe_set(e, "ransac_iters", cfg.extract.ransac_iters);
    maybe_set(e, "ransac_inlier_tol", cfg.extract.ransac_inlier_tol);
    maybe_set(e, "poly_degree", cfg.extract.poly_degree);
    maybe_set(e, "min_cluster_cells", cfg.extract.min_cluster_cells);
    maybe_set(e, "sample_step", cfg.extract.sample_step);
    maybe_set(e, "rng_seed", cfg.extract.rng_seed);
  }
  if (j.contains("match")) {
    check_keys(j["match"], {"tau"}, where + ":match");
    maybe_set(j["match"], "tau", cfg.match.tau);
  }
  if (j.contains("heuristic")) {
    const json& h = j["heuristic"];
    check_keys(h, {"intensity_threshold", "ground_band", "min_cell_count", "ego_ground"},
               where + ":heuristic");
    maybe_set(h, "intensity_threshold", cfg.heuristic.intensity_threshold);
    maybe_set(h, "ground_band", cfg.heuristic.ground_band);
    maybe_set(h, "min_cell_count", cfg.heuristic.min_cell_count);
    maybe_set(h, "ego_ground", cfg.heuristic.ego_ground);
  }
  maybe_set(j, "segmenter", cfg.segmenter);
  maybe_set(j, "jobs", cfg.jobs);
  if (j.contains("agg")) cfg.agg = parse_agg(j["agg"].get<std::string>());
  maybe_set(j, "raster_width", cfg.raster_width);
  if (j.contains("max_x")) cfg.max_x = j["max_x"].get<double>();
  return cfg;
}

// Flags shared by the processing subcommands; values set on the command line
// override the config file.
struct CommonFlags {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<double> tau;
  std::optional<std::string> agg;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", config_path, "JSON run configuration file");
    cmd.add_option("--seed", seed, "override the extraction RNG seed");
    cmd.add_option("--jobs", jobs, "worker threads (0 = all cores)");
    cmd.add_option("--tau", tau, "matching threshold in meters");
    cmd.add_option("--agg", agg, "aggregation mode: micro or macro");
  }

  RunConfig resolve() const {
    RunConfig cfg = config_path ? load_config_file(*config_path) : RunConfig{};
    if (seed) cfg.extract.rng_seed = *seed;
    if (jobs) cfg.jobs = *jobs;
    if (tau) cfg.match.tau = *tau;
    if (agg) cfg.agg = parse_agg(*agg);
    cfg.validate();
    return cfg;
  }
};

// A manifest argument names either one trace (object with "frames") or a
// dataset (object with "traces": [relative manifest paths]).
std::vector<lanekit::Trace> load_traces(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in)
    throw lanekit::Error(lanekit::Errc::missing_file, "cannot open: " + manifest_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw lanekit::Error(lanekit::Errc::parse_error, manifest_path.string() + ": " + e.what());
  }
  std::vector<lanekit::Trace> traces;
  if (j.contains("traces")) {
    check_keys(j, {"traces"}, manifest_path.string());
    for (const auto& rel : j["traces"])
      traces.push_back(lanekit::load_trace(manifest_path.parent_path() / rel.get<std::string>()));
  } else {
    traces.push_back(lanekit::load_trace(manifest_path));
  }
  return traces;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int workers = jobs > 0 ? jobs : static_cast<int>(hw);
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const int count = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  for (int t = 0; t < count; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
    });
  for (auto& th : pool) th.join();
}

double round4(double v) { return std::round(v * 10000.0) / 10000.0; }

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

// ---------------------------------------------------------------------------
// extract
// ---------------------------------------------------------------------------

lanekit::BevLabelGrid segment_frame(const RunConfig& cfg, const lanekit::Trace& trace,
                                    const std::string& frame_id, const lanekit::BevGrid& grid) {
  if (cfg.segmenter == "heuristic")
    return lanekit::run_segmenter(lanekit::make_heuristic_segmenter(cfg.heuristic), grid);
  const fs::path dir = cfg.segmenter.substr(std::string("external:").size());
  const fs::path mask = dir / trace.manifest().trace_id / (frame_id + ".mask.lkm");
  return lanekit::load_external_mask(mask.string(), cfg.bev);
}

int cmd_extract(const RunConfig& cfg, const fs::path& manifest_path, const fs::path& out_dir) {
  const std::vector<lanekit::Trace> traces = load_traces(manifest_path);
  std::vector<std::string> failures;
  std::size_t total_frames = 0;
  const auto t_start = std::chrono::steady_clock::now();

  for (const lanekit::Trace& trace : traces) {
    const fs::path trace_dir = out_dir / trace.manifest().trace_id;
    fs::create_directories(trace_dir);
    const std::size_t n = trace.frame_count();
    total_frames += n;
    if (n == 0) {
      std::cerr << "warning: trace " << trace.manifest().trace_id << " has no frames\n";
      continue;
    }
    std::vector<std::string> frame_errors(n);
    parallel_for(n, cfg.jobs, [&](std::size_t i) {
      const std::string& frame_id = trace.manifest().frames[i].frame_id;
      try {
        const lanekit::PointCloud cloud = trace.load_cloud(i);
        const lanekit::BevGrid grid = lanekit::rasterize_cloud(cfg.bev, cloud);
        const lanekit::BevLabelGrid mask = segment_frame(cfg, trace, frame_id, grid);
        const std::vector<lanekit::Polyline3D> lanes = lanekit::extract_lanes(cfg.extract, mask);
        lanekit::write_polylines(trace_dir / (frame_id + ".polylines.json"), lanes);
        lanekit::save_external_mask((trace_dir / (frame_id + ".mask.lkm")).string(), mask);
      } catch (const std::exception& e) {
        frame_errors[i] = std::string(e.what());
      }
    });
    for (std::size_t i = 0; i < n; ++i)
      if (!frame_errors[i].empty())
        failures.push_back(trace.manifest().trace_id + "/" +
                           trace.manifest().frames[i].frame_id + ": " + frame_errors[i]);
  }

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  std::cout << "extracted " << total_frames << " frame(s) from " << traces.size()
            << " trace(s) in " << fmt4(elapsed) << " s";
  if (total_frames > 0)
    std::cout << " (" << std::llround(1000.0 * elapsed / static_cast<double>(total_frames))
              << " ms/frame)";
  std::cout << "\n";
  if (!failures.empty()) {
    std::cerr << failures.size() << " frame(s) failed:\n";
    for (const auto& f : failures) std::cerr << "  " << f << "\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

std::vector<lanekit::Polyline2D> eval_ready_polylines(const std::vector<lanekit::Polyline3D>& lines,
                                                      const RunConfig& cfg) {
  const double hi = std::min(cfg.bev.x_max, cfg.max_x.value_or(cfg.bev.x_max));
  std::vector<lanekit::Polyline2D> out;
  for (const auto& line : lines) {
    const lanekit::Polyline2D canonical = lanekit::canonicalize_polyline(lanekit::to_bev(line));
    if (auto clipped = lanekit::clip_polyline_x(canonical, cfg.bev.x_min, hi))
      out.push_back(std::move(*clipped));
  }
  return out;
}

// With --max-x, cells beyond the cutoff row are cleared on both sides so the
// cell-wise scores cover the same region as the polyline scores.
void restrict_rows(lanekit::BevLabelGrid& grid, const RunConfig& cfg) {
  if (!cfg.max_x) return;
  const int cutoff = std::clamp(
      static_cast<int>(std::ceil((*cfg.max_x - cfg.bev.x_min) / cfg.bev.cell_size)), 0,
      grid.config.rows());
  std::fill(grid.labels.begin() + static_cast<std::ptrdiff_t>(grid.index(cutoff, 0)),
            grid.labels.end(), static_cast<std::uint8_t>(0));
}

int cmd_evaluate(const RunConfig& cfg, const fs::path& manifest_path, const fs::path& pred_dir,
                 const std::optional<fs::path>& out_dir) {
  const std::vector<lanekit::Trace> traces = load_traces(manifest_path);
  std::vector<lanekit::TraceScores> scores;

  for (const lanekit::Trace& trace : traces) {
    lanekit::TraceScores ts;
    ts.name = trace.manifest().trace_id;
    const std::size_t n = trace.frame_count();
    ts.frames.resize(n);
    const fs::path trace_pred = pred_dir / trace.manifest().trace_id;
    std::vector<std::string> frame_errors(n);
    parallel_for(n, cfg.jobs, [&](std::size_t i) {
      try {
        const std::string& frame_id = trace.manifest().frames[i].frame_id;
        const fs::path pred_lines_path = trace_pred / (frame_id + ".polylines.json");
        if (!fs::exists(pred_lines_path))
          throw lanekit::Error(lanekit::Errc::missing_predictions,
                               "no prediction for frame: " + pred_lines_path.string());
        const lanekit::FrameData frame = trace.load_frame(i);
        const auto gts = eval_ready_polylines(frame.annotations.polylines, cfg);
        const auto preds = eval_ready_polylines(lanekit::read_polylines(pred_lines_path), cfg);

        lanekit::FrameScores fs_out;
        const lanekit::FrameEvaluation iam = lanekit::evaluate_frame(cfg.match, gts, preds);
        fs_out.iam = iam.counts;
        fs_out.iam_vacuous = iam.vacuous;
        fs_out.raster = lanekit::raster_polyline_f1(cfg.bev, gts, preds, cfg.raster_width);

        const fs::path pred_mask_path = trace_pred / (frame_id + ".mask.lkm");
        if (frame.annotations.point_labels && fs::exists(pred_mask_path)) {
          lanekit::BevLabelGrid gt_mask =
              lanekit::rasterize_labels(cfg.bev, frame.cloud, *frame.annotations.point_labels);
          lanekit::BevLabelGrid pred_mask =
              lanekit::load_external_mask(pred_mask_path.string(), cfg.bev);
          restrict_rows(gt_mask, cfg);
          restrict_rows(pred_mask, cfg);
          fs_out.seg = lanekit::segmentation_f1(gt_mask, pred_mask).lane;
        }
        ts.frames[i] = fs_out;
      } catch (const std::exception& e) {
        frame_errors[i] = e.what();
      }
    });
    for (std::size_t i = 0; i < n; ++i)
      if (!frame_errors[i].empty())
        throw lanekit::Error(lanekit::Errc::missing_predictions,
                             ts.name + "/" + trace.manifest().frames[i].frame_id + ": " +
                                 frame_errors[i]);
    scores.push_back(std::move(ts));
  }

  const lanekit::EvalReport report = lanekit::aggregate(scores, cfg.agg);

  auto print_row = [](const lanekit::ReportRow& row) {
    std::cout << row.trace;
    for (std::size_t pad = row.trace.size(); pad < 24; ++pad) std::cout << ' ';
    std::cout << (row.seg_f1 ? fmt4(round4(*row.seg_f1)) : std::string("   n/a")) << "  "
              << fmt4(round4(row.raster_f1)) << "     " << fmt4(round4(row.iam_f1)) << "\n";
  };
  std::cout << "trace                   seg_f1  raster_f1  iam_f1\n";
  for (const auto& row : report.rows) print_row(row);
  print_row(report.average);

  json out;
  out["rows"] = json::array();
  auto row_json = [](const lanekit::ReportRow& row) {
    json r;
    r["trace"] = row.trace;
    if (row.seg_f1)
      r["seg_f1"] = round4(*row.seg_f1);
    else
      r["seg_f1"] = nullptr;
    r["raster_f1"] = round4(row.raster_f1);
    r["iam_f1"] = round4(row.iam_f1);
    r["tp"] = row.iam_counts.tp;
    r["fn"] = row.iam_counts.fn;
    r["fp"] = row.iam_counts.fp;
    return r;
  };
  for (const auto& row : report.rows) out["rows"].push_back(row_json(row));
  out["average"] = row_json(report.average);
  if (out_dir) {
    fs::create_directories(*out_dir);
    std::ofstream(*out_dir / "report.json") << out.dump(2) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthFlags {
  std::string trace_id = "synth_000";
  std::string split = "train";
  int frames = 10;
  double step_m = 1.0;
  double density = 60.0;
  double sigma = 0.05;
  double dropout = 0.2;
  int clutter = 100;
  int lanes_min = 2;
  int lanes_max = 4;
  std::uint64_t seed = 0;
  std::string road_type = "highway";
  std::string weather = "sunny";
  std::string traffic = "low";
  bool roadwork = false;
};

lanekit::TraceSpec build_trace_spec(const SynthFlags& f) {
  if (f.frames < 1) throw lanekit::Error(lanekit::Errc::invalid_spec, "--frames must be >= 1");
  if (f.lanes_min < 1 || f.lanes_max < f.lanes_min)
    throw lanekit::Error(lanekit::Errc::invalid_spec, "need 1 <= lanes-min <= lanes-max");

  lanekit::TraceSpec spec;
  spec.trace_id = f.trace_id;
  spec.split = lanekit::parse_split(f.split);
  spec.attributes.road_type = lanekit::parse_road_type(f.road_type);
  spec.attributes.weather = lanekit::parse_weather(f.weather);
  spec.attributes.traffic = lanekit::parse_traffic(f.traffic);
  spec.attributes.roadwork = f.roadwork;
  spec.motion.step_m = f.step_m;

  // lane layout drawn once per trace: adjacent lane lines 3.5 m apart with a
  // shared lateral shift, gentle curvature, and a random pattern per line
  std::mt19937_64 rng(f.seed);
  const int lane_count =
      f.lanes_min + static_cast<int>(lanekit::uniform_index(
                        rng, static_cast<std::size_t>(f.lanes_max - f.lanes_min) + 1));
  const double center = lanekit::uniform_range(rng, -1.0, 1.0);
  const double c1 = lanekit::uniform_range(rng, -0.02, 0.02);
  const double c2 = lanekit::uniform_range(rng, -0.001, 0.001);
  const double c3 = lanekit::uniform_range(rng, -1e-5, 1e-5);

  lanekit::SceneSpec scene;
  scene.point_density = f.density;
  scene.lateral_noise_sd = f.sigma;
  scene.dropout = f.dropout;
  scene.clutter_points = f.clutter;
  for (int l = 0; l < lane_count; ++l) {
    lanekit::LaneSpec lane;
    lane.coeffs = {center + (l - 0.5 * (lane_count - 1)) * 3.5, c1, c2, c3};
    lane.cls = lanekit::LaneClass::White;
    lane.dashed = lanekit::uniform_double(rng) < 0.5;
    lane.dash_len = 1.0;
    lane.gap_len = 2.0;
    scene.lanes.push_back(lane);
  }
  for (int i = 0; i < f.frames; ++i) {
    scene.rng_seed = f.seed ^ (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(i + 1));
    spec.frames.push_back(scene);
  }
  return spec;
}

int cmd_synth(const SynthFlags& flags, const fs::path& out_dir) {
  const fs::path manifest = lanekit::generate_trace(build_trace_spec(flags), out_dir);
  std::cout << manifest.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

void write_histogram_svg(const fs::path& path, const std::string& title,
                         const std::vector<std::pair<std::string, std::int64_t>>& bars) {
  const int width = 640, height = 360, margin = 48;
  std::int64_t peak = 1;
  for (const auto& [label, count] : bars) peak = std::max(peak, count);
  const double bar_span =
      static_cast<double>(width - 2 * margin) / std::max<std::size_t>(1, bars.size());

  std::ofstream out(path);
  if (!out) throw lanekit::Error(lanekit::Errc::io, "cannot open for writing: " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\">\n";
  out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << title << "</text>\n";
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double h =
        static_cast<double>(bars[i].second) / static_cast<double>(peak) * (height - 2 * margin);
    const double x = margin + static_cast<double>(i) * bar_span;
    out << "<rect x=\"" << x << "\" y=\"" << (height - margin - h) << "\" width=\""
        << bar_span * 0.9 << "\" height=\"" << h << "\" fill=\"#4878cf\"/>\n";
    out << "<text x=\"" << x + bar_span * 0.45 << "\" y=\"" << height - margin + 14
        << "\" text-anchor=\"middle\" font-size=\"9\">" << bars[i].first << "</text>\n";
  }
  out << "</svg>\n";
}

void print_attribute_table(const char* heading, const std::vector<lanekit::AttributeCount>& rows) {
  std::cout << heading << ":\n";
  for (const auto& row : rows) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "  %-12s %4lld (%.1f%%)\n", row.label.c_str(),
                  static_cast<long long>(row.count), row.percent);
    std::cout << buf;
  }
}

int cmd_stats(const fs::path& manifest_path, const std::optional<fs::path>& out_dir) {
  const std::vector<lanekit::Trace> traces = load_traces(manifest_path);
  const lanekit::StatsReport stats = lanekit::dataset_stats(traces);

  std::cout << "traces: " << stats.trace_count << ", frames: " << stats.frame_count
            << ", polylines: " << stats.polyline_count << "\n";
  print_attribute_table("road type", stats.road_type);
  print_attribute_table("weather", stats.weather);
  print_attribute_table("traffic", stats.traffic);
  print_attribute_table("roadwork", stats.roadwork);

  std::cout << "lane lines per frame:\n";
  for (const auto& [lanes, frames] : stats.lanes_per_frame)
    std::cout << "  " << lanes << " lane(s): " << frames << " frame(s)\n";
  std::cout << "straightness histogram (20 bins over [0,1]), " << stats.straightness.total
            << " polylines\n";

  std::vector<lanekit::TraceManifest> manifests;
  for (const auto& t : traces) manifests.push_back(t.manifest());
  const lanekit::SplitReport split = lanekit::validate_split(manifests);
  std::cout << "split: train=" << split.train_count << " val=" << split.val_count
            << " test=" << split.test_count << "\n";
  for (const auto& w : split.warnings) std::cout << "  warning: " << w << "\n";

  if (out_dir) {
    fs::create_directories(*out_dir);
    std::vector<std::pair<std::string, std::int64_t>> straightness_bars;
    for (std::size_t b = 0; b < stats.straightness.bins.size(); ++b) {
      char label[32];
      std::snprintf(label, sizeof(label), "%.2f", static_cast<double>(b) * 0.05);
      straightness_bars.emplace_back(label, stats.straightness.bins[b]);
    }
    write_histogram_svg(*out_dir / "straightness.svg", "Polyline straightness (|Pearson r|)",
                        straightness_bars);
    std::vector<std::pair<std::string, std::int64_t>> lane_bars;
    const std::int64_t max_lanes =
        stats.lanes_per_frame.empty() ? 0 : stats.lanes_per_frame.rbegin()->first;
    for (std::int64_t l = 0; l <= max_lanes; ++l) {
      const auto it = stats.lanes_per_frame.find(l);
      lane_bars.emplace_back(std::to_string(l), it == stats.lanes_per_frame.end() ? 0 : it->second);
    }
    write_histogram_svg(*out_dir / "lane_count_per_frame.svg", "Lane lines per frame", lane_bars);
    std::cout << "wrote " << (*out_dir / "straightness.svg").string() << " and "
              << (*out_dir / "lane_count_per_frame.svg").string() << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// rasterize
// ---------------------------------------------------------------------------

int cmd_rasterize(const RunConfig& cfg, const fs::path& manifest_path,
                  const std::optional<std::string>& frame_id, const fs::path& out_dir) {
  const std::vector<lanekit::Trace> traces = load_traces(manifest_path);
  const lanekit::Trace& trace = traces.front();
  if (trace.frame_count() == 0)
    throw lanekit::Error(lanekit::Errc::no_frames, "trace has no frames");
  const std::size_t index = frame_id ? trace.index_of(*frame_id) : 0;
  const lanekit::PointCloud cloud = trace.load_cloud(index);
  const lanekit::BevGrid grid = lanekit::rasterize_cloud(cfg.bev, cloud);
  fs::create_directories(out_dir);
  const std::string stem = trace.manifest().frames[index].frame_id;
  for (const auto channel : {lanekit::BevChannel::max_intensity, lanekit::BevChannel::max_height,
                             lanekit::BevChannel::min_height, lanekit::BevChannel::point_count}) {
    const fs::path path = out_dir / (stem + "." + lanekit::channel_name(channel) + ".pgm");
    lanekit::write_channel_pgm(grid, channel, path.string());
    std::cout << path.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LiDAR lane-line toolkit: BEV extraction pipeline and polyline metrics"};
  app.require_subcommand(1);

  std::string manifest;
  std::string out;
  std::string pred;
  std::optional<std::string> frame_id;
  std::optional<std::string> segmenter_flag;
  std::optional<int> width_flag;
  std::optional<double> max_x_flag;

  CommonFlags extract_flags;
  CLI::App* extract_cmd =
      app.add_subcommand("extract", "run the extraction pipeline over a trace or dataset");
  extract_cmd->add_option("--manifest", manifest, "trace or dataset manifest")->required();
  extract_cmd->add_option("--out", out, "output directory for predictions")->required();
  extract_cmd->add_option("--segmenter", segmenter_flag,
                          "segmenter: 'heuristic' or 'external:<dir>'");
  extract_flags.attach(*extract_cmd);

  CommonFlags eval_flags;
  CLI::App* eval_cmd =
      app.add_subcommand("evaluate", "score predictions against ground-truth annotations");
  eval_cmd->add_option("--manifest", manifest, "trace or dataset manifest")->required();
  eval_cmd->add_option("--pred", pred, "predictions directory (from 'extract')")->required();
  eval_cmd->add_option("--out", out, "directory for report.json");
  eval_cmd->add_option("--width", width_flag, "raster mask width in cells");
  eval_cmd->add_option("--max-x", max_x_flag, "restrict evaluation to x <= this (m)");
  eval_flags.attach(*eval_cmd);

  SynthFlags synth_flags;
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic annotated trace");
  synth_cmd->add_option("--out", out, "output directory")->required();
  synth_cmd->add_option("--trace-id", synth_flags.trace_id, "trace identifier");
  synth_cmd->add_option("--split", synth_flags.split, "train|val|test");
  synth_cmd->add_option("--frames", synth_flags.frames, "number of frames");
  synth_cmd->add_option("--step", synth_flags.step_m, "ego forward motion per frame (m)");
  synth_cmd->add_option("--density", synth_flags.density, "ground point density (pts/m^2)");
  synth_cmd->add_option("--sigma", synth_flags.sigma, "paint lateral noise sd (m)");
  synth_cmd->add_option("--dropout", synth_flags.dropout, "return dropout fraction [0,1)");
  synth_cmd->add_option("--clutter", synth_flags.clutter, "clutter points per frame");
  synth_cmd->add_option("--lanes-min", synth_flags.lanes_min, "minimum lane-line count");
  synth_cmd->add_option("--lanes-max", synth_flags.lanes_max, "maximum lane-line count");
  synth_cmd->add_option("--seed", synth_flags.seed, "generator seed");
  synth_cmd->add_option("--road-type", synth_flags.road_type, "city|expressway|highway");
  synth_cmd->add_option("--weather", synth_flags.weather, "sunny|cloudy|rainy");
  synth_cmd->add_option("--traffic", synth_flags.traffic, "low|mid");
  synth_cmd->add_flag("--roadwork", synth_flags.roadwork, "mark the trace as a roadwork zone");

  CLI::App* stats_cmd = app.add_subcommand("stats", "dataset statistics and split validation");
  stats_cmd->add_option("--manifest", manifest, "trace or dataset manifest")->required();
  stats_cmd->add_option("--out", out, "directory for SVG histograms");

  CommonFlags raster_flags;
  CLI::App* raster_cmd =
      app.add_subcommand("rasterize", "export BEV channel images for one frame");
  raster_cmd->add_option("--manifest", manifest, "trace manifest")->required();
  raster_cmd->add_option("--frame", frame_id, "frame id (default: first frame)");
  raster_cmd->add_option("--out", out, "output directory")->required();
  raster_flags.attach(*raster_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (extract_cmd->parsed()) {
      RunConfig cfg = extract_flags.resolve();
      if (segmenter_flag) {
        cfg.segmenter = *segmenter_flag;
        cfg.validate();
      }
      return cmd_extract(cfg, manifest, out);
    }
    if (eval_cmd->parsed()) {
      RunConfig cfg = eval_flags.resolve();
      if (width_flag) cfg.raster_width = *width_flag;
      if (max_x_flag) cfg.max_x = *max_x_flag;
      cfg.validate();
      return cmd_evaluate(cfg, manifest, pred,
                          out.empty() ? std::nullopt : std::optional<fs::path>(out));
    }
    if (synth_cmd->parsed()) return cmd_synth(synth_flags, out);
    if (stats_cmd->parsed())
      return cmd_stats(manifest, out.empty() ? std::nullopt : std::optional<fs::path>(out));
    if (raster_cmd->parsed())
      return cmd_rasterize(raster_flags.resolve(), manifest, frame_id, out);
  } catch (const lanekit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
