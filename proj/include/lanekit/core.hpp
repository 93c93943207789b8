#pragma once

// Core domain types shared across the toolkit: LiDAR points, lane polylines,
// rigid transforms, and the elementary geometry everything else builds on.
//
// Coordinate convention (vehicle frame): x forward, y left, z up, meters.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lanekit {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

enum class Errc {
  invalid_transform,
  empty_polyline,
  too_few_vertices,
  length_mismatch,
  dims_mismatch,
  invalid_label_value,
  io,
  non_positive_scale,
  too_few_points,
  parse_error,
  missing_file,
  label_count_mismatch,
  invalid_split,
  missing_odometry,
  unknown_frame,
  invalid_spec,
  no_frames,
  missing_predictions,
  invalid_config,
};

/// Exception type used throughout the library. The code discriminates the
/// failure class so callers (and tests) do not have to parse messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// ---------------------------------------------------------------------------
// Points and clouds
// ---------------------------------------------------------------------------

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// One LiDAR return. Intensity is normalized reflectivity in [0,1].
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double intensity = 0.0;
};

inline bool is_finite(const Point3& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z) &&
         std::isfinite(p.intensity);
}

/// A single LiDAR frame. Point order carries no semantics; the cloud may be
/// empty.
struct PointCloud {
  std::vector<Point3> points;
  std::string frame_id;
  std::int64_t timestamp_us = 0;
};

// ---------------------------------------------------------------------------
// Lane classes and polylines
// ---------------------------------------------------------------------------

/// Numeric codes are fixed for serialization: background 0, white 1, yellow 2.
enum class LaneClass : std::uint8_t {
  Background = 0,
  White = 1,
  Yellow = 2,
};

inline bool is_lane(LaneClass c) { return c != LaneClass::Background; }

inline std::optional<LaneClass> lane_class_from_code(unsigned code) {
  if (code > 2) return std::nullopt;
  return static_cast<LaneClass>(code);
}

/// Lane-line geometry as annotated: an ordered (x,y,z) vertex list plus the
/// marking color. A valid lane annotation has >= 2 finite vertices and a
/// non-background class.
struct Polyline3D {
  std::vector<Vec3> vertices;
  LaneClass cls = LaneClass::White;
};

/// BEV-plane polyline. After canonicalize_polyline() the vertex x values are
/// strictly increasing, which makes the polyline a function y(x) over the
/// interpolation domain [x_front, x_back].
struct Polyline2D {
  std::vector<Vec2> vertices;
  LaneClass cls = LaneClass::White;
};

inline Polyline2D to_bev(const Polyline3D& p) {
  Polyline2D out;
  out.cls = p.cls;
  out.vertices.reserve(p.vertices.size());
  for (const auto& v : p.vertices) out.vertices.push_back({v.x, v.y});
  return out;
}

/// Throws unless `p` is a structurally valid lane annotation.
inline void validate_lane_polyline(const Polyline3D& p, const std::string& context = {}) {
  const std::string where = context.empty() ? std::string{} : context + ": ";
  if (p.vertices.size() < 2)
    throw Error(Errc::too_few_vertices, where + "lane polyline needs >= 2 vertices");
  if (!is_lane(p.cls))
    throw Error(Errc::invalid_label_value, where + "lane polyline may not be background");
  for (const auto& v : p.vertices) {
    if (!(std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z)))
      throw Error(Errc::parse_error, where + "lane polyline has non-finite coordinates");
  }
}

// ---------------------------------------------------------------------------
// Rigid transforms
// ---------------------------------------------------------------------------

/// 4x4 homogeneous transform, row-major. Valid transforms have bottom row
/// (0,0,0,1) and an orthonormal upper-left 3x3 with determinant +1, both
/// within 1e-6. Inputs outside tolerance are rejected, not re-orthogonalized.
struct RigidTransform {
  std::array<std::array<double, 4>, 4> m{{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}};

  static RigidTransform identity() { return RigidTransform{}; }

  static RigidTransform translation(double tx, double ty, double tz) {
    RigidTransform t;
    t.m[0][3] = tx;
    t.m[1][3] = ty;
    t.m[2][3] = tz;
    return t;
  }

  static RigidTransform rotation_z(double radians) {
    RigidTransform t;
    const double c = std::cos(radians);
    const double s = std::sin(radians);
    t.m[0][0] = c;
    t.m[0][1] = -s;
    t.m[1][0] = s;
    t.m[1][1] = c;
    return t;
  }

  bool valid(double tol = 1e-6) const {
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c)
        if (!std::isfinite(m[r][c])) return false;
    const std::array<double, 4> bottom = {0.0, 0.0, 0.0, 1.0};
    for (int c = 0; c < 4; ++c)
      if (std::abs(m[3][c] - bottom[c]) > tol) return false;
    // R * R^T == I
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        double dot = 0.0;
        for (int k = 0; k < 3; ++k) dot += m[r][k] * m[c][k];
        const double expect = (r == c) ? 1.0 : 0.0;
        if (std::abs(dot - expect) > tol) return false;
      }
    }
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    return std::abs(det - 1.0) <= tol;
  }

  Vec3 apply(const Vec3& p) const {
    return {m[0][0] * p.x + m[0][1] * p.y + m[0][2] * p.z + m[0][3],
            m[1][0] * p.x + m[1][1] * p.y + m[1][2] * p.z + m[1][3],
            m[2][0] * p.x + m[2][1] * p.y + m[2][2] * p.z + m[2][3]};
  }

  /// this * rhs: apply `rhs` first, then this transform.
  RigidTransform compose(const RigidTransform& rhs) const {
    RigidTransform out;
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        double acc = 0.0;
        for (int k = 0; k < 4; ++k) acc += m[r][k] * rhs.m[k][c];
        out.m[r][c] = acc;
      }
    }
    return out;
  }

  /// Exact rigid inverse: R^T and -R^T * t.
  RigidTransform inverse() const {
    RigidTransform out;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out.m[r][c] = m[c][r];
    for (int r = 0; r < 3; ++r) {
      out.m[r][3] = -(out.m[r][0] * m[0][3] + out.m[r][1] * m[1][3] + out.m[r][2] * m[2][3]);
    }
    return out;
  }
};

/// Maps every point of `pc` through `t` (intensity unchanged).
/// Throws Errc::invalid_transform when `t` violates the rigidity invariants.
inline PointCloud apply_transform(const RigidTransform& t, const PointCloud& pc) {
  if (!t.valid())
    throw Error(Errc::invalid_transform, "transform is not a rigid motion (frame " + pc.frame_id + ")");
  PointCloud out;
  out.frame_id = pc.frame_id;
  out.timestamp_us = pc.timestamp_us;
  out.points.reserve(pc.points.size());
  for (const auto& p : pc.points) {
    const Vec3 q = t.apply({p.x, p.y, p.z});
    out.points.push_back({q.x, q.y, q.z, p.intensity});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Polyline geometry
// ---------------------------------------------------------------------------

/// Sorts vertices by x and merges runs of identical x by averaging their y,
/// so the result has strictly increasing x. Idempotent.
/// Throws Errc::empty_polyline on zero vertices.
inline Polyline2D canonicalize_polyline(const Polyline2D& p) {
  if (p.vertices.empty()) throw Error(Errc::empty_polyline, "cannot canonicalize an empty polyline");
  std::vector<Vec2> verts = p.vertices;
  std::stable_sort(verts.begin(), verts.end(),
                   [](const Vec2& a, const Vec2& b) { return a.x < b.x; });
  Polyline2D out;
  out.cls = p.cls;
  out.vertices.reserve(verts.size());
  std::size_t i = 0;
  while (i < verts.size()) {
    std::size_t j = i + 1;
    double y_sum = verts[i].y;
    while (j < verts.size() && verts[j].x == verts[i].x) {
      y_sum += verts[j].y;
      ++j;
    }
    out.vertices.push_back({verts[i].x, y_sum / static_cast<double>(j - i)});
    i = j;
  }
  return out;
}

/// Linear interpolation of the lateral position at longitudinal position `x`.
/// `p` must be canonical. Returns nullopt outside the interpolation domain
/// [x_front, x_back]; at a vertex x it returns that vertex's y exactly.
/// A single-vertex polyline has a point domain (matched within 1e-9).
inline std::optional<double> interp_lateral(const Polyline2D& p, double x) {
  if (p.vertices.empty()) return std::nullopt;
  const auto& v = p.vertices;
  if (v.size() == 1) {
    if (std::abs(x - v[0].x) <= 1e-9) return v[0].y;
    return std::nullopt;
  }
  if (x < v.front().x || x > v.back().x) return std::nullopt;
  auto it = std::lower_bound(v.begin(), v.end(), x,
                             [](const Vec2& a, double key) { return a.x < key; });
  if (it->x == x) return it->y;
  const Vec2& hi = *it;
  const Vec2& lo = *(it - 1);
  const double t = (x - lo.x) / (hi.x - lo.x);
  return lo.y + t * (hi.y - lo.y);
}

/// Restricts a canonical polyline to x in [lo, hi], interpolating boundary
/// vertices where segments cross the bounds. Returns nullopt when nothing of
/// the polyline remains in range.
inline std::optional<Polyline2D> clip_polyline_x(const Polyline2D& p, double lo, double hi) {
  if (p.vertices.empty() || lo > hi) return std::nullopt;
  const auto& v = p.vertices;
  if (v.front().x > hi || v.back().x < lo) return std::nullopt;
  Polyline2D out;
  out.cls = p.cls;
  if (v.front().x < lo) {
    if (auto y = interp_lateral(p, lo)) out.vertices.push_back({lo, *y});
  }
  for (const auto& vert : v) {
    if (vert.x >= lo && vert.x <= hi) out.vertices.push_back(vert);
  }
  if (v.back().x > hi) {
    if (auto y = interp_lateral(p, hi)) out.vertices.push_back({hi, *y});
  }
  if (out.vertices.empty()) return std::nullopt;
  return out;
}

/// |Pearson r| between vertex x and y coordinates, in [0,1]. Values near 1
/// mean straight segments; lower values mean curvature. A zero-variance axis
/// (axis-aligned line) scores 1.0: such a lane is maximally straight.
/// Throws Errc::too_few_vertices below 2 vertices.
inline double pearson_straightness(const Polyline3D& p) {
  const std::size_t n = p.vertices.size();
  if (n < 2) throw Error(Errc::too_few_vertices, "straightness needs >= 2 vertices");
  double mx = 0.0, my = 0.0;
  for (const auto& v : p.vertices) {
    mx += v.x;
    my += v.y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& v : p.vertices) {
    const double dx = v.x - mx;
    const double dy = v.y - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 1.0;
  const double r = std::abs(sxy) / std::sqrt(sxx * syy);
  return std::min(r, 1.0);
}

}  // namespace lanekit
