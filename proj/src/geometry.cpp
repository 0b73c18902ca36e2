#include "harvest/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "harvest/errors.hpp"
#include "harvest/random.hpp"

namespace harvest {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Orientation of c relative to the directed line a->b.
double orient(const Vec2& a, const Vec2& b, const Vec2& c) { return cross(b - a, c - a); }

bool on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len = ab.norm();
  const double tol = 1e-12 * std::max(1.0, len);
  // |cross| = len * distance from the supporting line.
  if (std::abs(cross(ab, p - a)) > tol * len) return false;
  const double t = ab.dot(p - a);
  return t >= -tol * len && t <= ab.squaredNorm() + tol * len;
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double o1 = orient(a, b, c);
  const double o2 = orient(a, b, d);
  const double o3 = orient(c, d, a);
  const double o4 = orient(c, d, b);
  if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0)))
    return true;
  return on_segment(c, a, b) || on_segment(d, a, b) || on_segment(a, c, d) ||
         on_segment(b, c, d);
}

}  // namespace

Polygon2D::Polygon2D(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
  const std::size_t n = vertices_.size();
  if (n < 3) throw InvalidPolygonError("polygon needs at least 3 vertices");
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices_[i];
    if (!a.allFinite()) throw InvalidPolygonError("polygon vertex " + std::to_string(i) + " is not finite");
    if ((vertices_[(i + 1) % n] - a).norm() <= 1e-9)
      throw InvalidPolygonError("polygon vertices " + std::to_string(i) + " and " +
                                std::to_string((i + 1) % n) + " coincide");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(vertices_[i], vertices_[(i + 1) % n], vertices_[j],
                             vertices_[(j + 1) % n]))
        throw InvalidPolygonError("polygon edges " + std::to_string(i) + " and " +
                                  std::to_string(j) + " intersect");
    }
  }
}

Mat3 rotation_matrix(const Attitude& att) {
  return (Eigen::AngleAxisd(att.roll, Vec3::UnitX()) * Eigen::AngleAxisd(att.pitch, Vec3::UnitY()) *
          Eigen::AngleAxisd(att.yaw, Vec3::UnitZ()))
      .toRotationMatrix();
}

FootprintCell project_footprint(const Vec3& position, const Attitude& att,
                                const CameraIntrinsics& cam) {
  const Mat3 r = rotation_matrix(att);
  const double th = std::tan(0.5 * cam.hfov);
  const double tv = std::tan(0.5 * cam.vfov);
  static constexpr std::array<std::array<double, 2>, 4> kCorners{
      {{1.0, 1.0}, {1.0, -1.0}, {-1.0, -1.0}, {-1.0, 1.0}}};

  FootprintCell cell;
  for (std::size_t i = 0; i < 4; ++i) {
    const Vec3 dir = r * Vec3(kCorners[i][0] * th, kCorners[i][1] * tv, -1.0);
    if (!(dir.z() < 0.0)) throw RayHorizonError("camera corner ray does not reach the ground plane");
    const double t = -position.z() / dir.z();
    cell.v[i] = Vec2(position.x() + t * dir.x(), position.y() + t * dir.y());
  }
  return cell;
}

bool point_in_ring(const Vec2& p, std::span<const Vec2> ring) {
  const std::size_t n = ring.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = ring[j];
    const Vec2& b = ring[i];
    if (on_segment(p, a, b)) return true;
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x_cross = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (x_cross > p.x()) inside = !inside;
    }
  }
  return inside;
}

bool point_in_cell(const Vec2& p, const FootprintCell& cell) {
  return point_in_ring(p, std::span<const Vec2>(cell.v.data(), cell.v.size()));
}

bool point_in_polygon(const Vec2& p, const Polygon2D& poly) {
  return point_in_ring(p, poly.vertices());
}

std::vector<Vec2> sample_uniform(const Polygon2D& poly, std::size_t n, std::uint64_t seed) {
  if (polygon_area(poly) < 1e-12) throw DegenerateAreaError("polygon area below 1e-12 m^2");
  const Box2 box = bounding_box(poly.vertices());
  Rng rng(seed);
  std::vector<Vec2> out;
  out.reserve(n);
  while (out.size() < n) {
    const Vec2 p(rng.uniform(box.lo.x(), box.hi.x()), rng.uniform(box.lo.y(), box.hi.y()));
    if (point_in_polygon(p, poly)) out.push_back(p);
  }
  return out;
}

double signed_area(std::span<const Vec2> ring) {
  double acc = 0.0;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) acc += cross(ring[j], ring[i]);
  return 0.5 * acc;
}

double polygon_area(const Polygon2D& poly) { return std::abs(signed_area(poly.vertices())); }

double cell_area(const FootprintCell& cell) {
  return std::abs(signed_area(std::span<const Vec2>(cell.v.data(), cell.v.size())));
}

Box2 bounding_box(std::span<const Vec2> pts) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  Box2 b{Vec2(inf, inf), Vec2(-inf, -inf)};
  for (const Vec2& p : pts) {
    b.lo = b.lo.cwiseMin(p);
    b.hi = b.hi.cwiseMax(p);
  }
  return b;
}

Box2 bounding_box(const FootprintCell& cell) {
  return bounding_box(std::span<const Vec2>(cell.v.data(), cell.v.size()));
}

double path_length(std::span<const Vec3> points) {
  double len = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) len += (points[i] - points[i - 1]).norm();
  return len;
}

std::optional<FootprintCell> inset_cell(const FootprintCell& cell, double distance) {
  if (distance == 0.0) return cell;
  const double orientation = signed_area(cell.v) >= 0.0 ? 1.0 : -1.0;
  // Offset edge i (v_i -> v_{i+1}) as n_i . p = c_i with n_i the unit inward normal.
  std::array<Vec2, 4> n;
  std::array<double, 4> c;
  for (std::size_t i = 0; i < 4; ++i) {
    const Vec2 d = cell.v[(i + 1) % 4] - cell.v[i];
    const double len = d.norm();
    if (len == 0.0) return std::nullopt;
    n[i] = orientation * Vec2(-d.y(), d.x()) / len;
    c[i] = n[i].dot(cell.v[i]) + distance;
  }
  FootprintCell out;
  for (std::size_t i = 0; i < 4; ++i) {
    const std::size_t prev = (i + 3) % 4;
    Eigen::Matrix2d a;
    a << n[prev].x(), n[prev].y(), n[i].x(), n[i].y();
    const double det = a.determinant();
    if (std::abs(det) < 1e-15) return std::nullopt;
    out.v[i] = a.inverse() * Vec2(c[prev], c[i]);
  }
  // The offset lines only bound a cell when every new vertex respects all of them.
  for (const Vec2& p : out.v)
    for (std::size_t i = 0; i < 4; ++i)
      if (n[i].dot(p) < c[i] - 1e-12) return std::nullopt;
  if (signed_area(out.v) * orientation <= 0.0) return std::nullopt;
  return out;
}

std::vector<Vec2> clip_convex(std::span<const Vec2> subject, std::span<const Vec2> convex_clip) {
  std::vector<Vec2> out(subject.begin(), subject.end());
  const double sign = signed_area(convex_clip) >= 0.0 ? 1.0 : -1.0;
  const std::size_t m = convex_clip.size();
  for (std::size_t e = 0; e < m && !out.empty(); ++e) {
    const Vec2& a = convex_clip[e];
    const Vec2& b = convex_clip[(e + 1) % m];
    std::vector<Vec2> in;
    in.swap(out);
    for (std::size_t i = 0; i < in.size(); ++i) {
      const Vec2& p = in[i];
      const Vec2& q = in[(i + 1) % in.size()];
      const double sp = sign * orient(a, b, p);
      const double sq = sign * orient(a, b, q);
      if (sp >= 0.0) out.push_back(p);
      if ((sp >= 0.0) != (sq >= 0.0)) out.push_back(p + (q - p) * (sp / (sp - sq)));
    }
  }
  return out;
}

}  // namespace harvest
