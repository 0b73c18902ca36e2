#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace harvest {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Simple polygon in the ground plane, either orientation.
///
/// Construction validates the vertex list: at least three vertices, no two
/// consecutive vertices closer than 1e-9 m, and no intersecting edges other
/// than neighbours sharing an endpoint. Throws InvalidPolygonError otherwise.
class Polygon2D {
 public:
  explicit Polygon2D(std::vector<Vec2> vertices);

  const std::vector<Vec2>& vertices() const noexcept { return vertices_; }
  std::size_t size() const noexcept { return vertices_.size(); }

 private:
  std::vector<Vec2> vertices_;
};

struct Attitude {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

struct CameraIntrinsics {
  double hfov = 1.2;  // rad
  double vfov = 1.2;  // rad
};

/// Ground quadrilateral seen by the camera. Vertex order follows the camera
/// corners (+h,+v), (+h,-v), (-h,-v), (-h,+v).
struct FootprintCell {
  std::array<Vec2, 4> v;
};

struct Box2 {
  Vec2 lo;
  Vec2 hi;
  double width() const { return hi.x() - lo.x(); }
  double height() const { return hi.y() - lo.y(); }
};

// R = Rx(roll) * Ry(pitch) * Rz(yaw).
Mat3 rotation_matrix(const Attitude& att);

/// Intersects the four rotated frustum-corner rays with the plane z = 0.
///
/// Corner directions in the camera frame are (+-tan(hfov/2), +-tan(vfov/2), -1).
/// Requires position.z() > 0. Throws RayHorizonError when a corner ray does not
/// point strictly downward.
FootprintCell project_footprint(const Vec3& position, const Attitude& att,
                                const CameraIntrinsics& cam);

// Ray casting toward +x with the half-open edge rule; boundary points count as inside.
bool point_in_ring(const Vec2& p, std::span<const Vec2> ring);
bool point_in_cell(const Vec2& p, const FootprintCell& cell);
bool point_in_polygon(const Vec2& p, const Polygon2D& poly);

/// Rejection sampling over the bounding box. Deterministic for a fixed seed.
/// Throws DegenerateAreaError when the polygon area is below 1e-12 m^2.
std::vector<Vec2> sample_uniform(const Polygon2D& poly, std::size_t n, std::uint64_t seed);

double signed_area(std::span<const Vec2> ring);
double polygon_area(const Polygon2D& poly);
double cell_area(const FootprintCell& cell);

Box2 bounding_box(std::span<const Vec2> pts);
Box2 bounding_box(const FootprintCell& cell);

double path_length(std::span<const Vec3> points);

/// Cell whose edges are moved inward by `distance` (m). Empty when the offset
/// consumes the cell. A distance of 0 returns the cell unchanged.
std::optional<FootprintCell> inset_cell(const FootprintCell& cell, double distance);

// Intersection of a ring with a convex clip ring (Sutherland-Hodgman).
std::vector<Vec2> clip_convex(std::span<const Vec2> subject, std::span<const Vec2> convex_clip);

}  // namespace harvest
