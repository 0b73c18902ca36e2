#include <doctest.h>

#include <cmath>
#include <random>

#include "harvest/errors.hpp"
#include "harvest/geometry.hpp"

using namespace harvest;

namespace {

Polygon2D unit_square() { return Polygon2D({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

// Regular octagon with circumradius chosen so the area is 1.8.
Polygon2D octagon(double area) {
  const double r = std::sqrt(area / (2.0 * std::sqrt(2.0)));
  std::vector<Vec2> v;
  for (int i = 0; i < 8; ++i) v.emplace_back(r * std::cos(i * M_PI / 4), r * std::sin(i * M_PI / 4));
  return Polygon2D(v);
}

}  // namespace

TEST_CASE("rotation matrix") {
  CHECK(rotation_matrix({0, 0, 0}).isApprox(Mat3::Identity(), 0.0));

  const Mat3 rz = rotation_matrix({0, 0, M_PI / 2});
  Mat3 expect;
  expect << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  CHECK((rz - expect).cwiseAbs().maxCoeff() < 1e-15);

  // Frozen from an independent element-by-element product.
  Mat3 frozen;
  frozen << 0.9362933635841992, -0.28962947762551555, 0.19866933079506122,
      0.31299182578546797, 0.9447024859948943, -0.09784339500725571,
      -0.1593450793079779, 0.1537919979889642, 0.975170327201816;
  CHECK((rotation_matrix({0.1, 0.2, 0.3}) - frozen).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("rotation matrices are orthonormal") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> a(-M_PI, M_PI);
  for (int i = 0; i < 200; ++i) {
    const Mat3 r = rotation_matrix({a(rng), a(rng), a(rng)});
    CHECK((r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("footprint projection") {
  SUBCASE("right-angle camera at 1 m gives the unit square") {
    const FootprintCell c = project_footprint({0, 0, 1}, {}, {M_PI / 2, M_PI / 2});
    for (const Vec2& p : c.v) {
      CHECK(std::abs(std::abs(p.x()) - 1.0) < 1e-15);
      CHECK(std::abs(std::abs(p.y()) - 1.0) < 1e-15);
    }
  }
  SUBCASE("level camera at the start pose") {
    const double t = 0.6841368083416923;
    const FootprintCell c = project_footprint({1, -0.8, 1}, {}, {1.2, 1.2});
    const Box2 b = bounding_box(c);
    CHECK(b.lo.x() == doctest::Approx(1 - t).epsilon(1e-15));
    CHECK(b.hi.x() == doctest::Approx(1 + t).epsilon(1e-15));
    CHECK(b.lo.y() == doctest::Approx(-0.8 - t).epsilon(1e-15));
    CHECK(b.hi.y() == doctest::Approx(-0.8 + t).epsilon(1e-15));
  }
  SUBCASE("rolled camera, frozen ray-plane oracle") {
    const FootprintCell c = project_footprint({0, 0, 1}, {M_PI / 10, 0, 0}, {1.2, 1.2});
    const double expect[4][2] = {{0.9249509069674025, 1.2974706341840538},
                                 {0.5885217831685761, -0.2938887269101958},
                                 {-0.5885217831685761, -0.2938887269101958},
                                 {-0.9249509069674025, 1.2974706341840538}};
    for (int i = 0; i < 4; ++i) {
      CHECK(std::abs(c.v[i].x() - expect[i][0]) < 1e-12);
      CHECK(std::abs(c.v[i].y() - expect[i][1]) < 1e-12);
    }
  }
  SUBCASE("general pose, frozen ray-plane oracle") {
    const FootprintCell c = project_footprint({0.3, -0.4, 0.9}, {0.2, -0.25, 1.0}, {1.2, 1.2});
    const double expect[4][2] = {{0.35296180314901066, 0.8518476159287668},
                                 {1.8409579582623463, 0.06091133009024058},
                                 {0.6699818696587113, -1.0158478133755613},
                                 {-0.1932803133896162, -0.37268172282312156}};
    for (int i = 0; i < 4; ++i) {
      CHECK(std::abs(c.v[i].x() - expect[i][0]) < 1e-12);
      CHECK(std::abs(c.v[i].y() - expect[i][1]) < 1e-12);
    }
  }
  SUBCASE("corner ray at or above the horizon") {
    CHECK_THROWS_AS(project_footprint({0, 0, 1}, {1.0, 0, 0}, {2.0, 2.0}), RayHorizonError);
  }
}

TEST_CASE("footprint area scales with the square of altitude") {
  const CameraIntrinsics cam{1.2, 1.2};
  const Attitude att{0.1, -0.2, 0.7};
  const double a1 = cell_area(project_footprint({0, 0, 0.5}, att, cam));
  const double a2 = cell_area(project_footprint({0, 0, 1.0}, att, cam));
  CHECK(a2 / a1 == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("point in polygon") {
  const Polygon2D sq = unit_square();
  CHECK(point_in_polygon({0.5, 0.5}, sq));
  CHECK_FALSE(point_in_polygon({1.5, 0.5}, sq));

  // Half-plane oracle on a convex quadrilateral.
  const FootprintCell cell = project_footprint({0.2, 0.1, 0.8}, {0.15, -0.1, 0.4}, {1.2, 1.2});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const Vec2 p(u(rng), u(rng));
    const double s = signed_area(cell.v);
    bool inside = true;
    bool tie = false;
    for (int e = 0; e < 4; ++e) {
      const Vec2 a = cell.v[e], b = cell.v[(e + 1) % 4];
      const double cr = (b - a).x() * (p - a).y() - (b - a).y() * (p - a).x();
      if (std::abs(cr) < 1e-12) tie = true;
      if (cr * s < 0) inside = false;
    }
    if (tie) continue;
    ++checked;
    CHECK(point_in_cell(p, cell) == inside);
  }
  CHECK(checked > 990);
}

TEST_CASE("polygon validation") {
  CHECK_THROWS_AS(Polygon2D({{0, 0}, {1, 0}}), InvalidPolygonError);
  CHECK_THROWS_AS(Polygon2D({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), InvalidPolygonError);
  CHECK_THROWS_AS(Polygon2D({{0, 0}, {0, 0}, {1, 0}, {0, 1}}), InvalidPolygonError);
  CHECK_NOTHROW(Polygon2D({{0, 0}, {0, 1}, {1, 1}, {1, 0}}));
}

TEST_CASE("areas") {
  CHECK(polygon_area(unit_square()) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(polygon_area(Polygon2D({{0, -2}, {2.5, -2}, {2.5, 0}, {0, 0}})) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(std::abs(polygon_area(octagon(1.8)) - 1.8) < 1e-9);
  // Clockwise input gives the same area.
  CHECK(polygon_area(Polygon2D({{0, 0}, {0, 1}, {1, 1}, {1, 0}})) == doctest::Approx(1.0));
}

TEST_CASE("uniform sampling") {
  const auto pts = sample_uniform(unit_square(), 100, 11);
  REQUIRE(pts.size() == 100);
  for (const Vec2& p : pts) {
    CHECK(p.x() >= 0.0);
    CHECK(p.x() <= 1.0);
    CHECK(p.y() >= 0.0);
    CHECK(p.y() <= 1.0);
  }

  const Polygon2D l({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}});
  CHECK(sample_uniform(l, 5, 42) == sample_uniform(l, 5, 42));
  CHECK(sample_uniform(l, 5, 42) != sample_uniform(l, 5, 43));

  // Lower half [0,2]x[0,1] holds 2/3 of the L's area.
  const std::size_t n = 10000;
  const auto many = sample_uniform(l, n, 5);
  std::size_t lower = 0;
  for (const Vec2& p : many) {
    CHECK(point_in_polygon(p, l));
    if (p.y() < 1.0) ++lower;
  }
  const double frac = static_cast<double>(lower) / n;
  const double sigma = std::sqrt((2.0 / 3.0) * (1.0 / 3.0) / n);
  CHECK(std::abs(frac - 2.0 / 3.0) < 3 * sigma);

  CHECK_THROWS_AS(sample_uniform(Polygon2D({{0, 0}, {1, 0}, {2, 1e-13}}), 3, 1),
                  DegenerateAreaError);
}

TEST_CASE("path length") {
  const std::vector<Vec3> one{{0, 0, 1}};
  CHECK(path_length(one) == 0.0);
  const std::vector<Vec3> two{{0, 0, 1}, {3, 4, 1}};
  CHECK(path_length(two) == 5.0);
  const std::vector<Vec3> tour{{0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}, {0, 0, 1}};
  CHECK(path_length(tour) == 4.0);
  CHECK(path_length(std::vector<Vec3>{}) == 0.0);
}

TEST_CASE("convex clipping") {
  const std::vector<Vec2> a{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  const std::vector<Vec2> b{{1, 1}, {3, 1}, {3, 3}, {1, 3}};
  CHECK(std::abs(signed_area(clip_convex(a, b))) == doctest::Approx(1.0));
  const std::vector<Vec2> far{{5, 5}, {6, 5}, {6, 6}, {5, 6}};
  CHECK(std::abs(signed_area(clip_convex(a, far))) == doctest::Approx(0.0));
}

TEST_CASE("inset cell") {
  const FootprintCell box{{Vec2(1, 1), Vec2(1, -1), Vec2(-1, -1), Vec2(-1, 1)}};
  const auto same = inset_cell(box, 0.0);
  REQUIRE(same);
  for (int i = 0; i < 4; ++i) CHECK(same->v[i] == box.v[i]);

  const auto in = inset_cell(box, 0.25);
  REQUIRE(in);
  for (const Vec2& p : in->v) {
    CHECK(std::abs(std::abs(p.x()) - 0.75) < 1e-14);
    CHECK(std::abs(std::abs(p.y()) - 0.75) < 1e-14);
  }
  CHECK(cell_area(*in) == doctest::Approx(2.25).epsilon(1e-14));
  CHECK(point_in_cell({0.7, 0.7}, *in));
  CHECK_FALSE(point_in_cell({0.8, 0.0}, *in));

  // A tilted cell shrinks and stays inside the original.
  const FootprintCell tilted = project_footprint({0.2, 0.1, 0.8}, {0.15, -0.1, 0.4}, {1.2, 1.2});
  const auto t = inset_cell(tilted, 0.05);
  REQUIRE(t);
  CHECK(cell_area(*t) < cell_area(tilted));
  for (const Vec2& p : t->v) CHECK(point_in_cell(p, tilted));

  CHECK_FALSE(inset_cell(box, 1.5));
}
