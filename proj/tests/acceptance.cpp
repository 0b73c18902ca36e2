// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "harvest/harness.hpp"
#include "harvest/planner.hpp"
#include "harvest/quality.hpp"
#include "harvest/solver.hpp"

using namespace harvest;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

Scenario case_scenario(int k) {
  return load_scenario(std::string(HARVEST_SCENARIO_DIR) + "/case" + std::to_string(k) + ".json");
}

// Traces from criteria 5 and 6, post-checked by criterion 7.
std::vector<MissionTrace> g_traces;
// Per-mission mean solve time from criterion 5, indexed by particle-count slot.
std::vector<std::vector<double>> g_solve_means(3);
bool g_criterion5_ran = false;

Outcome quality_endpoints() {
  const QualityBand band;
  const double lo = coverage_quality(band.z_min, band);
  const double hi = coverage_quality(band.z_max, band);
  const double mid = coverage_quality(0.5 * (band.z_min + band.z_max), band);
  Outcome o;
  o.pass = std::abs(lo - 1.0) <= 1e-12 && std::abs(hi) <= 1e-12 && std::abs(mid - 0.5625) <= 1e-12;
  o.detail = format("q(z_min)=%.17g q(z_max)=%.17g q(mid)=%.17g", lo, hi, mid);
  return o;
}

Outcome hover_equilibrium() {
  const VehicleParams p{3.3, 9.81};
  const ControlInput u{p.hover_thrust(), 0, 0, 0};
  const State s0{1.0, 0.0, -0.8, 0.0, 0.6, 0.0};
  State s = s0;
  for (int k = 0; k < 1000; ++k) s = step(s, u, p, 0.1);
  const double drift = (s.position() - s0.position()).norm();
  Outcome o;
  o.pass = std::abs(p.hover_thrust() - 32.373) < 1e-12 && drift < 1e-9;
  o.detail = format("T=%.6f N, drift after 1000 steps %.3g m", p.hover_thrust(), drift);
  return o;
}

// Independent ray-plane intersection built from Eigen's angle-axis rotations.
std::array<Vec2, 4> oracle_footprint(const Vec3& pos, const Attitude& a, const CameraIntrinsics& cam) {
  const Eigen::Matrix3d r = (Eigen::AngleAxisd(a.roll, Vec3::UnitX()) * Eigen::AngleAxisd(a.pitch, Vec3::UnitY()) *
                             Eigen::AngleAxisd(a.yaw, Vec3::UnitZ()))
                                .toRotationMatrix();
  const Eigen::Hyperplane<double, 3> ground(Vec3::UnitZ(), 0.0);
  const double th = std::tan(0.5 * cam.hfov), tv = std::tan(0.5 * cam.vfov);
  const double sh[4] = {1, 1, -1, -1}, sv[4] = {1, -1, -1, 1};
  std::array<Vec2, 4> out;
  for (int i = 0; i < 4; ++i) {
    const Eigen::ParametrizedLine<double, 3> ray(pos, (r * Vec3(sh[i] * th, sv[i] * tv, -1.0)).normalized());
    const Vec3 hit = ray.intersectionPoint(ground);
    out[i] = hit.head<2>();
  }
  return out;
}

Outcome footprint_oracle() {
  const CameraIntrinsics cam{1.2, 1.2};
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> xy(-5, 5), z(0.05, 1.2), tilt(-M_PI / 10, M_PI / 10), yaw(-M_PI, M_PI);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 pos(xy(rng), xy(rng), z(rng));
    const Attitude a{tilt(rng), tilt(rng), yaw(rng)};
    const FootprintCell c = project_footprint(pos, a, cam);
    const auto ref = oracle_footprint(pos, a, cam);
    for (int k = 0; k < 4; ++k) worst = std::max(worst, (c.v[k] - ref[k]).cwiseAbs().maxCoeff());
  }
  bool level_exact = true;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 pos(xy(rng), xy(rng), z(rng));
    const FootprintCell c = project_footprint(pos, {}, cam);
    const double hx = pos.z() * std::tan(0.5 * cam.hfov), hy = pos.z() * std::tan(0.5 * cam.vfov);
    const Vec2 expect[4] = {{pos.x() + hx, pos.y() + hy}, {pos.x() + hx, pos.y() - hy},
                            {pos.x() - hx, pos.y() - hy}, {pos.x() - hx, pos.y() + hy}};
    for (int k = 0; k < 4; ++k) level_exact = level_exact && c.v[k] == expect[k];
  }
  Outcome o;
  o.pass = worst <= 1e-9 && level_exact;
  o.detail = format("max vertex error %.3g m over 1e4 poses; level case exact: %s", worst, level_exact ? "yes" : "no");
  return o;
}

Outcome point_in_cell_oracle() {
  const CameraIntrinsics cam{1.2, 1.2};
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> z(0.05, 1.2), tilt(-M_PI / 10, M_PI / 10), yaw(-M_PI, M_PI), off(-1.5, 1.5);
  int disagreements = 0, ties = 0;
  for (int i = 0; i < 100000; ++i) {
    const FootprintCell c = project_footprint({0, 0, z(rng)}, {tilt(rng), tilt(rng), yaw(rng)}, cam);
    const Vec2 p(off(rng), off(rng));
    const double orient = signed_area(c.v) > 0 ? 1.0 : -1.0;
    bool inside = true, tie = false;
    for (int e = 0; e < 4; ++e) {
      const Vec2 a = c.v[e], b = c.v[(e + 1) % 4];
      const double cr = orient * ((b - a).x() * (p - a).y() - (b - a).y() * (p - a).x());
      if (std::abs(cr) < 1e-12) tie = true;
      if (cr < 0) inside = false;
    }
    if (tie) {
      ++ties;
      continue;
    }
    if (point_in_cell(p, c) != inside) ++disagreements;
  }
  Outcome o;
  o.pass = disagreements == 0;
  o.detail = format("%d disagreements on 1e5 pairs (%d ties excluded)", disagreements, ties);
  return o;
}

Outcome coverage_claim() {
  const std::size_t counts[3] = {100, 500, 2000};
  double worst = 1.0;
  std::string where;
  int runs = 0;
  for (int c = 1; c <= 3; ++c) {
    const Scenario base = case_scenario(c);
    for (int slot = 0; slot < 3; ++slot) {
      for (int r = 0; r < 5; ++r) {
        Scenario s = base;
        s.planner.horizon = 8;
        s.noise.enabled = true;
        s.particles = counts[slot];
        s.sampling_seed = base.sampling_seed + r;
        s.noise_seed = base.noise_seed + r;
        MissionTrace t = run_mission(s);
        const Metrics m = compute_metrics(s, t);
        ++runs;
        if (m.raster_coverage < worst) {
          worst = m.raster_coverage;
          where = format("case %d, n=%zu, repeat %d", c, counts[slot], r);
        }
        g_solve_means[slot].push_back(m.mean_solve_seconds);
        g_traces.push_back(std::move(t));
      }
    }
  }
  g_criterion5_ran = true;
  Outcome o;
  o.pass = worst >= 0.975;
  o.detail = format("%d runs, minimum raster coverage %.4f (%s)", runs, worst, where.c_str());
  return o;
}

Outcome table_trends() {
  const double reference_grid[2] = {7.1, 4.2};
  bool a = true, b = true, c = true;
  std::string detail;
  for (int k = 1; k <= 3; ++k) {
    const Scenario base = case_scenario(k);
    const MissionTrace grid = grid_baseline(base);
    const double g = grid.path_length();
    g_traces.push_back(grid);
    if (k <= 2 && std::abs(g - reference_grid[k - 1]) > 0.15 * reference_grid[k - 1]) c = false;

    double sum8 = 0, sum15 = 0, max8 = 0, max15 = 0;
    int seed_wins = 0;
    for (int r = 0; r < 5; ++r) {
      double len[2];
      const int horizons[2] = {8, 15};
      for (int h = 0; h < 2; ++h) {
        Scenario s = base;
        s.noise.enabled = false;
        s.planner.horizon = horizons[h];
        s.sampling_seed = base.sampling_seed + r;
        s.noise_seed = base.noise_seed + r;
        MissionTrace t = run_mission(s);
        len[h] = t.path_length();
        g_traces.push_back(std::move(t));
      }
      sum8 += len[0];
      sum15 += len[1];
      max8 = std::max(max8, len[0]);
      max15 = std::max(max15, len[1]);
      if (len[1] <= len[0]) ++seed_wins;
    }
    if (!(max8 < g && max15 < g)) a = false;
    if (!(sum15 <= sum8)) b = false;
    detail += format(" case%d: grid %.3f, N8 mean %.3f max %.3f, N15 mean %.3f max %.3f, N15<=N8 on %d/5 seeds;", k, g,
                     sum8 / 5, max8, sum15 / 5, max15, seed_wins);
  }
  Outcome o;
  o.pass = a && b && c;
  o.detail = format("(a) %s (b) %s (c) %s;", a ? "ok" : "FAIL", b ? "ok" : "FAIL", c ? "ok" : "FAIL") + detail;
  return o;
}

Outcome harvest_accounting() {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t rows = 0, bad = 0;
  for (const MissionTrace& t : g_traces) {
    std::size_t prev = t.initial_count;
    for (const TraceRow& r : t.rows) {
      ++rows;
      if (r.remaining > prev || r.remaining + r.harvested != prev) ++bad;
      prev = r.remaining;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Outcome o;
  o.pass = !g_traces.empty() && bad == 0 && secs < 1.0;
  o.detail = format("%zu traces, %zu rows, %zu violations, %.3f s", g_traces.size(), rows, bad, secs);
  return o;
}

Outcome surrogate_fidelity() {
  const CameraIntrinsics cam{1.2, 1.2};
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> z(0.2, 1.0), tilt(-M_PI / 10, M_PI / 10), yaw(-M_PI, M_PI);
  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    const FootprintCell cell = project_footprint({0, 0, z(rng)}, {tilt(rng), tilt(rng), yaw(rng)}, cam);
    const Box2 box = bounding_box(cell);
    const Polygon2D area({{box.lo.x() - 0.5, box.lo.y() - 0.5}, {box.hi.x() + 0.5, box.lo.y() - 0.5},
                          {box.hi.x() + 0.5, box.hi.y() + 0.5}, {box.lo.x() - 0.5, box.hi.y() + 0.5}});
    std::vector<Vec2> kept;
    for (const Vec2& p : sample_uniform(area, 3000, 1000 + inst)) {
      double d = INFINITY;
      for (int e = 0; e < 4; ++e) {
        const Vec2 a = cell.v[e], b = cell.v[(e + 1) % 4];
        const double t = std::clamp((p - a).dot(b - a) / (b - a).squaredNorm(), 0.0, 1.0);
        d = std::min(d, (p - (a + t * (b - a))).norm());
      }
      if (d >= 0.05) kept.push_back(p);
    }
    const ParticleField field = ParticleField::from_points(kept);
    const double smooth = smooth_remaining_term(field, cell, {200.0, false});
    const double exact = static_cast<double>(remaining_term(field, cell));
    worst = std::max(worst, std::abs(smooth - exact) / static_cast<double>(field.size()));
  }
  Outcome o;
  o.pass = worst < 0.01;
  o.detail = format("max |smooth - exact| / n = %.3g over 20 instances", worst);
  return o;
}

Outcome compute_budget() {
  Outcome o;
  if (!g_criterion5_ran) {
    o.pass = false;
    o.detail = "criterion 5 runs missing";
    return o;
  }
  double mean[3];
  for (int i = 0; i < 3; ++i) {
    double s = 0;
    for (double v : g_solve_means[i]) s += v;
    mean[i] = s / static_cast<double>(g_solve_means[i].size());
  }
  o.pass = mean[0] <= 1.0 && mean[1] <= 1.0 && mean[2] <= 1.0 && mean[0] < mean[1] && mean[1] < mean[2];
  o.detail = format("mean solve n=100: %.4f s, n=500: %.4f s, n=2000: %.4f s", mean[0], mean[1], mean[2]);
  return o;
}

Outcome solver_sanity() {
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> u(-3, 3), pos(0.2, 10);
  double worst = 0.0;
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 1 + rng() % 12;
    std::vector<double> a(n), c(n), lo(n), hi(n), x0(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = pos(rng);
      c[i] = u(rng);
      lo[i] = std::min(u(rng), 0.0) - 0.1;
      hi[i] = std::max(u(rng), 0.0) + 0.1;
      x0[i] = std::clamp(u(rng), lo[i], hi[i]);
    }
    NlpProblem p;
    p.evaluate = [a, c](std::span<const double> x) {
      double s = 0;
      for (std::size_t i = 0; i < x.size(); ++i) s += a[i] * (x[i] - c[i]) * (x[i] - c[i]);
      return Evaluation{s, {}};
    };
    p.lower = lo;
    p.upper = hi;
    p.initial = x0;
    const SolveReport r = minimize(p);
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(r.solution[i] - std::clamp(c[i], lo[i], hi[i])));
  }

  // Step-halving check on the horizon objective.
  const Scenario s = case_scenario(1);
  const ParticleField field = initial_field(s);
  const RolloutContext ctx{{1.2, 0.1, -0.9, -0.05, 0.6, 0.0}, {s.planner.vehicle.hover_thrust(), 0, 0, 0},
                           Vec2(2.0, -1.5)};
  HorizonEvaluator ev(field, ctx, s.planner);
  std::vector<ControlInput> seq(static_cast<std::size_t>(s.planner.horizon),
                                ControlInput{s.planner.vehicle.hover_thrust(), 0.05, 0.05, 0.1});
  std::vector<double> y = ev.encode(seq);
  std::uniform_real_distribution<double> jitter(-0.02, 0.02);
  for (double& v : y) v = std::clamp(v + jitter(rng), 0.0, 1.0);
  const bool feasible = max_violation(ev.evaluate_decision(y).inequalities) == 0.0;
  const ScalarFunction f = [&](std::span<const double> x) { return ev.evaluate_decision(x).objective; };
  const double h = 4e-3;
  const auto g1 = gradient(f, y, h), g2 = gradient(f, y, h / 2), g4 = gradient(f, y, h / 4);
  std::vector<double> ratios;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e1 = g1[i] - g2[i], e2 = g2[i] - g4[i];
    if (std::abs(e2) > 1e-6 * std::max(1.0, std::abs(g4[i]))) ratios.push_back(e1 / e2);
  }
  std::sort(ratios.begin(), ratios.end());
  const double median = ratios.empty() ? NAN : ratios[ratios.size() / 2];
  Outcome o;
  o.pass = worst <= 1e-6 && feasible && ratios.size() >= y.size() / 2 && std::abs(median - 4.0) <= 0.5;
  o.detail = format("box-QP max error %.3g; Richardson median ratio %.3f over %zu/%zu coordinates (point feasible: %s)",
                    worst, median, ratios.size(), y.size(), feasible ? "yes" : "no");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all = {
      {1, "quality endpoints", quality_endpoints},
      {2, "hover equilibrium", hover_equilibrium},
      {3, "footprint oracle", footprint_oracle},
      {4, "point-in-cell oracle", point_in_cell_oracle},
      {5, "coverage >= 97.5% (noise on)", coverage_claim},
      {6, "path-length trends", table_trends},
      {7, "harvest monotonicity and conservation", harvest_accounting},
      {8, "surrogate fidelity at kappa=200", surrogate_fidelity},
      {9, "per-step compute budget", compute_budget},
      {10, "solver sanity", solver_sanity},
  };
  int failures = 0;
  for (const Criterion& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
