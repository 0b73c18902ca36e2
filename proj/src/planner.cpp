#include "harvest/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "harvest/errors.hpp"

namespace harvest {

namespace {

constexpr double kScoreCutoff = 20.0;  // kappa * distance beyond which a score is zero
constexpr int kInequalitiesPerStage = 9;
constexpr double kGuidanceReach = 0.8;      // fraction of the level footprint half-width
constexpr double kGuidanceSoftness = 0.05;  // m

// Inward half-planes of a convex cell, n . p >= c inside.
struct CellEdges {
  std::array<double, 4> nx, ny, c;
  Box2 box;
};

CellEdges make_edges(const FootprintCell& cell) {
  const double orientation =
      signed_area(std::span<const Vec2>(cell.v.data(), cell.v.size())) >= 0.0 ? 1.0 : -1.0;
  CellEdges e;
  for (std::size_t i = 0; i < 4; ++i) {
    const Vec2& a = cell.v[i];
    const Vec2& b = cell.v[(i + 1) % 4];
    Vec2 n(-(b.y() - a.y()), b.x() - a.x());
    const double len = n.norm();
    n *= orientation / (len > 0.0 ? len : 1.0);
    e.nx[i] = n.x();
    e.ny[i] = n.y();
    e.c[i] = n.dot(a);
  }
  e.box = bounding_box(cell);
  return e;
}

inline double logistic_score(const CellEdges& e, double x, double y, double kappa) {
  double s = 1.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double t = kappa * (e.nx[i] * x + e.ny[i] * y - e.c[i]);
    if (t < -kScoreCutoff) return 0.0;
    if (t < 40.0) s /= 1.0 + std::exp(-t);
  }
  return s;
}

double quality_at(const State& s, const ControlInput& u, const QualityBand& band, bool hold_low) {
  const double zc = corrected_distance(s.z, u.roll, u.pitch);
  return coverage_quality(hold_low ? std::max(zc, band.z_min) : zc, band);
}

std::optional<FootprintCell> footprint_at(const State& s, const ControlInput& u,
                                          const CameraIntrinsics& cam) {
  if (!(s.z > 0.0)) return std::nullopt;
  return project_footprint(s.position(), u.attitude(), cam);
}

}  // namespace

HarvestResult harvest(const ParticleField& field, const FootprintCell& cell) {
  HarvestResult out{field, 0};
  out.harvested = harvest_in_place(out.field, cell);
  return out;
}

std::size_t harvest_in_place(ParticleField& field, const FootprintCell& cell) {
  const std::size_t before = field.particles.size();
  std::erase_if(field.particles, [&](const Vec2& p) { return point_in_cell(p, cell); });
  return before - field.particles.size();
}

std::size_t remaining_term(const ParticleField& field, const FootprintCell& cell) {
  return static_cast<std::size_t>(std::count_if(field.particles.begin(), field.particles.end(),
                                                [&](const Vec2& p) { return !point_in_cell(p, cell); }));
}

double inside_score(const Vec2& p, const FootprintCell& cell, double sharpness) {
  return logistic_score(make_edges(cell), p.x(), p.y(), sharpness);
}

double smooth_remaining_term(const ParticleField& field, const FootprintCell& cell,
                             const CoverageSurrogateParams& params) {
  if (params.exact) return static_cast<double>(remaining_term(field, cell));
  const CellEdges edges = make_edges(cell);
  double inside = 0.0;
  for (const Vec2& p : field.particles) inside += logistic_score(edges, p.x(), p.y(), params.sharpness);
  return static_cast<double>(field.size()) - inside;
}

StageTerms stage_cost(const State& prev_state, const State& state, const ControlInput& prev_u,
                      const ControlInput& u, double remaining, const CostWeights& weights,
                      const QualityBand& band, const CostShaping& shaping) {
  StageTerms t;
  t.movement = (state.as_vector() - prev_state.as_vector()).squaredNorm();
  t.remaining = remaining;
  t.quality = quality_at(state, u, band, shaping.hold_quality_below_band);
  t.smoothness = (u.as_vector() - prev_u.as_vector()).squaredNorm();
  t.floor = std::max(band.z_min - state.z, 0.0);
  const double eps = shaping.floor_smoothing;
  if (eps > 0.0) t.floor = t.floor < eps ? t.floor * t.floor / (2.0 * eps) : t.floor - 0.5 * eps;
  t.total = weights.movement * t.movement + weights.remaining * t.remaining -
            weights.quality * t.quality + weights.smoothness * t.smoothness +
            weights.altitude_floor * t.floor;
  return t;
}

StageTerms stage_cost(const State& prev_state, const State& state, const ControlInput& prev_u,
                      const ControlInput& u, const ParticleField& field,
                      const std::optional<FootprintCell>& cell, const CostWeights& weights,
                      const QualityBand& band) {
  const double remaining =
      cell ? static_cast<double>(remaining_term(field, *cell)) : static_cast<double>(field.size());
  return stage_cost(prev_state, state, prev_u, u, remaining, weights, band);
}

// ---------------------------------------------------------------------------

struct HorizonEvaluator::Impl {
  // Per-stage buffers; stage j writes states[j + 1], weights block j + 1, etc.
  struct Buffers {
    std::vector<ControlInput> controls;
    std::vector<State> states;
    std::vector<double> weights;   // (N + 1) * n, block 0 is all ones
    std::vector<double> remsum;    // N + 1
    std::vector<std::optional<FootprintCell>> cells;
    std::vector<double> stage_costs;
    std::vector<double> inequalities;
    std::vector<char> feasible;

    void resize(std::size_t horizon, std::size_t n) {
      controls.resize(horizon);
      states.resize(horizon + 1);
      weights.assign((horizon + 1) * n, 1.0);
      remsum.assign(horizon + 1, static_cast<double>(n));
      cells.resize(horizon);
      stage_costs.resize(horizon);
      inequalities.resize(horizon * kInequalitiesPerStage);
      feasible.assign(horizon, 1);
    }
  };

  PlannerConfig cfg;
  RolloutContext ctx;
  std::size_t horizon;
  std::size_t n;
  std::vector<double> px, py;  // sorted by x
  std::ptrdiff_t target = -1;
  Vec2 target_point = Vec2::Zero();
  Buffers anchor, scratch;
  bool anchor_valid = false;
  std::size_t full_count = 0;
  std::size_t eval_count = 0;

  // Outputs of the last run: stages < first come from the anchor.
  std::size_t first = 0;

  Impl(const ParticleField& field, const RolloutContext& c, const PlannerConfig& config)
      : cfg(config), ctx(c), horizon(static_cast<std::size_t>(config.horizon)), n(field.size()) {
    if (config.horizon < 1) throw std::invalid_argument("horizon must be at least 1");
    std::vector<Vec2> pts = field.particles;
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
      return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    px.resize(n);
    py.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      px[i] = pts[i].x();
      py[i] = pts[i].y();
    }
    if (ctx.guidance && n > 0) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        const double d = (Vec2(px[i], py[i]) - *ctx.guidance).squaredNorm();
        if (d < best) {
          best = d;
          target = static_cast<std::ptrdiff_t>(i);
        }
      }
      target_point = Vec2(px[target], py[target]);
    }
    anchor.resize(horizon, n);
    scratch.resize(horizon, n);
    anchor.states[0] = scratch.states[0] = ctx.start;
  }

  const Buffers& source(std::size_t stage) const { return stage < first ? anchor : scratch; }

  // Stage j reads the state/weights produced by stage j - 1 (or the start).
  void run_stage(std::size_t j) {
    const State& s0 = (j == 0) ? ctx.start : (j <= first ? anchor.states[j] : scratch.states[j]);
    const double* w_in = (j <= first ? anchor.weights.data() : scratch.weights.data()) + j * n;
    const double rem_in = j <= first ? anchor.remsum[j] : scratch.remsum[j];
    const ControlInput& u = scratch.controls[j];
    const ControlInput& u_prev = j == 0 ? ctx.previous : scratch.controls[j - 1];

    const State s1 = step(s0, u, cfg.vehicle, cfg.dt);
    scratch.states[j + 1] = s1;
    double* w_out = scratch.weights.data() + (j + 1) * n;
    std::copy(w_in, w_in + n, w_out);
    double rem = rem_in;

    scratch.feasible[j] = 1;
    scratch.cells[j].reset();
    try {
      scratch.cells[j] = footprint_at(s1, u, cfg.camera);
    } catch (const RayHorizonError&) {
      scratch.feasible[j] = 0;
    }
    const std::optional<FootprintCell> reach =
        scratch.cells[j] ? inset_cell(*scratch.cells[j], cfg.harvest_inset) : std::nullopt;
    if (reach) {
      const CellEdges edges = make_edges(*reach);
      const double kappa = cfg.surrogate.sharpness;
      const double margin = cfg.surrogate.exact ? 1e-9 : kScoreCutoff / kappa;
      const double xlo = edges.box.lo.x() - margin, xhi = edges.box.hi.x() + margin;
      const double ylo = edges.box.lo.y() - margin, yhi = edges.box.hi.y() + margin;
      const auto begin = std::lower_bound(px.begin(), px.end(), xlo);
      const auto end = std::upper_bound(begin, px.end(), xhi);
      for (auto it = begin; it != end; ++it) {
        const std::size_t i = static_cast<std::size_t>(it - px.begin());
        const double y = py[i];
        if (y < ylo || y > yhi || w_out[i] == 0.0) continue;
        double s;
        if (cfg.surrogate.exact) {
          s = point_in_cell(Vec2(px[i], y), *reach) ? 1.0 : 0.0;
        } else {
          s = logistic_score(edges, px[i], y, kappa);
        }
        if (s > 0.0) {
          rem -= w_out[i] * s;
          w_out[i] *= 1.0 - s;
        }
      }
    }
    scratch.remsum[j + 1] = rem;

    const StageTerms t = stage_cost(s0, s1, u_prev, u, rem, cfg.weights, cfg.band, cfg.shaping);
    scratch.stage_costs[j] = scratch.feasible[j] ? t.total : std::numeric_limits<double>::infinity();

    double* c = scratch.inequalities.data() + j * kInequalitiesPerStage;
    const double zc = corrected_distance(s1.z, u.roll, u.pitch);
    const ActuationLimits& lim = cfg.limits;
    c[0] = zc - cfg.max_corrected_distance;
    c[1] = -s1.z;
    c[2] = s1.z - lim.altitude.hi;
    c[3] = s1.vx - lim.vx.hi;
    c[4] = lim.vx.lo - s1.vx;
    c[5] = s1.vy - lim.vy.hi;
    c[6] = lim.vy.lo - s1.vy;
    c[7] = s1.vz - lim.vz.hi;
    c[8] = lim.vz.lo - s1.vz;
  }

  // Returns the total cost; fills scratch for stages >= first.
  double run(std::span<const ControlInput> controls) {
    if (controls.size() != horizon) throw std::invalid_argument("control sequence length must equal the horizon");
    ++eval_count;
    std::size_t differing = 0;
    first = 0;
    if (anchor_valid) {
      first = horizon;
      for (std::size_t j = 0; j < horizon; ++j) {
        const Eigen::Vector4d a = anchor.controls[j].as_vector();
        const Eigen::Vector4d b = controls[j].as_vector();
        for (int k = 0; k < 4; ++k) {
          if (a[k] != b[k]) {
            ++differing;
            first = std::min(first, j);
          }
        }
      }
    }
    if (first == 0) ++full_count;
    for (std::size_t j = 0; j < horizon; ++j) scratch.controls[j] = controls[j];
    for (std::size_t j = first; j < horizon; ++j) run_stage(j);

    if (!anchor_valid || differing >= 2) promote();
    return total();
  }

  void promote() {
    for (std::size_t j = first; j < horizon; ++j) {
      anchor.controls[j] = scratch.controls[j];
      anchor.states[j + 1] = scratch.states[j + 1];
      anchor.remsum[j + 1] = scratch.remsum[j + 1];
      anchor.cells[j] = scratch.cells[j];
      anchor.stage_costs[j] = scratch.stage_costs[j];
      anchor.feasible[j] = scratch.feasible[j];
      std::copy_n(scratch.inequalities.begin() + j * kInequalitiesPerStage, kInequalitiesPerStage,
                  anchor.inequalities.begin() + j * kInequalitiesPerStage);
    }
    std::copy(scratch.weights.begin() + (first + 1) * n, scratch.weights.end(),
              anchor.weights.begin() + (first + 1) * n);
    anchor_valid = true;
    first = horizon;  // everything now readable from the anchor
  }

  double stage_cost_at(std::size_t j) const { return source(j).stage_costs[j]; }
  const State& state_at(std::size_t j) const { return j == 0 ? ctx.start : source(j - 1).states[j]; }

  double terminal() const {
    const State& last = state_at(horizon);
    const double damping = cfg.weights.vertical_damping * last.vz * last.vz;
    if (target < 0 || cfg.weights.guidance == 0.0) return damping;
    const double w = source(horizon - 1).weights[horizon * n + static_cast<std::size_t>(target)];
    // Pull the point where the vehicle could stop, not where the horizon ends.
    const Vec2 v(last.vx, last.vy);
    const double brake = cfg.vehicle.gravity *
                         std::tan(std::min(std::max(std::abs(cfg.limits.roll.lo), std::abs(cfg.limits.roll.hi)),
                                           std::max(std::abs(cfg.limits.pitch.lo), std::abs(cfg.limits.pitch.hi))));
    const Vec2 stop = Vec2(last.x, last.y) + v * (std::sqrt(v.squaredNorm() + 1e-4) / (2.0 * std::max(brake, 1e-3)));
    // Distance beyond what a level footprint at the final altitude would reach.
    const double reach = kGuidanceReach * std::max(last.z, 0.0) *
                         std::tan(0.5 * std::min(cfg.camera.hfov, cfg.camera.vfov));
    const double d = std::sqrt((stop - target_point).squaredNorm() + 1e-4) - reach;
    const double gap = kGuidanceSoftness * std::log1p(std::exp(d / kGuidanceSoftness));
    return damping + cfg.weights.guidance * w * (std::isfinite(gap) ? gap : d);
  }

  double total() const {
    double acc = 0.0;
    for (std::size_t j = 0; j < horizon; ++j) acc += stage_cost_at(j);
    return acc + terminal();
  }

  HorizonPlan plan() const {
    HorizonPlan p;
    p.controls.resize(horizon);
    p.states.resize(horizon + 1);
    p.states[0] = ctx.start;
    for (std::size_t j = 0; j < horizon; ++j) {
      const Buffers& b = source(j);
      p.controls[j] = scratch.controls[j];
      p.states[j + 1] = b.states[j + 1];
      p.cells.push_back(b.cells[j]);
      p.stage_costs.push_back(b.stage_costs[j]);
      p.remaining.push_back(b.remsum[j + 1]);
      p.inequalities.insert(p.inequalities.end(), b.inequalities.begin() + j * kInequalitiesPerStage,
                            b.inequalities.begin() + (j + 1) * kInequalitiesPerStage);
      p.feasible = p.feasible && b.feasible[j];
    }
    p.terminal_cost = terminal();
    p.total_cost = total();
    return p;
  }

  std::vector<double> inequalities() const {
    std::vector<double> out(horizon * kInequalitiesPerStage);
    for (std::size_t j = 0; j < horizon; ++j) {
      const Buffers& b = source(j);
      std::copy_n(b.inequalities.begin() + j * kInequalitiesPerStage, kInequalitiesPerStage,
                  out.begin() + j * kInequalitiesPerStage);
    }
    return out;
  }

  std::array<Interval, 4> boxes() const {
    return {cfg.limits.thrust, cfg.limits.roll, cfg.limits.pitch, cfg.limits.yaw};
  }
};

HorizonEvaluator::HorizonEvaluator(const ParticleField& field, const RolloutContext& ctx,
                                   const PlannerConfig& cfg)
    : impl_(std::make_unique<Impl>(field, ctx, cfg)) {}

HorizonEvaluator::~HorizonEvaluator() = default;

HorizonPlan HorizonEvaluator::evaluate(std::span<const ControlInput> controls) {
  impl_->run(controls);
  return impl_->plan();
}

Evaluation HorizonEvaluator::evaluate_decision(std::span<const double> y) {
  const std::vector<ControlInput> controls = decode(y);
  Evaluation e;
  e.objective = impl_->run(controls);
  e.inequalities = impl_->inequalities();
  return e;
}

std::vector<double> HorizonEvaluator::encode(std::span<const ControlInput> controls) const {
  const auto box = impl_->boxes();
  std::vector<double> y;
  y.reserve(controls.size() * 4);
  for (const ControlInput& u : controls) {
    const Eigen::Vector4d v = u.as_vector();
    for (int k = 0; k < 4; ++k) y.push_back((v[k] - box[k].lo) / box[k].width());
  }
  return y;
}

std::vector<ControlInput> HorizonEvaluator::decode(std::span<const double> y) const {
  const auto box = impl_->boxes();
  std::vector<ControlInput> out(y.size() / 4);
  for (std::size_t j = 0; j < out.size(); ++j) {
    const auto at = [&](int k) { return box[k].lo + y[4 * j + k] * box[k].width(); };
    out[j] = {at(0), at(1), at(2), at(3)};
  }
  return out;
}

std::size_t HorizonEvaluator::full_evaluations() const noexcept { return impl_->full_count; }
std::size_t HorizonEvaluator::evaluations() const noexcept { return impl_->eval_count; }

HorizonPlan rollout(const State& state, const ParticleField& field,
                    std::span<const ControlInput> controls, const ControlInput& previous,
                    const PlannerConfig& cfg, std::optional<Vec2> guidance) {
  PlannerConfig c = cfg;
  c.horizon = static_cast<int>(controls.size());
  HorizonEvaluator ev(field, {state, previous, guidance}, c);
  return ev.evaluate(controls);
}

std::vector<ControlInput> shift_warm_start(std::span<const ControlInput> plan, int horizon,
                                           const ControlInput& fallback) {
  std::vector<ControlInput> out;
  out.reserve(static_cast<std::size_t>(horizon));
  for (std::size_t j = 1; j < plan.size() && out.size() < static_cast<std::size_t>(horizon); ++j)
    out.push_back(plan[j]);
  const ControlInput fill = out.empty() ? fallback : out.back();
  while (out.size() < static_cast<std::size_t>(horizon)) out.push_back(fill);
  return out;
}

std::optional<Vec2> nearest_particle(const ParticleField& field, const Vec2& from) {
  if (field.empty()) return std::nullopt;
  const auto it = std::min_element(field.particles.begin(), field.particles.end(),
                                   [&](const Vec2& a, const Vec2& b) {
                                     return (a - from).squaredNorm() < (b - from).squaredNorm();
                                   });
  return *it;
}

PlanStepResult plan_step(const State& estimate, const ParticleField& field,
                         const ControlInput& previous,
                         std::span<const ControlInput> previous_sequence,
                         const PlannerConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const ControlInput hover{cfg.vehicle.hover_thrust(), 0.0, 0.0, previous.yaw};
  std::vector<ControlInput> warm = shift_warm_start(previous_sequence, cfg.horizon, clamp_input(hover, cfg.limits));
  for (ControlInput& u : warm) u = clamp_input(u, cfg.limits);

  std::optional<Vec2> target;
  if (cfg.weights.guidance > 0.0) target = nearest_particle(field, Vec2(estimate.x, estimate.y));

  HorizonEvaluator ev(field, {estimate, previous, target}, cfg);
  NlpProblem problem;
  problem.evaluate = [&ev](std::span<const double> y) { return ev.evaluate_decision(y); };
  problem.initial = ev.encode(warm);
  problem.lower.assign(problem.initial.size(), 0.0);
  problem.upper.assign(problem.initial.size(), 1.0);

  PlanStepResult result;
  try {
    result.report = minimize(problem, cfg.solver);
    result.sequence = ev.decode(result.report.solution);
    result.solver_failed = result.report.status == SolveStatus::NonFiniteObjective;
  } catch (const NonFiniteObjective&) {
    result.solver_failed = true;
  }
  if (result.solver_failed || result.sequence.empty()) {
    result.sequence = warm;
    result.solver_failed = true;
  }
  for (ControlInput& u : result.sequence) u = clamp_input(u, cfg.limits);
  result.input = result.sequence.front();
  result.solve_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace harvest
