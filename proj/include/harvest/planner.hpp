#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "harvest/geometry.hpp"
#include "harvest/quality.hpp"
#include "harvest/solver.hpp"
#include "harvest/vehicle.hpp"

namespace harvest {

/// Uncovered particles. Only ever shrinks during a mission.
struct ParticleField {
  std::vector<Vec2> particles;
  std::size_t initial_count = 0;

  static ParticleField from_points(std::vector<Vec2> pts) {
    const std::size_t n = pts.size();
    return {std::move(pts), n};
  }
  std::size_t size() const noexcept { return particles.size(); }
  bool empty() const noexcept { return particles.empty(); }
  double coverage() const {
    return initial_count == 0 ? 1.0 : 1.0 - static_cast<double>(size()) / static_cast<double>(initial_count);
  }
};

struct CostWeights {
  double movement = 0.1;        // w_X
  double remaining = 1.0;       // w_I
  double quality = 0.5;         // w_q
  double smoothness = 1.0;      // w_u
  double altitude_floor = 50.0; // w_z
  // Terminal pull toward the nearest uncovered particle; 0 disables it.
  double guidance = 10.0;
  // Terminal penalty on the final vertical speed, (m/s)^-2.
  double vertical_damping = 0.0;
};

// Optimizer-side conditioning of the stage cost. Default-constructed values
// give the plain cost.
struct CostShaping {
  // Score quality at max(z', z_min) so the cost has no jump at the band floor;
  // the soft floor term still penalizes flying below it.
  bool hold_quality_below_band = false;
  // Huber width (m) for the soft floor term; 0 keeps the kink at z_min.
  double floor_smoothing = 0.0;
};

struct CoverageSurrogateParams {
  double sharpness = 50.0;  // kappa, 1/m
  bool exact = false;       // use the ray-cast count instead of the logistic score
};

struct PlannerConfig {
  VehicleParams vehicle;
  ActuationLimits limits;
  CameraIntrinsics camera;
  CostWeights weights;
  CostShaping shaping{true, 0.02};
  QualityBand band;
  CoverageSurrogateParams surrogate;
  int horizon = 8;
  double dt = 0.1;
  // Upper bound on the corrected distance; defaults to z_max / cos^2(pi/10).
  double max_corrected_distance = 1.1055728090000843;
  // A particle counts as harvested only when it lies at least this far (m)
  // inside the footprint. Applies to predicted and actual harvesting.
  double harvest_inset = 0.1;
  SolverOptions solver = default_solver_options();

  static SolverOptions default_solver_options() {
    SolverOptions o;
    o.max_iterations = 40;
    o.penalty_initial = 1.0;
    o.relative_penalty = true;
    o.split_budget = true;
    o.constraint_tolerance = 1e-2;
    return o;
  }
};

struct HarvestResult {
  ParticleField field;
  std::size_t harvested = 0;
};

HarvestResult harvest(const ParticleField& field, const FootprintCell& cell);
std::size_t harvest_in_place(ParticleField& field, const FootprintCell& cell);

// |field \ cell| by ray casting.
std::size_t remaining_term(const ParticleField& field, const FootprintCell& cell);

/// Product of logistic edge scores, sigma(kappa * d_e(p)), with d_e the signed
/// inward distance to edge e. Exactly zero once p is more than 20/kappa outside
/// any edge (below 2.1e-9 of the untruncated value).
double inside_score(const Vec2& p, const FootprintCell& cell, double sharpness);

double smooth_remaining_term(const ParticleField& field, const FootprintCell& cell,
                             const CoverageSurrogateParams& params);

struct StageTerms {
  double movement = 0.0;    // ||dX||^2
  double remaining = 0.0;   // uncovered count (possibly smoothed)
  double quality = 0.0;     // q(z')
  double smoothness = 0.0;  // ||du||^2
  double floor = 0.0;       // [z_min - z]_+
  double total = 0.0;
};

/// One summand of the horizon cost for the pose reached after applying `u`
/// from `prev_state`; `remaining` is the uncovered count under that pose's cell.
StageTerms stage_cost(const State& prev_state, const State& state, const ControlInput& prev_u,
                      const ControlInput& u, double remaining, const CostWeights& weights,
                      const QualityBand& band, const CostShaping& shaping = {});

// Same, counting `field \ cell` exactly (no cell: the whole field remains).
StageTerms stage_cost(const State& prev_state, const State& state, const ControlInput& prev_u,
                      const ControlInput& u, const ParticleField& field,
                      const std::optional<FootprintCell>& cell, const CostWeights& weights,
                      const QualityBand& band);

/// Predicted trajectory and cost of a control sequence. Stage j pairs the
/// state after applying controls[j] with the attitude of controls[j].
struct HorizonPlan {
  std::vector<ControlInput> controls;
  std::vector<State> states;                      // N + 1, states[0] is the start
  std::vector<std::optional<FootprintCell>> cells;  // N, empty when the camera is on the ground
  std::vector<double> stage_costs;
  std::vector<double> remaining;                  // predicted uncovered count per stage
  std::vector<double> inequalities;               // c_i <= 0, 9 per stage
  double terminal_cost = 0.0;
  double total_cost = 0.0;
  bool feasible = true;  // false when a footprint could not be projected (cost +inf)
};

struct RolloutContext {
  State start;
  ControlInput previous;          // last applied input, for the first smoothness term
  std::optional<Vec2> guidance;   // terminal pull target
};

/// Evaluates horizon plans against a fixed field snapshot.
///
/// Particles are depleted stage by stage inside the horizon: a particle's
/// remaining weight is multiplied by (1 - score) at each predicted cell. The
/// evaluator caches the last multi-coordinate evaluation and restarts later
/// evaluations from the first stage whose controls differ, which makes
/// finite-difference probes cheaper without changing any result.
class HorizonEvaluator {
 public:
  HorizonEvaluator(const ParticleField& field, const RolloutContext& ctx, const PlannerConfig& cfg);
  ~HorizonEvaluator();
  HorizonEvaluator(const HorizonEvaluator&) = delete;
  HorizonEvaluator& operator=(const HorizonEvaluator&) = delete;

  HorizonPlan evaluate(std::span<const ControlInput> controls);

  // Normalized decision vector: 4 entries per stage, each mapped from [0, 1]
  // onto the actuation interval of thrust, roll, pitch, yaw.
  Evaluation evaluate_decision(std::span<const double> y);

  std::vector<double> encode(std::span<const ControlInput> controls) const;
  std::vector<ControlInput> decode(std::span<const double> y) const;

  std::size_t full_evaluations() const noexcept;
  std::size_t evaluations() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

HorizonPlan rollout(const State& state, const ParticleField& field,
                    std::span<const ControlInput> controls, const ControlInput& previous,
                    const PlannerConfig& cfg, std::optional<Vec2> guidance = std::nullopt);

// Drop the first control and repeat the last one.
std::vector<ControlInput> shift_warm_start(std::span<const ControlInput> plan, int horizon,
                                           const ControlInput& fallback);

struct PlanStepResult {
  ControlInput input;                  // first control, clamped to the actuation box
  std::vector<ControlInput> sequence;  // full optimized sequence
  SolveReport report;
  bool solver_failed = false;
  double solve_seconds = 0.0;
};

/// Solves the horizon problem from the estimated state, warm-started from the
/// previous optimal sequence shifted by one stage.
PlanStepResult plan_step(const State& estimate, const ParticleField& field,
                         const ControlInput& previous,
                         std::span<const ControlInput> previous_sequence,
                         const PlannerConfig& cfg);

std::optional<Vec2> nearest_particle(const ParticleField& field, const Vec2& from);

}  // namespace harvest
