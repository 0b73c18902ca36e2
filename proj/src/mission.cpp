#include "harvest/mission.hpp"

#include <cassert>
#include <stdexcept>

#include "harvest/random.hpp"

namespace harvest {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::FieldEmpty: return "field_empty";
    case Termination::CoverageStalled: return "coverage_stalled";
    case Termination::StepCapReached: return "step_cap_reached";
  }
  return "unknown";
}

double MissionTrace::particle_coverage() const {
  if (initial_count == 0) return 1.0;
  const std::size_t left = rows.empty() ? initial_count : rows.back().remaining;
  return 1.0 - static_cast<double>(left) / static_cast<double>(initial_count);
}

std::vector<Vec3> MissionTrace::positions() const {
  std::vector<Vec3> out;
  out.reserve(rows.size());
  for (const TraceRow& r : rows) out.push_back(r.truth.position());
  return out;
}

double MissionTrace::path_length() const {
  const std::vector<Vec3> p = positions();
  return harvest::path_length(p);
}

ParticleField initial_field(const Scenario& s) {
  if (s.particles == 0) return {};
  return ParticleField::from_points(sample_uniform(s.polygon, s.particles, s.sampling_seed));
}

MissionTrace run_mission(const Scenario& s) { return run_mission(s, initial_field(s)); }

MissionTrace run_mission(const Scenario& s, ParticleField field) {
  const PlannerConfig& cfg = s.planner;
  Rng noise = Rng(s.noise_seed);

  MissionTrace trace;
  trace.initial_count = field.initial_count;

  State truth = s.initial;
  ControlInput held = clamp_input({cfg.vehicle.hover_thrust(), 0.0, 0.0, 0.0}, cfg.limits);
  std::vector<ControlInput> plan;
  int quiet_steps = 0;

  for (int k = 0;; ++k) {
    TraceRow row;
    row.step = k;
    row.truth = truth;
    row.estimate = truth;
    if (s.noise.enabled) {
      row.estimate.x += noise.normal(0.0, s.noise.position_sigma);
      row.estimate.y += noise.normal(0.0, s.noise.position_sigma);
      row.estimate.z += noise.normal(0.0, s.noise.position_sigma);
    }
    // The estimator knows the ground plane.
    row.estimate.z = std::max(row.estimate.z, 0.0);

    if (truth.z > 0.0) row.cell = project_footprint(truth.position(), held.attitude(), cfg.camera);
    if (row.estimate.z > 0.0) {
      const FootprintCell seen = project_footprint(row.estimate.position(), held.attitude(), cfg.camera);
      if (const auto reach = inset_cell(seen, cfg.harvest_inset)) row.harvested = harvest_in_place(field, *reach);
    }
    row.remaining = field.size();
    row.input = held;

    quiet_steps = row.harvested == 0 ? quiet_steps + 1 : 0;
    if (field.empty()) {
      trace.termination = Termination::FieldEmpty;
      trace.rows.push_back(row);
      break;
    }
    if (field.coverage() >= s.stall_coverage && quiet_steps >= s.stall_steps) {
      trace.termination = Termination::CoverageStalled;
      trace.rows.push_back(row);
      break;
    }
    if (k >= s.step_cap) {
      trace.termination = Termination::StepCapReached;
      trace.rows.push_back(row);
      break;
    }

    const PlanStepResult res = plan_step(row.estimate, field, held, plan, cfg);
    const ControlInput u = clamp_input(res.input, cfg.limits);
    if (!input_within(u, cfg.limits)) throw std::logic_error("applied input outside actuation limits");
    row.input = u;
    row.solved = !res.solver_failed;
    row.converged = res.report.converged;
    row.solve_seconds = res.solve_seconds;
    trace.rows.push_back(row);

    ControlInput plant_input = u;
    if (s.noise.enabled) plant_input.thrust += noise.uniform(-s.noise.thrust_amplitude, s.noise.thrust_amplitude);
    truth = step(truth, plant_input, cfg.vehicle, cfg.dt);
    if (truth.z < 0.0) {
      truth.z = 0.0;
      truth.vz = std::max(truth.vz, 0.0);
    }
    held = u;
    plan = res.sequence;
  }
  return trace;
}

}  // namespace harvest
