#pragma once

#include <optional>
#include <vector>

#include "harvest/planner.hpp"
#include "harvest/scenario.hpp"

namespace harvest {

enum class Termination { FieldEmpty, CoverageStalled, StepCapReached };

const char* to_string(Termination t);

/// One control period. The cell is the footprint at the true pose; harvesting
/// uses the footprint at the estimated pose.
struct TraceRow {
  int step = 0;
  State truth;
  State estimate;
  ControlInput input;   // applied this step (held input when no solve ran)
  std::optional<FootprintCell> cell;
  std::size_t harvested = 0;
  std::size_t remaining = 0;
  double solve_seconds = 0.0;
  bool solved = false;
  bool converged = false;
};

struct MissionTrace {
  std::vector<TraceRow> rows;
  std::size_t initial_count = 0;
  Termination termination = Termination::FieldEmpty;

  double particle_coverage() const;
  std::vector<Vec3> positions() const;
  double path_length() const;
};

ParticleField initial_field(const Scenario& s);

/// Receding-horizon coverage loop: estimate, footprint, harvest, solve, apply.
MissionTrace run_mission(const Scenario& s);
MissionTrace run_mission(const Scenario& s, ParticleField field);

}  // namespace harvest
