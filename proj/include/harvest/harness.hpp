#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "harvest/mission.hpp"
#include "harvest/scenario.hpp"

namespace harvest {

/// Parses a JSON scenario document. Omitted optional fields keep their
/// defaults; `polygon` is required. Throws ParseError on malformed JSON and
/// ValidationError (with the field path) on bad or unknown fields.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

/// Boustrophedon sweep at a fixed altitude with level attitude.
///
/// Lanes run along the longer bounding-box axis, spaced one level footprint
/// width apart and centred on the box; each lane spans the full box extent.
/// The trace is sampled every `sample_spacing` metres along the path and
/// harvests the scenario's particle field as it goes.
MissionTrace grid_baseline(const Scenario& s, double altitude = 1.0, double sample_spacing = 0.05);

// Fraction of grid points (cell centres at `resolution`) inside the polygon
// that lie in at least one recorded footprint.
double raster_coverage(const Polygon2D& poly, const MissionTrace& trace, double resolution = 0.01);

// Mean of area(c_k ∩ c_{k+1}) / area(c_k) over consecutive recorded footprints.
double mean_overlap(const MissionTrace& trace);

struct Metrics {
  double path_length = 0.0;
  double particle_coverage = 0.0;
  double raster_coverage = 0.0;
  int steps = 0;
  double mean_solve_seconds = 0.0;
  double max_solve_seconds = 0.0;
  double mean_overlap = 0.0;
  std::string termination;
};

Metrics compute_metrics(const Scenario& s, const MissionTrace& trace);

// Column order is fixed; see README.
extern const std::vector<std::string> kTraceColumns;

void write_trace_csv(const std::filesystem::path& path, const MissionTrace& trace);
MissionTrace read_trace_csv(const std::filesystem::path& path);

void write_metrics_json(const std::filesystem::path& path, const Metrics& m);

// Target boundary, ground-track polyline and every `stride`-th footprint.
std::string render_svg(const MissionTrace& trace, const Polygon2D* boundary, int stride = 5);

/// Runs the mission and writes trace.csv, metrics.json and path.svg to out_dir.
Metrics run_and_report(const Scenario& s, const std::filesystem::path& out_dir,
                       MissionTrace* trace_out = nullptr);

struct SweepRow {
  std::size_t count = 0;
  int repeats = 0;
  double mean_raster_coverage = 0.0;
  double min_raster_coverage = 0.0;
  double mean_particle_coverage = 0.0;
  double mean_solve_seconds = 0.0;
  double max_solve_seconds = 0.0;
  double mean_path_length = 0.0;
};

// Repeat r uses sampling seed + r and noise seed + r.
std::vector<SweepRow> sweep_particles(const Scenario& s, std::span<const std::size_t> counts,
                                      int repeats);

}  // namespace harvest
