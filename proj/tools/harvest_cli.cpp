#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "harvest/errors.hpp"
#include "harvest/harness.hpp"

namespace {

using namespace harvest;

void print_metrics(const Metrics& m) {
  std::printf("path_length_m      %.4f\n", m.path_length);
  std::printf("particle_coverage  %.4f\n", m.particle_coverage);
  std::printf("raster_coverage    %.4f\n", m.raster_coverage);
  std::printf("steps              %d\n", m.steps);
  std::printf("mean_solve_s       %.4f\n", m.mean_solve_seconds);
  std::printf("max_solve_s        %.4f\n", m.max_solve_seconds);
  std::printf("mean_overlap       %.4f\n", m.mean_overlap);
  std::printf("termination        %s\n", m.termination.c_str());
}

int exit_code(const Scenario& s, const Metrics& m) {
  if (m.termination == to_string(Termination::StepCapReached)) return 2;
  return m.raster_coverage >= s.coverage_threshold ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle-harvesting coverage planner"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> horizon;
  std::optional<std::size_t> particles;
  bool no_noise = false;

  auto* run = app.add_subcommand("run", "Run a receding-horizon mission and write trace, metrics and SVG");
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--seed", seed, "Seed for both particle sampling and noise (noise uses seed + 1)");
  run->add_option("--horizon", horizon, "Prediction horizon N");
  run->add_option("--particles", particles, "Particle count");
  run->add_flag("--no-noise", no_noise, "Disable estimate and thrust noise");

  auto* base = app.add_subcommand("baseline", "Run the boustrophedon grid baseline");
  base->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  base->add_option("--out", out_dir, "Output directory");

  std::vector<std::size_t> counts{100, 500, 2000};
  int repeats = 1;
  auto* sweep = app.add_subcommand("sweep", "Coverage and solve time against particle count");
  sweep->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  sweep->add_option("--counts", counts, "Particle counts")->delimiter(',');
  sweep->add_option("--repeats", repeats, "Seeded repeats per count")->check(CLI::PositiveNumber);
  sweep->add_flag("--no-noise", no_noise, "Disable estimate and thrust noise");

  std::string trace_path;
  std::string svg_path = "path.svg";
  auto* render = app.add_subcommand("render", "Render a trace CSV to SVG");
  render->add_option("trace", trace_path, "Trace CSV file")->required();
  render->add_option("--scenario", scenario_path, "Scenario JSON for the target boundary");
  render->add_option("--out", svg_path, "Output SVG path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      Scenario s = load_scenario(scenario_path);
      if (seed) {
        s.sampling_seed = *seed;
        s.noise_seed = *seed + 1;
      }
      if (horizon) s.planner.horizon = *horizon;
      if (particles) s.particles = *particles;
      if (no_noise) s.noise.enabled = false;
      validate(s);
      const Metrics m = run_and_report(s, out_dir);
      print_metrics(m);
      return exit_code(s, m);
    }
    if (*base) {
      const Scenario s = load_scenario(scenario_path);
      const MissionTrace trace = grid_baseline(s);
      const Metrics m = compute_metrics(s, trace);
      std::filesystem::create_directories(out_dir);
      write_trace_csv(std::filesystem::path(out_dir) / "baseline_trace.csv", trace);
      write_metrics_json(std::filesystem::path(out_dir) / "baseline_metrics.json", m);
      std::ofstream(std::filesystem::path(out_dir) / "baseline.svg") << render_svg(trace, &s.polygon);
      print_metrics(m);
      return 0;
    }
    if (*sweep) {
      Scenario s = load_scenario(scenario_path);
      if (no_noise) s.noise.enabled = false;
      const auto rows = sweep_particles(s, counts, repeats);
      std::printf("%8s %8s %12s %12s %12s %12s %12s %10s\n", "count", "repeats", "raster_mean", "raster_min",
                  "particle", "solve_mean", "solve_max", "path_m");
      for (const SweepRow& r : rows)
        std::printf("%8zu %8d %12.4f %12.4f %12.4f %12.4f %12.4f %10.3f\n", r.count, r.repeats,
                    r.mean_raster_coverage, r.min_raster_coverage, r.mean_particle_coverage, r.mean_solve_seconds,
                    r.max_solve_seconds, r.mean_path_length);
      return 0;
    }
    if (*render) {
      const MissionTrace trace = read_trace_csv(trace_path);
      std::optional<Scenario> s;
      if (!scenario_path.empty()) s = load_scenario(scenario_path);
      std::ofstream out(svg_path);
      if (!out) throw IoError("cannot write " + svg_path);
      out << render_svg(trace, s ? &s->polygon : nullptr);
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "invalid scenario: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
