#include "harvest/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "harvest/errors.hpp"

namespace harvest {

namespace {

using nlohmann::json;

// Reads typed values out of a JSON object, tracking the dotted field path and
// rejecting keys nobody asked for.
class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ValidationError(path_.empty() ? "<root>" : path_, "must be an object");
  }

  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, _] : obj_.items())
      if (!seen_.count(key)) throw ValidationError(name(key), "unknown field");
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ValidationError(name(key), "must be a number");
      out = v->get<double>();
    }
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer() && !v->is_number_unsigned())
        throw ValidationError(name(key), "must be an integer");
      if (v->is_number_integer() && v->get<long long>() < 0 && std::is_unsigned_v<Int>)
        throw ValidationError(name(key), "must be non-negative");
      out = v->get<Int>();
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ValidationError(name(key), "must be true or false");
      out = v->get<bool>();
    }
  }

  void interval(const std::string& key, Interval& out) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number())
        throw ValidationError(name(key), "must be a [min, max] pair of numbers");
      out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
    }
  }

  template <typename Fn>
  void object(const std::string& key, Fn&& fn) {
    if (const json* v = find(key)) {
      Reader sub(*v, name(key));
      fn(sub);
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<Vec2> read_polygon(const json& v) {
  if (!v.is_array()) throw ValidationError("polygon", "must be an array of [x, y] pairs");
  std::vector<Vec2> pts;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const json& p = v[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw ValidationError("polygon[" + std::to_string(i) + "]", "must be an [x, y] pair of numbers");
    pts.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return pts;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("scenario document must be a JSON object");
  if (!doc.contains("polygon")) throw ValidationError("polygon", "required field is missing");

  std::vector<Vec2> pts = read_polygon(doc["polygon"]);
  std::optional<Polygon2D> poly;
  try {
    poly.emplace(std::move(pts));
  } catch (const InvalidPolygonError& e) {
    throw ValidationError("polygon", e.what());
  }

  Scenario s{*poly};
  PlannerConfig& p = s.planner;
  bool derived_max_distance = true;
  {
    Reader r(doc, "");
    r.find("polygon");
    if (const json* v = r.find("name")) {
      if (!v->is_string()) throw ValidationError("name", "must be a string");
      s.name = v->get<std::string>();
    }
    r.object("camera", [&](Reader& c) {
      c.number("hfov", p.camera.hfov);
      c.number("vfov", p.camera.vfov);
    });
    r.object("vehicle", [&](Reader& c) {
      c.number("mass", p.vehicle.mass);
      c.number("gravity", p.vehicle.gravity);
    });
    r.object("weights", [&](Reader& c) {
      c.number("w_x", p.weights.movement);
      c.number("w_i", p.weights.remaining);
      c.number("w_q", p.weights.quality);
      c.number("w_u", p.weights.smoothness);
      c.number("w_z", p.weights.altitude_floor);
      c.number("w_goal", p.weights.guidance);
      c.number("w_vz", p.weights.vertical_damping);
    });
    r.object("limits", [&](Reader& c) {
      c.interval("thrust", p.limits.thrust);
      c.interval("roll", p.limits.roll);
      c.interval("pitch", p.limits.pitch);
      c.interval("yaw", p.limits.yaw);
      c.interval("altitude", p.limits.altitude);
      c.object("velocity", [&](Reader& v) {
        v.interval("x", p.limits.vx);
        v.interval("y", p.limits.vy);
        v.interval("z", p.limits.vz);
      });
    });
    r.object("quality", [&](Reader& c) {
      c.number("z_min", p.band.z_min);
      c.number("z_max", p.band.z_max);
    });
    r.object("surrogate", [&](Reader& c) {
      c.number("kappa", p.surrogate.sharpness);
      c.boolean("exact", p.surrogate.exact);
    });
    r.object("solver", [&](Reader& c) {
      c.integer("max_iterations", p.solver.max_iterations);
      c.integer("penalty_rounds", p.solver.penalty_rounds);
      c.number("penalty_initial", p.solver.penalty_initial);
      c.number("fd_step", p.solver.fd_step);
    });
    r.integer("horizon", p.horizon);
    r.number("dt", p.dt);
    if (r.find("max_corrected_distance")) {
      r.number("max_corrected_distance", p.max_corrected_distance);
      derived_max_distance = false;
    }
    r.number("harvest_inset", p.harvest_inset);
    r.integer("particles", s.particles);
    r.object("seeds", [&](Reader& c) {
      c.integer("sampling", s.sampling_seed);
      c.integer("noise", s.noise_seed);
    });
    r.object("noise", [&](Reader& c) {
      c.boolean("enabled", s.noise.enabled);
      c.number("position_sigma", s.noise.position_sigma);
      c.number("thrust_amplitude", s.noise.thrust_amplitude);
    });
    if (const json* v = r.find("initial_state")) {
      if (!v->is_array() || v->size() != 6 ||
          !std::all_of(v->begin(), v->end(), [](const json& e) { return e.is_number(); }))
        throw ValidationError("initial_state", "must be [x, vx, y, vy, z, vz]");
      Eigen::Matrix<double, 6, 1> x;
      for (int i = 0; i < 6; ++i) x[i] = (*v)[static_cast<std::size_t>(i)].get<double>();
      s.initial = State::from_vector(x);
    }
    r.integer("step_cap", s.step_cap);
    r.number("coverage_threshold", s.coverage_threshold);
  }
  if (derived_max_distance)
    p.max_corrected_distance =
        p.band.z_max / (std::cos(std::max(std::abs(p.limits.roll.lo), std::abs(p.limits.roll.hi))) *
                        std::cos(std::max(std::abs(p.limits.pitch.lo), std::abs(p.limits.pitch.hi))));
  validate(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  Scenario s = parse_scenario(ss.str());
  return s;
}

MissionTrace grid_baseline(const Scenario& s, double altitude, double sample_spacing) {
  const Box2 box = bounding_box(s.polygon.vertices());
  const bool along_x = box.width() >= box.height();
  const double along_lo = along_x ? box.lo.x() : box.lo.y();
  const double along_hi = along_x ? box.hi.x() : box.hi.y();
  const double cross_lo = along_x ? box.lo.y() : box.lo.x();
  const double cross_extent = along_x ? box.height() : box.width();
  const double fov = along_x ? s.planner.camera.vfov : s.planner.camera.hfov;
  const double lane_width = 2.0 * altitude * std::tan(0.5 * fov);
  const int lanes = std::max(1, static_cast<int>(std::ceil(cross_extent / lane_width - 1e-9)));
  const double excess = lanes * lane_width - cross_extent;
  const double first_lane = cross_lo + 0.5 * lane_width - 0.5 * excess;

  // Waypoints in (along, cross) coordinates.
  std::vector<Vec2> waypoints;
  for (int i = 0; i < lanes; ++i) {
    const double c = first_lane + i * lane_width;
    const bool forward = i % 2 == 0;
    waypoints.emplace_back(forward ? along_lo : along_hi, c);
    waypoints.emplace_back(forward ? along_hi : along_lo, c);
  }
  const auto to_world = [&](const Vec2& ac) {
    return along_x ? Vec3(ac.x(), ac.y(), altitude) : Vec3(ac.y(), ac.x(), altitude);
  };

  std::vector<Vec3> samples{to_world(waypoints.front())};
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    const Vec3 a = to_world(waypoints[i - 1]);
    const Vec3 b = to_world(waypoints[i]);
    const int pieces = std::max(1, static_cast<int>(std::ceil((b - a).norm() / sample_spacing)));
    for (int k = 1; k <= pieces; ++k) samples.push_back(a + (b - a) * (static_cast<double>(k) / pieces));
  }

  ParticleField field = initial_field(s);
  MissionTrace trace;
  trace.initial_count = field.initial_count;
  const ControlInput level{s.planner.vehicle.hover_thrust(), 0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < samples.size(); ++k) {
    TraceRow row;
    row.step = static_cast<int>(k);
    row.truth = {samples[k].x(), 0.0, samples[k].y(), 0.0, samples[k].z(), 0.0};
    row.estimate = row.truth;
    row.input = level;
    row.cell = project_footprint(samples[k], level.attitude(), s.planner.camera);
    row.harvested = harvest_in_place(field, *row.cell);
    row.remaining = field.size();
    trace.rows.push_back(row);
  }
  trace.termination = field.empty() ? Termination::FieldEmpty : Termination::CoverageStalled;
  return trace;
}

double raster_coverage(const Polygon2D& poly, const MissionTrace& trace, double resolution) {
  const Box2 box = bounding_box(poly.vertices());
  const int nx = std::max(1, static_cast<int>(std::ceil(box.width() / resolution)));
  const int ny = std::max(1, static_cast<int>(std::ceil(box.height() / resolution)));
  const auto centre = [&](int i, int j) {
    return Vec2(box.lo.x() + (i + 0.5) * resolution, box.lo.y() + (j + 0.5) * resolution);
  };
  // 0 outside the polygon, 1 inside and uncovered, 2 inside and covered.
  std::vector<unsigned char> grid(static_cast<std::size_t>(nx) * ny, 0);
  std::size_t inside = 0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (point_in_polygon(centre(i, j), poly)) {
        grid[static_cast<std::size_t>(j) * nx + i] = 1;
        ++inside;
      }
  if (inside == 0) return 1.0;

  std::size_t covered = 0;
  for (const TraceRow& row : trace.rows) {
    if (!row.cell) continue;
    const Box2 cb = bounding_box(*row.cell);
    const int i0 = std::max(0, static_cast<int>(std::floor((cb.lo.x() - box.lo.x()) / resolution - 0.5)));
    const int i1 = std::min(nx - 1, static_cast<int>(std::ceil((cb.hi.x() - box.lo.x()) / resolution - 0.5)));
    const int j0 = std::max(0, static_cast<int>(std::floor((cb.lo.y() - box.lo.y()) / resolution - 0.5)));
    const int j1 = std::min(ny - 1, static_cast<int>(std::ceil((cb.hi.y() - box.lo.y()) / resolution - 0.5)));
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) {
        unsigned char& g = grid[static_cast<std::size_t>(j) * nx + i];
        if (g == 1 && point_in_cell(centre(i, j), *row.cell)) {
          g = 2;
          ++covered;
        }
      }
  }
  return static_cast<double>(covered) / static_cast<double>(inside);
}

double mean_overlap(const MissionTrace& trace) {
  double acc = 0.0;
  int pairs = 0;
  const FootprintCell* prev = nullptr;
  for (const TraceRow& row : trace.rows) {
    if (!row.cell) continue;
    if (prev) {
      const double area = cell_area(*prev);
      if (area > 0.0) {
        const auto inter = clip_convex(std::span<const Vec2>(prev->v.data(), 4),
                                       std::span<const Vec2>(row.cell->v.data(), 4));
        acc += inter.size() >= 3 ? std::abs(signed_area(inter)) / area : 0.0;
        ++pairs;
      }
    }
    prev = &*row.cell;
  }
  return pairs == 0 ? 0.0 : acc / pairs;
}

Metrics compute_metrics(const Scenario& s, const MissionTrace& trace) {
  Metrics m;
  m.path_length = trace.path_length();
  m.particle_coverage = trace.particle_coverage();
  m.raster_coverage = trace.initial_count == 0 ? 1.0 : raster_coverage(s.polygon, trace);
  m.steps = trace.rows.empty() ? 0 : static_cast<int>(trace.rows.size()) - 1;
  int solves = 0;
  for (const TraceRow& r : trace.rows) {
    if (!r.solved) continue;
    ++solves;
    m.mean_solve_seconds += r.solve_seconds;
    m.max_solve_seconds = std::max(m.max_solve_seconds, r.solve_seconds);
  }
  if (solves > 0) m.mean_solve_seconds /= solves;
  m.mean_overlap = mean_overlap(trace);
  m.termination = to_string(trace.termination);
  return m;
}

const std::vector<std::string> kTraceColumns = {
    "step",  "x",     "y",      "z",       "vx",        "vy",     "vz",        "est_x",
    "est_y", "est_z", "est_vx", "est_vy",  "est_vz",    "thrust", "roll",      "pitch",
    "yaw",   "has_cell", "c1x", "c1y",     "c2x",       "c2y",    "c3x",       "c3y",
    "c4x",   "c4y",   "harvested", "remaining", "solve_s", "solved", "converged"};

void write_trace_csv(const std::filesystem::path& path, const MissionTrace& trace) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write trace file " + path.string());
  out << "# initial_count=" << trace.initial_count << " termination=" << to_string(trace.termination)
      << "\n";
  for (std::size_t i = 0; i < kTraceColumns.size(); ++i) out << (i ? "," : "") << kTraceColumns[i];
  out << "\n";
  for (const TraceRow& r : trace.rows) {
    std::vector<std::string> f;
    f.push_back(std::to_string(r.step));
    for (const State* s : {&r.truth}) {
      for (double v : {s->x, s->y, s->z, s->vx, s->vy, s->vz}) f.push_back(fmt(v));
    }
    for (double v : {r.estimate.x, r.estimate.y, r.estimate.z, r.estimate.vx, r.estimate.vy, r.estimate.vz})
      f.push_back(fmt(v));
    for (double v : {r.input.thrust, r.input.roll, r.input.pitch, r.input.yaw}) f.push_back(fmt(v));
    f.push_back(r.cell ? "1" : "0");
    for (std::size_t k = 0; k < 4; ++k) {
      f.push_back(r.cell ? fmt(r.cell->v[k].x()) : "0");
      f.push_back(r.cell ? fmt(r.cell->v[k].y()) : "0");
    }
    f.push_back(std::to_string(r.harvested));
    f.push_back(std::to_string(r.remaining));
    f.push_back(fmt(r.solve_seconds));
    f.push_back(r.solved ? "1" : "0");
    f.push_back(r.converged ? "1" : "0");
    for (std::size_t i = 0; i < f.size(); ++i) out << (i ? "," : "") << f[i];
    out << "\n";
  }
  if (!out) throw IoError("failed while writing " + path.string());
}

MissionTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file " + path.string());
  MissionTrace trace;
  std::string line;
  bool header_seen = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string tok;
      while (meta >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "initial_count") trace.initial_count = std::stoull(val);
        if (key == "termination") {
          if (val == "field_empty") trace.termination = Termination::FieldEmpty;
          else if (val == "coverage_stalled") trace.termination = Termination::CoverageStalled;
          else if (val == "step_cap_reached") trace.termination = Termination::StepCapReached;
        }
      }
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (!header_seen) {
      if (f != kTraceColumns) throw ParseError("unexpected trace header in " + path.string());
      header_seen = true;
      continue;
    }
    if (f.size() != kTraceColumns.size())
      throw ParseError("trace line " + std::to_string(line_no) + " has " + std::to_string(f.size()) + " fields");
    try {
      std::size_t i = 0;
      const auto num = [&] { return std::stod(f[i++]); };
      TraceRow r;
      r.step = std::stoi(f[i++]);
      r.truth.x = num(); r.truth.y = num(); r.truth.z = num();
      r.truth.vx = num(); r.truth.vy = num(); r.truth.vz = num();
      r.estimate.x = num(); r.estimate.y = num(); r.estimate.z = num();
      r.estimate.vx = num(); r.estimate.vy = num(); r.estimate.vz = num();
      r.input.thrust = num(); r.input.roll = num(); r.input.pitch = num(); r.input.yaw = num();
      const bool has_cell = f[i++] == "1";
      FootprintCell c;
      for (std::size_t k = 0; k < 4; ++k) {
        const double x = num();
        const double y = num();
        c.v[k] = Vec2(x, y);
      }
      if (has_cell) r.cell = c;
      r.harvested = std::stoull(f[i++]);
      r.remaining = std::stoull(f[i++]);
      r.solve_seconds = num();
      r.solved = f[i++] == "1";
      r.converged = f[i++] == "1";
      trace.rows.push_back(r);
    } catch (const std::logic_error&) {
      throw ParseError("malformed number on trace line " + std::to_string(line_no));
    }
  }
  if (!header_seen) throw ParseError("trace file " + path.string() + " has no header");
  return trace;
}

void write_metrics_json(const std::filesystem::path& path, const Metrics& m) {
  json doc = {{"path_length_m", m.path_length},
              {"particle_coverage", m.particle_coverage},
              {"raster_coverage", m.raster_coverage},
              {"steps", m.steps},
              {"mean_solve_s", m.mean_solve_seconds},
              {"max_solve_s", m.max_solve_seconds},
              {"mean_footprint_overlap", m.mean_overlap},
              {"termination", m.termination}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write metrics file " + path.string());
  out << std::setw(2) << doc << "\n";
  if (!out) throw IoError("failed while writing " + path.string());
}

std::string render_svg(const MissionTrace& trace, const Polygon2D* boundary, int stride) {
  std::vector<Vec2> all;
  if (boundary) all = boundary->vertices();
  for (const TraceRow& r : trace.rows) {
    all.emplace_back(r.truth.x, r.truth.y);
    if (r.cell) all.insert(all.end(), r.cell->v.begin(), r.cell->v.end());
  }
  if (all.empty()) all.emplace_back(0.0, 0.0);
  Box2 box = bounding_box(all);
  const double pad = 0.1;
  box.lo -= Vec2(pad, pad);
  box.hi += Vec2(pad, pad);
  const double scale = 200.0;  // px per metre
  const double width = std::max(box.width(), 1e-3) * scale;
  const double height = std::max(box.height(), 1e-3) * scale;
  const auto px = [&](const Vec2& p) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << (p.x() - box.lo.x()) * scale << ","
      << (box.hi.y() - p.y()) * scale;
    return s.str();
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  int k = 0;
  for (const TraceRow& r : trace.rows) {
    if (!r.cell) continue;
    if (k++ % std::max(1, stride) != 0) continue;
    svg << "<polygon points=\"";
    for (const Vec2& v : r.cell->v) svg << px(v) << " ";
    svg << "\" fill=\"#b0b0b0\" fill-opacity=\"0.25\" stroke=\"#808080\" stroke-width=\"0.8\"/>\n";
  }
  if (boundary) {
    svg << "<polygon points=\"";
    for (const Vec2& v : boundary->vertices()) svg << px(v) << " ";
    svg << "\" fill=\"none\" stroke=\"black\" stroke-width=\"3\"/>\n";
  }
  if (!trace.rows.empty()) {
    svg << "<polyline points=\"";
    for (const TraceRow& r : trace.rows) svg << px(Vec2(r.truth.x, r.truth.y)) << " ";
    svg << "\" fill=\"none\" stroke=\"#1f4fd0\" stroke-width=\"2\" stroke-dasharray=\"6,4\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

Metrics run_and_report(const Scenario& s, const std::filesystem::path& out_dir, MissionTrace* trace_out) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());

  MissionTrace trace = s.particles == 0 ? run_mission(s, ParticleField{}) : run_mission(s);
  const Metrics m = compute_metrics(s, trace);
  write_trace_csv(out_dir / "trace.csv", trace);
  write_metrics_json(out_dir / "metrics.json", m);
  std::ofstream svg(out_dir / "path.svg");
  if (!svg) throw IoError("cannot write " + (out_dir / "path.svg").string());
  svg << render_svg(trace, &s.polygon);
  if (trace_out) *trace_out = std::move(trace);
  return m;
}

std::vector<SweepRow> sweep_particles(const Scenario& s, std::span<const std::size_t> counts, int repeats) {
  if (counts.empty()) throw std::invalid_argument("sweep needs at least one particle count");
  std::vector<SweepRow> rows;
  for (const std::size_t count : counts) {
    SweepRow row;
    row.count = count;
    row.repeats = repeats;
    row.min_raster_coverage = 1.0;
    int solves = 0;
    for (int r = 0; r < repeats; ++r) {
      Scenario run = s;
      run.particles = count;
      run.sampling_seed = s.sampling_seed + static_cast<std::uint64_t>(r);
      run.noise_seed = s.noise_seed + static_cast<std::uint64_t>(r);
      const MissionTrace trace = run_mission(run);
      const Metrics m = compute_metrics(run, trace);
      row.mean_raster_coverage += m.raster_coverage / repeats;
      row.min_raster_coverage = std::min(row.min_raster_coverage, m.raster_coverage);
      row.mean_particle_coverage += m.particle_coverage / repeats;
      row.mean_path_length += m.path_length / repeats;
      row.max_solve_seconds = std::max(row.max_solve_seconds, m.max_solve_seconds);
      for (const TraceRow& t : trace.rows)
        if (t.solved) {
          row.mean_solve_seconds += t.solve_seconds;
          ++solves;
        }
    }
    if (solves > 0) row.mean_solve_seconds /= solves;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace harvest
