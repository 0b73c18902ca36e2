#include "harvest/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include "harvest/errors.hpp"

namespace harvest {

namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double inf_norm(const Vec& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

bool all_finite(const Evaluation& e) {
  if (!std::isfinite(e.objective)) return false;
  return std::all_of(e.inequalities.begin(), e.inequalities.end(),
                     [](double c) { return std::isfinite(c); });
}

struct CurvaturePair {
  Vec s;
  Vec y;
  double rho;
};

class AugmentedLagrangian {
 public:
  AugmentedLagrangian(std::size_t m, double mu) : lambda_(m, 0.0), mu_(mu) {}

  double merit(const Evaluation& e) const {
    double acc = e.objective;
    for (std::size_t i = 0; i < e.inequalities.size() && i < lambda_.size(); ++i) {
      const double shifted = std::max(0.0, lambda_[i] + mu_ * e.inequalities[i]);
      acc += (shifted * shifted - lambda_[i] * lambda_[i]) / (2.0 * mu_);
    }
    return acc;
  }

  void update(const Evaluation& e, double growth) {
    for (std::size_t i = 0; i < lambda_.size(); ++i)
      lambda_[i] = std::max(0.0, lambda_[i] + mu_ * e.inequalities[i]);
    mu_ *= growth;
  }

 private:
  Vec lambda_;
  double mu_;
};

// Best point seen so far: feasible points beat infeasible ones, then lower
// objective (feasible) or lower violation (infeasible).
struct Incumbent {
  Vec x;
  double objective;
  double violation;
  double tolerance;

  bool better(double f, double viol) const {
    const bool feasible = viol <= tolerance;
    const bool inc_feasible = violation <= tolerance;
    if (feasible != inc_feasible) return feasible;
    if (feasible) return f < objective;
    return viol < violation;
  }
};

}  // namespace

double max_violation(std::span<const double> inequalities) {
  double v = 0.0;
  for (double c : inequalities) v = std::max(v, c);
  return v;
}

std::vector<double> gradient(const ScalarFunction& f, std::span<const double> x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  Vec probe(x.begin(), x.end());
  Vec g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double hi = h * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + hi;
    const double fp = f(probe);
    probe[i] = x[i] - hi;
    const double fm = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NonFiniteObjective("objective is not finite at a gradient probe");
    g[i] = (fp - fm) / (2.0 * hi);
  }
  return g;
}

SolveReport minimize(const NlpProblem& problem, const SolverOptions& opts) {
  const std::size_t n = problem.initial.size();
  if (problem.lower.size() != n || problem.upper.size() != n)
    throw std::invalid_argument("bounds and initial point differ in dimension");
  for (std::size_t i = 0; i < n; ++i)
    if (!(problem.lower[i] <= problem.upper[i]) || !std::isfinite(problem.lower[i]) ||
        !std::isfinite(problem.upper[i]))
      throw std::invalid_argument("box bounds must be finite with lower <= upper");

  const auto project = [&](Vec& v) {
    for (std::size_t i = 0; i < n; ++i) v[i] = std::clamp(v[i], problem.lower[i], problem.upper[i]);
  };

  Vec x = problem.initial;
  project(x);
  Evaluation current = problem.evaluate(x);
  if (!all_finite(current)) throw NonFiniteObjective("objective is not finite at the initial point");

  Incumbent best{x, current.objective, max_violation(current.inequalities), opts.constraint_tolerance};
  const auto consider = [&](const Vec& xc, const Evaluation& e) {
    const double viol = max_violation(e.inequalities);
    if (best.better(e.objective, viol)) best = {xc, e.objective, viol, best.tolerance};
  };

  const double mu0 =
      opts.relative_penalty ? opts.penalty_initial * std::max(1.0, std::abs(current.objective)) : opts.penalty_initial;
  AugmentedLagrangian al(current.inequalities.size(), mu0);
  const ScalarFunction merit_fn = [&](std::span<const double> y) {
    const Evaluation e = problem.evaluate(y);
    return all_finite(e) ? al.merit(e) : std::numeric_limits<double>::infinity();
  };

  SolveReport report;
  int iterations = 0;
  bool inner_converged = false;
  bool aborted = false;

  for (int round = 0; round < std::max(1, opts.penalty_rounds) && !aborted; ++round) {
    std::deque<CurvaturePair> pairs;
    double phi = al.merit(current);
    Vec g_prev;
    Vec s_prev;
    int small_steps = 0;
    inner_converged = false;

    const int rounds = std::max(1, opts.penalty_rounds);
    const int round_end = opts.split_budget
                              ? (opts.max_iterations * (round + 1) + rounds - 1) / rounds
                              : opts.max_iterations;
    while (true) {
      if (iterations >= round_end) {
        report.status = SolveStatus::MaxIterations;
        break;
      }
      Vec g;
      try {
        g = gradient(merit_fn, x, opts.fd_step);
      } catch (const NonFiniteObjective&) {
        report.status = SolveStatus::NonFiniteObjective;
        aborted = true;
        break;
      }

      if (!s_prev.empty()) {
        Vec y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = g[i] - g_prev[i];
        const double sy = dot(s_prev, y);
        if (sy > 1e-12 * std::sqrt(dot(s_prev, s_prev) * dot(y, y))) {
          pairs.push_back({s_prev, y, 1.0 / sy});
          if (static_cast<int>(pairs.size()) > opts.memory) pairs.pop_front();
        }
      }

      Vec q(n, 0.0);
      double pg = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double moved = std::clamp(x[i] - g[i], problem.lower[i], problem.upper[i]) - x[i];
        pg = std::max(pg, std::abs(moved));
        const bool blocked = (x[i] <= problem.lower[i] && g[i] > 0.0) ||
                             (x[i] >= problem.upper[i] && g[i] < 0.0);
        if (!blocked) q[i] = g[i];
      }
      if (pg <= opts.gradient_tolerance * std::max(1.0, std::abs(phi))) {
        inner_converged = true;
        report.status = SolveStatus::Converged;
        break;
      }

      // Two-loop recursion on the free subspace.
      Vec d = q;
      std::vector<double> alpha(pairs.size());
      for (std::size_t k = pairs.size(); k-- > 0;) {
        alpha[k] = pairs[k].rho * dot(pairs[k].s, d);
        for (std::size_t i = 0; i < n; ++i) d[i] -= alpha[k] * pairs[k].y[i];
      }
      const double gamma = pairs.empty()
                               ? 1.0 / std::max(inf_norm(q), 1e-300)
                               : dot(pairs.back().s, pairs.back().y) / dot(pairs.back().y, pairs.back().y);
      for (double& v : d) v *= gamma;
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        const double beta = pairs[k].rho * dot(pairs[k].y, d);
        for (std::size_t i = 0; i < n; ++i) d[i] += (alpha[k] - beta) * pairs[k].s[i];
      }
      for (std::size_t i = 0; i < n; ++i) {
        d[i] = q[i] == 0.0 ? 0.0 : -d[i];
      }
      if (dot(d, g) >= 0.0) {
        pairs.clear();
        const double scale = 1.0 / std::max(inf_norm(q), 1e-300);
        for (std::size_t i = 0; i < n; ++i) d[i] = -q[i] * scale;
      }

      // Projected backtracking with an Armijo condition.
      bool accepted = false;
      Vec x_trial(n);
      Evaluation trial;
      double phi_trial = phi;
      double step = 1.0;
      for (int ls = 0; ls < 30; ++ls, step *= 0.5) {
        for (std::size_t i = 0; i < n; ++i) x_trial[i] = x[i] + step * d[i];
        project(x_trial);
        double decrease = 0.0;
        bool moved = false;
        for (std::size_t i = 0; i < n; ++i) {
          decrease += g[i] * (x_trial[i] - x[i]);
          moved = moved || x_trial[i] != x[i];
        }
        if (!moved) break;
        trial = problem.evaluate(x_trial);
        if (!all_finite(trial)) continue;
        phi_trial = al.merit(trial);
        if (phi_trial <= phi + 1e-4 * decrease) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        inner_converged = true;
        report.status = SolveStatus::Stalled;
        break;
      }

      ++iterations;
      s_prev.assign(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) s_prev[i] = x_trial[i] - x[i];
      g_prev = std::move(g);
      x = x_trial;
      current = std::move(trial);
      consider(x, current);

      const double drop = phi - phi_trial;
      phi = phi_trial;
      small_steps = drop <= opts.function_tolerance * std::max(1.0, std::abs(phi)) ? small_steps + 1 : 0;
      if (small_steps >= 2) {
        inner_converged = true;
        report.status = SolveStatus::Converged;
        break;
      }
    }

    if (aborted || max_violation(current.inequalities) <= opts.constraint_tolerance) break;
    if (iterations >= opts.max_iterations) break;
    al.update(current, opts.penalty_growth);
  }

  report.solution = best.x;
  report.objective = best.objective;
  report.max_violation = best.violation;
  report.iterations = iterations;
  report.converged = inner_converged && !aborted && best.violation <= opts.constraint_tolerance;
  if (report.converged) report.status = SolveStatus::Converged;
  else if (report.status == SolveStatus::Converged) report.status = SolveStatus::MaxIterations;
  return report;
}

}  // namespace harvest
