#pragma once

#include <functional>
#include <span>
#include <vector>

namespace harvest {

/// Objective value plus inequality constraints c_i(x) <= 0 from one evaluation.
struct Evaluation {
  double objective = 0.0;
  std::vector<double> inequalities;
};

using ScalarFunction = std::function<double(std::span<const double>)>;

struct NlpProblem {
  std::function<Evaluation(std::span<const double>)> evaluate;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> initial;
};

struct SolverOptions {
  int max_iterations = 100;          // shared by all penalty rounds
  int penalty_rounds = 3;
  double penalty_initial = 100.0;
  // Multiply penalty_initial by max(1, |f(x0)|) so the penalty keeps pace with
  // the objective's scale.
  bool relative_penalty = false;
  // Give each penalty round an equal share of max_iterations instead of
  // letting the first round use all of them.
  bool split_budget = false;
  double penalty_growth = 10.0;
  double fd_step = 1e-6;             // relative central-difference step
  double constraint_tolerance = 1e-6;
  double gradient_tolerance = 1e-9;  // projected gradient, relative to max(1, |f|)
  double function_tolerance = 1e-12;
  int memory = 8;
};

enum class SolveStatus { Converged, MaxIterations, Stalled, NonFiniteObjective };

struct SolveReport {
  std::vector<double> solution;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double max_violation = 0.0;
  SolveStatus status = SolveStatus::MaxIterations;
};

/// Central finite differences with componentwise step h * max(1, |x_i|).
/// Throws NonFiniteObjective if any probe is not finite.
std::vector<double> gradient(const ScalarFunction& f, std::span<const double> x, double h);

/// Box-constrained quasi-Newton minimization with an augmented-Lagrangian
/// treatment of the inequality list.
///
/// The returned point is the best evaluated iterate: feasible points beat
/// infeasible ones, then lower objective (feasible) or lower violation
/// (infeasible) wins. So a feasible start never gets worse. The result always
/// respects the box exactly and is reported as converged only when its
/// constraint violation is within tolerance. Throws NonFiniteObjective
/// when the initial point cannot be evaluated.
SolveReport minimize(const NlpProblem& problem, const SolverOptions& opts = {});

double max_violation(std::span<const double> inequalities);

}  // namespace harvest
