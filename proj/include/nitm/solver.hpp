#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "nitm/objective.hpp"

namespace nitm::solver {

struct SolverConfig {
  int max_iterations = 5000;
  double orthogonality_tolerance = 1e-10;
  double gradient_tolerance = 1e-8;
  double armijo_constant = 1e-4;   // sufficient-decrease constant c1
  double backtrack_factor = 0.5;
  int max_backtracks = 60;

  // optional per-iteration observer
  struct Trace {
    int iteration;
    double value;
    double gradient_norm;
    double step;
  };
  std::function<void(const Trace&)> on_iteration;
};

// stalled: best-so-far value stopped improving (subgradient variant only)
enum class Termination {
  max_iterations,
  orthogonal_direction,
  small_gradient,
  line_search_failure,
  stalled,
};

std::string to_string(Termination t);

struct SolveResult {
  std::vector<double> point;
  double value = std::numeric_limits<double>::infinity();
  double gradient_norm = std::numeric_limits<double>::infinity();
  int iterations = 0;
  Termination reason = Termination::max_iterations;
};

// BFGS with backtracking Armijo line search. The value sequence is
// monotone nonincreasing; +inf objective values are treated as line-search
// rejections, so domain boundaries act as barriers. Requires a finite
// value at start.
SolveResult bfgs_minimize(const Objective& objective, std::span<const double> start,
                          const SolverConfig& config = {});

// Same iteration with subgradient elements accepted at kinks; tracks and
// returns the best iterate, and additionally stops once the best value has
// not improved by 1e-10 (relative) over 50 iterations.
SolveResult subgradient_bfgs_minimize(const Objective& objective, std::span<const double> start,
                                      const SolverConfig& config = {});

// Componentwise box, uniform across coordinates.
struct Box {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
};

// Projected gradient descent onto the box with Armijo decrease along the
// projected path f(x+) <= f(x) + c1 g.(x+ - x). The reported gradient_norm
// is the projected-gradient norm |x - P(x - g)|.
SolveResult projected_gradient_minimize(const Objective& objective, std::span<const double> start,
                                        const SolverConfig& config = {}, Box box = {});

}  // namespace nitm::solver
