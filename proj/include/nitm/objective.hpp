#pragma once

#include <functional>
#include <span>
#include <vector>

namespace nitm {

// Value and gradient of a scalar function at a point. A value of +inf marks
// an infeasible point; the gradient is unspecified there and solvers must
// not use it.
struct Evaluation {
  double value = 0.0;
  std::vector<double> gradient;
};

using Objective = std::function<Evaluation(std::span<const double>)>;

}  // namespace nitm
