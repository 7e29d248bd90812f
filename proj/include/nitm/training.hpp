#pragma once

#include <memory>
#include <span>
#include <vector>

#include "nitm/data.hpp"
#include "nitm/model.hpp"
#include "nitm/solver.hpp"

namespace nitm::training {

struct TrainSettings {
  double nu = model::kInfinity;
  double q_prime = 0.0;
  double c_reg = 1.0;
  solver::SolverConfig solver;
  int threads = 1;  // objective-evaluation threads
};

struct TrainedModel {
  std::vector<double> mu;
  data::NormalizationParams params;
  solver::SolveResult solve;
  double nu;
  double q_prime;
  double c_reg;
};

// Normalize on fit_rows, build the signed design from them, and minimize
// the primal from mu = 0. q' = 0 uses the subgradient BFGS variant, the
// smooth losses plain BFGS.
TrainedModel train(const data::RawDataset& raw, std::span<const std::size_t> fit_rows,
                   const TrainSettings& settings);

// Labels for the given raw rows under the stored normalization.
std::vector<int> predict_rows(const TrainedModel& m, const data::RawDataset& raw,
                              std::span<const std::size_t> rows);

// Mean zero-one loss of the trained scores over the given rows.
double zero_one_error(const TrainedModel& m, const data::RawDataset& raw,
                      std::span<const std::size_t> rows);

}  // namespace nitm::training
