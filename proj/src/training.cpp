#include "nitm/training.hpp"

#include <stdexcept>

#include "nitm/loss.hpp"

namespace nitm::training {

TrainedModel train(const data::RawDataset& raw, std::span<const std::size_t> fit_rows,
                   const TrainSettings& settings) {
  const data::PreparedDataset prepared = data::encode_and_prepare(raw, fit_rows);
  const std::size_t dim = prepared.features.cols();

  Matrix sub(fit_rows.size(), dim);
  std::vector<int> labels(fit_rows.size());
  for (std::size_t i = 0; i < fit_rows.size(); ++i) {
    const auto src = prepared.features.row(fit_rows[i]);
    std::copy(src.begin(), src.end(), sub.row(i).begin());
    labels[i] = prepared.labels[fit_rows[i]];
  }

  auto design = std::make_shared<model::DesignMatrix>(model::DesignMatrix::make(sub, labels));
  const model::ObjectiveSpec spec = model::ObjectiveSpec::make(
      model::PriorSpec::make(settings.nu, static_cast<int>(dim)), settings.q_prime,
      settings.c_reg, design);

  const Objective objective = [spec, threads = settings.threads](std::span<const double> mu) {
    return model::primal_objective(spec, mu, threads);
  };
  const std::vector<double> start(dim, 0.0);

  TrainedModel out;
  out.solve = settings.q_prime == 0.0
                  ? solver::subgradient_bfgs_minimize(objective, start, settings.solver)
                  : solver::bfgs_minimize(objective, start, settings.solver);
  out.mu = out.solve.point;
  out.params = prepared.params;
  out.nu = settings.nu;
  out.q_prime = settings.q_prime;
  out.c_reg = settings.c_reg;
  return out;
}

std::vector<int> predict_rows(const TrainedModel& m, const data::RawDataset& raw,
                              std::span<const std::size_t> rows) {
  const Matrix features = data::apply_preparation(m.params, raw);
  std::vector<int> out;
  out.reserve(rows.size());
  for (std::size_t i : rows) {
    if (i >= features.rows()) throw std::invalid_argument("predict_rows: row index out of range");
    out.push_back(model::predict(m.mu, features.row(i)));
  }
  return out;
}

double zero_one_error(const TrainedModel& m, const data::RawDataset& raw,
                      std::span<const std::size_t> rows) {
  if (rows.empty()) throw std::invalid_argument("zero_one_error: empty row set");
  const Matrix features = data::apply_preparation(m.params, raw);
  const std::vector<int> labels = data::encode_labels(m.params, raw);
  double sum = 0.0;
  for (std::size_t i : rows) {
    if (i >= features.rows()) throw std::invalid_argument("zero_one_error: row index out of range");
    const double margin = labels[i] * dot(m.mu, features.row(i));
    sum += loss::zero_one_loss(margin);
  }
  return sum / static_cast<double>(rows.size());
}

}  // namespace nitm::training
