// Shared toy datasets and problem builders.
#pragma once

#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "nitm/data.hpp"
#include "nitm/model.hpp"
#include "nitm/rng.hpp"

namespace fixtures {

inline const char* kKeelToy =
    "@relation toy\n"
    "@attribute x1 real [-5.0, 5.0]\n"
    "@attribute x2 real [-5.0, 5.0]\n"
    "@attribute class {positive, negative}\n"
    "@inputs x1, x2\n"
    "@outputs class\n"
    "@data\n"
    "1.0, 2.0, positive\n"
    "-1.5, 0.5, negative\n"
    "0.25, -3.0, positive\n";

inline const char* kKeelNominal =
    "@relation nominal_toy\n"
    "@attribute color {red, green, blue}\n"
    "@attribute size real [0, 10]\n"
    "@attribute class {yes, no}\n"
    "@data\n"
    "green, 4.0, yes\n"
    "red, 1.0, no\n"
    "blue, 9.5, yes\n"
    "red, 2.5, yes\n";

inline nitm::data::RawDataset parse_keel_string(const std::string& text) {
  std::istringstream is(text);
  return nitm::data::parse_keel(is, "inline");
}

inline nitm::data::RawDataset parse_csv_string(const std::string& text,
                                               const std::string& label_column = "",
                                               const std::string& positive_label = "") {
  std::istringstream is(text);
  return nitm::data::parse_csv(is, label_column, positive_label, "inline");
}

// 2-d separable blobs around +-(2,2), labels alternating rows
inline nitm::data::RawDataset make_blobs(std::size_t rows, std::uint64_t seed) {
  nitm::Rng rng(seed);
  nitm::data::RawDataset raw;
  raw.name = "blobs";
  raw.attr_names = {"x1", "x2"};
  raw.attr_kinds = {nitm::data::AttrKind::numeric, nitm::data::AttrKind::numeric};
  raw.nominal_values = {{}, {}};
  raw.class_values = {"pos", "neg"};
  for (std::size_t i = 0; i < rows; ++i) {
    const bool positive = i % 2 == 0;
    const double cx = positive ? 2.0 : -2.0;
    std::ostringstream a, b;
    a.precision(17);
    b.precision(17);
    a << cx + rng.uniform(-1.0, 1.0);
    b << cx + rng.uniform(-1.0, 1.0);
    raw.cells.push_back({a.str(), b.str()});
    raw.label_index.push_back(positive ? 0 : 1);
  }
  return raw;
}

// random design with alternating labels; feasible for all priors used in
// the tests
inline nitm::model::ObjectiveSpec random_spec(nitm::Rng& rng, double nu, double q_prime,
                                              double c_reg, std::size_t m, std::size_t dim) {
  nitm::Matrix f(m, dim);
  std::vector<int> labels(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < dim; ++j) f(i, j) = rng.uniform(-1.0, 1.0);
    labels[i] = i % 2 == 0 ? 1 : -1;
  }
  auto design = std::make_shared<nitm::model::DesignMatrix>(
      nitm::model::DesignMatrix::make(f, labels));
  return nitm::model::ObjectiveSpec::make(
      nitm::model::PriorSpec::make(nu, static_cast<int>(dim)), q_prime, c_reg, design);
}

// the fixed 4-point separable set used by the SVM-equivalence checks:
// +1 at (1,0),(2,1); -1 at (-1,0),(-2,-1)
inline std::shared_ptr<nitm::model::DesignMatrix> svm_toy_design() {
  nitm::Matrix f(4, 2);
  f(0, 0) = 1.0;  f(0, 1) = 0.0;
  f(1, 0) = 2.0;  f(1, 1) = 1.0;
  f(2, 0) = -1.0; f(2, 1) = 0.0;
  f(3, 0) = -2.0; f(3, 1) = -1.0;
  const std::vector<int> labels{1, 1, -1, -1};
  return std::make_shared<nitm::model::DesignMatrix>(nitm::model::DesignMatrix::make(f, labels));
}

}  // namespace fixtures
