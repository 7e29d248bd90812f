#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "nitm/data.hpp"
#include "nitm/solver.hpp"

namespace nitm::model_file {

// Versioned key-value text image of a trained model. Doubles are written
// with 17 significant digits, so save/load round trips bitwise.
struct ModelFile {
  int version = 1;
  double nu = 0.0;
  double q_prime = 0.0;
  double c_reg = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> mu;
  data::NormalizationParams params;
  std::string termination;
  int iterations = 0;
  double objective = 0.0;
  double gradient_norm = 0.0;
};

void save(const std::filesystem::path& path, const ModelFile& m);
ModelFile load(const std::filesystem::path& path);

void write_text(std::ostream& out, const ModelFile& m);
ModelFile read_text(std::istream& in);

}  // namespace nitm::model_file
