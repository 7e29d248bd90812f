#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nitm/matrix.hpp"

namespace nitm::data {

// Parse failure with the 1-based line it was detected on (0 = whole file).
class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& message, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_ = 0;
};

enum class AttrKind { numeric, nominal };

// Rows as raw tokens plus per-column typing. Rows containing missing
// markers ("?") are dropped at parse time with a warning.
struct RawDataset {
  std::string name;
  std::vector<std::string> attr_names;                  // feature columns only
  std::vector<AttrKind> attr_kinds;
  std::vector<std::vector<std::string>> nominal_values; // declared order, per column
  std::vector<std::vector<std::string>> cells;          // rows x feature columns
  std::vector<int> label_index;                         // per row, 0 or 1 into class_values
  std::array<std::string, 2> class_values;              // [0] maps to +1
  std::vector<std::string> warnings;

  std::size_t rows() const { return cells.size(); }
  std::size_t columns() const { return attr_names.size(); }
};

// KEEL .dat: @relation/@attribute/@inputs/@outputs header then @data rows.
// real/integer attributes are numeric; {a,b,...} enumerations nominal.
// Exactly two class values are required; the first declared maps to +1.
RawDataset parse_keel(std::istream& in, const std::string& stream_name = "keel");
RawDataset parse_keel(const std::filesystem::path& path);

// CSV with a header row. Columns whose non-missing values all parse as
// numbers are numeric, the rest nominal (values in first-appearance order).
// label_column defaults to the last column; positive_label defaults to the
// first label value encountered.
RawDataset parse_csv(std::istream& in, const std::string& label_column = "",
                     const std::string& positive_label = "",
                     const std::string& stream_name = "csv");
RawDataset parse_csv(const std::filesystem::path& path, const std::string& label_column = "",
                     const std::string& positive_label = "");

// Everything needed to map raw rows to model inputs at test time.
struct NormalizationParams {
  std::vector<std::string> attr_names;
  std::vector<AttrKind> attr_kinds;
  std::vector<std::vector<std::string>> nominal_values;
  std::vector<double> mean;   // per feature column
  std::vector<double> scale;  // per feature column, 1 for constant columns
  std::array<std::string, 2> class_values;

  std::size_t columns() const { return attr_names.size(); }
};

struct PreparedDataset {
  Matrix features;  // all raw rows, bias column of ones appended last
  std::vector<int> labels;
  NormalizationParams params;
};

// Encode nominals as 1,2,3,... (declared order), center each column by its
// mean over fit_indices, scale so the fit rows have unit Euclidean norm per
// column, append the bias column. Statistics come from fit_indices only;
// the returned matrix covers every row.
PreparedDataset encode_and_prepare(const RawDataset& raw, std::span<const std::size_t> fit_indices);

// Replay the stored pipeline on new raw rows. Never re-fits.
Matrix apply_preparation(const NormalizationParams& params, const RawDataset& raw);

// Map stored class strings to +1/-1 using params' class order.
std::vector<int> encode_labels(const NormalizationParams& params, const RawDataset& raw);

}  // namespace nitm::data
