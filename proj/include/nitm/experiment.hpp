#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nitm/data.hpp"
#include "nitm/matrix.hpp"
#include "nitm/training.hpp"

namespace nitm::experiment {

// Distribution-balanced stratified fold assignment. groups lists, per
// formed neighbor group, the member row indices in assignment order; kept
// for diagnostics and tests.
struct FoldAssignment {
  std::vector<int> fold_of;  // per row, 0..k-1
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::string> warnings;
};

// Per class: pick a seeded random unassigned row, group it with its k-1
// nearest unassigned classmates (Euclidean on the given features, ties to
// the smaller index), and spread the group over a seeded random fold
// permutation. The final short group lands on distinct least-filled folds.
FoldAssignment dobscv_split(const Matrix& features, std::span<const int> labels, int k,
                            std::uint64_t seed);

struct GridSpec {
  std::vector<double> nu_values;
  std::vector<double> q_prime_values;
  std::vector<double> c_values;
  std::uint64_t seed = 0;
  int folds = 10;
  std::vector<int> test_folds;

  // paper protocol: 66 models x 6 C values, folds 7..9 held out
  static GridSpec defaults();
};

struct CellResult {
  double nu = 0.0;
  double q_prime = 0.0;
  double selected_c = 0.0;
  double cv_error = 1.0;
  double test_error = 1.0;
  long iterations = 0;  // of the retrain solve
  double seconds = 0.0;
  bool ok = false;
  std::string note;
};

struct ExperimentResult {
  std::string dataset_id;
  std::uint64_t seed = 0;
  GridSpec grid;
  std::vector<CellResult> cells;
  double total_seconds = 0.0;
};

enum class RowPhase { c_selection, retrain, test_eval };

// Observation points for audits: on_row_access reports every row index a
// protocol phase consumes (fitting or evaluation). May be called from
// worker threads; run_grid serializes the calls.
struct RunHooks {
  std::function<void(std::size_t, RowPhase)> on_row_access;
  std::function<void(const CellResult&)> on_cell_done;
};

struct CSelection {
  double c = 0.0;
  double cv_error = 1.0;
};

// Rotating hold-one-part-out selection over c_values for a fixed (nu, q').
// A failed training run scores its validation part as error 1.0. Ties go
// to the smaller C.
CSelection select_c(const data::RawDataset& raw, const std::vector<std::vector<std::size_t>>& parts,
                    std::span<const double> c_values, const training::TrainSettings& base,
                    const RunHooks* hooks = nullptr);

// Full protocol: DOB-SCV split on fully-normalized features, C selection
// on the non-test parts, retrain on all of them, test on the held-out
// folds. Cells run concurrently up to `workers`; per-cell numbers do not
// depend on the worker count. A nonempty progress_csv receives one row per
// finished cell (append order follows completion).
ExperimentResult run_grid(const data::RawDataset& raw, const GridSpec& grid, int workers = 1,
                          const RunHooks* hooks = nullptr,
                          const std::filesystem::path& progress_csv = {});

// results.csv, summary.json, and <dataset>.svg (one polyline per nu over
// the q' axis) under out_dir. Throws on an empty result.
void emit_results(const ExperimentResult& result, const std::filesystem::path& out_dir);

// cells in CSV row order with header; shared by emit_results and the
// incremental progress file
std::string csv_header();
std::string csv_row(const std::string& dataset_id, const CellResult& cell);

}  // namespace nitm::experiment
