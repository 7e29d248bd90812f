#include "nitm/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "nitm/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nitm::experiment {

namespace {

double sq_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

FoldAssignment dobscv_split(const Matrix& features, std::span<const int> labels, int k,
                            std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("dobscv_split: k must be >= 2");
  if (features.rows() != labels.size()) {
    throw std::invalid_argument("dobscv_split: feature/label count mismatch");
  }
  if (features.rows() == 0) throw std::invalid_argument("dobscv_split: empty dataset");
  for (int l : labels) {
    if (l != 1 && l != -1) throw std::invalid_argument("dobscv_split: labels must be +1 or -1");
  }

  FoldAssignment fa;
  fa.k = k;
  fa.seed = seed;
  fa.fold_of.assign(features.rows(), -1);
  Rng rng(seed);

  for (const int cls : {1, -1}) {
    std::vector<std::size_t> unassigned;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) unassigned.push_back(i);
    }
    if (unassigned.empty()) continue;
    if (unassigned.size() < static_cast<std::size_t>(k)) {
      fa.warnings.push_back("class " + std::string(cls == 1 ? "+1" : "-1") + " has fewer than " +
                            std::to_string(k) + " rows; some folds will lack it");
    }
    std::vector<int> fold_count(k, 0);  // rows of this class per fold

    while (!unassigned.empty()) {
      // seeded random pivot, then its nearest unassigned classmates
      const std::size_t pick = rng.below(unassigned.size());
      const std::size_t pivot = unassigned[pick];
      unassigned.erase(unassigned.begin() + static_cast<std::ptrdiff_t>(pick));

      std::vector<std::pair<double, std::size_t>> by_distance;
      by_distance.reserve(unassigned.size());
      for (std::size_t idx : unassigned) {
        by_distance.emplace_back(sq_distance(features.row(pivot), features.row(idx)), idx);
      }
      std::sort(by_distance.begin(), by_distance.end());  // ties fall to the smaller index

      std::vector<std::size_t> group{pivot};
      const std::size_t take = std::min<std::size_t>(k - 1, by_distance.size());
      for (std::size_t i = 0; i < take; ++i) group.push_back(by_distance[i].second);
      for (std::size_t g = 1; g < group.size(); ++g) {
        unassigned.erase(std::find(unassigned.begin(), unassigned.end(), group[g]));
      }

      if (group.size() == static_cast<std::size_t>(k)) {
        std::vector<int> order(k);
        for (int f = 0; f < k; ++f) order[f] = f;
        rng.shuffle(order);
        for (int f = 0; f < k; ++f) {
          fa.fold_of[group[static_cast<std::size_t>(f)]] = order[f];
          ++fold_count[order[f]];
        }
      } else {
        // short tail: distinct least-filled folds, smaller id on ties
        std::vector<bool> used(k, false);
        for (std::size_t member : group) {
          int best = -1;
          for (int f = 0; f < k; ++f) {
            if (used[f]) continue;
            if (best < 0 || fold_count[f] < fold_count[best]) best = f;
          }
          used[best] = true;
          fa.fold_of[member] = best;
          ++fold_count[best];
        }
      }
      fa.groups.push_back(std::move(group));
    }
  }
  return fa;
}

GridSpec GridSpec::defaults() {
  GridSpec g;
  g.nu_values = {1.0, 10.0, 1e2, 1e3, 1e4, model::kInfinity};
  for (int i = 0; i <= 10; ++i) g.q_prime_values.push_back(i / 10.0);
  g.c_values = {1.0, 1e2, 1e4, 1e6, 1e8, 1e10};
  g.folds = 10;
  g.test_folds = {7, 8, 9};
  return g;
}

namespace {

void report_rows(const RunHooks* hooks, std::span<const std::size_t> rows, RowPhase phase) {
  if (!hooks || !hooks->on_row_access) return;
  for (std::size_t r : rows) hooks->on_row_access(r, phase);
}

}  // namespace

CSelection select_c(const data::RawDataset& raw, const std::vector<std::vector<std::size_t>>& parts,
                    std::span<const double> c_values, const training::TrainSettings& base,
                    const RunHooks* hooks) {
  if (parts.size() < 2) throw std::invalid_argument("select_c: need at least 2 parts");
  if (c_values.empty()) throw std::invalid_argument("select_c: empty C grid");

  CSelection best;
  bool have = false;
  for (const double c : c_values) {
    double err_sum = 0.0;
    for (std::size_t v = 0; v < parts.size(); ++v) {
      std::vector<std::size_t> fit;
      for (std::size_t p = 0; p < parts.size(); ++p) {
        if (p != v) fit.insert(fit.end(), parts[p].begin(), parts[p].end());
      }
      report_rows(hooks, fit, RowPhase::c_selection);
      report_rows(hooks, parts[v], RowPhase::c_selection);
      training::TrainSettings settings = base;
      settings.c_reg = c;
      try {
        const training::TrainedModel m = training::train(raw, fit, settings);
        err_sum += training::zero_one_error(m, raw, parts[v]);
      } catch (const std::exception&) {
        err_sum += 1.0;  // failed cell counts as total error
      }
    }
    const double mean = err_sum / static_cast<double>(parts.size());
    if (!have || mean < best.cv_error || (mean == best.cv_error && c < best.c)) {
      best.c = c;
      best.cv_error = mean;
      have = true;
    }
  }
  return best;
}

ExperimentResult run_grid(const data::RawDataset& raw, const GridSpec& grid, int workers,
                          const RunHooks* hooks, const std::filesystem::path& progress_csv) {
  if (grid.nu_values.empty() || grid.q_prime_values.empty() || grid.c_values.empty()) {
    throw std::invalid_argument("run_grid: empty grid axis");
  }
  if (grid.folds < 2) throw std::invalid_argument("run_grid: folds must be >= 2");
  if (grid.test_folds.empty()) throw std::invalid_argument("run_grid: no test folds");
  for (int f : grid.test_folds) {
    if (f < 0 || f >= grid.folds) throw std::invalid_argument("run_grid: test fold out of range");
  }
  if (static_cast<int>(grid.test_folds.size()) >= grid.folds) {
    throw std::invalid_argument("run_grid: no training folds left");
  }
  if (raw.rows() == 0) throw std::invalid_argument("run_grid: empty dataset");

  const auto t0 = Clock::now();

  // split distances use statistics over every row: partitioning precedes
  // the train-only normalization inside each training event
  std::vector<std::size_t> all(raw.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const data::PreparedDataset full = data::encode_and_prepare(raw, all);
  const FoldAssignment folds =
      dobscv_split(full.features, full.labels, grid.folds, grid.seed);

  std::vector<std::vector<std::size_t>> cv_parts;
  std::vector<std::size_t> test_rows;
  for (int f = 0; f < grid.folds; ++f) {
    const bool is_test =
        std::find(grid.test_folds.begin(), grid.test_folds.end(), f) != grid.test_folds.end();
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < raw.rows(); ++i) {
      if (folds.fold_of[i] == f) rows.push_back(i);
    }
    if (is_test) {
      test_rows.insert(test_rows.end(), rows.begin(), rows.end());
    } else {
      if (rows.empty()) throw std::runtime_error("run_grid: empty training fold");
      cv_parts.push_back(std::move(rows));
    }
  }
  std::sort(test_rows.begin(), test_rows.end());
  if (test_rows.empty()) throw std::runtime_error("run_grid: empty test set");

  std::vector<std::size_t> cv_rows;
  for (const auto& p : cv_parts) cv_rows.insert(cv_rows.end(), p.begin(), p.end());
  std::sort(cv_rows.begin(), cv_rows.end());

  ExperimentResult result;
  result.dataset_id = raw.name;
  result.seed = grid.seed;
  result.grid = grid;

  struct Cell {
    double nu;
    double q_prime;
  };
  std::vector<Cell> todo;
  for (double nu : grid.nu_values) {
    for (double qp : grid.q_prime_values) todo.push_back({nu, qp});
  }
  result.cells.resize(todo.size());

  std::mutex sink;  // guards hooks, progress file, and the result slots
  std::ofstream progress;
  if (!progress_csv.empty()) {
    progress.open(progress_csv);
    if (!progress) throw std::runtime_error("run_grid: cannot write " + progress_csv.string());
    progress << csv_header() << '\n' << std::flush;
  }

  RunHooks locked_hooks;
  const RunHooks* cell_hooks = nullptr;
  if (hooks && (hooks->on_row_access || hooks->on_cell_done)) {
    if (hooks->on_row_access) {
      locked_hooks.on_row_access = [&](std::size_t row, RowPhase phase) {
        std::lock_guard<std::mutex> lock(sink);
        hooks->on_row_access(row, phase);
      };
    }
    cell_hooks = &locked_hooks;
  }

  auto run_cell = [&](std::size_t idx) {
    const auto cell_t0 = Clock::now();
    CellResult cell;
    cell.nu = todo[idx].nu;
    cell.q_prime = todo[idx].q_prime;
    try {
      training::TrainSettings base;
      base.nu = cell.nu;
      base.q_prime = cell.q_prime;
      base.threads = 1;  // cells are the unit of parallelism

      const CSelection sel = select_c(raw, cv_parts, grid.c_values, base, cell_hooks);
      cell.selected_c = sel.c;
      cell.cv_error = sel.cv_error;

      base.c_reg = sel.c;
      if (cell_hooks) report_rows(cell_hooks, cv_rows, RowPhase::retrain);
      const training::TrainedModel m = training::train(raw, cv_rows, base);
      cell.iterations = m.solve.iterations;
      if (cell_hooks) report_rows(cell_hooks, test_rows, RowPhase::test_eval);
      cell.test_error = training::zero_one_error(m, raw, test_rows);
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.cv_error = 1.0;
      cell.test_error = 1.0;
      cell.note = e.what();
    }
    cell.seconds = seconds_since(cell_t0);

    std::lock_guard<std::mutex> lock(sink);
    result.cells[idx] = cell;
    if (progress.is_open()) progress << csv_row(result.dataset_id, cell) << '\n' << std::flush;
    if (hooks && hooks->on_cell_done) hooks->on_cell_done(cell);
  };

  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(todo.size());
#ifdef _OPENMP
  if (workers > 1) {
#pragma omp parallel for num_threads(workers) schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) run_cell(static_cast<std::size_t>(i));
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) run_cell(static_cast<std::size_t>(i));
  }
#else
  (void)workers;
  for (std::ptrdiff_t i = 0; i < n; ++i) run_cell(static_cast<std::size_t>(i));
#endif

  result.total_seconds = seconds_since(t0);
  return result;
}

namespace {

std::string format_value(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string sanitize_filename(const std::string& s) {
  std::string out;
  for (char c : s) {
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_');
  }
  return out.empty() ? std::string("dataset") : out;
}

}  // namespace

std::string csv_header() {
  return "dataset,nu,q_prime,selected_C,cv_error,test_error,iterations,seconds";
}

std::string csv_row(const std::string& dataset_id, const CellResult& cell) {
  std::ostringstream os;
  os << dataset_id << ',' << format_value(cell.nu) << ',' << format_value(cell.q_prime) << ','
     << format_value(cell.selected_c) << ',' << format_value(cell.cv_error) << ','
     << format_value(cell.test_error) << ',' << cell.iterations << ',' << format_value(cell.seconds);
  return os.str();
}

namespace {

std::vector<CellResult> sorted_cells(const ExperimentResult& result) {
  std::vector<CellResult> cells = result.cells;
  std::sort(cells.begin(), cells.end(), [](const CellResult& a, const CellResult& b) {
    if (a.nu != b.nu) return a.nu < b.nu;
    return a.q_prime < b.q_prime;
  });
  return cells;
}

const CellResult& best_cell(const std::vector<CellResult>& cells) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    if (cells[i].test_error < cells[best].test_error) best = i;
  }
  return cells[best];
}

void write_summary_json(const ExperimentResult& result, const std::filesystem::path& path) {
  using json = nlohmann::ordered_json;
  const auto num = [](double v) -> json {
    if (std::isinf(v)) return json(v > 0 ? "inf" : "-inf");
    return json(v);
  };
  const std::vector<CellResult> cells = sorted_cells(result);

  json j;
  j["dataset"] = result.dataset_id;
  j["seed"] = result.seed;
  j["folds"] = result.grid.folds;
  j["test_folds"] = result.grid.test_folds;
  for (const auto& [key, values] :
       {std::pair{"nu_values", &result.grid.nu_values},
        std::pair{"q_prime_values", &result.grid.q_prime_values},
        std::pair{"c_values", &result.grid.c_values}}) {
    json arr = json::array();
    for (double v : *values) arr.push_back(num(v));
    j[key] = arr;
  }
  const CellResult& top = best_cell(cells);
  j["best"] = {{"nu", num(top.nu)},
               {"q_prime", top.q_prime},
               {"selected_C", top.selected_c},
               {"test_error", top.test_error}};
  j["total_seconds"] = result.total_seconds;
  json arr = json::array();
  for (const CellResult& c : cells) {
    arr.push_back({{"nu", num(c.nu)},
                   {"q_prime", c.q_prime},
                   {"selected_C", c.selected_c},
                   {"cv_error", c.cv_error},
                   {"test_error", c.test_error},
                   {"iterations", c.iterations},
                   {"seconds", c.seconds},
                   {"ok", c.ok},
                   {"note", c.note}});
  }
  j["cells"] = arr;

  std::ofstream f(path);
  if (!f) throw std::runtime_error("emit_results: cannot write " + path.string());
  f << j.dump(2) << '\n';
}

// Fig-1 style panel: test error over q', one polyline per nu.
void write_svg(const ExperimentResult& result, const std::filesystem::path& path) {
  constexpr double kWidth = 860, kHeight = 560;
  constexpr double kLeft = 70, kRight = 820, kTop = 40, kBottom = 500;
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                   "#9467bd", "#ff7f0e", "#17becf"};
  constexpr std::size_t kPaletteSize = 6;

  std::vector<double> nus = result.grid.nu_values;
  std::sort(nus.begin(), nus.end());
  nus.erase(std::unique(nus.begin(), nus.end()), nus.end());
  std::vector<double> qs = result.grid.q_prime_values;
  std::sort(qs.begin(), qs.end());
  qs.erase(std::unique(qs.begin(), qs.end()), qs.end());

  const double qmin = qs.front();
  const double qmax = qs.back();
  const double qspan = qmax > qmin ? qmax - qmin : 1.0;
  double emax = 0.0;
  for (const CellResult& c : result.cells) emax = std::max(emax, c.test_error);
  const double ymax = std::max(0.1, std::ceil(emax * 10.0) / 10.0);

  const auto xpos = [&](double q) { return kLeft + (q - qmin) / qspan * (kRight - kLeft); };
  const auto ypos = [&](double e) { return kBottom - e / ymax * (kBottom - kTop); };
  const auto fmt = [](double v) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(2);
    os << v;
    return os.str();
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << (kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << result.dataset_id
      << ": test error vs q&#8242;</text>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kRight << "\" y2=\""
      << kBottom << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kBottom << "\" stroke=\"black\"/>\n";

  for (double q : qs) {
    const double x = xpos(q);
    svg << "<line class=\"xtick\" x1=\"" << fmt(x) << "\" y1=\"" << kBottom << "\" x2=\"" << fmt(x)
        << "\" y2=\"" << (kBottom + 6) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fmt(x) << "\" y=\"" << (kBottom + 22)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << fmt(q)
        << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double e = ymax * i / 4.0;
    const double y = ypos(e);
    svg << "<line x1=\"" << (kLeft - 6) << "\" y1=\"" << fmt(y) << "\" x2=\"" << kLeft
        << "\" y2=\"" << fmt(y) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << (kLeft - 10) << "\" y=\"" << fmt(y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << fmt(e)
        << "</text>\n";
  }

  const std::vector<CellResult> cells = sorted_cells(result);
  for (std::size_t ni = 0; ni < nus.size(); ++ni) {
    const char* color = kPalette[ni % kPaletteSize];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (const CellResult& c : cells) {
      if (c.nu != nus[ni]) continue;
      if (!first) svg << ' ';
      svg << fmt(xpos(c.q_prime)) << ',' << fmt(ypos(c.test_error));
      first = false;
    }
    svg << "\"/>\n";
    const double ly = kTop + 18.0 * static_cast<double>(ni);
    svg << "<line x1=\"" << (kRight - 130) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << (kRight - 100)
        << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << (kRight - 94) << "\" y=\"" << fmt(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">nu=" << format_value(nus[ni])
        << "</text>\n";
  }
  svg << "</svg>\n";

  std::ofstream f(path);
  if (!f) throw std::runtime_error("emit_results: cannot write " + path.string());
  f << svg.str();
}

}  // namespace

void emit_results(const ExperimentResult& result, const std::filesystem::path& out_dir) {
  if (result.cells.empty()) throw std::invalid_argument("emit_results: empty result");
  std::filesystem::create_directories(out_dir);

  const std::vector<CellResult> cells = sorted_cells(result);
  {
    const std::filesystem::path p = out_dir / "results.csv";
    std::ofstream f(p);
    if (!f) throw std::runtime_error("emit_results: cannot write " + p.string());
    f << csv_header() << '\n';
    for (const CellResult& c : cells) f << csv_row(result.dataset_id, c) << '\n';
  }

  write_summary_json(result, out_dir / "summary.json");
  write_svg(result, out_dir / (sanitize_filename(result.dataset_id) + ".svg"));
}

}  // namespace nitm::experiment
