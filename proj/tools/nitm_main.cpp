// nitm: train, evaluate, and run the model-selection protocol for the
// q-exponential margin classifier from the command line.

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nitm/data.hpp"
#include "nitm/experiment.hpp"
#include "nitm/model.hpp"
#include "nitm/model_file.hpp"
#include "nitm/selfcheck.hpp"
#include "nitm/solver.hpp"
#include "nitm/training.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitSolver = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double parse_nu(const std::string& token) {
  std::string t = token;
  for (char& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (t == "inf" || t == "+inf" || t == "infinity") return nitm::model::kInfinity;
  try {
    std::size_t pos = 0;
    const double v = std::stod(token, &pos);
    if (pos != token.size()) throw std::invalid_argument(token);
    if (!(v > 0.0)) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw UsageError("--nu expects a positive number or 'inf', got '" + token + "'");
  }
}

struct DataArgs {
  std::string path;
  std::string format;  // "", "keel", "csv"
  std::string label_column;
  std::string positive_label;
};

void add_data_flags(CLI::App* cmd, DataArgs& args) {
  cmd->add_option("--data", args.path, "dataset file")->required();
  cmd->add_option("--format", args.format, "input format; default from the file extension")
      ->check(CLI::IsMember({"keel", "csv"}));
  cmd->add_option("--label-column", args.label_column, "CSV label column (default: last)");
  cmd->add_option("--positive-label", args.positive_label,
                  "label value mapped to +1 (default: first declared)");
}

nitm::data::RawDataset load_dataset(const DataArgs& args) {
  std::string format = args.format;
  if (format.empty()) {
    const std::string ext = std::filesystem::path(args.path).extension().string();
    format = ext == ".csv" ? "csv" : "keel";
  }
  if (format == "csv") {
    return nitm::data::parse_csv(args.path, args.label_column, args.positive_label);
  }
  return nitm::data::parse_keel(args.path);
}

void print_warnings(const nitm::data::RawDataset& raw) {
  for (const std::string& w : raw.warnings) std::cerr << "warning: " << w << '\n';
}

struct SolverFlags {
  int max_iterations = nitm::solver::SolverConfig{}.max_iterations;
  double gradient_tolerance = nitm::solver::SolverConfig{}.gradient_tolerance;
  std::string trace_file;
};

void add_solver_flags(CLI::App* cmd, SolverFlags& flags) {
  cmd->add_option("--max-iterations", flags.max_iterations, "solver iteration cap")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--gradient-tolerance", flags.gradient_tolerance, "solver gradient stop")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--solver-trace", flags.trace_file, "write per-iteration records to a file");
}

std::vector<std::size_t> all_rows(const nitm::data::RawDataset& raw) {
  std::vector<std::size_t> rows(raw.rows());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return rows;
}

int cmd_train(const DataArgs& data_args, const std::string& nu_token, double q_prime, double c_reg,
              std::uint64_t seed, const std::string& out_path, const SolverFlags& solver_flags,
              int threads) {
  nitm::training::TrainSettings settings;
  settings.nu = parse_nu(nu_token);
  settings.q_prime = q_prime;
  settings.c_reg = c_reg;
  settings.threads = threads;
  settings.solver.max_iterations = solver_flags.max_iterations;
  settings.solver.gradient_tolerance = solver_flags.gradient_tolerance;

  std::ofstream trace;
  if (!solver_flags.trace_file.empty()) {
    trace.open(solver_flags.trace_file);
    if (!trace) throw UsageError("cannot write trace file '" + solver_flags.trace_file + "'");
    settings.solver.on_iteration = [&trace](const nitm::solver::SolverConfig::Trace& t) {
      trace << t.iteration << ' ' << t.value << ' ' << t.gradient_norm << ' ' << t.step << '\n';
    };
  }

  const nitm::data::RawDataset raw = load_dataset(data_args);
  print_warnings(raw);
  const nitm::training::TrainedModel m = nitm::training::train(raw, all_rows(raw), settings);

  nitm::model_file::ModelFile file;
  file.nu = m.nu;
  file.q_prime = m.q_prime;
  file.c_reg = m.c_reg;
  file.seed = seed;
  file.mu = m.mu;
  file.params = m.params;
  file.termination = nitm::solver::to_string(m.solve.reason);
  file.iterations = m.solve.iterations;
  file.objective = m.solve.value;
  file.gradient_norm = m.solve.gradient_norm;
  nitm::model_file::save(out_path, file);

  const double train_error = nitm::training::zero_one_error(m, raw, all_rows(raw));
  std::cout << "trained on " << raw.rows() << " rows: objective " << m.solve.value
            << ", training error " << train_error << ", " << m.solve.iterations << " iterations ("
            << file.termination << ")\n";
  std::cout << "model written to " << out_path << '\n';
  if (m.solve.reason == nitm::solver::Termination::max_iterations && m.solve.gradient_norm > 1.0) {
    std::cerr << "error: solver did not converge (gradient norm " << m.solve.gradient_norm
              << ")\n";
    return kExitSolver;
  }
  return kExitOk;
}

nitm::training::TrainedModel model_from_file(const nitm::model_file::ModelFile& file) {
  nitm::training::TrainedModel m;
  m.mu = file.mu;
  m.params = file.params;
  m.nu = file.nu;
  m.q_prime = file.q_prime;
  m.c_reg = file.c_reg;
  return m;
}

int cmd_predict(const std::string& model_path, const DataArgs& data_args,
                const std::string& out_path) {
  const nitm::model_file::ModelFile file = nitm::model_file::load(model_path);
  const nitm::training::TrainedModel m = model_from_file(file);
  const nitm::data::RawDataset raw = load_dataset(data_args);
  print_warnings(raw);
  const std::vector<int> predicted = nitm::training::predict_rows(m, raw, all_rows(raw));

  std::ofstream out_file;
  std::ostream* out = &std::cout;
  if (!out_path.empty() && out_path != "-") {
    out_file.open(out_path);
    if (!out_file) throw UsageError("cannot write '" + out_path + "'");
    out = &out_file;
  }
  for (int p : predicted) {
    *out << file.params.class_values[p == 1 ? 0 : 1] << '\n';
  }
  return kExitOk;
}

int cmd_eval(const std::string& model_path, const DataArgs& data_args) {
  const nitm::model_file::ModelFile file = nitm::model_file::load(model_path);
  const nitm::training::TrainedModel m = model_from_file(file);
  const nitm::data::RawDataset raw = load_dataset(data_args);
  print_warnings(raw);
  const double err = nitm::training::zero_one_error(m, raw, all_rows(raw));
  std::cout << "rows " << raw.rows() << " zero_one_error " << err << '\n';
  return kExitOk;
}

// grid file: lines "key = v1 v2 ...", keys nu_values/q_prime_values/
// c_values/test_folds/folds
nitm::experiment::GridSpec read_grid_file(const std::string& path,
                                          nitm::experiment::GridSpec grid) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot open grid file '" + path + "'");
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream is(line);
    std::string key;
    if (!(is >> key)) continue;
    std::string eq;
    if (!(is >> eq) || eq != "=") {
      throw UsageError("grid file line " + std::to_string(line_no) + ": expected 'key = values'");
    }
    std::vector<std::string> tokens;
    std::string tok;
    while (is >> tok) tokens.push_back(tok);
    if (tokens.empty()) {
      throw UsageError("grid file line " + std::to_string(line_no) + ": no values for " + key);
    }
    auto doubles = [&](bool nu_style) {
      std::vector<double> out;
      for (const std::string& t : tokens) {
        out.push_back(nu_style ? parse_nu(t) : std::stod(t));
      }
      return out;
    };
    try {
      if (key == "nu_values") {
        grid.nu_values = doubles(true);
      } else if (key == "q_prime_values") {
        grid.q_prime_values = doubles(false);
      } else if (key == "c_values") {
        grid.c_values = doubles(false);
      } else if (key == "test_folds") {
        grid.test_folds.clear();
        for (const std::string& t : tokens) grid.test_folds.push_back(std::stoi(t));
      } else if (key == "folds") {
        grid.folds = std::stoi(tokens[0]);
      } else {
        throw UsageError("grid file line " + std::to_string(line_no) + ": unknown key " + key);
      }
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception&) {
      throw UsageError("grid file line " + std::to_string(line_no) + ": malformed value");
    }
  }
  return grid;
}

int cmd_experiment(const DataArgs& data_args, const std::vector<std::string>& nu_tokens,
                   const std::vector<double>& q_primes, const std::vector<double>& c_values,
                   const std::string& grid_file, int folds, const std::vector<int>& test_folds,
                   std::uint64_t seed, const std::string& out_dir, int workers) {
  nitm::experiment::GridSpec grid = nitm::experiment::GridSpec::defaults();
  if (!grid_file.empty()) grid = read_grid_file(grid_file, grid);
  if (!nu_tokens.empty()) {
    grid.nu_values.clear();
    for (const std::string& t : nu_tokens) grid.nu_values.push_back(parse_nu(t));
  }
  if (!q_primes.empty()) grid.q_prime_values = q_primes;
  if (!c_values.empty()) grid.c_values = c_values;
  if (folds > 0) grid.folds = folds;
  if (!test_folds.empty()) grid.test_folds = test_folds;
  grid.seed = seed;

  const nitm::data::RawDataset raw = load_dataset(data_args);
  print_warnings(raw);

  std::filesystem::create_directories(out_dir);
  const nitm::experiment::ExperimentResult result = nitm::experiment::run_grid(
      raw, grid, workers, nullptr, std::filesystem::path(out_dir) / "progress.csv");
  nitm::experiment::emit_results(result, out_dir);

  std::printf("%-8s %-8s %-12s %-10s %-10s %s\n", "nu", "q'", "C", "cv_error", "test_error",
              "status");
  for (const auto& cell : result.cells) {
    const std::string nu_s = std::isinf(cell.nu) ? "inf" : std::to_string(cell.nu).substr(0, 7);
    std::printf("%-8s %-8.2f %-12.4g %-10.4f %-10.4f %s\n", nu_s.c_str(), cell.q_prime,
                cell.selected_c, cell.cv_error, cell.test_error,
                cell.ok ? "ok" : cell.note.c_str());
  }
  std::printf("%zu cells in %.1fs; results under %s\n", result.cells.size(), result.total_seconds,
              out_dir.c_str());
  return kExitOk;
}

int cmd_selfcheck(bool inject_fault) {
  nitm::selfcheck::Options options;
  options.perturb_gradient = inject_fault;
  const auto results = nitm::selfcheck::run(options);
  for (const auto& r : results) {
    std::printf("%-32s %s  %s\n", r.name.c_str(), r.pass ? "pass" : "FAIL", r.detail.c_str());
  }
  return nitm::selfcheck::all_passed(results) ? kExitOk : kExitSolver;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"q-exponential margin classifier with a Student-t weight prior"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read defaults from a config file");

  DataArgs train_data, predict_data, eval_data, exp_data;
  SolverFlags solver_flags;
  std::string nu_token = "inf", out_model = "model.nitm", model_path, predict_out;
  std::string exp_out = "results", grid_file;
  double q_prime = 0.0, c_reg = 1.0;
  std::uint64_t seed = 0;
  int threads = 1, workers = 1, folds = 0;
  std::vector<std::string> nu_tokens;
  std::vector<double> q_primes, c_values;
  std::vector<int> test_folds;
  bool inject_fault = false;

  CLI::App* train = app.add_subcommand("train", "fit a model and write it to a file");
  add_data_flags(train, train_data);
  train->add_option("--nu", nu_token, "prior degrees of freedom, or 'inf'");
  train->add_option("--q-prime", q_prime, "loss index in [0,1]")->check(CLI::Range(0.0, 1.0));
  train->add_option("--C", c_reg, "loss weight")->check(CLI::PositiveNumber);
  train->add_option("--seed", seed, "recorded in the model file");
  train->add_option("--out", out_model, "model file path");
  train->add_option("--workers", threads, "objective evaluation threads")
      ->check(CLI::PositiveNumber);
  add_solver_flags(train, solver_flags);

  CLI::App* predict = app.add_subcommand("predict", "label rows with a trained model");
  predict->add_option("--model", model_path, "model file")->required();
  add_data_flags(predict, predict_data);
  predict->add_option("--out", predict_out, "write labels here instead of stdout");

  CLI::App* eval = app.add_subcommand("eval", "zero-one error of a model on a dataset");
  eval->add_option("--model", model_path, "model file")->required();
  add_data_flags(eval, eval_data);

  CLI::App* experiment =
      app.add_subcommand("experiment", "DOB-SCV model-selection protocol over the (nu, q') grid");
  add_data_flags(experiment, exp_data);
  experiment->add_option("--nu", nu_tokens, "restrict the nu axis (repeatable; 'inf' allowed)");
  experiment->add_option("--q-prime", q_primes, "restrict the q' axis (repeatable)")
      ->check(CLI::Range(0.0, 1.0));
  experiment->add_option("--C", c_values, "restrict the C grid (repeatable)");
  experiment->add_option("--grid-file", grid_file, "grid axes from a key = values file");
  experiment->add_option("--folds", folds, "fold count (default 10)")->check(CLI::PositiveNumber);
  experiment->add_option("--test-folds", test_folds, "held-out fold ids (default 7 8 9)");
  experiment->add_option("--seed", seed, "fold assignment seed");
  experiment->add_option("--out", exp_out, "output directory");
  experiment->add_option("--workers", workers, "concurrent grid cells")
      ->check(CLI::PositiveNumber);

  CLI::App* selfcheck = app.add_subcommand("selfcheck", "run the built-in invariant suite");
  selfcheck->add_flag("--inject-gradient-fault", inject_fault,
                      "skew gradients to prove the checks can fail");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (train->parsed()) {
      return cmd_train(train_data, nu_token, q_prime, c_reg, seed, out_model, solver_flags,
                       threads);
    }
    if (predict->parsed()) return cmd_predict(model_path, predict_data, predict_out);
    if (eval->parsed()) return cmd_eval(model_path, eval_data);
    if (experiment->parsed()) {
      return cmd_experiment(exp_data, nu_tokens, q_primes, c_values, grid_file, folds, test_folds,
                            seed, exp_out, workers);
    }
    if (selfcheck->parsed()) return cmd_selfcheck(inject_fault);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const nitm::data::parse_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
