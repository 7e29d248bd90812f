#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* p = std::getenv("NITM_CLI");
  REQUIRE_MESSAGE(p != nullptr, "NITM_CLI must point at the built binary");
  return p;
}

std::string data_dir() {
  const char* p = std::getenv("NITM_DATA_DIR");
  REQUIRE_MESSAGE(p != nullptr, "NITM_DATA_DIR must point at the bundled datasets");
  return p;
}

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

fs::path scratch() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "nitm_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

RunResult run_cli(const std::string& args, const std::string& tag) {
  const fs::path out = scratch() / (tag + ".out");
  const fs::path err = scratch() / (tag + ".err");
  const std::string cmd =
      "\"" + cli_path() + "\" " + args + " > \"" + out.string() + "\" 2> \"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

// tiny cleanly-separated KEEL set with a known relation name
fs::path write_toy() {
  const fs::path p = scratch() / "clitoy.dat";
  std::ofstream f(p);
  f << "@relation clitoy\n"
       "@attribute x1 real [-4, 4]\n"
       "@attribute x2 real [-4, 4]\n"
       "@attribute class {up, down}\n"
       "@data\n";
  const double xs[] = {2.0, 2.5, 1.5, 3.0, 2.2, -2.0, -2.5, -1.5, -3.0, -2.2};
  for (int i = 0; i < 10; ++i) {
    f << xs[i] << ", " << (i % 2 == 0 ? 0.5 : -0.5) << ", " << (i < 5 ? "up" : "down") << '\n';
  }
  return p;
}

std::string blobs_path() { return (fs::path(data_dir()) / "synthetic_blobs.dat").string(); }

}  // namespace

TEST_CASE("train fits the separable toy to zero training error") {
  const fs::path toy = write_toy();
  const fs::path model = scratch() / "toy.model";
  auto r = run_cli("train --data \"" + toy.string() + "\" --nu inf --q-prime 0 --C 1 --out \"" +
                       model.string() + "\"",
                   "train_toy");
  CAPTURE(r.err);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("training error 0") != std::string::npos);
  CHECK(fs::exists(model));
  const std::string text = slurp(model);
  CHECK(text.rfind("nitm-model 1", 0) == 0);
  CHECK(text.find("termination") != std::string::npos);
}

TEST_CASE("identical invocations write byte-identical model files") {
  const fs::path toy = write_toy();
  const fs::path m1 = scratch() / "rerun1.model";
  const fs::path m2 = scratch() / "rerun2.model";
  const std::string base = "train --data \"" + toy.string() + "\" --nu 10 --q-prime 0.5 --C 2";
  auto r1 = run_cli(base + " --out \"" + m1.string() + "\"", "rerun1");
  auto r2 = run_cli(base + " --out \"" + m2.string() + "\"", "rerun2");
  CHECK(r1.exit_code == 0);
  CHECK(r2.exit_code == 0);
  CHECK(slurp(m1) == slurp(m2));
}

TEST_CASE("out-of-range loss index is a usage error") {
  const fs::path toy = write_toy();
  auto r = run_cli("train --data \"" + toy.string() + "\" --q-prime 1.5", "bad_qprime");
  CHECK(r.exit_code == 1);
}

TEST_CASE("missing dataset file is a data error") {
  auto r = run_cli("train --data /nonexistent/nope.dat", "missing_data");
  CHECK(r.exit_code == 2);
  CHECK(!r.err.empty());
}

TEST_CASE("predict labels the training rows correctly") {
  const fs::path toy = write_toy();
  const fs::path model = scratch() / "predict.model";
  auto rt = run_cli("train --data \"" + toy.string() + "\" --nu inf --q-prime 0.5 --C 10 --out \"" +
                        model.string() + "\"",
                    "predict_train");
  REQUIRE(rt.exit_code == 0);
  auto rp = run_cli("predict --model \"" + model.string() + "\" --data \"" + toy.string() + "\"",
                    "predict_run");
  CHECK(rp.exit_code == 0);
  std::istringstream lines(rp.out);
  std::string label;
  int row = 0;
  while (std::getline(lines, label)) {
    CHECK(label == (row < 5 ? "up" : "down"));
    ++row;
  }
  CHECK(row == 10);

  auto re = run_cli("eval --model \"" + model.string() + "\" --data \"" + toy.string() + "\"",
                    "predict_eval");
  CHECK(re.exit_code == 0);
  CHECK(re.out.find("zero_one_error 0") != std::string::npos);
}

TEST_CASE("predict rejects a model/data arity mismatch") {
  const fs::path toy = write_toy();
  const fs::path wide = scratch() / "wide.dat";
  std::ofstream(wide) << "@relation wide\n"
                         "@attribute x1 real [-4, 4]\n"
                         "@attribute x2 real [-4, 4]\n"
                         "@attribute x3 real [-4, 4]\n"
                         "@attribute class {up, down}\n"
                         "@data\n"
                         "1.0, 2.0, 3.0, up\n"
                         "-1.0, -2.0, -3.0, down\n";
  const fs::path model = scratch() / "arity.model";
  auto rt = run_cli("train --data \"" + toy.string() + "\" --out \"" + model.string() + "\"",
                    "arity_train");
  REQUIRE(rt.exit_code == 0);
  auto rp = run_cli("predict --model \"" + model.string() + "\" --data \"" + wide.string() + "\"",
                    "arity_run");
  CHECK(rp.exit_code != 0);
  CHECK(!rp.err.empty());
}

TEST_CASE("malformed model file is rejected with a message") {
  const fs::path bad = scratch() / "bad.model";
  std::ofstream(bad) << "nitm-model 1\nnu abc\n";
  const fs::path toy = write_toy();
  auto r = run_cli("predict --model \"" + bad.string() + "\" --data \"" + toy.string() + "\"",
                   "bad_model");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("malformed") != std::string::npos);
}

TEST_CASE("reduced experiment grid produces the result bundle") {
  const fs::path out = scratch() / "exp_out";
  auto r = run_cli("experiment --data \"" + blobs_path() +
                       "\" --nu inf --nu 10 --q-prime 0 --q-prime 0.5 --C 1 --C 100"
                       " --workers 2 --seed 5 --out \"" +
                       out.string() + "\"",
                   "experiment");
  CAPTURE(r.err);
  CHECK(r.exit_code == 0);
  const std::string csv = slurp(out / "results.csv");
  std::size_t lines = 0;
  for (char c : csv) lines += c == '\n';
  CHECK(lines == 5);  // header + 2x2 grid
  CHECK(fs::exists(out / "progress.csv"));
  CHECK(fs::exists(out / "summary.json"));
  CHECK(fs::exists(out / "synthetic_blobs.svg"));
  CHECK(r.out.find("4 cells") != std::string::npos);
}

TEST_CASE("grid file drives the experiment axes") {
  const fs::path gridfile = scratch() / "grid.txt";
  std::ofstream(gridfile) << "# comment line\n"
                             "nu_values = inf\n"
                             "q_prime_values = 0 1\n"
                             "c_values = 1\n"
                             "folds = 5\n"
                             "test_folds = 3 4\n";
  const fs::path out = scratch() / "gridfile_out";
  auto r = run_cli("experiment --data \"" + blobs_path() + "\" --grid-file \"" +
                       gridfile.string() + "\" --out \"" + out.string() + "\"",
                   "gridfile");
  CAPTURE(r.err);
  CHECK(r.exit_code == 0);
  const std::string csv = slurp(out / "results.csv");
  std::size_t lines = 0;
  for (char c : csv) lines += c == '\n';
  CHECK(lines == 3);  // header + 2 cells

  std::ofstream(gridfile) << "nu_values 1 2\n";
  auto bad = run_cli("experiment --data \"" + blobs_path() + "\" --grid-file \"" +
                         gridfile.string() + "\" --out \"" + out.string() + "\"",
                     "gridfile_bad");
  CHECK(bad.exit_code == 1);
}

TEST_CASE("selfcheck passes clean and fails under fault injection") {
  auto ok = run_cli("selfcheck", "selfcheck_ok");
  CAPTURE(ok.out);
  CHECK(ok.exit_code == 0);
  CHECK(ok.out.find("pass") != std::string::npos);
  CHECK(ok.out.find("FAIL") == std::string::npos);

  auto bad = run_cli("selfcheck --inject-gradient-fault", "selfcheck_fault");
  CHECK(bad.exit_code != 0);
  CHECK(bad.out.find("FAIL") != std::string::npos);
}
