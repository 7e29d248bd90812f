#pragma once

#include <string>
#include <vector>

namespace nitm::selfcheck {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;  // worst error, counterexample, etc.
};

struct Options {
  // fault injection: skew derivative/gradient values so the gradient
  // checks must fail; exists so tests can prove the checks have teeth
  bool perturb_gradient = false;
};

// Fast invariant sweep over the numeric core. Deterministic; runs in well
// under a second.
std::vector<CheckResult> run(const Options& options = {});

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace nitm::selfcheck
