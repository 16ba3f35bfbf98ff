#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace featlab {

struct CheckResult {
  std::string suite;
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  /// How measured compares to threshold for a pass: "<=" or ">=".
  std::string relation = "<=";
  bool pass = false;
};

struct CheckOptions {
  /// Pins the closed-form kernel truncation in the kernel suite (mutation testing).
  std::optional<int> kernel_k_max;
};

/// Suites: gegenbauer, kernel, training, analysis, all. Throws ConfigError for other names.
std::vector<CheckResult> run_checks(const std::string& suite, const CheckOptions& options = {});

void print_report(std::ostream& out, const std::vector<CheckResult>& results);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace featlab
