#pragma once

// Small-size oracle and invariant checks, runnable from the CLI on a fresh
// build. Failures are report entries, never exceptions.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace petrels {

struct SelftestOptions {
  std::uint64_t seed = 1;
  // Test hook: perturb one Rinv entry off-symmetric before the symmetry check.
  bool inject_asymmetry = false;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      // measured deviation
  double tolerance = 0.0;
  std::string detail;
};

std::vector<CheckResult> run_selftest(const SelftestOptions& options);

/// CSV: check,status,value,tolerance,detail
void write_selftest_report(std::ostream& os, const std::vector<CheckResult>& results);

}  // namespace petrels
