#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cbdp {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;   // worst error, or p-value for statistical checks
  double threshold = 0.0;  // tolerance, or minimum p-value
  std::string detail;
};

// Fast cross-checks: normalizations, closed forms against quadrature, and
// samplers against analytic laws. Deterministic for a given seed.
std::vector<CheckResult> run_validation_suite(std::uint64_t seed, unsigned jobs = 1);

// "check<TAB>status<TAB>measured<TAB>threshold<TAB>detail" table.
void write_validation_table(std::ostream& out, const std::vector<CheckResult>& results, int precision = 6);

}  // namespace cbdp
