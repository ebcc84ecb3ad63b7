#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace multiwave::gradcheck {

struct CheckResult {
  std::string name;
  double max_rel_err = 0.0;
  std::size_t checked = 0;
  bool passed = false;
};

// Central finite differences (h = 1e-5) against the tape gradients for
// every parameter element; passes when the worst relative error stays
// below 1e-4.
std::vector<CheckResult> check_ops(std::uint64_t seed);
// Same check through each full component kind and the fused model.
std::vector<CheckResult> check_models(std::uint64_t seed);
std::vector<CheckResult> check_all(std::uint64_t seed);

bool all_passed(const std::vector<CheckResult>& results);
std::string to_report(const std::vector<CheckResult>& results);

}  // namespace multiwave::gradcheck
