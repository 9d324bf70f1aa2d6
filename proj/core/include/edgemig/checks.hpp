#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace edgemig::checks {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fast oracle and property checks over the library, for `edgemig check`.
std::vector<CheckResult> run_all(std::uint64_t seed);

}  // namespace edgemig::checks
