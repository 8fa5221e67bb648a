#pragma once

// Built-in oracle suite run by `optoent validate`.

#include "optoent/propagator.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace optoent {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct ValidateOptions {
  QuadratureGrid grid;
  std::uint64_t seed = 1;
  std::size_t mc_samples = 10000;
};

std::vector<CheckResult> run_validation(const ValidateOptions& options = {});

std::string format_check(const CheckResult& check);

}  // namespace optoent
