#pragma once

// Desk-scale acceptance suite: ten property-based criteria covering the
// spectral operators, both equation solvers, the coupled system, duality,
// exponent identities and determinism. Each criterion is independent; the
// runner never stops early, so a report always carries all ten verdicts.

#include <cstdint>
#include <string>
#include <vector>

namespace fmfg {

struct CriterionResult {
  int index = 0;
  std::string name;
  bool passed = false;
  std::string detail;  // worst observed numbers, deterministic text
};

std::vector<CriterionResult> run_acceptance(std::uint64_t seed = 0);

}  // namespace fmfg
