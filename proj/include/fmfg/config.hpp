#pragma once

// JSON run configuration. parse_config validates the whole document and
// reports every violation at once; serialize_config emits a canonical form
// (sorted keys, all defaults spelled out) whose bytes feed config_hash, so
// equal hashes mean equal runs. Expression-valued entries keep their source
// text for lossless round-trips.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fmfg/mfg.hpp"

namespace fmfg {

struct CouplingSpec {
  std::string kind = "local";  // local | nonlocal
  double c = 1.0;
  double q = 2.0;
  double bound_K = 0.0;
  std::optional<std::string> potential;  // expression text
  std::string kernel;                    // expression text, nonlocal only
  std::string outer_kind = "identity";   // identity | affine | saturating
  double outer_a = 0.0;
  double outer_b = 1.0;
};

struct OutputConfig {
  std::string directory = "out";
  std::string format = "field-binary";  // field-binary | csv | both
  int precision = 17;                   // CSV significant digits
};

struct RunConfig {
  MfgProblem problem;  // assembled and ready to hand to a solver
  std::optional<CouplingSpec> coupling;
  std::vector<std::string> drift;   // expression per component, drives fp-solve
  std::optional<std::string> data;  // expression, drives hjb-solve
  bool allow_out_of_regime = false;
  OutputConfig output;
  std::uint64_t seed = 0;
  std::vector<std::string> advisories;  // regime overrides, ignored keys
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(std::vector<std::string> violations);
  std::vector<std::string> violations;
};

// strict turns unknown keys from advisories into violations
RunConfig parse_config(const std::string& text, bool strict = false);

std::string serialize_config(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);  // FNV-1a of the canonical form

}  // namespace fmfg
