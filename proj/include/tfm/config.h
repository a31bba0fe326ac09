#pragma once

// TOML run configuration. Every table rejects keys it does not know, and
// errors carry the offending key and its line.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tfm/analysis.h"
#include "tfm/experiments.h"
#include "tfm/simulation.h"

namespace tfm {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ShockSettings {
  std::vector<double> amplitude_after;  // demand after the shock
  std::size_t shock_block = 50;
  std::size_t horizon = 400;
  double tol = 1e-3;
  std::size_t window = 3;
  std::size_t runs = 500;
  std::size_t bootstrap = 2000;
  std::vector<double> c_values{0.5, 1.0, 2.0};
};

struct WelfareSettings {
  std::size_t seeds = 100;
  double proportional_share = 0.5;
  double proportional_size_lo = 0.02;
  double proportional_size_hi = 0.08;
};

struct RatioSettings {
  RatioCurveOptions curve;
  std::vector<DiscreteDist> distributions = default_distributions();
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> out_dir;
  std::optional<Mechanism> mechanism;
  std::optional<DemandModel> demand;
  SolverChoice solver = SolverChoice::greedy();
  std::optional<ShockSettings> shock;
  std::optional<WelfareSettings> welfare;
  std::optional<RatioSettings> ratio;
  std::optional<RevenueOptions> revenue;
  std::optional<ReduceOptions> reduce;

  /// Semantic checks beyond parsing: mechanism (gas-cap safety included),
  /// demand dimensions and section parameters.
  void validate() const;
};

RunConfig parse_config(const std::string& toml_text, const std::string& source_name);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace tfm
