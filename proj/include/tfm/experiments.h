#pragma once

// Batch experiments behind the command-line front end: shock ratio reports,
// seeded welfare sweeps, the solver benchmark matrix and the reduction check.

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tfm/analysis.h"
#include "tfm/simulation.h"
#include "tfm/tipping.h"

namespace tfm {

// ---- stabilization ratio -------------------------------------------------

struct RatioBoundCheck {
  double c = 0.0;
  double p = 0.0;
  double bound = 0.0;
  bool vacuous = false;  // p <= delta or p + delta >= 1: no claim to test
  bool holds = false;    // ci.lo >= bound
};

struct ShockReport {
  std::size_t m = 0;
  ShockSamples baseline;  // Z
  ShockSamples multi;     // Z^m and Z_i
  double ratio = 0.0;
  Interval ci;
  double delta = 0.0;  // max_i TV(Z, Z_i)
  std::vector<RatioBoundCheck> checks;

  bool all_hold() const;
};

/// One-dimensional chain on resource 0 of `multi`: unit gas weight, gas cap
/// equal to that resource's cap, and the demand of resource 0.
ScenarioConfig single_resource_baseline(const ScenarioConfig& multi);

/// Runs both chains `runs` times and compares the empirical ratio of means
/// against the lower bound for each c. Unstabilized runs are dropped; the
/// sample counts are in the embedded ShockSamples.
ShockReport shock_report(const ScenarioConfig& multi,
                         const ScenarioConfig& baseline, std::size_t runs,
                         std::size_t workers, std::size_t n_boot,
                         std::span<const double> c_values);

nlohmann::ordered_json to_json(const ShockReport& r);

// ---- welfare ---------------------------------------------------------------

struct WelfareRun {
  std::uint64_t seed = 0;
  WelfareOutcome outcome;
};

struct WelfareVerdict {
  std::size_t runs = 0;
  std::size_t accepted = 0;
  std::size_t extended = 0;    // runs where B^m strictly extends the shared set
  std::size_t violations = 0;  // W^m < W^1, or not strictly larger when extended

  bool pass() const { return runs > 0 && accepted == runs && violations == 0; }
};

/// Seeds are mix_seed(base.seed, k) for k < n_seeds; results are in k order.
std::vector<WelfareRun> welfare_sweep(const WelfareConfig& base,
                                      std::size_t n_seeds, std::size_t workers);
WelfareVerdict welfare_verdict(const std::vector<WelfareRun>& runs);

// ---- solver benchmark ------------------------------------------------------

struct RevenueOptions {
  std::vector<std::size_t> n_values{50, 100, 200};
  std::vector<std::size_t> m_values{1, 2, 3, 4, 6, 8};
  std::chrono::duration<double> time_budget{10.0};
  std::uint64_t node_budget = kDefaultNodeBudget;
  std::vector<std::size_t> dp_n_values{100, 1000, 10000};
  int weight_lo = 1;
  int weight_hi = 20;
  int value_lo = 1;
  int value_hi = 100;
  double capacity_limit = 2500.0;
  double fptas_epsilon = 0.1;
  std::uint64_t seed = 0;
};

/// Integer weights and values drawn uniformly; each capacity is half the
/// dimension's total weight, capped at capacity_limit.
KnapsackInstance revenue_instance(std::size_t n, std::size_t m,
                                  std::uint64_t seed,
                                  const RevenueOptions& opts);

struct RevenueCell {
  std::size_t n = 0;
  std::size_t m = 0;
  std::string solver;
  bool exhausted = false;
  double value = 0.0;
  std::uint64_t nodes = 0;  // exact solver only
  double seconds = 0.0;
  std::optional<double> quality;  // value / best exact value of the cell
};

struct RevenueBenchmark {
  std::vector<RevenueCell> matrix;
  std::vector<RevenueCell> dp_scaling;  // m = 1, large n
};

RevenueBenchmark run_revenue_benchmark(const RevenueOptions& opts);

// ---- reduction check -------------------------------------------------------

struct ReduceOptions {
  std::size_t instances = 200;
  std::size_t max_n = 12;
  std::size_t max_m = 3;
  std::vector<TippingSpec> families{TippingSpec::linear(1.0),
                                    TippingSpec::power(1.0, 2.0),
                                    TippingSpec::saturating(2000.0, 1.0)};
  std::vector<double> scales{0.01, 1.0, 100.0};
  std::uint64_t seed = 0;
};

struct ReduceCase {
  std::size_t index = 0;
  std::size_t n = 0;
  std::size_t m = 0;
  std::string family;
  bool equivalent = false;     // RM optimum equals the MDK optimum
  bool scale_invariant = false;  // scaling MDK values keeps the optimum
};

/// Random integer instances, MDK optimum by brute force, RM optimum by the
/// exact solver on the reduced instance.
std::vector<ReduceCase> run_reduce_check(const ReduceOptions& opts);

}  // namespace tfm
