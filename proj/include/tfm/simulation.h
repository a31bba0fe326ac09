#pragma once

// Chain simulation: demand models, block-by-block price dynamics, demand
// shock stabilization experiments and stable-state welfare comparison.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tfm/knapsack.h"
#include "tfm/mechanism.h"

namespace tfm {

using Rng = std::mt19937_64;

/// splitmix64 step; used to derive independent per-run seeds.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index);

/// Round-trip decimal form ("%.17g") used by every CSV writer.
std::string format_real(double x);

/// Eligible consumption beyond this multiple of a resource cap is not
/// generated; blocks saturate long before.
inline constexpr double kDemandTruncation = 4.0;

/// Constant-elasticity demand D_i(p) = A_i * p^(-e_i) per resource, where p is
/// the base-fee cost of one unit of resource i. Transactions consume a single
/// resource each, so eligible demand for i depends on its own price only.
struct DemandModel {
  std::vector<double> amplitude;
  std::vector<double> elasticity;
  double sigma = 0.0;  // lognormal noise on each block's demand, mean 1
  double size_lo = 1.0;
  double size_hi = 1.0;  // per-transaction consumption, resource units
  double margin_lo = 0.5;
  double margin_hi = 2.0;  // value / base cost, uniform

  std::size_t dims() const { return amplitude.size(); }
  void validate() const;
  double demand(std::size_t i, double unit_price) const;
};

/// Draws one block's mempool. For each resource the eligible transactions
/// (value >= base cost) sum exactly to D_i(p_i) times the noise draw,
/// truncated at kDemandTruncation * caps[i]; ineligible transactions (margin
/// below 1) are interleaved. Bids are truthful.
std::vector<Transaction> generate_mempool(const DemandModel& model,
                                          std::span<const double> unit_price,
                                          std::span<const double> caps,
                                          Rng& rng, std::uint64_t& next_id);

std::vector<Transaction> generate_mempool(const DemandModel& model,
                                          const Mechanism& mech,
                                          const BaseFeeState& fees, Rng& rng,
                                          std::uint64_t& next_id,
                                          const GasConfig* active_gas = nullptr);

struct ChainState {
  BaseFeeState fees;
  GasConfig gas;  // active gas schedule for the gas-based mechanisms
  std::vector<double> utilization_ema;
  std::uint64_t block = 0;
  std::uint64_t next_tx_id = 0;
};

ChainState initial_state(const Mechanism& mech, BaseFeeState fees);

struct TraceRecord {
  std::uint64_t block = 0;
  BaseFeeState fees;       // in effect while building this block
  BaseFeeState next_fees;  // after applying the update rule
  ResourceVector consumption;
  double gas = 0.0;  // zero for mechanisms without a gas schedule
  double welfare = 0.0;
  double tips = 0.0;
  double burn = 0.0;
  std::size_t mempool = 0;
};

struct ChainTrace {
  std::string mechanism;
  std::vector<TraceRecord> records;
};

struct StepResult {
  ChainState state;
  Block block;
  TraceRecord record;
};

/// Builds the next block, applies the price update and, for the adaptive
/// mechanism, the utilization averages and epoch weight update.
StepResult step_chain(const ChainState& state,
                      std::span<const Transaction> mempool,
                      const Mechanism& mech, const SolverChoice& solver);

/// Prices at which expected consumption equals target. Closed form for the
/// multi-dimensional mechanism, bisection for the gas mechanisms, damped
/// fixed-point iteration for synthetic projections.
BaseFeeState find_stable_prices(const DemandModel& model, const Mechanism& mech);

struct ScenarioConfig {
  Mechanism mechanism = MultiDimMechanism{};
  DemandModel demand_before;
  DemandModel demand_after;
  std::size_t shock_block = 50;
  std::size_t horizon = 400;
  double stability_tol = 1e-3;
  std::size_t stability_window = 3;
  std::uint64_t seed = 0;
  SolverChoice solver = SolverChoice::greedy();

  void validate() const;
};

ChainTrace run_scenario(const ScenarioConfig& config);

struct StabilizationResult {
  std::vector<std::optional<std::size_t>> per_price;  // Z_i
  std::optional<std::size_t> overall;  // max_i Z_i; empty if any unstabilized

  bool stabilized() const { return overall.has_value(); }
};

/// Z_i is the smallest k >= 0 such that the relative fee change of price i
/// is at most `tol` in each of the `window` blocks starting at
/// shock_block + k.
StabilizationResult measure_stabilization(const ChainTrace& trace,
                                          std::size_t shock_block, double tol,
                                          std::size_t window);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct ShockRun {
  std::uint64_t seed = 0;
  StabilizationResult result;
};

struct ShockSamples {
  std::vector<ShockRun> runs;  // ordered by run index
  std::size_t unstabilized = 0;
  std::vector<double> overall;                 // Z^m of stabilized runs
  std::vector<std::vector<double>> per_price;  // Z_i of stabilized runs
  double mean_overall = 0.0;
  Interval ci_overall;
  std::vector<double> mean_per_price;
};

/// Independent seeded runs of `config` (seed i = mix_seed(config.seed, i)).
ShockSamples shock_experiment(const ScenarioConfig& config, std::size_t n_runs,
                              std::size_t workers = 1,
                              std::size_t n_bootstrap = 2000);

struct WelfareConfig {
  ResourceBounds bounds;
  GasConfig gas;
  DemandModel demand;  // prices for the multi-dimensional mechanism
  double proportional_share = 0.5;  // part of each target met by txs shaped
                                    // like the target vector
  double proportional_size_lo = 0.02;
  double proportional_size_hi = 0.08;  // fraction of the target vector per tx
  std::uint64_t seed = 0;
};

struct WelfareOutcome {
  bool accepted = false;
  std::string rejection;
  double welfare_one_dim = 0.0;
  double welfare_multi_dim = 0.0;
  Block block_one_dim;
  Block block_multi_dim;
  BaseFeeState prices_one_dim;
  BaseFeeState prices_multi_dim;
  std::size_t shared = 0;
  bool multi_extends_shared = false;  // B^m strictly larger than B^1 cap B^m
  std::size_t mempool = 0;
};

/// Builds one stable-state mempool and one block per mechanism from it, with
/// the exact solver. Runs whose preconditions cannot be verified are
/// returned with accepted = false and a reason.
WelfareOutcome welfare_experiment(const WelfareConfig& config);

/// Welfare comparison on a given mempool. `prices_md` are the
/// multi-dimensional stable prices; the one-dimensional price is the lowest
/// one whose eligible set fits within the gas target.
WelfareOutcome welfare_from_mempool(const ResourceBounds& bounds,
                                    const GasConfig& gas,
                                    const BaseFeeState& prices_md,
                                    std::span<const Transaction> mempool);

/// Total-variation distance between the empirical distributions of two
/// integer samples.
double estimate_stat_distance(std::span<const double> a,
                              std::span<const double> b);

double mean_of(std::span<const double> xs);
double pearson_correlation(std::span<const double> a, std::span<const double> b);

/// Percentile bootstrap of the mean.
Interval bootstrap_mean_ci(std::span<const double> xs, std::size_t n_boot,
                           std::uint64_t seed, double level = 0.95);

/// Percentile bootstrap of mean(num) / mean(den), resampling both sides.
Interval bootstrap_ratio_ci(std::span<const double> num,
                            std::span<const double> den, std::size_t n_boot,
                            std::uint64_t seed, double level = 0.95);

void write_trace_csv(const ChainTrace& trace, std::ostream& out);

}  // namespace tfm
