#pragma once

// Tipping functions that are zero at zero, strictly increasing and
// continuous in the transaction value, and invertible; the revenue
// maximization problem they induce; and the reduction from multidimensional
// knapsack to it.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tfm/knapsack.h"

namespace tfm {

struct TippingSpec {
  enum class Family { linear, power, saturating };
  Family family = Family::linear;
  double beta = 1.0;
  double alpha = 1.0;  // power exponent
  double gamma = 1.0;  // saturation rate

  static TippingSpec linear(double beta) { return {Family::linear, beta}; }
  static TippingSpec power(double beta, double alpha) {
    return {Family::power, beta, alpha};
  }
  static TippingSpec saturating(double beta, double gamma) {
    return {Family::saturating, beta, 1.0, gamma};
  }

  void validate() const;
  /// Supremum of attainable tips (infinite for unbounded families).
  double supremum() const;
  /// Range cap used by the reduction when the caller gives none: half the
  /// supremum for bounded families, 1 otherwise.
  double default_range_cap() const;
  std::string family_name() const;
};

std::string to_string(TippingSpec::Family family);

/// f(v, r, c). The provided families depend on v only; r and c are part of
/// the signature so that price-aware families fit the same interface.
double tip_value(const TippingSpec& spec, double v, std::span<const double> r,
                 std::span<const double> c);

/// Returns v with |f(v) - t| <= 1e-9 * max(1, t). Closed form for linear and
/// power; bracketed bisection for saturating.
double invert_tip(const TippingSpec& spec, double t, std::span<const double> r,
                  std::span<const double> c);

struct FvReport {
  bool zero_at_zero = false;
  bool positive = false;
  bool strictly_increasing = false;
  bool round_trip = false;
  double max_round_trip_error = 0.0;

  bool all_pass() const {
    return zero_at_zero && positive && strictly_increasing && round_trip;
  }
};

using TipFunction = std::function<double(double)>;

/// Axiom check for an arbitrary function/inverse pair on an ascending grid
/// starting at 0. Round-trip error is relative: |inv(f(v)) - v| / max(1, v).
FvReport check_fv_axioms(const TipFunction& f, const TipFunction& inverse,
                         std::span<const double> grid,
                         double tolerance = 1e-9);

FvReport check_fv_axioms(const TippingSpec& spec, std::span<const double> grid,
                         std::span<const double> r, std::span<const double> c);

struct RmTransaction {
  double value = 0.0;
  std::vector<double> consumption;
};

struct RMInstance {
  std::size_t dims = 1;
  std::vector<double> prices;
  std::vector<double> bounds;
  TippingSpec tipping;
  std::vector<RmTransaction> transactions;

  void validate() const;
};

/// Knapsack whose item values are the tips f(v_j, r, c^j).
KnapsackInstance rm_to_knapsack(const RMInstance& inst);
KnapsackSolution solve_rm(const RMInstance& inst, const SolverChoice& solver);

struct Reduction {
  RMInstance instance;
  double scale = 0.0;  // C = M / max_j v_j
};

/// Builds an RM instance whose tips are C times the knapsack values, so the
/// two problems share feasible region and optimal subset.
Reduction reduce_mdk_to_rm(const KnapsackInstance& mdk, const TippingSpec& spec,
                           std::span<const double> prices, double range_cap);

}  // namespace tfm
