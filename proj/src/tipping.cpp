#include "tfm/tipping.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tfm/mechanism.h"

namespace tfm {
namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

double saturating_bisection(const TippingSpec& spec, double t) {
  auto f = [&](double v) { return spec.beta * v / (1.0 + spec.gamma * v); };
  double lo = 0.0;
  double hi = 1.0;
  // Monotone continuity guarantees a bracket once t is attainable.
  for (int doublings = 0; f(hi) < t; ++doublings) {
    if (doublings > 1000) throw PreconditionError("tip not attainable");
    lo = hi;
    hi *= 2.0;
  }
  for (int iter = 0; iter < 4000; ++iter) {
    const double mid = lo + (hi - lo) / 2.0;
    if (mid <= lo || mid >= hi) break;
    if (f(mid) < t) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(f(lo) - t) <= std::abs(f(hi) - t) ? lo : hi;
}

}  // namespace

std::string to_string(TippingSpec::Family family) {
  switch (family) {
    case TippingSpec::Family::linear:
      return "linear";
    case TippingSpec::Family::power:
      return "power";
    case TippingSpec::Family::saturating:
      return "saturating";
  }
  return "unknown";
}

std::string TippingSpec::family_name() const { return to_string(family); }

void TippingSpec::validate() const {
  if (!positive_finite(beta)) throw PreconditionError("tipping beta must be positive");
  if (family == Family::power && !positive_finite(alpha)) {
    throw PreconditionError("tipping alpha must be positive");
  }
  if (family == Family::saturating && !positive_finite(gamma)) {
    throw PreconditionError("tipping gamma must be positive");
  }
}

double TippingSpec::supremum() const {
  return family == Family::saturating ? beta / gamma
                                      : std::numeric_limits<double>::infinity();
}

double TippingSpec::default_range_cap() const {
  return family == Family::saturating ? supremum() / 2.0 : 1.0;
}

double tip_value(const TippingSpec& spec, double v, std::span<const double>,
                 std::span<const double>) {
  spec.validate();
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw PreconditionError("transaction value must be nonnegative");
  }
  switch (spec.family) {
    case TippingSpec::Family::linear:
      return spec.beta * v;
    case TippingSpec::Family::power:
      return spec.beta * std::pow(v, spec.alpha);
    case TippingSpec::Family::saturating:
      return spec.beta * v / (1.0 + spec.gamma * v);
  }
  return 0.0;
}

double invert_tip(const TippingSpec& spec, double t, std::span<const double>,
                  std::span<const double>) {
  spec.validate();
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw PreconditionError("tip must be nonnegative");
  }
  if (t >= spec.supremum()) {
    throw PreconditionError("tip outside the attainable range of " +
                            spec.family_name() + " tipping");
  }
  if (t == 0.0) return 0.0;
  switch (spec.family) {
    case TippingSpec::Family::linear:
      return t / spec.beta;
    case TippingSpec::Family::power:
      return std::pow(t / spec.beta, 1.0 / spec.alpha);
    case TippingSpec::Family::saturating:
      return saturating_bisection(spec, t);
  }
  return 0.0;
}

FvReport check_fv_axioms(const TipFunction& f, const TipFunction& inverse,
                         std::span<const double> grid, double tolerance) {
  FvReport report;
  if (grid.empty() || grid.front() != 0.0) return report;
  report.zero_at_zero = f(0.0) == 0.0;
  report.positive = true;
  report.strictly_increasing = true;
  double prev = f(grid.front());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double cur = f(grid[i]);
    report.positive = report.positive && cur > 0.0;
    report.strictly_increasing = report.strictly_increasing && cur > prev;
    prev = cur;
  }
  for (double v : grid) {
    const double back = inverse(f(v));
    report.max_round_trip_error = std::max(
        report.max_round_trip_error, std::abs(back - v) / std::max(1.0, v));
  }
  report.round_trip = report.max_round_trip_error <= tolerance;
  return report;
}

FvReport check_fv_axioms(const TippingSpec& spec, std::span<const double> grid,
                         std::span<const double> r, std::span<const double> c) {
  return check_fv_axioms(
      [&](double v) { return tip_value(spec, v, r, c); },
      [&](double t) { return invert_tip(spec, t, r, c); }, grid);
}

void RMInstance::validate() const {
  tipping.validate();
  if (prices.size() != dims || bounds.size() != dims) {
    throw DimensionMismatch("RM prices and bounds must have length m");
  }
  for (const auto& tx : transactions) {
    if (tx.consumption.size() != dims) {
      throw DimensionMismatch("RM transaction consumption must have length m");
    }
    if (!(tx.value >= 0.0)) {
      throw PreconditionError("RM transaction values must be nonnegative");
    }
  }
}

KnapsackInstance rm_to_knapsack(const RMInstance& inst) {
  inst.validate();
  KnapsackInstance k;
  k.dims = inst.dims;
  k.capacities = inst.bounds;
  k.items.reserve(inst.transactions.size());
  for (const auto& tx : inst.transactions) {
    k.items.push_back(
        {tip_value(inst.tipping, tx.value, inst.prices, tx.consumption),
         tx.consumption});
  }
  return k;
}

KnapsackSolution solve_rm(const RMInstance& inst, const SolverChoice& solver) {
  return solve(rm_to_knapsack(inst), solver);
}

Reduction reduce_mdk_to_rm(const KnapsackInstance& mdk, const TippingSpec& spec,
                           std::span<const double> prices, double range_cap) {
  mdk.validate();
  spec.validate();
  if (prices.size() != mdk.dims) {
    throw DimensionMismatch("reduction prices must have length m");
  }
  double vmax = 0.0;
  for (const auto& item : mdk.items) vmax = std::max(vmax, item.value);
  if (!(vmax > 0.0)) {
    throw PreconditionError("reduction needs at least one positive value");
  }
  if (!positive_finite(range_cap) || range_cap >= spec.supremum()) {
    throw PreconditionError("range cap outside the attainable tip range");
  }
  Reduction out;
  out.scale = range_cap / vmax;
  RMInstance& rm = out.instance;
  rm.dims = mdk.dims;
  rm.prices.assign(prices.begin(), prices.end());
  rm.bounds = mdk.capacities;
  rm.tipping = spec;
  rm.transactions.reserve(mdk.items.size());
  for (const auto& item : mdk.items) {
    const double target = std::min(out.scale * item.value, range_cap);
    rm.transactions.push_back(
        {invert_tip(spec, target, prices, item.consumption), item.consumption});
  }
  return out;
}

}  // namespace tfm
