#pragma once

// Domain types and the pricing/validity rules of the one-dimensional (gas
// based) and multi-dimensional fee mechanisms, plus the synthetic-projection
// and adaptive-weight variants.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace tfm {

/// Lowest base fee any update rule may produce (currency per unit).
inline constexpr double kFeeFloor = 1e-9;

/// Relative slack used when comparing accumulated consumption with a cap.
/// Block totals are floating sums; a total within this factor of its cap is
/// treated as equal to it.
inline constexpr double kCapacitySlack = 1e-12;

/// Adaptive weight epochs default to roughly one day of 12 s blocks.
inline constexpr int kDefaultWeightEpoch = 7200;

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// True when `total` does not exceed `cap` beyond kCapacitySlack.
inline bool fits_within(double total, double cap) {
  return total <= cap + kCapacitySlack * (cap > 1.0 ? cap : 1.0);
}

/// Per-dimension amounts of abstract resource units. Entries are finite and
/// nonnegative.
class ResourceVector {
 public:
  ResourceVector() = default;
  explicit ResourceVector(std::vector<double> entries);
  ResourceVector(std::initializer_list<double> entries);
  static ResourceVector zeros(std::size_t m) {
    return ResourceVector(std::vector<double>(m, 0.0));
  }

  std::size_t size() const { return entries_.size(); }
  double operator[](std::size_t i) const { return entries_[i]; }
  std::span<const double> values() const { return entries_; }
  const std::vector<double>& entries() const { return entries_; }

  bool operator==(const ResourceVector&) const = default;

 private:
  std::vector<double> entries_;
};

struct Transaction {
  std::uint64_t id = 0;
  double value = 0.0;
  double bid = 0.0;
  ResourceVector consumption;
};

/// Per-resource caps G_i and targets T_i (T_i = G_i / 2 by default).
struct ResourceBounds {
  std::vector<double> caps;
  std::vector<double> targets;

  static ResourceBounds from_caps(std::vector<double> caps);
  std::size_t dims() const { return caps.size(); }
  void validate() const;
};

/// Gas weights w_i together with the gas cap G and target T.
struct GasConfig {
  std::vector<double> weights;
  double gas_cap = 0.0;
  double gas_target = 0.0;

  static GasConfig make(std::vector<double> weights, double gas_cap);
  /// Uses the largest cap allowed by the bounds: min_i w_i * G_i.
  static GasConfig max_safe(std::vector<double> weights,
                            const ResourceBounds& bounds);
  std::size_t dims() const { return weights.size(); }
  void validate() const;
};

struct BaseFeeState {
  std::vector<double> fees;

  std::size_t size() const { return fees.size(); }
  double operator[](std::size_t i) const { return fees[i]; }
  bool operator==(const BaseFeeState&) const = default;
};

struct Block {
  std::vector<std::uint64_t> tx_ids;
  ResourceVector consumption_total;
  double gas_total = 0.0;
  double tip_total = 0.0;
  double burn_total = 0.0;
  double value_total = 0.0;
};

/// k x m nonnegative matrix mapping real consumption onto k synthetic
/// gas-like dimensions, each with its own cap and target.
struct SyntheticProjection {
  std::vector<std::vector<double>> matrix;
  std::vector<double> synthetic_caps;
  std::vector<double> synthetic_targets;

  static SyntheticProjection make(std::vector<std::vector<double>> matrix,
                                  std::vector<double> synthetic_caps);
  std::size_t synthetic_dims() const { return matrix.size(); }
  std::size_t real_dims() const {
    return matrix.empty() ? 0 : matrix.front().size();
  }
  ResourceBounds synthetic_bounds() const {
    return {synthetic_caps, synthetic_targets};
  }
  void validate() const;
  /// Sufficient condition for per-resource safety: every real resource i is
  /// covered by a row s with matrix[s][i] > 0 and cap_s <= matrix[s][i] * G_i.
  /// Returns the index of the first uncovered resource, or -1 when safe.
  int first_unsafe_resource(const ResourceBounds& bounds) const;
  bool is_safe(const ResourceBounds& bounds) const {
    return first_unsafe_resource(bounds) < 0;
  }
};

// Mechanism regimes -------------------------------------------------------

struct OneDimMechanism {
  GasConfig gas;
  ResourceBounds bounds;
};

struct MultiDimMechanism {
  ResourceBounds bounds;
};

struct SyntheticMechanism {
  SyntheticProjection projection;
  ResourceBounds bounds;
};

/// One-dimensional pricing whose weights drift toward under-used resources.
struct AdaptiveMechanism {
  GasConfig gas;
  ResourceBounds bounds;
  double eta = 0.01;
  double clip = 1.1;
  int epoch = kDefaultWeightEpoch;
  double ema_alpha = 0.01;
};

using Mechanism = std::variant<OneDimMechanism, MultiDimMechanism,
                               SyntheticMechanism, AdaptiveMechanism>;

std::string mechanism_name(const Mechanism& mech);
const ResourceBounds& real_bounds(const Mechanism& mech);
/// Number of prices the mechanism maintains.
std::size_t price_dims(const Mechanism& mech);
/// Throws PreconditionError naming the violated constraint.
void validate_mechanism(const Mechanism& mech);

/// Base-fee cost of one unit of each real resource under `fees`. For the gas
/// mechanisms this is r * w_i, for the multi-dimensional one r_i, for the
/// synthetic one sum_s r_s * matrix[s][i]. `active_gas` overrides the
/// configured weights of the gas mechanisms (adaptive weights drift).
std::vector<double> unit_prices(const Mechanism& mech, const BaseFeeState& fees,
                                const GasConfig* active_gas = nullptr);

// Operations --------------------------------------------------------------

double gas_of(const Transaction& tx, const GasConfig& cfg);
double tip_1d(const Transaction& tx, const BaseFeeState& fee,
              const GasConfig& cfg);
double tip_md(const Transaction& tx, const BaseFeeState& fees);

/// EIP-1559 style update: r * (1 + (g - T) / (8 T)), floored at kFeeFloor.
double update_base_fee_1d(double r_pred, double g_pred, double target);

/// Coordinate-wise application of the same rule against bounds.targets.
BaseFeeState update_base_fee_md(const BaseFeeState& fees,
                                const ResourceVector& consumption,
                                const ResourceBounds& bounds);

/// Recomputes every cached total of a block from its member transactions.
/// `unit_price` gives the per-unit base-fee cost of each resource (see
/// unit_prices); `weights` may be empty when the mechanism has no gas.
Block assemble_block(std::vector<std::uint64_t> ids,
                     std::span<const Transaction> txs,
                     std::span<const double> unit_price,
                     std::span<const double> weights);

bool validate_block_1d(const Block& block, const GasConfig& cfg,
                       const BaseFeeState& fee,
                       std::span<const Transaction> txs);
bool validate_block_md(const Block& block, const ResourceBounds& bounds,
                       const BaseFeeState& fees,
                       std::span<const Transaction> txs);
bool validate_block_synthetic(const Block& block, const SyntheticProjection& p,
                              const ResourceBounds& bounds,
                              const BaseFeeState& fees,
                              std::span<const Transaction> txs);

bool check_safety_gas_cap(const GasConfig& cfg, const ResourceBounds& bounds);

/// Largest total of resource k a gas-capped block can hold when the cap is
/// min_i w_i G_i: min_i(w_i G_i) / w_k. `k` is zero based.
double max_consumption(const GasConfig& cfg, const ResourceBounds& bounds,
                       std::size_t k);

ResourceVector project_synthetic(const SyntheticProjection& p,
                                 const ResourceVector& c);

/// Multiplicative nudge w_i *= 1 + eta * (u_i - 1), each factor clamped to
/// [1/clip, clip]. The gas cap is scaled down if the new weights would
/// violate the per-resource safety condition.
GasConfig update_weights_adaptive(const GasConfig& cfg,
                                  const ResourceBounds& bounds,
                                  std::span<const double> utilization_ema,
                                  double eta, double clip);

}  // namespace tfm
