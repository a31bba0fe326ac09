#include "tfm/mechanism.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace tfm {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw PreconditionError(what);
}

void require_dims(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    std::ostringstream os;
    os << what << ": expected " << want << " dimensions, got " << got;
    throw DimensionMismatch(os.str());
  }
}

bool all_positive_finite(std::span<const double> xs) {
  return std::all_of(xs.begin(), xs.end(),
                     [](double x) { return std::isfinite(x) && x > 0.0; });
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

using TxIndex = std::unordered_map<std::uint64_t, const Transaction*>;

TxIndex index_by_id(std::span<const Transaction> txs) {
  TxIndex index;
  index.reserve(txs.size());
  for (const auto& tx : txs) index.emplace(tx.id, &tx);
  return index;
}

const Transaction& lookup(const TxIndex& index, std::uint64_t id) {
  auto it = index.find(id);
  if (it == index.end()) {
    throw PreconditionError("block references unknown transaction id " +
                            std::to_string(id));
  }
  return *it->second;
}

// Shared validity check: capacity per constrained coordinate and base fee
// coverage per transaction. `constrained` maps a transaction to the
// coordinates checked against `caps`; `cost` gives its base-fee cost.
template <typename Project, typename Cost>
bool validate_block_generic(const Block& block, std::span<const double> caps,
                            std::span<const Transaction> txs,
                            Project constrained, Cost cost) {
  const TxIndex index = index_by_id(txs);
  std::vector<double> totals(caps.size(), 0.0);
  for (std::uint64_t id : block.tx_ids) {
    const Transaction& tx = lookup(index, id);
    const std::vector<double> coords = constrained(tx);
    for (std::size_t i = 0; i < caps.size(); ++i) totals[i] += coords[i];
    if (tx.bid < cost(tx)) return false;
  }
  for (std::size_t i = 0; i < caps.size(); ++i) {
    if (!fits_within(totals[i], caps[i])) return false;
  }
  return true;
}

}  // namespace

ResourceVector::ResourceVector(std::vector<double> entries)
    : entries_(std::move(entries)) {
  for (double x : entries_) {
    if (!std::isfinite(x) || x < 0.0) {
      throw PreconditionError(
          "resource consumption entries must be finite and nonnegative");
    }
  }
}

ResourceVector::ResourceVector(std::initializer_list<double> entries)
    : ResourceVector(std::vector<double>(entries)) {}

ResourceBounds ResourceBounds::from_caps(std::vector<double> caps) {
  ResourceBounds b;
  b.targets.reserve(caps.size());
  for (double g : caps) b.targets.push_back(g / 2.0);
  b.caps = std::move(caps);
  b.validate();
  return b;
}

void ResourceBounds::validate() const {
  require(!caps.empty(), "resource bounds need at least one dimension");
  require_dims(targets.size(), caps.size(), "resource targets");
  require(all_positive_finite(caps), "resource caps must be positive");
  require(all_positive_finite(targets), "resource targets must be positive");
  for (std::size_t i = 0; i < caps.size(); ++i) {
    require(targets[i] <= caps[i], "resource target exceeds its cap");
  }
}

GasConfig GasConfig::make(std::vector<double> weights, double gas_cap) {
  GasConfig cfg{std::move(weights), gas_cap, gas_cap / 2.0};
  cfg.validate();
  return cfg;
}

GasConfig GasConfig::max_safe(std::vector<double> weights,
                              const ResourceBounds& bounds) {
  require_dims(weights.size(), bounds.dims(), "gas weights");
  double cap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    cap = std::min(cap, weights[i] * bounds.caps[i]);
  }
  return make(std::move(weights), cap);
}

void GasConfig::validate() const {
  require(!weights.empty(), "gas config needs at least one weight");
  require(all_positive_finite(weights), "gas weights must be positive");
  require(std::isfinite(gas_cap) && gas_cap > 0.0, "gas cap must be positive");
  require(std::isfinite(gas_target) && gas_target > 0.0 &&
              gas_target <= gas_cap,
          "gas target must be positive and at most the gas cap");
}

SyntheticProjection SyntheticProjection::make(
    std::vector<std::vector<double>> matrix,
    std::vector<double> synthetic_caps) {
  SyntheticProjection p;
  p.matrix = std::move(matrix);
  for (double c : synthetic_caps) p.synthetic_targets.push_back(c / 2.0);
  p.synthetic_caps = std::move(synthetic_caps);
  p.validate();
  return p;
}

void SyntheticProjection::validate() const {
  require(!matrix.empty(), "synthetic projection needs at least one row");
  const std::size_t m = matrix.front().size();
  require(m > 0, "synthetic projection rows must be nonempty");
  require(matrix.size() <= m,
          "synthetic projection may not have more rows than real resources");
  for (const auto& row : matrix) {
    require_dims(row.size(), m, "synthetic projection row");
    for (double x : row) {
      require(std::isfinite(x) && x >= 0.0,
              "synthetic projection entries must be nonnegative");
    }
  }
  require_dims(synthetic_caps.size(), matrix.size(), "synthetic caps");
  require_dims(synthetic_targets.size(), matrix.size(), "synthetic targets");
  require(all_positive_finite(synthetic_caps),
          "synthetic caps must be positive");
  require(all_positive_finite(synthetic_targets),
          "synthetic targets must be positive");
}

int SyntheticProjection::first_unsafe_resource(
    const ResourceBounds& bounds) const {
  require_dims(bounds.dims(), real_dims(), "synthetic projection bounds");
  for (std::size_t i = 0; i < bounds.dims(); ++i) {
    bool covered = false;
    for (std::size_t s = 0; s < matrix.size() && !covered; ++s) {
      covered = matrix[s][i] > 0.0 &&
                synthetic_caps[s] <= matrix[s][i] * bounds.caps[i];
    }
    if (!covered) return static_cast<int>(i);
  }
  return -1;
}

std::string mechanism_name(const Mechanism& mech) {
  struct Namer {
    std::string operator()(const OneDimMechanism&) const { return "one_dim"; }
    std::string operator()(const MultiDimMechanism&) const {
      return "multi_dim";
    }
    std::string operator()(const SyntheticMechanism&) const {
      return "synthetic";
    }
    std::string operator()(const AdaptiveMechanism&) const {
      return "adaptive";
    }
  };
  return std::visit(Namer{}, mech);
}

const ResourceBounds& real_bounds(const Mechanism& mech) {
  return std::visit(
      [](const auto& m) -> const ResourceBounds& { return m.bounds; }, mech);
}

std::size_t price_dims(const Mechanism& mech) {
  if (std::holds_alternative<MultiDimMechanism>(mech)) {
    return std::get<MultiDimMechanism>(mech).bounds.dims();
  }
  if (const auto* s = std::get_if<SyntheticMechanism>(&mech)) {
    return s->projection.synthetic_dims();
  }
  return 1;
}

void validate_mechanism(const Mechanism& mech) {
  const ResourceBounds& bounds = real_bounds(mech);
  bounds.validate();
  auto check_gas = [&](const GasConfig& gas) {
    gas.validate();
    require_dims(gas.dims(), bounds.dims(), "gas weights");
    for (std::size_t i = 0; i < bounds.dims(); ++i) {
      if (gas.gas_cap > gas.weights[i] * bounds.caps[i]) {
        std::ostringstream os;
        os << "gas cap " << gas.gas_cap << " exceeds w_" << i << " * G_" << i
           << " = " << gas.weights[i] * bounds.caps[i] << " for resource "
           << i;
        throw PreconditionError(os.str());
      }
    }
  };
  if (const auto* one = std::get_if<OneDimMechanism>(&mech)) {
    check_gas(one->gas);
  } else if (const auto* ad = std::get_if<AdaptiveMechanism>(&mech)) {
    check_gas(ad->gas);
    require(ad->eta > 0.0 && ad->eta <= 0.1, "adaptive eta must be in (0, 0.1]");
    require(ad->clip >= 1.0, "adaptive clip must be at least 1");
    require(ad->epoch >= 1, "adaptive epoch must be positive");
    require(ad->ema_alpha > 0.0 && ad->ema_alpha <= 1.0,
            "adaptive ema_alpha must be in (0, 1]");
  } else if (const auto* syn = std::get_if<SyntheticMechanism>(&mech)) {
    syn->projection.validate();
    const int bad = syn->projection.first_unsafe_resource(bounds);
    if (bad >= 0) {
      throw PreconditionError("synthetic projection does not bound resource " +
                              std::to_string(bad));
    }
  }
}

std::vector<double> unit_prices(const Mechanism& mech, const BaseFeeState& fees,
                                const GasConfig* active_gas) {
  const std::size_t m = real_bounds(mech).dims();
  require_dims(fees.size(), price_dims(mech), "base fees");
  std::vector<double> prices(m, 0.0);
  if (const auto* syn = std::get_if<SyntheticMechanism>(&mech)) {
    for (std::size_t s = 0; s < fees.size(); ++s) {
      for (std::size_t i = 0; i < m; ++i) {
        prices[i] += fees[s] * syn->projection.matrix[s][i];
      }
    }
  } else if (std::holds_alternative<MultiDimMechanism>(mech)) {
    prices = fees.fees;
  } else {
    const GasConfig& gas =
        active_gas ? *active_gas
        : std::holds_alternative<OneDimMechanism>(mech)
            ? std::get<OneDimMechanism>(mech).gas
            : std::get<AdaptiveMechanism>(mech).gas;
    require_dims(gas.dims(), m, "gas weights");
    for (std::size_t i = 0; i < m; ++i) prices[i] = fees[0] * gas.weights[i];
  }
  return prices;
}

double gas_of(const Transaction& tx, const GasConfig& cfg) {
  require_dims(tx.consumption.size(), cfg.dims(), "transaction consumption");
  return dot(cfg.weights, tx.consumption.values());
}

double tip_1d(const Transaction& tx, const BaseFeeState& fee,
              const GasConfig& cfg) {
  require_dims(fee.size(), 1, "one-dimensional base fee");
  return tx.bid - fee[0] * gas_of(tx, cfg);
}

double tip_md(const Transaction& tx, const BaseFeeState& fees) {
  require_dims(tx.consumption.size(), fees.size(), "transaction consumption");
  return tx.bid - dot(fees.fees, tx.consumption.values());
}

double update_base_fee_1d(double r_pred, double g_pred, double target) {
  require(std::isfinite(r_pred) && r_pred > 0.0,
          "previous base fee must be positive");
  require(std::isfinite(target) && target > 0.0, "gas target must be positive");
  require(g_pred >= 0.0 && fits_within(g_pred, 2.0 * target),
          "block consumption must lie in [0, 2T]");
  const double g = std::min(g_pred, 2.0 * target);
  const double next = r_pred * (1.0 + (g - target) / (8.0 * target));
  return std::max(kFeeFloor, next);
}

BaseFeeState update_base_fee_md(const BaseFeeState& fees,
                                const ResourceVector& consumption,
                                const ResourceBounds& bounds) {
  require_dims(fees.size(), bounds.dims(), "base fees");
  require_dims(consumption.size(), bounds.dims(), "block consumption");
  BaseFeeState next;
  next.fees.reserve(fees.size());
  for (std::size_t i = 0; i < fees.size(); ++i) {
    require(fits_within(consumption[i], bounds.caps[i]),
            "block consumption exceeds resource cap " + std::to_string(i));
    next.fees.push_back(
        update_base_fee_1d(fees[i], consumption[i], bounds.targets[i]));
  }
  return next;
}

Block assemble_block(std::vector<std::uint64_t> ids,
                     std::span<const Transaction> txs,
                     std::span<const double> unit_price,
                     std::span<const double> weights) {
  const TxIndex index = index_by_id(txs);
  const std::size_t m = unit_price.size();
  std::vector<double> totals(m, 0.0);
  Block block;
  for (std::uint64_t id : ids) {
    const Transaction& tx = lookup(index, id);
    require_dims(tx.consumption.size(), m, "transaction consumption");
    const double burn = dot(unit_price, tx.consumption.values());
    for (std::size_t i = 0; i < m; ++i) totals[i] += tx.consumption[i];
    if (!weights.empty()) block.gas_total += dot(weights, tx.consumption.values());
    block.burn_total += burn;
    block.tip_total += tx.bid - burn;
    block.value_total += tx.value;
  }
  block.consumption_total = ResourceVector(std::move(totals));
  block.tx_ids = std::move(ids);
  return block;
}

bool validate_block_1d(const Block& block, const GasConfig& cfg,
                       const BaseFeeState& fee,
                       std::span<const Transaction> txs) {
  require_dims(fee.size(), 1, "one-dimensional base fee");
  const double cap = cfg.gas_cap;
  return validate_block_generic(
      block, std::span<const double>(&cap, 1), txs,
      [&](const Transaction& tx) { return std::vector<double>{gas_of(tx, cfg)}; },
      [&](const Transaction& tx) { return fee[0] * gas_of(tx, cfg); });
}

bool validate_block_md(const Block& block, const ResourceBounds& bounds,
                       const BaseFeeState& fees,
                       std::span<const Transaction> txs) {
  require_dims(fees.size(), bounds.dims(), "base fees");
  return validate_block_generic(
      block, bounds.caps, txs,
      [&](const Transaction& tx) {
        require_dims(tx.consumption.size(), bounds.dims(),
                     "transaction consumption");
        return tx.consumption.entries();
      },
      [&](const Transaction& tx) {
        return dot(fees.fees, tx.consumption.values());
      });
}

bool validate_block_synthetic(const Block& block, const SyntheticProjection& p,
                              const ResourceBounds& bounds,
                              const BaseFeeState& fees,
                              std::span<const Transaction> txs) {
  require_dims(fees.size(), p.synthetic_dims(), "synthetic base fees");
  const bool synthetic_ok = validate_block_generic(
      block, p.synthetic_caps, txs,
      [&](const Transaction& tx) {
        return project_synthetic(p, tx.consumption).entries();
      },
      [&](const Transaction& tx) {
        return dot(fees.fees, project_synthetic(p, tx.consumption).values());
      });
  if (!synthetic_ok) return false;
  // Real resources must also stay within their caps.
  return validate_block_generic(
      block, bounds.caps, txs,
      [](const Transaction& tx) { return tx.consumption.entries(); },
      [](const Transaction&) { return 0.0; });
}

bool check_safety_gas_cap(const GasConfig& cfg, const ResourceBounds& bounds) {
  require_dims(cfg.dims(), bounds.dims(), "gas weights");
  for (std::size_t i = 0; i < cfg.dims(); ++i) {
    if (cfg.gas_cap > cfg.weights[i] * bounds.caps[i]) return false;
  }
  return true;
}

double max_consumption(const GasConfig& cfg, const ResourceBounds& bounds,
                       std::size_t k) {
  require_dims(cfg.dims(), bounds.dims(), "gas weights");
  if (k >= cfg.dims()) {
    throw std::out_of_range("resource index " + std::to_string(k) +
                            " out of range");
  }
  double tightest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cfg.dims(); ++i) {
    tightest = std::min(tightest, cfg.weights[i] * bounds.caps[i]);
  }
  return tightest / cfg.weights[k];
}

ResourceVector project_synthetic(const SyntheticProjection& p,
                                 const ResourceVector& c) {
  require_dims(c.size(), p.real_dims(), "consumption for synthetic projection");
  std::vector<double> out;
  out.reserve(p.synthetic_dims());
  for (const auto& row : p.matrix) out.push_back(dot(row, c.values()));
  return ResourceVector(std::move(out));
}

GasConfig update_weights_adaptive(const GasConfig& cfg,
                                  const ResourceBounds& bounds,
                                  std::span<const double> utilization_ema,
                                  double eta, double clip) {
  require_dims(utilization_ema.size(), cfg.dims(), "utilization averages");
  require_dims(bounds.dims(), cfg.dims(), "resource bounds");
  require(eta > 0.0 && eta <= 0.1, "eta must lie in (0, 0.1]");
  require(clip >= 1.0, "clip must be at least 1");
  GasConfig next = cfg;
  for (std::size_t i = 0; i < cfg.dims(); ++i) {
    const double u = utilization_ema[i];
    require(std::isfinite(u) && u >= 0.0, "utilization must be nonnegative");
    const double factor =
        std::clamp(1.0 + eta * (u - 1.0), 1.0 / clip, clip);
    next.weights[i] = cfg.weights[i] * factor;
    require(next.weights[i] > 0.0, "adaptive weight collapsed to zero");
  }
  double safe_cap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cfg.dims(); ++i) {
    safe_cap = std::min(safe_cap, next.weights[i] * bounds.caps[i]);
  }
  if (next.gas_cap > safe_cap) {
    const double ratio = next.gas_target / next.gas_cap;
    next.gas_cap = safe_cap;
    next.gas_target = safe_cap * ratio;
  }
  return next;
}

}  // namespace tfm
