#include "tfm/block_builder.h"

#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace tfm {
namespace {

// Eligible transactions (tip >= 0) in ascending id order.
std::vector<const Transaction*> eligible(
    std::span<const Transaction> mempool,
    const std::function<double(const Transaction&)>& tip) {
  std::vector<const Transaction*> out;
  for (const auto& tx : mempool) {
    if (tip(tx) >= 0.0) out.push_back(&tx);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Transaction* a, const Transaction* b) {
                     return a->id < b->id;
                   });
  return out;
}

std::vector<std::uint64_t> pick(
    const std::vector<const Transaction*>& pool,
    const std::vector<double>& capacities,
    const std::function<double(const Transaction&)>& tip,
    const std::function<std::vector<double>(const Transaction&)>& load,
    const SolverChoice& solver) {
  KnapsackInstance inst;
  inst.dims = capacities.size();
  inst.capacities = capacities;
  inst.items.reserve(pool.size());
  for (const Transaction* tx : pool) {
    inst.items.push_back({std::max(0.0, tip(*tx)), load(*tx)});
  }
  const KnapsackSolution sol = solve(inst, solver);
  std::vector<std::uint64_t> ids;
  ids.reserve(sol.chosen.size());
  for (std::size_t j : sol.chosen) ids.push_back(pool[j]->id);
  return ids;
}

void ensure_valid(bool ok, const char* which) {
  if (!ok) {
    throw std::logic_error(std::string(which) +
                           " block builder produced an invalid block");
  }
}

}  // namespace

Block build_block_1d(std::span<const Transaction> mempool,
                     const BaseFeeState& fee, const GasConfig& cfg,
                     const SolverChoice& solver) {
  if (fee.size() != 1) {
    throw DimensionMismatch("one-dimensional block needs a single base fee");
  }
  auto tip = [&](const Transaction& tx) { return tip_1d(tx, fee, cfg); };
  const auto pool = eligible(mempool, tip);
  auto ids = pick(
      pool, {cfg.gas_cap}, tip,
      [&](const Transaction& tx) { return std::vector<double>{gas_of(tx, cfg)}; },
      solver);
  std::vector<double> prices;
  for (double w : cfg.weights) prices.push_back(fee[0] * w);
  Block block = assemble_block(std::move(ids), mempool, prices, cfg.weights);
  ensure_valid(validate_block_1d(block, cfg, fee, mempool), "one-dimensional");
  return block;
}

Block build_block_md(std::span<const Transaction> mempool,
                     const BaseFeeState& fees, const ResourceBounds& bounds,
                     const SolverChoice& solver) {
  if (fees.size() != bounds.dims()) {
    throw DimensionMismatch("multi-dimensional block fee count mismatch");
  }
  auto tip = [&](const Transaction& tx) { return tip_md(tx, fees); };
  const auto pool = eligible(mempool, tip);
  auto ids = pick(
      pool, bounds.caps, tip,
      [](const Transaction& tx) { return tx.consumption.entries(); }, solver);
  Block block = assemble_block(std::move(ids), mempool, fees.fees, {});
  ensure_valid(validate_block_md(block, bounds, fees, mempool),
               "multi-dimensional");
  return block;
}

Block build_block_synthetic(std::span<const Transaction> mempool,
                            const BaseFeeState& fees,
                            const SyntheticProjection& projection,
                            const ResourceBounds& bounds,
                            const SolverChoice& solver) {
  if (fees.size() != projection.synthetic_dims()) {
    throw DimensionMismatch("synthetic block fee count mismatch");
  }
  auto tip = [&](const Transaction& tx) {
    return tip_md(Transaction{tx.id, tx.value, tx.bid,
                              project_synthetic(projection, tx.consumption)},
                  fees);
  };
  const auto pool = eligible(mempool, tip);
  auto ids = pick(
      pool, projection.synthetic_caps, tip,
      [&](const Transaction& tx) {
        return project_synthetic(projection, tx.consumption).entries();
      },
      solver);
  const Mechanism mech = SyntheticMechanism{projection, bounds};
  Block block =
      assemble_block(std::move(ids), mempool, unit_prices(mech, fees), {});
  ensure_valid(
      validate_block_synthetic(block, projection, bounds, fees, mempool),
      "synthetic");
  return block;
}

Block build_block(const Mechanism& mech, std::span<const Transaction> mempool,
                  const BaseFeeState& fees, const SolverChoice& solver,
                  const GasConfig* active_gas) {
  if (const auto* md = std::get_if<MultiDimMechanism>(&mech)) {
    return build_block_md(mempool, fees, md->bounds, solver);
  }
  if (const auto* syn = std::get_if<SyntheticMechanism>(&mech)) {
    return build_block_synthetic(mempool, fees, syn->projection, syn->bounds,
                                 solver);
  }
  const GasConfig& gas = active_gas ? *active_gas
                         : std::holds_alternative<OneDimMechanism>(mech)
                             ? std::get<OneDimMechanism>(mech).gas
                             : std::get<AdaptiveMechanism>(mech).gas;
  return build_block_1d(mempool, fees, gas, solver);
}

bool validate_block(const Mechanism& mech, const Block& block,
                    const BaseFeeState& fees, std::span<const Transaction> txs,
                    const GasConfig* active_gas) {
  if (const auto* md = std::get_if<MultiDimMechanism>(&mech)) {
    return validate_block_md(block, md->bounds, fees, txs);
  }
  if (const auto* syn = std::get_if<SyntheticMechanism>(&mech)) {
    return validate_block_synthetic(block, syn->projection, syn->bounds, fees,
                                    txs);
  }
  const GasConfig& gas = active_gas ? *active_gas
                         : std::holds_alternative<OneDimMechanism>(mech)
                             ? std::get<OneDimMechanism>(mech).gas
                             : std::get<AdaptiveMechanism>(mech).gas;
  return validate_block_1d(block, gas, fees, txs);
}

}  // namespace tfm
