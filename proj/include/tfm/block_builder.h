#pragma once

// Allocation rules: pick the tip-maximizing feasible subset of a mempool.

#include <span>

#include "tfm/knapsack.h"
#include "tfm/mechanism.h"

namespace tfm {

Block build_block_1d(std::span<const Transaction> mempool,
                     const BaseFeeState& fee, const GasConfig& cfg,
                     const SolverChoice& solver);

Block build_block_md(std::span<const Transaction> mempool,
                     const BaseFeeState& fees, const ResourceBounds& bounds,
                     const SolverChoice& solver);

/// Synthetic variant: constraints and prices live on the projected
/// dimensions. Real resources are protected by the projection's safety
/// condition.
Block build_block_synthetic(std::span<const Transaction> mempool,
                            const BaseFeeState& fees,
                            const SyntheticProjection& projection,
                            const ResourceBounds& bounds,
                            const SolverChoice& solver);

/// Dispatches on the mechanism; `active_gas` replaces the configured gas
/// schedule of the gas-based mechanisms when given.
Block build_block(const Mechanism& mech, std::span<const Transaction> mempool,
                  const BaseFeeState& fees, const SolverChoice& solver,
                  const GasConfig* active_gas = nullptr);

bool validate_block(const Mechanism& mech, const Block& block,
                    const BaseFeeState& fees, std::span<const Transaction> txs,
                    const GasConfig* active_gas = nullptr);

}  // namespace tfm
