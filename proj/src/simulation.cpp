#include "tfm/simulation.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "tfm/block_builder.h"

namespace tfm {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw PreconditionError(what);
}

const GasConfig* gas_of_mechanism(const Mechanism& mech) {
  if (const auto* one = std::get_if<OneDimMechanism>(&mech)) return &one->gas;
  if (const auto* ad = std::get_if<AdaptiveMechanism>(&mech)) return &ad->gas;
  return nullptr;
}

double lognormal_noise(double sigma, Rng& rng) {
  if (sigma == 0.0) return 1.0;
  std::normal_distribution<double> normal(0.0, 1.0);
  return std::exp(sigma * normal(rng) - 0.5 * sigma * sigma);
}

// Appends single-resource transactions for `resource` until the eligible
// ones sum exactly to `eligible_total`.
void append_resource_demand(const DemandModel& model, std::size_t resource,
                            std::size_t dims, double unit_price,
                            double eligible_total, Rng& rng,
                            std::uint64_t& next_id,
                            std::vector<Transaction>& out) {
  std::uniform_real_distribution<double> size_dist(model.size_lo, model.size_hi);
  std::uniform_real_distribution<double> margin_dist(model.margin_lo,
                                                     model.margin_hi);
  double covered = 0.0;
  while (covered < eligible_total) {
    double size = size_dist(rng);
    const double margin = margin_dist(rng);
    if (margin >= 1.0) {
      size = std::min(size, eligible_total - covered);
      covered += size;
    }
    std::vector<double> c(dims, 0.0);
    c[resource] = size;
    const double value = margin * unit_price * size;
    out.push_back({next_id++, value, value, ResourceVector(std::move(c))});
  }
}

double relative_change(double before, double after) {
  return std::abs(after - before) / before;
}

std::string fmt(double x) { return format_real(x); }

Interval percentile_interval(std::vector<double> stats, double level) {
  if (stats.empty()) return {};
  std::sort(stats.begin(), stats.end());
  const double tail = (1.0 - level) / 2.0;
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(stats.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, stats.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return stats[lo] * (1.0 - frac) + stats[hi] * frac;
  };
  return {at(tail), at(1.0 - tail)};
}

}  // namespace

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void DemandModel::validate() const {
  require(!amplitude.empty(), "demand model needs at least one resource");
  require(elasticity.size() == amplitude.size(),
          "demand amplitude and elasticity lengths differ");
  for (std::size_t i = 0; i < amplitude.size(); ++i) {
    require(std::isfinite(amplitude[i]) && amplitude[i] > 0.0,
            "demand amplitude must be positive");
    require(std::isfinite(elasticity[i]) && elasticity[i] > 0.0,
            "demand elasticity must be positive");
  }
  require(sigma >= 0.0 && std::isfinite(sigma), "demand sigma must be >= 0");
  require(size_lo > 0.0 && size_hi >= size_lo,
          "transaction sizes need 0 < size_lo <= size_hi");
  require(margin_lo >= 0.0 && margin_hi > 1.0 && margin_hi >= margin_lo,
          "value margins need 0 <= margin_lo <= margin_hi and margin_hi > 1");
}

double DemandModel::demand(std::size_t i, double unit_price) const {
  return amplitude[i] * std::pow(unit_price, -elasticity[i]);
}

std::vector<Transaction> generate_mempool(const DemandModel& model,
                                          std::span<const double> unit_price,
                                          std::span<const double> caps,
                                          Rng& rng, std::uint64_t& next_id) {
  model.validate();
  const std::size_t m = model.dims();
  if (unit_price.size() != m || caps.size() != m) {
    throw DimensionMismatch("mempool prices/caps do not match demand model");
  }
  std::vector<Transaction> out;
  for (std::size_t i = 0; i < m; ++i) {
    require(unit_price[i] > 0.0, "unit prices must be positive");
    const double noise = lognormal_noise(model.sigma, rng);
    const double eligible = std::min(model.demand(i, unit_price[i]) * noise,
                                     kDemandTruncation * caps[i]);
    append_resource_demand(model, i, m, unit_price[i], eligible, rng, next_id,
                           out);
  }
  return out;
}

std::vector<Transaction> generate_mempool(const DemandModel& model,
                                          const Mechanism& mech,
                                          const BaseFeeState& fees, Rng& rng,
                                          std::uint64_t& next_id,
                                          const GasConfig* active_gas) {
  const std::vector<double> prices = unit_prices(mech, fees, active_gas);
  return generate_mempool(model, prices, real_bounds(mech).caps, rng, next_id);
}

ChainState initial_state(const Mechanism& mech, BaseFeeState fees) {
  ChainState state;
  state.fees = std::move(fees);
  if (const GasConfig* gas = gas_of_mechanism(mech)) state.gas = *gas;
  state.utilization_ema.assign(real_bounds(mech).dims(), 1.0);
  return state;
}

StepResult step_chain(const ChainState& state,
                      std::span<const Transaction> mempool,
                      const Mechanism& mech, const SolverChoice& solver) {
  const bool gas_based = gas_of_mechanism(mech) != nullptr;
  const GasConfig* active = gas_based ? &state.gas : nullptr;
  Block block = build_block(mech, mempool, state.fees, solver, active);

  const ResourceBounds& bounds = real_bounds(mech);
  for (std::size_t i = 0; i < bounds.dims(); ++i) {
    if (!fits_within(block.consumption_total[i], bounds.caps[i])) {
      throw std::logic_error("block exceeds the cap of resource " +
                             std::to_string(i));
    }
  }

  StepResult out{state, {}, {}};
  ChainState& next = out.state;
  if (gas_based) {
    next.fees.fees = {update_base_fee_1d(state.fees[0], block.gas_total,
                                         state.gas.gas_target)};
  } else if (const auto* syn = std::get_if<SyntheticMechanism>(&mech)) {
    next.fees = update_base_fee_md(
        state.fees, project_synthetic(syn->projection, block.consumption_total),
        syn->projection.synthetic_bounds());
  } else {
    next.fees = update_base_fee_md(state.fees, block.consumption_total, bounds);
  }

  if (const auto* ad = std::get_if<AdaptiveMechanism>(&mech)) {
    for (std::size_t i = 0; i < bounds.dims(); ++i) {
      const double u = block.consumption_total[i] / bounds.targets[i];
      next.utilization_ema[i] =
          ad->ema_alpha * u + (1.0 - ad->ema_alpha) * state.utilization_ema[i];
    }
    if ((state.block + 1) % static_cast<std::uint64_t>(ad->epoch) == 0) {
      next.gas = update_weights_adaptive(state.gas, bounds,
                                         next.utilization_ema, ad->eta, ad->clip);
    }
  }
  next.block = state.block + 1;

  TraceRecord& rec = out.record;
  rec.block = state.block;
  rec.fees = state.fees;
  rec.next_fees = next.fees;
  rec.consumption = block.consumption_total;
  rec.gas = block.gas_total;
  rec.welfare = block.value_total;
  rec.tips = block.tip_total;
  rec.burn = block.burn_total;
  rec.mempool = mempool.size();
  out.block = std::move(block);
  return out;
}

BaseFeeState find_stable_prices(const DemandModel& model, const Mechanism& mech) {
  model.validate();
  const ResourceBounds& bounds = real_bounds(mech);
  if (model.dims() != bounds.dims()) {
    throw DimensionMismatch("demand model does not match mechanism dimensions");
  }
  const std::size_t m = model.dims();

  if (std::holds_alternative<MultiDimMechanism>(mech)) {
    BaseFeeState fees;
    for (std::size_t i = 0; i < m; ++i) {
      fees.fees.push_back(std::max(
          kFeeFloor, std::pow(model.amplitude[i] / bounds.targets[i],
                              1.0 / model.elasticity[i])));
    }
    return fees;
  }

  if (const GasConfig* gas = gas_of_mechanism(mech)) {
    auto excess = [&](double r) {
      double g = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        g += gas->weights[i] * model.demand(i, r * gas->weights[i]);
      }
      return g - gas->gas_target;
    };
    double lo = 1.0;
    double hi = 1.0;
    for (int k = 0; excess(lo) <= 0.0; ++k) {
      if (k > 2000) throw SolverError("no stable gas price in bracket");
      lo /= 2.0;
    }
    for (int k = 0; excess(hi) > 0.0; ++k) {
      if (k > 2000) throw SolverError("no stable gas price in bracket");
      hi *= 2.0;
    }
    for (int iter = 0; iter < 400; ++iter) {
      const double mid = std::sqrt(lo * hi);
      if (!(mid > lo && mid < hi)) break;
      (excess(mid) > 0.0 ? lo : hi) = mid;
    }
    return BaseFeeState{{std::max(kFeeFloor, std::sqrt(lo * hi))}};
  }

  const auto& syn = std::get<SyntheticMechanism>(mech);
  const auto sb = syn.projection.synthetic_bounds();
  BaseFeeState fees{std::vector<double>(sb.dims(), 1.0)};
  for (int iter = 0; iter < 1'000'000; ++iter) {
    const std::vector<double> prices = unit_prices(mech, fees);
    bool settled = true;
    for (std::size_t s = 0; s < sb.dims(); ++s) {
      double y = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        y += syn.projection.matrix[s][i] * model.demand(i, prices[i]);
      }
      settled = settled && std::abs(y - sb.targets[s]) <= 1e-11 * sb.targets[s];
      y = std::min(y, sb.caps[s]);
      fees.fees[s] = std::max(
          kFeeFloor, fees.fees[s] * (1.0 + (y - sb.targets[s]) / (8.0 * sb.targets[s])));
    }
    if (settled) return fees;
  }
  throw SolverError("synthetic stable prices did not converge");
}

void ScenarioConfig::validate() const {
  validate_mechanism(mechanism);
  demand_before.validate();
  demand_after.validate();
  const std::size_t m = real_bounds(mechanism).dims();
  require(demand_before.dims() == m && demand_after.dims() == m,
          "demand models must match the mechanism's resource count");
  require(horizon > shock_block, "horizon must exceed the shock block");
  require(shock_block >= stability_window,
          "shock block must be at least the stability window");
  require(stability_window >= 1, "stability window must be positive");
  require(stability_tol > 0.0, "stability tolerance must be positive");
}

ChainTrace run_scenario(const ScenarioConfig& config) {
  config.validate();
  Rng rng(config.seed);
  ChainState state = initial_state(
      config.mechanism, find_stable_prices(config.demand_before, config.mechanism));
  const bool gas_based = gas_of_mechanism(config.mechanism) != nullptr;
  ChainTrace trace;
  trace.mechanism = mechanism_name(config.mechanism);
  trace.records.reserve(config.horizon);
  for (std::size_t t = 0; t < config.horizon; ++t) {
    const DemandModel& model =
        t < config.shock_block ? config.demand_before : config.demand_after;
    const auto mempool =
        generate_mempool(model, config.mechanism, state.fees, rng,
                         state.next_tx_id, gas_based ? &state.gas : nullptr);
    StepResult step = step_chain(state, mempool, config.mechanism, config.solver);
    trace.records.push_back(std::move(step.record));
    state = std::move(step.state);
  }
  return trace;
}

StabilizationResult measure_stabilization(const ChainTrace& trace,
                                          std::size_t shock_block, double tol,
                                          std::size_t window) {
  StabilizationResult out;
  if (trace.records.empty()) return out;
  const std::size_t k = trace.records.front().fees.size();
  out.per_price.assign(k, std::nullopt);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t run = 0;
    for (std::size_t t = shock_block; t < trace.records.size(); ++t) {
      const auto& rec = trace.records[t];
      if (relative_change(rec.fees[i], rec.next_fees[i]) <= tol) {
        if (++run == window) {
          out.per_price[i] = t + 1 - window - shock_block;
          break;
        }
      } else {
        run = 0;
      }
    }
  }
  std::size_t worst = 0;
  for (const auto& z : out.per_price) {
    if (!z) return out;
    worst = std::max(worst, *z);
  }
  out.overall = worst;
  return out;
}

ShockSamples shock_experiment(const ScenarioConfig& config, std::size_t n_runs,
                              std::size_t workers, std::size_t n_bootstrap) {
  require(n_runs >= 1, "shock experiment needs at least one run");
  config.validate();
  ShockSamples out;
  out.runs.resize(n_runs);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t r = next++; r < n_runs; r = next++) {
      try {
        ScenarioConfig run = config;
        run.seed = mix_seed(config.seed, r);
        const ChainTrace trace = run_scenario(run);
        out.runs[r] = {run.seed,
                       measure_stabilization(trace, run.shock_block,
                                             run.stability_tol,
                                             run.stability_window)};
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(workers, 1, n_runs);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_threads; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  const std::size_t k = out.runs.front().result.per_price.size();
  out.per_price.assign(k, {});
  for (const auto& run : out.runs) {
    if (!run.result.stabilized()) {
      ++out.unstabilized;
      continue;
    }
    out.overall.push_back(static_cast<double>(*run.result.overall));
    for (std::size_t i = 0; i < k; ++i) {
      out.per_price[i].push_back(static_cast<double>(*run.result.per_price[i]));
    }
  }
  if (!out.overall.empty()) {
    out.mean_overall = mean_of(out.overall);
    out.ci_overall = bootstrap_mean_ci(out.overall, n_bootstrap,
                                       mix_seed(config.seed, 0xB007));
    for (const auto& zs : out.per_price) out.mean_per_price.push_back(mean_of(zs));
  }
  return out;
}

namespace {

WelfareOutcome reject(WelfareOutcome out, std::string why) {
  out.accepted = false;
  out.rejection = std::move(why);
  return out;
}

}  // namespace

WelfareOutcome welfare_experiment(const WelfareConfig& config) {
  config.bounds.validate();
  config.gas.validate();
  config.demand.validate();
  const std::size_t m = config.bounds.dims();
  if (config.demand.dims() != m || config.gas.dims() != m) {
    throw DimensionMismatch("welfare experiment dimensions differ");
  }
  require(config.proportional_share >= 0.0 && config.proportional_share <= 1.0,
          "proportional share must lie in [0, 1]");
  require(config.proportional_size_lo > 0.0 &&
              config.proportional_size_hi >= config.proportional_size_lo,
          "proportional sizes need 0 < lo <= hi");

  const BaseFeeState prices =
      find_stable_prices(config.demand, MultiDimMechanism{config.bounds});
  Rng rng(config.seed);
  std::uint64_t next_id = 0;
  std::vector<Transaction> mempool;

  // Transactions shaped like the target vector, eligible ones covering
  // `proportional_share` of every target.
  std::uniform_real_distribution<double> scale_dist(config.proportional_size_lo,
                                                    config.proportional_size_hi);
  std::uniform_real_distribution<double> margin_dist(config.demand.margin_lo,
                                                     config.demand.margin_hi);
  double covered = 0.0;
  while (covered < config.proportional_share) {
    double scale = scale_dist(rng);
    const double margin = margin_dist(rng);
    if (margin >= 1.0) {
      scale = std::min(scale, config.proportional_share - covered);
      covered += scale;
    }
    std::vector<double> c(m);
    double cost = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      c[i] = scale * config.bounds.targets[i];
      cost += prices[i] * c[i];
    }
    const double value = margin * cost;
    mempool.push_back({next_id++, value, value, ResourceVector(std::move(c))});
  }
  // Single-resource transactions covering the rest of each target.
  for (std::size_t i = 0; i < m; ++i) {
    const double rest = (1.0 - config.proportional_share) * config.bounds.targets[i];
    append_resource_demand(config.demand, i, m, prices[i], rest, rng, next_id,
                           mempool);
  }
  return welfare_from_mempool(config.bounds, config.gas, prices, mempool);
}

WelfareOutcome welfare_from_mempool(const ResourceBounds& bounds,
                                    const GasConfig& gas,
                                    const BaseFeeState& prices_md,
                                    std::span<const Transaction> mempool) {
  WelfareOutcome out;
  out.mempool = mempool.size();
  out.prices_multi_dim = prices_md;
  if (!check_safety_gas_cap(gas, bounds)) {
    return reject(out, "gas cap violates the per-resource safety condition");
  }
  for (const auto& tx : mempool) {
    if (tx.bid != tx.value) return reject(out, "bids are not truthful");
  }

  out.block_multi_dim =
      build_block_md(mempool, prices_md, bounds, SolverChoice::exact());
  out.welfare_multi_dim = out.block_multi_dim.value_total;
  const std::size_t m = bounds.dims();
  for (std::size_t i = 0; i < m; ++i) {
    const double got = out.block_multi_dim.consumption_total[i];
    if (std::abs(got - bounds.targets[i]) > 1e-9 * bounds.targets[i]) {
      return reject(out,
                    "multi-dimensional stability unsustainable: resource " +
                        std::to_string(i) + " consumption differs from target");
    }
  }
  {
    std::vector<std::uint64_t> ids = out.block_multi_dim.tx_ids;
    std::sort(ids.begin(), ids.end());
    for (const auto& tx : mempool) {
      if (tip_md(tx, prices_md) > 0.0 &&
          !std::binary_search(ids.begin(), ids.end(), tx.id)) {
        return reject(out, "multi-dimensional block omits an eligible transaction");
      }
    }
  }

  // One-dimensional stable price: the lowest price whose eligible set fills
  // at most the gas target. Eligible sets are prefixes in value-per-gas order.
  struct Ratio {
    double ratio;
    double gas;
    std::uint64_t id;
  };
  std::vector<Ratio> order;
  for (const auto& tx : mempool) {
    const double g = gas_of(tx, gas);
    if (g > 0.0) order.push_back({tx.value / g, g, tx.id});
  }
  std::sort(order.begin(), order.end(), [](const Ratio& a, const Ratio& b) {
    return a.ratio != b.ratio ? a.ratio > b.ratio : a.id < b.id;
  });
  double filled = 0.0;
  std::size_t prefix = 0;
  while (prefix < order.size() &&
         fits_within(filled + order[prefix].gas, gas.gas_target)) {
    filled += order[prefix].gas;
    ++prefix;
  }
  if (prefix == 0) {
    return reject(out, "one-dimensional stable price undefined: no transaction "
                       "fits the gas target");
  }
  const double last = order[prefix - 1].ratio;
  double r1 = last * (1.0 - 1e-6);
  if (prefix < order.size()) {
    const double following = order[prefix].ratio;
    if (!(following < last)) {
      return reject(out, "one-dimensional stable price ambiguous (tied ratios)");
    }
    r1 = 0.5 * (last + following);
  }
  out.prices_one_dim = BaseFeeState{{r1}};
  out.block_one_dim =
      build_block_1d(mempool, out.prices_one_dim, gas, SolverChoice::exact());
  out.welfare_one_dim = out.block_one_dim.value_total;
  if (!fits_within(out.block_one_dim.gas_total, gas.gas_target)) {
    return reject(out, "one-dimensional block exceeds the gas target");
  }

  std::vector<std::uint64_t> a = out.block_one_dim.tx_ids;
  std::vector<std::uint64_t> b = out.block_multi_dim.tx_ids;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<std::uint64_t> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(common));
  out.shared = common.size();
  out.multi_extends_shared = b.size() > common.size();
  out.accepted = true;
  return out;
}

double estimate_stat_distance(std::span<const double> a,
                              std::span<const double> b) {
  require(!a.empty() && !b.empty(), "statistical distance needs samples");
  std::map<double, std::pair<double, double>> mass;
  const double wa = 1.0 / static_cast<double>(a.size());
  const double wb = 1.0 / static_cast<double>(b.size());
  for (double x : a) mass[x].first += wa;
  for (double x : b) mass[x].second += wb;
  double l1 = 0.0;
  for (const auto& [x, p] : mass) l1 += std::abs(p.first - p.second);
  return std::min(1.0, 0.5 * l1);
}

double mean_of(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) /
         static_cast<double>(xs.size());
}

double pearson_correlation(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size() && a.size() >= 2,
          "correlation needs paired samples");
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

Interval bootstrap_mean_ci(std::span<const double> xs, std::size_t n_boot,
                           std::uint64_t seed, double level) {
  require(!xs.empty(), "bootstrap needs samples");
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, xs.size() - 1);
  std::vector<double> stats;
  stats.reserve(n_boot);
  for (std::size_t b = 0; b < n_boot; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) s += xs[pick(rng)];
    stats.push_back(s / static_cast<double>(xs.size()));
  }
  return percentile_interval(std::move(stats), level);
}

Interval bootstrap_ratio_ci(std::span<const double> num,
                            std::span<const double> den, std::size_t n_boot,
                            std::uint64_t seed, double level) {
  require(!num.empty() && !den.empty(), "bootstrap needs samples");
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick_num(0, num.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_den(0, den.size() - 1);
  std::vector<double> stats;
  stats.reserve(n_boot);
  for (std::size_t b = 0; b < n_boot; ++b) {
    double sn = 0.0, sd = 0.0;
    for (std::size_t i = 0; i < num.size(); ++i) sn += num[pick_num(rng)];
    for (std::size_t i = 0; i < den.size(); ++i) sd += den[pick_den(rng)];
    if (sd <= 0.0) continue;
    stats.push_back((sn / static_cast<double>(num.size())) /
                    (sd / static_cast<double>(den.size())));
  }
  return percentile_interval(std::move(stats), level);
}

void write_trace_csv(const ChainTrace& trace, std::ostream& out) {
  const std::size_t k =
      trace.records.empty() ? 0 : trace.records.front().fees.size();
  const std::size_t m =
      trace.records.empty() ? 0 : trace.records.front().consumption.size();
  out << "block";
  for (std::size_t i = 0; i < k; ++i) out << ",fee_" << i;
  for (std::size_t i = 0; i < m; ++i) out << ",cons_" << i;
  out << ",gas,welfare,tips,burn,mempool\n";
  for (const auto& rec : trace.records) {
    out << rec.block;
    for (double f : rec.fees.fees) out << ',' << fmt(f);
    for (double c : rec.consumption.entries()) out << ',' << fmt(c);
    out << ',' << fmt(rec.gas) << ',' << fmt(rec.welfare) << ',' << fmt(rec.tips)
        << ',' << fmt(rec.burn) << ',' << rec.mempool << '\n';
  }
}

}  // namespace tfm
