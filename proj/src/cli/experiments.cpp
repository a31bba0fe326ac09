#include "tfm/experiments.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace tfm {

namespace {

// Runs job(k) for k < n on up to `workers` threads; results land by index.
template <typename Job>
void fan_out(std::size_t n, std::size_t workers, Job job) {
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      try {
        job(k);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_threads; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

DemandModel first_resource(const DemandModel& d) {
  DemandModel out = d;
  out.amplitude = {d.amplitude.at(0)};
  out.elasticity = {d.elasticity.at(0)};
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

bool ShockReport::all_hold() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const RatioBoundCheck& c) { return c.holds; });
}

ScenarioConfig single_resource_baseline(const ScenarioConfig& multi) {
  ScenarioConfig base = multi;
  const double cap = real_bounds(multi.mechanism).caps.at(0);
  auto bounds = ResourceBounds::from_caps({cap});
  base.mechanism = OneDimMechanism{GasConfig::make({1.0}, cap), bounds};
  base.demand_before = first_resource(multi.demand_before);
  base.demand_after = first_resource(multi.demand_after);
  return base;
}

ShockReport shock_report(const ScenarioConfig& multi,
                         const ScenarioConfig& baseline, std::size_t runs,
                         std::size_t workers, std::size_t n_boot,
                         std::span<const double> c_values) {
  ShockReport r;
  r.m = real_bounds(multi.mechanism).dims();
  r.baseline = shock_experiment(baseline, runs, workers, n_boot);
  r.multi = shock_experiment(multi, runs, workers, n_boot);
  if (r.baseline.overall.empty() || r.multi.overall.empty()) {
    throw std::runtime_error("no stabilized runs to compare");
  }
  const auto& z = r.baseline.overall;
  r.ratio = mean_of(r.multi.overall) / mean_of(z);
  r.ci = bootstrap_ratio_ci(r.multi.overall, z, n_boot,
                            mix_seed(multi.seed, 0xC1));
  for (const auto& zi : r.multi.per_price) {
    r.delta = std::max(r.delta, estimate_stat_distance(z, zi));
  }
  for (double c : c_values) {
    RatioBoundCheck check;
    check.c = c;
    check.p = tail_probability(z, c);
    check.vacuous = !(check.p > r.delta && check.p + r.delta < 1.0);
    check.bound = check.vacuous ? 0.0
                                : theoretical_ratio_lower_bound(c, check.p, r.delta,
                                                                static_cast<int>(r.m));
    check.holds = r.ci.lo >= check.bound;
    r.checks.push_back(check);
  }
  return r;
}

nlohmann::ordered_json to_json(const ShockReport& r) {
  nlohmann::ordered_json j;
  j["m"] = r.m;
  j["runs"] = r.multi.runs.size();
  j["unstabilized_baseline"] = r.baseline.unstabilized;
  j["unstabilized_multi"] = r.multi.unstabilized;
  j["mean_z"] = mean_of(r.baseline.overall);
  j["mean_z_m"] = mean_of(r.multi.overall);
  j["mean_z_i"] = r.multi.mean_per_price;
  j["ratio"] = r.ratio;
  j["ci"] = {r.ci.lo, r.ci.hi};
  j["delta"] = r.delta;
  auto checks = nlohmann::ordered_json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"c", c.c},
                      {"p", c.p},
                      {"bound", c.bound},
                      {"vacuous", c.vacuous},
                      {"holds", c.holds}});
  }
  j["bound_checks"] = checks;
  j["verdict"] = r.all_hold() ? "PASS" : "FAIL";
  return j;
}

std::vector<WelfareRun> welfare_sweep(const WelfareConfig& base,
                                      std::size_t n_seeds, std::size_t workers) {
  std::vector<WelfareRun> out(n_seeds);
  fan_out(n_seeds, workers, [&](std::size_t k) {
    WelfareConfig cfg = base;
    cfg.seed = mix_seed(base.seed, k);
    out[k] = {cfg.seed, welfare_experiment(cfg)};
  });
  return out;
}

WelfareVerdict welfare_verdict(const std::vector<WelfareRun>& runs) {
  WelfareVerdict v;
  v.runs = runs.size();
  for (const auto& run : runs) {
    const auto& o = run.outcome;
    if (!o.accepted) continue;
    ++v.accepted;
    if (o.multi_extends_shared) ++v.extended;
    const bool ok = o.multi_extends_shared
                        ? o.welfare_multi_dim > o.welfare_one_dim
                        : o.welfare_multi_dim >= o.welfare_one_dim;
    if (!ok) ++v.violations;
  }
  return v;
}

KnapsackInstance revenue_instance(std::size_t n, std::size_t m,
                                  std::uint64_t seed,
                                  const RevenueOptions& opts) {
  Rng rng(seed);
  std::uniform_int_distribution<int> weight(opts.weight_lo, opts.weight_hi);
  std::uniform_int_distribution<int> value(opts.value_lo, opts.value_hi);
  KnapsackInstance inst{m, {}, {}};
  std::vector<double> sums(m, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    KnapsackItem item{static_cast<double>(value(rng)), {}};
    for (std::size_t d = 0; d < m; ++d) {
      item.consumption.push_back(weight(rng));
      sums[d] += item.consumption.back();
    }
    inst.items.push_back(std::move(item));
  }
  for (double s : sums) {
    inst.capacities.push_back(std::min(std::floor(s / 2.0), opts.capacity_limit));
  }
  return inst;
}

namespace {

RevenueCell time_solver(const KnapsackInstance& inst, const SolverChoice& choice,
                        std::size_t n, std::size_t m) {
  RevenueCell cell;
  cell.n = n;
  cell.m = m;
  cell.solver = solver_name(choice.kind);
  const auto start = std::chrono::steady_clock::now();
  try {
    const KnapsackSolution s = solve(inst, choice);
    cell.value = s.total_value;
    cell.nodes = s.nodes;
  } catch (const BudgetExhausted& e) {
    cell.exhausted = true;
    cell.nodes = e.nodes();
  }
  cell.seconds = seconds_since(start);
  return cell;
}

}  // namespace

RevenueBenchmark run_revenue_benchmark(const RevenueOptions& opts) {
  RevenueBenchmark out;
  SolverChoice exact = SolverChoice::exact();
  exact.bnb.node_budget = opts.node_budget;
  exact.bnb.time_budget =
      std::chrono::duration_cast<std::chrono::steady_clock::duration>(opts.time_budget);

  for (std::size_t n : opts.n_values) {
    for (std::size_t m : opts.m_values) {
      const auto inst = revenue_instance(n, m, mix_seed(opts.seed, n * 1000 + m), opts);
      std::vector<RevenueCell> cells;
      cells.push_back(time_solver(inst, exact, n, m));
      cells.push_back(time_solver(inst, SolverChoice::greedy(), n, m));
      if (m == 1) {
        cells.push_back(time_solver(inst, SolverChoice::dp(1.0), n, m));
        cells.push_back(time_solver(inst, SolverChoice::fptas(opts.fptas_epsilon), n, m));
      }
      const RevenueCell& ref = cells.front();
      for (auto& c : cells) {
        if (!ref.exhausted && !c.exhausted && ref.value > 0) {
          c.quality = c.value / ref.value;
        }
        out.matrix.push_back(c);
      }
    }
  }
  for (std::size_t n : opts.dp_n_values) {
    const auto inst = revenue_instance(n, 1, mix_seed(opts.seed, n * 1000 + 1), opts);
    out.dp_scaling.push_back(time_solver(inst, SolverChoice::dp(1.0), n, 1));
  }
  return out;
}

std::vector<ReduceCase> run_reduce_check(const ReduceOptions& opts) {
  if (opts.max_n < 1 || opts.max_m < 1) {
    throw PreconditionError("reduction check needs max_n and max_m of at least 1");
  }
  if (opts.max_n > 25) {
    throw PreconditionError("reduction check compares against brute force; max_n is at most 25");
  }
  std::vector<ReduceCase> out;
  Rng rng(opts.seed);
  std::uniform_int_distribution<std::size_t> n_dist(1, opts.max_n);
  std::uniform_int_distribution<std::size_t> m_dist(1, opts.max_m);
  std::uniform_int_distribution<int> value(0, 20);
  std::uniform_int_distribution<int> weight(0, 10);
  for (std::size_t k = 0; k < opts.instances; ++k) {
    const std::size_t n = n_dist(rng);
    const std::size_t m = m_dist(rng);
    KnapsackInstance mdk{m, {}, {}};
    std::vector<double> sums(m, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      KnapsackItem item{static_cast<double>(value(rng)), {}};
      for (std::size_t d = 0; d < m; ++d) {
        item.consumption.push_back(weight(rng));
        sums[d] += item.consumption.back();
      }
      mdk.items.push_back(std::move(item));
    }
    mdk.items.front().value += 1;
    for (double s : sums) mdk.capacities.push_back(std::max(1.0, std::floor(s / 3.0)));

    const auto source = solve_bruteforce(mdk).chosen;
    const std::vector<double> prices(m, 1.0);
    for (const auto& spec : opts.families) {
      ReduceCase c{k, n, m, spec.family_name(), false, true};
      const auto red = reduce_mdk_to_rm(mdk, spec, prices, spec.default_range_cap());
      c.equivalent = solve_rm(red.instance, SolverChoice::exact()).chosen == source;
      for (double scale : opts.scales) {
        KnapsackInstance scaled = mdk;
        for (auto& item : scaled.items) item.value *= scale;
        const auto r = reduce_mdk_to_rm(scaled, spec, prices, spec.default_range_cap());
        c.scale_invariant = c.scale_invariant &&
                            solve_bruteforce(scaled).chosen == source &&
                            solve_rm(r.instance, SolverChoice::exact()).chosen == source;
      }
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace tfm
