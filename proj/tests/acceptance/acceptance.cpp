// One pass/fail line per acceptance criterion. `--criterion N` runs one of
// them; without it all nine run. Exit status is nonzero if any ran and failed.

#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "support/generators.h"
#include "tfm/config.h"
#include "tfm/experiments.h"

using namespace tfm;
using tfm::testing::random_integer_instance;
using tfm::testing::random_real_instance;
using tfm::testing::uniform;
using tfm::testing::uniform_int;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// ---- 1: base-fee dynamics -------------------------------------------------

Outcome base_fee_dynamics() {
  bool exact = true;
  for (double t : {1.0, 0.3, 1e-3, 15e6}) {
    exact = exact && update_base_fee_1d(100, 2 * t, t) == 112.5 &&
            update_base_fee_1d(100, 0, t) == 87.5;
  }
  Rng rng(101);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = 1 + static_cast<std::size_t>(trial % 6);
    std::vector<double> caps, fees, cons;
    for (std::size_t i = 0; i < m; ++i) {
      caps.push_back(uniform(rng, 1, 1000));
      fees.push_back(uniform(rng, 1e-3, 100));
      cons.push_back(uniform(rng, 0, caps.back()));
    }
    auto bounds = ResourceBounds::from_caps(caps);
    const auto next = update_base_fee_md({fees}, ResourceVector(cons), bounds);
    for (std::size_t i = 0; i < m; ++i) {
      if (next.fees[i] != update_base_fee_1d(fees[i], cons[i], bounds.targets[i])) {
        ++mismatches;
      }
    }
  }
  return {exact && mismatches == 0,
          std::string("112.5/87.5 ") + (exact ? "exact" : "MISMATCH") +
              ", coordinate mismatches " + std::to_string(mismatches) + " over 1000 states"};
}

// ---- 2: welfare dominance -------------------------------------------------

Outcome welfare_dominance() {
  WelfareConfig two;
  two.bounds = ResourceBounds::from_caps({100, 80});
  two.gas = GasConfig::max_safe({1, 1.25}, two.bounds);
  two.demand.amplitude = {50, 40};
  two.demand.elasticity = {1.0, 1.3};
  two.demand.size_lo = 2;
  two.demand.size_hi = 6;
  two.seed = 2;

  WelfareConfig three;
  three.bounds = ResourceBounds::from_caps({100, 60, 80});
  three.gas = GasConfig::max_safe({1, 2, 1.5}, three.bounds);
  three.demand.amplitude = {50, 50, 50};
  three.demand.elasticity = {1.0, 1.5, 0.8};
  three.demand.size_lo = 2;
  three.demand.size_hi = 6;
  three.seed = 3;

  auto runs = welfare_sweep(two, 50, 1);
  const auto more = welfare_sweep(three, 50, 1);
  runs.insert(runs.end(), more.begin(), more.end());
  const WelfareVerdict v = welfare_verdict(runs);
  std::size_t weak = 0;
  for (const auto& r : runs) {
    if (r.outcome.accepted && r.outcome.welfare_multi_dim >= r.outcome.welfare_one_dim) ++weak;
  }
  return {v.pass() && weak == 100,
          "W^m >= W^1 in " + std::to_string(weak) + "/100, accepted " +
              std::to_string(v.accepted) + ", strict where extended: " +
              std::to_string(v.extended - std::min(v.extended, v.violations)) + "/" +
              std::to_string(v.extended)};
}

// ---- 3: expectation-ratio bound -------------------------------------------

Outcome ratio_bound() {
  bool pass = true;
  std::ostringstream os;
  for (std::size_t m : {2, 4, 8}) {
    ScenarioConfig cfg;
    cfg.mechanism = MultiDimMechanism{ResourceBounds::from_caps(std::vector<double>(m, 100))};
    DemandModel d;
    d.amplitude.assign(m, 50);
    d.elasticity.assign(m, 1.0);
    d.sigma = 0.1;
    d.size_lo = 2;
    d.size_hi = 6;
    cfg.demand_before = d;
    d.amplitude.assign(m, 60);
    cfg.demand_after = d;
    cfg.shock_block = 10;
    cfg.horizon = 200;
    cfg.stability_tol = 0.01;
    cfg.stability_window = 3;
    cfg.solver = SolverChoice::greedy();
    cfg.seed = mix_seed(7, m);
    ScenarioConfig base = single_resource_baseline(cfg);
    base.seed = mix_seed(7, 1000 + m);
    const std::vector<double> cs{0.5, 1.0, 2.0};
    const ShockReport r = shock_report(cfg, base, 500, 1, 2000, cs);
    os << "m=" << m << " ratio " << fmt(r.ratio) << " ci_lo " << fmt(r.ci.lo) << " bounds";
    for (const auto& c : r.checks) {
      os << " " << fmt(c.bound) << (c.vacuous ? "(vacuous)" : "");
      pass = pass && c.holds;
    }
    os << "; ";
  }
  return {pass, os.str()};
}

// ---- 4: limit example -----------------------------------------------------

Outcome limit_example() {
  bool pass = true;
  std::ostringstream os;
  for (double p : {0.05, 0.2}) {
    const double b = theoretical_ratio_lower_bound(2, p, 0, 64);
    const double rel = std::abs(b - 3) / 3;
    pass = pass && rel <= 0.01;
    os << "p=" << p << " bound " << fmt(b) << " rel err " << fmt(rel) << "; ";
  }
  return {pass, os.str()};
}

// ---- 5: ratio curves --------------------------------------------------------

Outcome ratio_curves() {
  RatioCurveOptions opts;
  opts.n_samples = 100'000;
  opts.seed = 5;
  bool shape = true;
  std::size_t cells = 0, covered = 0;
  for (const auto& d : default_distributions()) {
    const RatioCurve c = compute_ratio_curve(d, opts);
    shape = shape && c.points.size() == 16 && c.points.front().exact == 1.0;
    for (std::size_t k = 0; k < c.points.size(); ++k) {
      const auto& pt = c.points[k];
      if (k > 0) shape = shape && pt.exact > c.points[k - 1].exact;
      ++cells;
      if (pt.ci.lo <= pt.exact && pt.exact <= pt.ci.hi) ++covered;
    }
  }
  const auto g = DiscreteDist::geometric(0.5);
  const double exact = exact_ratio_iid(g, 2);
  const McEstimate mc = mc_ratio_iid(g, 2, 100'000, opts.seed);
  const bool geo = std::abs(exact - 4.0 / 3.0) <= 1e-9 && mc.ci.lo <= 4.0 / 3.0 &&
                   4.0 / 3.0 <= mc.ci.hi;
  const bool coverage = static_cast<double>(covered) >= 0.93 * static_cast<double>(cells);
  return {shape && geo && coverage,
          std::string("shape ") + (shape ? "ok" : "BAD") + ", coverage " +
              std::to_string(covered) + "/" + std::to_string(cells) + ", geometric m=2 " +
              fmt(exact) + " mc ci [" + fmt(mc.ci.lo) + ", " + fmt(mc.ci.hi) + "]"};
}

// ---- 6: solver correctness --------------------------------------------------

Outcome solver_correctness() {
  Rng rng(606);
  std::size_t exact_ok = 0, dp_ok = 0, fptas_ok = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = static_cast<std::size_t>(uniform_int(rng, 1, 15));
    const auto m = static_cast<std::size_t>(uniform_int(rng, 1, 4));
    const auto inst = trial % 2 ? random_integer_instance(rng, n, m) : random_real_instance(rng, n, m);
    if (solve_mdk_exact(inst).chosen == solve_bruteforce(inst).chosen) ++exact_ok;
  }
  for (int trial = 0; trial < 1000; ++trial) {
    const auto inst = random_integer_instance(rng, static_cast<std::size_t>(uniform_int(rng, 1, 15)), 1);
    if (solve_1d_dp(inst, 1.0).chosen == solve_bruteforce(inst).chosen) ++dp_ok;
  }
  for (int trial = 0; trial < 500; ++trial) {
    auto inst = random_integer_instance(rng, static_cast<std::size_t>(uniform_int(rng, 1, 100)), 1);
    for (auto& item : inst.items) item.value = uniform(rng, 0, 50);
    const double opt = solve_1d_dp(inst, 1.0).total_value;
    if (solve_1d_fptas(inst, 0.1).total_value >= 0.9 * opt) ++fptas_ok;
  }
  return {exact_ok == 1000 && dp_ok == 1000 && fptas_ok == 500,
          "exact " + std::to_string(exact_ok) + "/1000, dp " + std::to_string(dp_ok) +
              "/1000, fptas " + std::to_string(fptas_ok) + "/500"};
}

// ---- 7: reduction -------------------------------------------------------------

Outcome reduction() {
  ReduceOptions opts;
  opts.seed = 707;
  const auto cases = run_reduce_check(opts);
  std::size_t eq = 0, inv = 0;
  for (const auto& c : cases) {
    eq += c.equivalent;
    inv += c.scale_invariant;
  }
  const std::string total = std::to_string(cases.size());
  return {eq == cases.size() && inv == cases.size() && cases.size() == 600,
          "equivalent " + std::to_string(eq) + "/" + total + ", scale invariant " +
              std::to_string(inv) + "/" + total + " (200 instances x 3 families)"};
}

// ---- 8: max consumption ------------------------------------------------------

// Packs small single-resource transactions of resource k until the next one
// would break the gas cap, then tops up with the fraction that still fits.
double greedy_pack(const GasConfig& gas, std::size_t k, double piece) {
  const std::size_t m = gas.weights.size();
  double total = 0.0, used = 0.0;
  for (;;) {
    std::vector<double> c(m, 0.0);
    c[k] = piece;
    const double g = gas_of(Transaction{0, 0, 0, ResourceVector(c)}, gas);
    if (used + g > gas.gas_cap) break;
    used += g;
    total += piece;
  }
  return total + (gas.gas_cap - used) / gas.weights[k];
}

Outcome max_consumption_check() {
  Rng rng(808);
  double worst = 0.0;
  bool safe = true;
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = static_cast<std::size_t>(uniform_int(rng, 1, 6));
    std::vector<double> w, caps;
    for (std::size_t i = 0; i < m; ++i) {
      w.push_back(uniform(rng, 0.1, 10));
      caps.push_back(uniform(rng, 1, 1000));
    }
    const auto bounds = ResourceBounds::from_caps(caps);
    const auto gas = GasConfig::max_safe(w, bounds);
    for (std::size_t k = 0; k < m; ++k) {
      const double oracle = greedy_pack(gas, k, caps[k] / 997.0);
      const double got = max_consumption(gas, bounds, k);
      worst = std::max(worst, std::abs(got - oracle) / oracle);
      safe = safe && oracle <= caps[k] * (1 + 1e-12);
    }
  }
  return {worst <= 1e-9 && safe,
          "max relative error " + fmt(worst) + (safe ? "" : ", oracle exceeded a cap")};
}

// ---- 9: hardness illustration ------------------------------------------------

Outcome hardness() {
  const RunConfig cfg = load_config(TFM_SOURCE_DIR "/configs/revenue.toml");
  RevenueOptions opts = cfg.revenue.value();
  opts.seed = cfg.seed;
  const RevenueBenchmark bench = run_revenue_benchmark(opts);

  std::printf("  %6s %3s %18s %12s\n", "n", "m", "status", "nodes");
  bool growth = true;
  for (std::size_t n : opts.n_values) {
    std::uint64_t base = 0;
    for (const auto& c : bench.matrix) {
      if (c.n != n || c.solver != "exact") continue;
      std::printf("  %6zu %3zu %18s %12llu\n", c.n, c.m,
                  c.exhausted ? "budget exhausted" : "ok",
                  static_cast<unsigned long long>(c.nodes));
      if (c.m == 1) base = c.nodes;
      // an exhausted cell counts as growth: its search was cut short
      else if (!c.exhausted && c.nodes <= base) growth = false;
    }
  }
  bool dp_fast = true;
  double slowest = 0.0;
  for (const auto& c : bench.dp_scaling) {
    std::printf("  dp n=%zu %.4fs\n", c.n, c.seconds);
    dp_fast = dp_fast && !c.exhausted && c.seconds < 1.0;
    slowest = std::max(slowest, c.seconds);
  }
  return {growth && dp_fast,
          std::string("exact nodes above the m=1 count for every m>1: ") +
              (growth ? "yes" : "NO") + ", slowest dp " + fmt(slowest) + "s"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  int only = 0;
  app.add_option("--criterion", only, "run one criterion (1-9)")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"base-fee dynamics", base_fee_dynamics},
      {"welfare dominance", welfare_dominance},
      {"expectation-ratio bound", ratio_bound},
      {"limit example", limit_example},
      {"expectation-ratio curves", ratio_curves},
      {"solver correctness", solver_correctness},
      {"reduction equivalence", reduction},
      {"max consumption under the gas cap", max_consumption_check},
      {"hardness illustration", hardness},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (only != 0 && static_cast<std::size_t>(only) != k + 1) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("criterion %zu %s: %s (%s)\n", k + 1, criteria[k].first,
                o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
