#include "tfm/cli.h"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "tfm/config.h"

namespace tfm {

namespace {

namespace fs = std::filesystem;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool force = false;
  std::size_t workers = 1;
};

// A property the command checks did not hold.
class PropertyFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutputDir {
 public:
  OutputDir(fs::path dir, bool force) : dir_(std::move(dir)) {
    if (fs::exists(dir_) && !fs::is_directory(dir_)) {
      throw ConfigError("output path " + dir_.string() + " is not a directory");
    }
    if (fs::exists(dir_) && !fs::is_empty(dir_) && !force) {
      throw ConfigError("output directory " + dir_.string() +
                        " is not empty; pass --force to overwrite");
    }
    fs::create_directories(dir_);
    fs::remove(dir_ / kIncomplete);
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  std::ofstream open(const std::string& name) const {
    std::ofstream f(path(name), std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path(name).string());
    return f;
  }

  void write_json(const std::string& name, const nlohmann::ordered_json& j) const {
    open(name) << j.dump(2) << "\n";
  }

  void mark_incomplete(const std::string& why) const {
    std::ofstream f(path(kIncomplete));
    f << why << "\n";
  }

 private:
  static constexpr const char* kIncomplete = "INCOMPLETE";
  fs::path dir_;
};

struct Context {
  Flags flags;
  RunConfig config;
  std::ostream& out;
  std::ostream& err;

  template <typename T>
  const T& need(const std::optional<T>& section, const char* name) const {
    if (!section) throw ConfigError(std::string("config has no [") + name + "] table");
    return *section;
  }

  fs::path out_dir() const {
    if (!flags.out_dir.empty()) return flags.out_dir;
    return config.out_dir.value_or("out");
  }
};

std::string join(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? " " : "") + format_real(xs[i]);
  return s;
}

// Runs `body` with the output directory; failures after the directory exists
// leave an INCOMPLETE marker next to whatever was written.
template <typename Body>
void with_output(const Context& ctx, Body body) {
  OutputDir dir(ctx.out_dir(), ctx.flags.force);
  try {
    body(dir);
  } catch (const PropertyFailure&) {
    throw;
  } catch (const std::exception& e) {
    dir.mark_incomplete(e.what());
    throw;
  }
}

void cmd_validate(const Context& ctx) {
  ctx.out << "valid: " << ctx.flags.config << "\n";
}

void cmd_stable(const Context& ctx) {
  const auto& mech = ctx.need(ctx.config.mechanism, "mechanism");
  const auto& demand = ctx.need(ctx.config.demand, "demand");
  const BaseFeeState fees = find_stable_prices(demand, mech);
  ctx.out << "mechanism: " << mechanism_name(mech) << "\n";
  ctx.out << "stable prices: " << join(fees.fees) << "\n";
}

ScenarioConfig scenario_from(const Context& ctx) {
  const auto& shock = ctx.need(ctx.config.shock, "shock");
  ScenarioConfig cfg;
  cfg.mechanism = ctx.need(ctx.config.mechanism, "mechanism");
  cfg.demand_before = ctx.need(ctx.config.demand, "demand");
  cfg.demand_after = cfg.demand_before;
  cfg.demand_after.amplitude = shock.amplitude_after;
  cfg.shock_block = shock.shock_block;
  cfg.horizon = shock.horizon;
  cfg.stability_tol = shock.tol;
  cfg.stability_window = shock.window;
  cfg.seed = ctx.config.seed;
  cfg.solver = ctx.config.solver;
  cfg.validate();
  return cfg;
}

void write_z_samples(std::ostream& os, const std::string& chain, const ShockSamples& s) {
  for (std::size_t r = 0; r < s.runs.size(); ++r) {
    const auto& run = s.runs[r];
    os << chain << "," << r << "," << run.seed << ",";
    if (run.result.overall) os << *run.result.overall;
    for (const auto& z : run.result.per_price) {
      os << ",";
      if (z) os << *z;
    }
    os << "\n";
  }
}

void cmd_shock(const Context& ctx) {
  const auto& shock = ctx.config.shock.value();
  const ScenarioConfig multi = scenario_from(ctx);
  ScenarioConfig base = single_resource_baseline(multi);
  base.seed = mix_seed(multi.seed, 0xBA5E);
  with_output(ctx, [&](const OutputDir& dir) {
    const ShockReport report = shock_report(multi, base, shock.runs, ctx.flags.workers,
                                            shock.bootstrap, shock.c_values);
    {
      auto f = dir.open("z_samples.csv");
      f << "chain,run,seed,z";
      for (std::size_t i = 0; i < report.m; ++i) f << ",z_" << i;
      f << "\n";
      write_z_samples(f, "baseline", report.baseline);
      write_z_samples(f, "multi", report.multi);
    }
    ScenarioConfig run0 = multi;
    run0.seed = report.multi.runs.front().seed;
    const ChainTrace first = run_scenario(run0);
    {
      auto f = dir.open("trace_run0.csv");
      write_trace_csv(first, f);
    }
    dir.write_json("summary_run0.json",
                   to_json(summarize_trace(first, measure_stabilization(
                                                      first, run0.shock_block,
                                                      run0.stability_tol,
                                                      run0.stability_window))));
    dir.write_json("shock_report.json", to_json(report));

    ctx.out << "m=" << report.m << " ratio=" << format_real(report.ratio) << " ci=["
            << format_real(report.ci.lo) << ", " << format_real(report.ci.hi)
            << "] delta=" << format_real(report.delta) << "\n";
    for (const auto& c : report.checks) {
      ctx.out << "  c=" << format_real(c.c) << " p=" << format_real(c.p)
              << " bound=" << format_real(c.bound) << (c.vacuous ? " (vacuous)" : "")
              << " " << (c.holds ? "holds" : "VIOLATED") << "\n";
    }
    if (!report.all_hold()) throw PropertyFailure("ratio lower bound violated");
  });
}

void cmd_welfare(const Context& ctx) {
  const auto& settings = ctx.need(ctx.config.welfare, "welfare");
  const auto& one = std::get<OneDimMechanism>(ctx.config.mechanism.value());
  WelfareConfig base;
  base.bounds = one.bounds;
  base.gas = one.gas;
  base.demand = ctx.config.demand.value();
  base.proportional_share = settings.proportional_share;
  base.proportional_size_lo = settings.proportional_size_lo;
  base.proportional_size_hi = settings.proportional_size_hi;
  base.seed = ctx.config.seed;
  with_output(ctx, [&](const OutputDir& dir) {
    const auto runs = welfare_sweep(base, settings.seeds, ctx.flags.workers);
    const WelfareVerdict v = welfare_verdict(runs);
    {
      auto f = dir.open("welfare.csv");
      f << "index,seed,accepted,welfare_one_dim,welfare_multi_dim,shared,extends,mempool,"
           "rejection\n";
      for (std::size_t k = 0; k < runs.size(); ++k) {
        const auto& o = runs[k].outcome;
        f << k << "," << runs[k].seed << "," << (o.accepted ? 1 : 0) << ","
          << format_real(o.welfare_one_dim) << "," << format_real(o.welfare_multi_dim)
          << "," << o.shared << "," << (o.multi_extends_shared ? 1 : 0) << ","
          << o.mempool << "," << std::quoted(o.rejection, '"', '"') << "\n";
      }
    }
    nlohmann::ordered_json j;
    j["runs"] = v.runs;
    j["accepted"] = v.accepted;
    j["extended"] = v.extended;
    j["violations"] = v.violations;
    j["verdict"] = v.pass() ? "PASS" : "FAIL";
    dir.write_json("welfare_verdict.json", j);
    ctx.out << "welfare dominance: " << (v.pass() ? "PASS" : "FAIL") << " (" << v.accepted
            << "/" << v.runs << " accepted, " << v.extended << " strictly extended, "
            << v.violations << " violations)\n";
    if (!v.pass()) throw PropertyFailure("welfare dominance failed");
  });
}

// Reads back an emitted curve and checks exact = 1 at m = 1 and that the
// exact column never decreases.
bool curve_file_ok(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  double prev = 0;
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string m_text, exact_text;
    std::getline(row, m_text, ',');
    std::getline(row, exact_text, ',');
    const double exact = std::stod(exact_text);
    if (rows == 0 && exact != 1.0) return false;
    if (exact < prev) return false;
    prev = exact;
    ++rows;
  }
  return rows > 0;
}

void cmd_ratio(const Context& ctx) {
  RatioSettings settings = ctx.config.ratio.value_or(RatioSettings{});
  settings.curve.seed = ctx.config.seed;
  with_output(ctx, [&](const OutputDir& dir) {
    const auto files = emit_ratio_curve(settings.distributions, settings.curve, dir.path(""));
    bool all_ok = true;
    for (const auto& f : files) {
      if (f.extension() != ".csv") continue;
      const bool ok = curve_file_ok(f);
      all_ok = all_ok && ok;
      ctx.out << f.filename().string() << ": " << (ok ? "monotone" : "NOT MONOTONE") << "\n";
    }
    ctx.out << files.size() << " files written\n";
    if (!all_ok) throw PropertyFailure("ratio curve not monotone");
  });
}

void write_cells(std::ostream& det, std::ostream& timing, const std::vector<RevenueCell>& cells,
                 const std::string& table) {
  for (const auto& c : cells) {
    det << table << "," << c.n << "," << c.m << "," << c.solver << ","
        << (c.exhausted ? "budget exhausted" : "ok") << ",";
    if (!c.exhausted) det << format_real(c.value);
    det << ",";
    if (!c.exhausted && c.solver == "exact") det << c.nodes;
    det << ",";
    if (c.quality) det << format_real(*c.quality);
    det << "\n";
    timing << table << "," << c.n << "," << c.m << "," << c.solver << "," << c.nodes << ","
           << std::setprecision(6) << c.seconds << "\n";
  }
}

void cmd_revenue(const Context& ctx) {
  RevenueOptions opts = ctx.config.revenue.value_or(RevenueOptions{});
  opts.seed = ctx.config.seed;
  with_output(ctx, [&](const OutputDir& dir) {
    const RevenueBenchmark bench = run_revenue_benchmark(opts);
    auto det = dir.open("revenue_matrix.csv");
    auto timing = dir.open("revenue_timing.csv");
    det << "table,n,m,solver,status,value,nodes,quality\n";
    timing << "table,n,m,solver,nodes,seconds\n";
    write_cells(det, timing, bench.matrix, "matrix");
    write_cells(det, timing, bench.dp_scaling, "dp_scaling");

    ctx.out << std::left << std::setw(6) << "n" << std::setw(4) << "m" << std::setw(10)
            << "solver" << std::setw(18) << "status" << std::setw(14) << "nodes"
            << "seconds\n";
    for (const auto* cells : {&bench.matrix, &bench.dp_scaling}) {
      for (const auto& c : *cells) {
        ctx.out << std::setw(6) << c.n << std::setw(4) << c.m << std::setw(10) << c.solver
                << std::setw(18) << (c.exhausted ? "budget exhausted" : "ok")
                << std::setw(14) << (c.solver == "exact" ? std::to_string(c.nodes) : "-")
                << std::setprecision(4) << c.seconds << "\n";
      }
    }
  });
}

void cmd_reduce(const Context& ctx) {
  ReduceOptions opts = ctx.config.reduce.value_or(ReduceOptions{});
  opts.seed = ctx.config.seed;
  with_output(ctx, [&](const OutputDir& dir) {
    const auto cases = run_reduce_check(opts);
    auto f = dir.open("reduce.csv");
    f << "index,n,m,family,equivalent,scale_invariant\n";
    std::size_t passed = 0;
    std::vector<char> instance_ok(opts.instances, 1);
    for (const auto& c : cases) {
      f << c.index << "," << c.n << "," << c.m << "," << c.family << ","
        << (c.equivalent ? 1 : 0) << "," << (c.scale_invariant ? 1 : 0) << "\n";
      if (c.equivalent && c.scale_invariant) {
        ++passed;
      } else {
        instance_ok[c.index] = 0;
      }
    }
    const auto instances_passed =
        static_cast<std::size_t>(std::count(instance_ok.begin(), instance_ok.end(), 1));
    const bool ok = passed == cases.size();
    ctx.out << "reduction equivalence: " << instances_passed << "/" << opts.instances
            << " instances, " << passed << "/" << cases.size() << " instance-family pairs "
            << (ok ? "PASS" : "FAIL") << "\n";
    if (!ok) throw PropertyFailure("reduction equivalence failed");
  });
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Transaction fee mechanism laboratory"};
  app.require_subcommand(1);
  Flags flags;
  app.add_option("--config", flags.config, "TOML configuration file");
  app.add_option("--seed", flags.seed, "master seed, overrides the config");
  app.add_option("--out-dir", flags.out_dir, "output directory");
  app.add_flag("--force", flags.force, "allow writing into a nonempty output directory");
  app.add_option("--workers", flags.workers, "worker threads")->check(CLI::PositiveNumber);

  using Command = void (*)(const Context&);
  const std::vector<std::tuple<const char*, const char*, Command, bool>> commands{
      {"validate", "check a configuration", cmd_validate, true},
      {"stable", "print stable prices", cmd_stable, true},
      {"shock", "demand shock stabilization experiment", cmd_shock, true},
      {"welfare", "welfare comparison over seeded mempools", cmd_welfare, true},
      {"ratio", "expectation ratio curves", cmd_ratio, false},
      {"revenue", "block building solver benchmark", cmd_revenue, false},
      {"reduce", "knapsack to revenue maximization reduction check", cmd_reduce, false},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help, fn, needs_config] : commands) {
    subs.push_back(app.add_subcommand(name, help)->fallthrough());
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  for (std::size_t k = 0; k < commands.size(); ++k) {
    if (!subs[k]->parsed()) continue;
    const auto& [name, help, fn, needs_config] = commands[k];
    try {
      RunConfig config;
      if (!flags.config.empty()) {
        config = load_config(flags.config);
      } else if (needs_config) {
        throw ConfigError(std::string(name) + " needs --config");
      }
      if (flags.seed) config.seed = *flags.seed;
      config.validate();
      fn(Context{flags, config, out, err});
      return kExitOk;
    } catch (const ConfigError& e) {
      err << "error: " << e.what() << "\n";
      return kExitValidation;
    } catch (const PropertyFailure& e) {
      err << "property failed: " << e.what() << "\n";
      return kExitPropertyFailed;
    } catch (const PreconditionError& e) {
      err << "error: " << e.what() << "\n";
      return kExitValidation;
    } catch (const std::exception& e) {
      err << "runtime failure: " << e.what() << "\n";
      return kExitRuntime;
    }
  }
  return kExitValidation;
}

}  // namespace tfm
