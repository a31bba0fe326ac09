#include "tfm/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include "toml.hpp"

namespace tfm {

namespace {

// Wraps one TOML table: every accessor marks its key as used and finish()
// rejects whatever is left.
class Section {
 public:
  Section(const toml::table& table, std::string name, std::string source)
      : table_(table), name_(std::move(name)), source_(std::move(source)) {}

  [[noreturn]] void fail(const toml::node& at, const std::string& key,
                         const std::string& what) const {
    std::ostringstream os;
    os << source_ << ":" << at.source().begin.line << ": " << qualified(key)
       << ": " << what;
    throw ConfigError(os.str());
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    std::ostringstream os;
    os << source_ << ": " << qualified(key) << ": " << what;
    throw ConfigError(os.str());
  }

  const toml::node* find(const std::string& key) {
    used_.insert(key);
    return table_.get(key);
  }

  bool has(const std::string& key) const { return table_.contains(key); }

  std::optional<double> real(const std::string& key) {
    const toml::node* n = find(key);
    if (!n) return std::nullopt;
    if (auto v = n->value<double>()) return *v;
    fail(*n, key, "expected a number");
  }

  double real(const std::string& key, double fallback) {
    return real(key).value_or(fallback);
  }

  double required_real(const std::string& key) {
    if (auto v = real(key)) return *v;
    fail(key, "missing required number");
  }

  std::optional<std::int64_t> integer(const std::string& key) {
    const toml::node* n = find(key);
    if (!n) return std::nullopt;
    if (!n->is_integer()) fail(*n, key, "expected an integer");
    return n->value<std::int64_t>();
  }

  std::size_t count(const std::string& key, std::size_t fallback) {
    const auto v = integer(key);
    if (!v) return fallback;
    if (*v < 0) fail(*table_.get(key), key, "must be nonnegative");
    return static_cast<std::size_t>(*v);
  }

  std::optional<std::string> text(const std::string& key) {
    const toml::node* n = find(key);
    if (!n) return std::nullopt;
    if (auto v = n->value<std::string>()) return *v;
    fail(*n, key, "expected a string");
  }

  std::optional<std::vector<double>> reals(const std::string& key) {
    const toml::node* n = find(key);
    if (!n) return std::nullopt;
    const toml::array* arr = n->as_array();
    if (!arr) fail(*n, key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : *arr) {
      auto v = e.value<double>();
      if (!v) fail(e, key, "expected an array of numbers");
      out.push_back(*v);
    }
    return out;
  }

  std::vector<double> required_reals(const std::string& key) {
    if (auto v = reals(key)) return *v;
    fail(key, "missing required array");
  }

  std::optional<std::vector<std::size_t>> counts(const std::string& key) {
    const toml::node* n = find(key);
    if (!n) return std::nullopt;
    const toml::array* arr = n->as_array();
    if (!arr) fail(*n, key, "expected an array of integers");
    std::vector<std::size_t> out;
    for (const auto& e : *arr) {
      auto v = e.value<std::int64_t>();
      if (!e.is_integer() || !v || *v < 0) {
        fail(e, key, "expected an array of nonnegative integers");
      }
      out.push_back(static_cast<std::size_t>(*v));
    }
    return out;
  }

  std::optional<std::vector<std::vector<double>>> matrix(const std::string& key) {
    const toml::node* n = find(key);
    if (!n) return std::nullopt;
    const toml::array* rows = n->as_array();
    if (!rows) fail(*n, key, "expected an array of arrays");
    std::vector<std::vector<double>> out;
    for (const auto& row : *rows) {
      const toml::array* r = row.as_array();
      if (!r) fail(row, key, "expected an array of arrays");
      out.emplace_back();
      for (const auto& e : *r) {
        auto v = e.value<double>();
        if (!v) fail(e, key, "expected numbers");
        out.back().push_back(*v);
      }
    }
    return out;
  }

  std::optional<Section> table(const std::string& key) {
    const toml::node* n = find(key);
    if (!n) return std::nullopt;
    const toml::table* t = n->as_table();
    if (!t) fail(*n, key, "expected a table");
    return Section(*t, qualified(key), source_);
  }

  std::vector<Section> tables(const std::string& key) {
    const toml::node* n = find(key);
    std::vector<Section> out;
    if (!n) return out;
    const toml::array* arr = n->as_array();
    if (!arr) fail(*n, key, "expected an array of tables");
    for (const auto& e : *arr) {
      const toml::table* t = e.as_table();
      if (!t) fail(e, key, "expected an array of tables");
      out.emplace_back(*t, qualified(key), source_);
    }
    return out;
  }

  void finish() const {
    for (const auto& [k, v] : table_) {
      const std::string key(k.str());
      if (!used_.count(key)) fail(v, key, "unknown key");
    }
  }

 private:
  std::string qualified(const std::string& key) const {
    return name_.empty() ? key : name_ + "." + key;
  }

  const toml::table& table_;
  std::string name_;
  std::string source_;
  std::set<std::string> used_;
};

template <typename T>
T checked(Section& s, const std::string& key, const std::function<T()>& build) {
  try {
    return build();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    s.fail(key, e.what());
  }
}

Mechanism parse_mechanism(Section s) {
  const std::string kind = s.text("kind").value_or("");
  const auto caps = s.required_reals("caps");
  auto bounds = checked<ResourceBounds>(s, "caps", [&] { return ResourceBounds::from_caps(caps); });
  auto gas_config = [&] {
    auto weights = s.required_reals("weights");
    const auto cap = s.real("gas_cap");
    return checked<GasConfig>(s, "weights", [&] {
      return cap ? GasConfig::make(weights, *cap) : GasConfig::max_safe(weights, bounds);
    });
  };
  Mechanism out;
  if (kind == "one_dim") {
    out = OneDimMechanism{gas_config(), bounds};
  } else if (kind == "multi_dim") {
    out = MultiDimMechanism{bounds};
  } else if (kind == "synthetic") {
    auto rows = s.matrix("projection");
    if (!rows) s.fail("projection", "missing required matrix");
    auto synthetic_caps = s.required_reals("synthetic_caps");
    out = SyntheticMechanism{checked<SyntheticProjection>(s, "projection", [&] {
                               return SyntheticProjection::make(*rows, synthetic_caps);
                             }),
                             bounds};
  } else if (kind == "adaptive") {
    AdaptiveMechanism a{gas_config(), bounds};
    a.eta = s.real("eta", a.eta);
    a.clip = s.real("clip", a.clip);
    a.epoch = static_cast<int>(s.integer("epoch").value_or(a.epoch));
    a.ema_alpha = s.real("ema_alpha", a.ema_alpha);
    out = a;
  } else {
    s.fail("kind", "expected one of one_dim, multi_dim, synthetic, adaptive");
  }
  s.finish();
  return out;
}

DemandModel parse_demand(Section s) {
  DemandModel d;
  d.amplitude = s.required_reals("amplitude");
  d.elasticity = s.reals("elasticity").value_or(std::vector<double>(d.amplitude.size(), 1.0));
  d.sigma = s.real("sigma", d.sigma);
  d.size_lo = s.real("size_lo", d.size_lo);
  d.size_hi = s.real("size_hi", d.size_hi);
  d.margin_lo = s.real("margin_lo", d.margin_lo);
  d.margin_hi = s.real("margin_hi", d.margin_hi);
  s.finish();
  return d;
}

SolverChoice parse_solver(Section s) {
  const std::string name = s.text("kind").value_or("greedy");
  const auto kind = parse_solver_kind(name);
  if (!kind) s.fail("kind", "unknown solver '" + name + "'");
  SolverChoice c = SolverChoice::of(*kind);
  c.epsilon = s.real("epsilon", c.epsilon);
  c.unit = s.real("unit", c.unit);
  if (auto b = s.integer("node_budget")) c.bnb.node_budget = static_cast<std::uint64_t>(*b);
  if (auto t = s.real("time_budget_s")) {
    c.bnb.time_budget = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(*t));
  }
  s.finish();
  return c;
}

ShockSettings parse_shock(Section s, const std::optional<DemandModel>& demand) {
  ShockSettings out;
  const auto factor = s.real("factor");
  auto after = s.reals("amplitude_after");
  if (factor && after) s.fail("factor", "give either factor or amplitude_after, not both");
  if (factor) {
    if (!demand) s.fail("factor", "needs a [demand] table");
    for (double a : demand->amplitude) out.amplitude_after.push_back(a * *factor);
  } else if (after) {
    out.amplitude_after = *after;
  } else {
    s.fail("factor", "missing; give factor or amplitude_after");
  }
  out.shock_block = s.count("shock_block", out.shock_block);
  out.horizon = s.count("horizon", out.horizon);
  out.tol = s.real("tol", out.tol);
  out.window = s.count("window", out.window);
  out.runs = s.count("runs", out.runs);
  out.bootstrap = s.count("bootstrap", out.bootstrap);
  out.c_values = s.reals("c_values").value_or(out.c_values);
  s.finish();
  return out;
}

WelfareSettings parse_welfare(Section s) {
  WelfareSettings w;
  w.seeds = s.count("seeds", w.seeds);
  w.proportional_share = s.real("proportional_share", w.proportional_share);
  w.proportional_size_lo = s.real("proportional_size_lo", w.proportional_size_lo);
  w.proportional_size_hi = s.real("proportional_size_hi", w.proportional_size_hi);
  s.finish();
  return w;
}

DiscreteDist parse_distribution(Section s) {
  const std::string family = s.text("family").value_or("");
  auto build = [&]() -> DiscreteDist {
    if (family == "geometric") return DiscreteDist::geometric(s.required_real("q"));
    if (family == "poisson") return DiscreteDist::poisson(s.required_real("lambda"));
    if (family == "negative_binomial") {
      const double r = s.required_real("r");
      return DiscreteDist::negative_binomial(r, s.required_real("q"));
    }
    if (family == "logarithmic") return DiscreteDist::logarithmic(s.required_real("q"));
    s.fail("family", "expected geometric, poisson, negative_binomial or logarithmic");
  };
  auto d = checked<DiscreteDist>(s, "family", build);
  s.finish();
  return d;
}

RatioSettings parse_ratio(Section s) {
  RatioSettings r;
  r.curve.m_max = static_cast<int>(s.integer("m_max").value_or(r.curve.m_max));
  r.curve.n_samples = s.count("samples", r.curve.n_samples);
  r.curve.bound_c = s.real("bound_c", r.curve.bound_c);
  if (s.has("distribution")) {
    r.distributions.clear();
    for (auto& d : s.tables("distribution")) r.distributions.push_back(parse_distribution(d));
  }
  s.finish();
  return r;
}

RevenueOptions parse_revenue(Section s) {
  RevenueOptions o;
  o.n_values = s.counts("n").value_or(o.n_values);
  o.m_values = s.counts("m").value_or(o.m_values);
  o.time_budget = std::chrono::duration<double>(s.real("time_budget_s", o.time_budget.count()));
  if (auto b = s.integer("node_budget")) o.node_budget = static_cast<std::uint64_t>(*b);
  o.dp_n_values = s.counts("dp_n").value_or(o.dp_n_values);
  o.weight_lo = static_cast<int>(s.integer("weight_lo").value_or(o.weight_lo));
  o.weight_hi = static_cast<int>(s.integer("weight_hi").value_or(o.weight_hi));
  o.value_lo = static_cast<int>(s.integer("value_lo").value_or(o.value_lo));
  o.value_hi = static_cast<int>(s.integer("value_hi").value_or(o.value_hi));
  o.capacity_limit = s.real("capacity_limit", o.capacity_limit);
  o.fptas_epsilon = s.real("fptas_epsilon", o.fptas_epsilon);
  s.finish();
  return o;
}

TippingSpec parse_tipping(Section s) {
  const std::string family = s.text("family").value_or("");
  const double beta = s.real("beta", 1.0);
  TippingSpec spec;
  if (family == "linear") {
    spec = TippingSpec::linear(beta);
  } else if (family == "power") {
    spec = TippingSpec::power(beta, s.real("alpha", 1.0));
  } else if (family == "saturating") {
    spec = TippingSpec::saturating(beta, s.real("gamma", 1.0));
  } else {
    s.fail("family", "expected linear, power or saturating");
  }
  checked<bool>(s, "family", [&] {
    spec.validate();
    return true;
  });
  s.finish();
  return spec;
}

ReduceOptions parse_reduce(Section s) {
  ReduceOptions o;
  o.instances = s.count("instances", o.instances);
  o.max_n = s.count("max_n", o.max_n);
  o.max_m = s.count("max_m", o.max_m);
  o.scales = s.reals("scales").value_or(o.scales);
  if (s.has("tipping")) {
    o.families.clear();
    for (auto& t : s.tables("tipping")) o.families.push_back(parse_tipping(t));
  }
  s.finish();
  return o;
}

void require_config(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

void RunConfig::validate() const {
  std::size_t dims = 0;
  if (mechanism) {
    try {
      validate_mechanism(*mechanism);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("mechanism: ") + e.what());
    }
    dims = real_bounds(*mechanism).dims();
  }
  if (demand) {
    try {
      demand->validate();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("demand: ") + e.what());
    }
    require_config(!mechanism || demand->dims() == dims,
                   "demand: amplitude has " + std::to_string(demand->dims()) +
                       " entries but the mechanism has " + std::to_string(dims) +
                       " resources");
  }
  if (shock) {
    require_config(mechanism && demand, "shock: needs [mechanism] and [demand]");
    require_config(shock->amplitude_after.size() == dims,
                   "shock: amplitude_after does not match the resource count");
    require_config(shock->horizon > shock->shock_block,
                   "shock: horizon must exceed shock_block");
    require_config(shock->window >= 1, "shock: window must be at least 1");
    require_config(shock->runs >= 1, "shock: runs must be at least 1");
    require_config(shock->tol > 0, "shock: tol must be positive");
    for (double c : shock->c_values) require_config(c > 0, "shock: c_values must be positive");
  }
  if (welfare) {
    require_config(mechanism && demand, "welfare: needs [mechanism] and [demand]");
    require_config(std::holds_alternative<OneDimMechanism>(*mechanism),
                   "welfare: mechanism kind must be one_dim (its gas config is "
                   "compared against per-resource pricing)");
    require_config(welfare->seeds >= 1, "welfare: seeds must be at least 1");
    require_config(welfare->proportional_share >= 0 && welfare->proportional_share <= 1,
                   "welfare: proportional_share must be in [0, 1]");
    require_config(welfare->proportional_size_lo > 0 &&
                       welfare->proportional_size_lo <= welfare->proportional_size_hi,
                   "welfare: proportional sizes must satisfy 0 < lo <= hi");
  }
  if (ratio) {
    require_config(ratio->curve.m_max >= 1, "ratio: m_max must be at least 1");
    require_config(ratio->curve.n_samples >= 1000, "ratio: samples must be at least 1000");
    require_config(ratio->curve.bound_c > 0, "ratio: bound_c must be positive");
    require_config(!ratio->distributions.empty(), "ratio: no distributions");
  }
  if (revenue) {
    require_config(!revenue->n_values.empty() && !revenue->m_values.empty(),
                   "revenue: n and m must be nonempty");
    for (auto m : revenue->m_values) require_config(m >= 1, "revenue: m values must be at least 1");
    require_config(revenue->weight_lo >= 1 && revenue->weight_lo <= revenue->weight_hi,
                   "revenue: weights must satisfy 1 <= weight_lo <= weight_hi");
    require_config(revenue->value_lo >= 0 && revenue->value_lo <= revenue->value_hi,
                   "revenue: values must satisfy 0 <= value_lo <= value_hi");
    require_config(revenue->time_budget.count() > 0, "revenue: time_budget_s must be positive");
    require_config(revenue->capacity_limit >= 1, "revenue: capacity_limit must be at least 1");
    require_config(revenue->fptas_epsilon > 0 && revenue->fptas_epsilon < 1,
                   "revenue: fptas_epsilon must be in (0, 1)");
  }
  if (reduce) {
    require_config(reduce->max_n >= 1 && reduce->max_n <= kBruteForceMaxItems,
                   "reduce: max_n must be in [1, 25]");
    require_config(reduce->max_m >= 1, "reduce: max_m must be at least 1");
    require_config(!reduce->families.empty(), "reduce: no tipping families");
    for (double c : reduce->scales) require_config(c > 0, "reduce: scales must be positive");
  }
}

RunConfig parse_config(const std::string& toml_text, const std::string& source_name) {
  toml::table root;
  try {
    root = toml::parse(toml_text, source_name);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source_name << ":" << e.source().begin.line << ": " << e.description();
    throw ConfigError(os.str());
  }
  Section top(root, "", source_name);
  RunConfig cfg;
  if (auto seed = top.integer("seed")) {
    if (*seed < 0) top.fail("seed", "must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(*seed);
  }
  if (auto dir = top.text("out_dir")) cfg.out_dir = *dir;
  if (auto s = top.table("mechanism")) cfg.mechanism = parse_mechanism(*s);
  if (auto s = top.table("demand")) cfg.demand = parse_demand(*s);
  if (auto s = top.table("solver")) cfg.solver = parse_solver(*s);
  if (auto s = top.table("shock")) cfg.shock = parse_shock(*s, cfg.demand);
  if (auto s = top.table("welfare")) cfg.welfare = parse_welfare(*s);
  if (auto s = top.table("ratio")) cfg.ratio = parse_ratio(*s);
  if (auto s = top.table("revenue")) cfg.revenue = parse_revenue(*s);
  if (auto s = top.table("reduce")) cfg.reduce = parse_reduce(*s);
  top.finish();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

}  // namespace tfm
