#include "tfm/knapsack.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "tfm/mechanism.h"

namespace tfm {
namespace {

// Values within this relative distance count as equal, so that rounding
// after scaling all values by a constant does not change which set wins.
constexpr double kValueTieTolerance = 1e-12;

bool value_better(double a, double b) {
  if (std::isinf(a) || std::isinf(b)) return a > b;
  return a > b + kValueTieTolerance * std::max(std::abs(a), std::abs(b));
}

// Stable order by descending key; keys within the tie tolerance of the first
// key of their run are ordered by index instead.
void order_by_key_desc(std::vector<std::size_t>& order,
                       const std::function<double(std::size_t)>& key) {
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return key(a) > key(b);
  });
  for (std::size_t lo = 0; lo < order.size();) {
    std::size_t hi = lo + 1;
    while (hi < order.size() && !value_better(key(order[lo]), key(order[hi]))) ++hi;
    std::sort(order.begin() + static_cast<std::ptrdiff_t>(lo),
              order.begin() + static_cast<std::ptrdiff_t>(hi));
    lo = hi;
  }
}

bool item_fits(const KnapsackItem& item, const std::vector<double>& room) {
  for (std::size_t d = 0; d < room.size(); ++d) {
    if (!fits_within(item.consumption[d], room[d])) return false;
  }
  return true;
}

// Indices of items that may appear in any solution: positive value and
// individually within every capacity. Ascending.
std::vector<std::size_t> candidates(const KnapsackInstance& inst) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < inst.items.size(); ++j) {
    const auto& item = inst.items[j];
    if (item.value > 0.0 && item_fits(item, inst.capacities)) out.push_back(j);
  }
  return out;
}

void require_one_dim(const KnapsackInstance& inst, const char* solver) {
  if (inst.dims != 1) {
    throw SolverError(std::string(solver) +
                      " requires a one-dimensional instance");
  }
}

// Row-major bit table, one row per item.
class BitTable {
 public:
  BitTable(std::size_t rows, std::size_t cols)
      : cols_(cols), words_((rows * cols + 63) / 64, 0) {}
  void set(std::size_t r, std::size_t c) {
    const std::size_t bit = r * cols_ + c;
    words_[bit / 64] |= (std::uint64_t{1} << (bit % 64));
  }
  bool get(std::size_t r, std::size_t c) const {
    const std::size_t bit = r * cols_ + c;
    return (words_[bit / 64] >> (bit % 64)) & 1U;
  }

 private:
  std::size_t cols_;
  std::vector<std::uint64_t> words_;
};

class BranchAndBound {
 public:
  BranchAndBound(const KnapsackInstance& inst, const BranchAndBoundOptions& opts)
      : inst_(inst),
        opts_(opts),
        cand_(candidates(inst)),
        room_(inst.capacities),
        taken_(cand_.size(), 0),
        usable_(cand_.size(), 0) {
    if (opts_.time_budget) {
      deadline_ = std::chrono::steady_clock::now() + *opts_.time_budget;
    }
    // Per-dimension density order over candidate positions.
    by_density_.resize(inst.dims);
    for (std::size_t d = 0; d < inst.dims; ++d) {
      auto& order = by_density_[d];
      order.resize(cand_.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) {
                         return density(a, d) > density(b, d);
                       });
    }
  }

  KnapsackSolution run() {
    // Everything fits: the full candidate set is the unique optimum.
    std::vector<double> all(inst_.dims, 0.0);
    for (std::size_t j : cand_) {
      for (std::size_t d = 0; d < inst_.dims; ++d) {
        all[d] += inst_.items[j].consumption[d];
      }
    }
    bool fits_all = true;
    for (std::size_t d = 0; d < inst_.dims; ++d) {
      fits_all = fits_all && fits_within(all[d], inst_.capacities[d]);
    }
    if (fits_all) {
      auto sol = make_solution(inst_, cand_, SolutionKind::exact);
      sol.nodes = 1;
      return sol;
    }

    // The greedy value seeds pruning; the search still reports the first
    // optimal leaf in index order.
    const KnapsackSolution seed = solve_greedy_density(inst_);
    best_set_ = seed.chosen;
    best_ = seed.total_value - 1e-9 * std::max(1.0, seed.total_value);
    search(0);
    auto sol = make_solution(inst_, best_set_, SolutionKind::exact);
    sol.nodes = nodes_;
    return sol;
  }

 private:
  double density(std::size_t pos, std::size_t d) const {
    const auto& item = inst_.items[cand_[pos]];
    const double c = item.consumption[d] / inst_.capacities[d];
    return c > 0.0 ? item.value / c : std::numeric_limits<double>::infinity();
  }

  void tick() {
    ++nodes_;
    if (nodes_ > opts_.node_budget) {
      throw BudgetExhausted("branch-and-bound node budget exhausted", nodes_);
    }
    if (deadline_ && (nodes_ & 1023U) == 0 &&
        std::chrono::steady_clock::now() > *deadline_) {
      throw BudgetExhausted("branch-and-bound time budget exhausted", nodes_);
    }
  }

  // Fractional relaxation per dimension over undecided items that still fit;
  // the smallest one is the bound.
  double upper_bound(std::size_t depth) {
    for (std::size_t p = depth; p < cand_.size(); ++p) {
      usable_[p] = item_fits(inst_.items[cand_[p]], room_) ? 1 : 0;
    }
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t d = 0; d < inst_.dims; ++d) {
      double left = room_[d];
      double gain = 0.0;
      for (std::size_t p : by_density_[d]) {
        if (p < depth || !usable_[p]) continue;
        const auto& item = inst_.items[cand_[p]];
        const double c = item.consumption[d];
        if (c <= left) {
          gain += item.value;
          left -= c;
        } else {
          gain += item.value * (left / c);
          break;
        }
      }
      bound = std::min(bound, gain);
    }
    return value_ + bound;
  }

  void search(std::size_t depth) {
    tick();
    if (depth == cand_.size()) {
      if (value_better(value_, best_)) {
        best_ = value_;
        best_set_.clear();
        for (std::size_t p = 0; p < cand_.size(); ++p) {
          if (taken_[p]) best_set_.push_back(cand_[p]);
        }
      }
      return;
    }
    if (!value_better(upper_bound(depth), best_)) {
      return;
    }
    const auto& item = inst_.items[cand_[depth]];
    if (item_fits(item, room_)) {
      for (std::size_t d = 0; d < inst_.dims; ++d) room_[d] -= item.consumption[d];
      value_ += item.value;
      taken_[depth] = 1;
      search(depth + 1);
      taken_[depth] = 0;
      value_ -= item.value;
      for (std::size_t d = 0; d < inst_.dims; ++d) room_[d] += item.consumption[d];
    }
    search(depth + 1);
  }

  const KnapsackInstance& inst_;
  BranchAndBoundOptions opts_;
  std::vector<std::size_t> cand_;
  std::vector<std::vector<std::size_t>> by_density_;
  std::vector<double> room_;
  std::vector<char> taken_;
  std::vector<char> usable_;
  double value_ = 0.0;
  double best_ = 0.0;
  std::vector<std::size_t> best_set_;
  std::uint64_t nodes_ = 0;
  std::optional<std::chrono::steady_clock::time_point> deadline_;
};

}  // namespace

void KnapsackInstance::validate() const {
  if (dims < 1) throw PreconditionError("knapsack needs at least one dimension");
  if (capacities.size() != dims) {
    throw DimensionMismatch("knapsack capacities do not match dims");
  }
  for (double c : capacities) {
    if (!std::isfinite(c) || c < 0.0) {
      throw PreconditionError("knapsack capacities must be nonnegative");
    }
  }
  for (const auto& item : items) {
    if (item.consumption.size() != dims) {
      throw DimensionMismatch("knapsack item consumption does not match dims");
    }
    if (!std::isfinite(item.value) || item.value < 0.0) {
      throw PreconditionError("knapsack item values must be nonnegative");
    }
    for (double c : item.consumption) {
      if (!std::isfinite(c) || c < 0.0) {
        throw PreconditionError("knapsack consumption must be nonnegative");
      }
    }
  }
}

std::string kind_label(const KnapsackSolution& s) {
  switch (s.kind) {
    case SolutionKind::exact:
      return "exact";
    case SolutionKind::greedy:
      return "greedy";
    case SolutionKind::fptas: {
      std::ostringstream os;
      os << "fptas(" << s.epsilon << ")";
      return os.str();
    }
  }
  return "unknown";
}

bool is_feasible(const KnapsackInstance& inst,
                 const std::vector<std::size_t>& chosen) {
  std::vector<double> totals(inst.dims, 0.0);
  for (std::size_t j : chosen) {
    if (j >= inst.items.size()) return false;
    for (std::size_t d = 0; d < inst.dims; ++d) {
      totals[d] += inst.items[j].consumption[d];
    }
  }
  for (std::size_t d = 0; d < inst.dims; ++d) {
    if (!fits_within(totals[d], inst.capacities[d])) return false;
  }
  return true;
}

KnapsackSolution make_solution(const KnapsackInstance& inst,
                               std::vector<std::size_t> chosen,
                               SolutionKind kind) {
  std::sort(chosen.begin(), chosen.end());
  KnapsackSolution sol;
  sol.kind = kind;
  sol.totals.assign(inst.dims, 0.0);
  for (std::size_t j : chosen) {
    sol.total_value += inst.items[j].value;
    for (std::size_t d = 0; d < inst.dims; ++d) {
      sol.totals[d] += inst.items[j].consumption[d];
    }
  }
  sol.chosen = std::move(chosen);
  return sol;
}

KnapsackSolution solve_bruteforce(const KnapsackInstance& inst) {
  inst.validate();
  if (inst.items.size() > kBruteForceMaxItems) {
    throw SolverError("brute force limited to " +
                      std::to_string(kBruteForceMaxItems) + " items");
  }
  // Zero-value items never appear in a selection.
  std::vector<std::size_t> pool;
  for (std::size_t j = 0; j < inst.items.size(); ++j) {
    if (inst.items[j].value > 0.0) pool.push_back(j);
  }
  const std::uint64_t subsets = std::uint64_t{1} << pool.size();
  double best = 0.0;
  std::vector<std::size_t> best_set;
  std::vector<std::size_t> set;
  std::vector<double> totals(inst.dims);
  for (std::uint64_t mask = 1; mask < subsets; ++mask) {
    set.clear();
    std::fill(totals.begin(), totals.end(), 0.0);
    double value = 0.0;
    for (std::size_t b = 0; b < pool.size(); ++b) {
      if (!((mask >> b) & 1U)) continue;
      const auto& item = inst.items[pool[b]];
      set.push_back(pool[b]);
      value += item.value;
      for (std::size_t d = 0; d < inst.dims; ++d) totals[d] += item.consumption[d];
    }
    bool feasible = true;
    for (std::size_t d = 0; d < inst.dims && feasible; ++d) {
      feasible = fits_within(totals[d], inst.capacities[d]);
    }
    if (!feasible) continue;
    if (value_better(value, best) ||
        (!value_better(best, value) &&
         std::lexicographical_compare(set.begin(), set.end(), best_set.begin(),
                                      best_set.end()))) {
      best = value;
      best_set = set;
    }
  }
  auto sol = make_solution(inst, std::move(best_set), SolutionKind::exact);
  sol.nodes = subsets;
  return sol;
}

namespace {

// Groups of dimensions linked by some item consuming both. Items touching no
// dimension join the first group.
std::vector<std::size_t> dimension_groups(const KnapsackInstance& inst,
                                          std::size_t& n_groups) {
  std::vector<std::size_t> parent(inst.dims);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::function<std::size_t(std::size_t)> root = [&](std::size_t d) {
    return parent[d] == d ? d : parent[d] = root(parent[d]);
  };
  for (const auto& item : inst.items) {
    std::optional<std::size_t> first;
    for (std::size_t d = 0; d < inst.dims; ++d) {
      if (item.consumption[d] <= 0.0) continue;
      if (first) {
        parent[root(d)] = root(*first);
      } else {
        first = d;
      }
    }
  }
  std::vector<std::size_t> group(inst.dims);
  std::vector<std::optional<std::size_t>> label(inst.dims);
  n_groups = 0;
  for (std::size_t d = 0; d < inst.dims; ++d) {
    auto& l = label[root(d)];
    if (!l) l = n_groups++;
    group[d] = *l;
  }
  return group;
}

}  // namespace

// Independent groups are solved separately. Taking an item in index order
// whenever an optimum with it exists only depends on the item's own group, so
// the union of per-group answers is the same set a single search reports.
KnapsackSolution solve_mdk_exact(const KnapsackInstance& inst,
                                 const BranchAndBoundOptions& opts) {
  inst.validate();
  std::size_t n_groups = 0;
  const auto group = dimension_groups(inst, n_groups);
  if (n_groups <= 1) return BranchAndBound(inst, opts).run();

  const auto start = std::chrono::steady_clock::now();
  std::vector<std::size_t> chosen;
  std::uint64_t nodes = 0;
  for (std::size_t g = 0; g < n_groups; ++g) {
    KnapsackInstance sub{0, {}, {}};
    std::vector<std::size_t> dims;
    for (std::size_t d = 0; d < inst.dims; ++d) {
      if (group[d] == g) dims.push_back(d);
    }
    sub.dims = dims.size();
    for (std::size_t d : dims) sub.capacities.push_back(inst.capacities[d]);
    std::vector<std::size_t> ids;
    for (std::size_t j = 0; j < inst.items.size(); ++j) {
      const auto& c = inst.items[j].consumption;
      std::size_t home = 0;
      for (std::size_t d = 0; d < inst.dims; ++d) {
        if (c[d] > 0.0) {
          home = group[d];
          break;
        }
      }
      if (home != g) continue;
      KnapsackItem item{inst.items[j].value, {}};
      for (std::size_t d : dims) item.consumption.push_back(c[d]);
      sub.items.push_back(std::move(item));
      ids.push_back(j);
    }
    BranchAndBoundOptions sub_opts = opts;
    sub_opts.node_budget = opts.node_budget - std::min(opts.node_budget, nodes);
    if (opts.time_budget) {
      const auto spent = std::chrono::steady_clock::now() - start;
      sub_opts.time_budget = spent >= *opts.time_budget
                                 ? std::chrono::steady_clock::duration::zero()
                                 : *opts.time_budget - spent;
    }
    const auto part = BranchAndBound(sub, sub_opts).run();
    nodes += part.nodes;
    for (std::size_t j : part.chosen) chosen.push_back(ids[j]);
  }
  std::sort(chosen.begin(), chosen.end());
  auto sol = make_solution(inst, chosen, SolutionKind::exact);
  sol.nodes = nodes;
  return sol;
}

KnapsackSolution solve_1d_dp(const KnapsackInstance& inst, double unit) {
  inst.validate();
  require_one_dim(inst, "dynamic programming");
  if (!(unit > 0.0) || !std::isfinite(unit)) {
    throw SolverError("dynamic programming unit must be positive");
  }
  const double cap_units = inst.capacities[0] / unit;
  if (cap_units > kMaxDpCapacityUnits) {
    throw SolverError("dynamic programming table too large: capacity is " +
                      std::to_string(cap_units) + " units");
  }
  const auto cap = static_cast<std::size_t>(std::floor(cap_units + 1e-9));

  std::vector<std::size_t> pool;
  std::vector<std::size_t> weight;
  for (std::size_t j = 0; j < inst.items.size(); ++j) {
    const double units = inst.items[j].consumption[0] / unit;
    const double rounded = std::round(units);
    if (std::abs(units - rounded) > 1e-9 * std::max(1.0, units)) {
      throw SolverError("item " + std::to_string(j) +
                        " consumption is not a multiple of the unit");
    }
    if (inst.items[j].value > 0.0 && rounded <= static_cast<double>(cap)) {
      pool.push_back(j);
      weight.push_back(static_cast<std::size_t>(rounded));
    }
  }
  const std::size_t width = cap + 1;
  if (static_cast<double>(pool.size()) * static_cast<double>(width) >
      static_cast<double>(kMaxDpTableBits)) {
    throw SolverError("dynamic programming table too large");
  }

  // best[c]: optimum over the items processed so far (a suffix of pool) with
  // capacity c. keep(r, c): taking pool[r] is optimal for that suffix.
  std::vector<double> best(width, 0.0);
  BitTable keep(pool.size(), width);
  for (std::size_t r = pool.size(); r-- > 0;) {
    const double v = inst.items[pool[r]].value;
    const std::size_t w = weight[r];
    for (std::size_t c = cap + 1; c-- > w;) {
      const double with = v + best[c - w];
      if (!value_better(best[c], with)) {
        best[c] = with;
        keep.set(r, c);
      }
    }
  }
  std::vector<std::size_t> chosen;
  std::size_t c = cap;
  for (std::size_t r = 0; r < pool.size(); ++r) {
    if (keep.get(r, c)) {
      chosen.push_back(pool[r]);
      c -= weight[r];
    }
  }
  auto sol = make_solution(inst, std::move(chosen), SolutionKind::exact);
  sol.nodes = static_cast<std::uint64_t>(pool.size()) * width;
  return sol;
}

KnapsackSolution solve_1d_fptas(const KnapsackInstance& inst, double epsilon) {
  inst.validate();
  require_one_dim(inst, "FPTAS");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw SolverError("FPTAS epsilon must lie in (0, 1)");
  }
  const std::vector<std::size_t> pool = candidates(inst);
  if (pool.empty()) {
    auto sol = make_solution(inst, {}, SolutionKind::fptas);
    sol.epsilon = epsilon;
    return sol;
  }
  double vmax = 0.0;
  for (std::size_t j : pool) vmax = std::max(vmax, inst.items[j].value);
  const double scale = epsilon * vmax / static_cast<double>(pool.size());

  std::vector<std::size_t> scaled;
  std::size_t total = 0;
  for (std::size_t j : pool) {
    // The nudge keeps exact multiples of the scale from rounding down.
    scaled.push_back(
        static_cast<std::size_t>(std::floor(inst.items[j].value / scale + 1e-9)));
    total += scaled.back();
  }
  const std::size_t width = total + 1;
  if (static_cast<double>(pool.size()) * static_cast<double>(width) >
      static_cast<double>(kMaxDpTableBits)) {
    throw SolverError("FPTAS table too large");
  }

  // lightest[s]: minimum consumption reaching scaled value exactly s.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> lightest(width, inf);
  lightest[0] = 0.0;
  BitTable keep(pool.size(), width);
  for (std::size_t r = pool.size(); r-- > 0;) {
    const double w = inst.items[pool[r]].consumption[0];
    const std::size_t sv = scaled[r];
    for (std::size_t s = width; s-- > sv;) {
      const double with = lightest[s - sv] + w;
      if (with < inf && with <= lightest[s]) {
        lightest[s] = with;
        keep.set(r, s);
      }
    }
  }
  std::size_t target = 0;
  for (std::size_t s = width; s-- > 0;) {
    if (lightest[s] < inf && fits_within(lightest[s], inst.capacities[0])) {
      target = s;
      break;
    }
  }
  std::vector<std::size_t> chosen;
  std::size_t s = target;
  for (std::size_t r = 0; r < pool.size(); ++r) {
    if (keep.get(r, s)) {
      chosen.push_back(pool[r]);
      s -= scaled[r];
    }
  }
  auto sol = make_solution(inst, std::move(chosen), SolutionKind::fptas);
  sol.epsilon = epsilon;
  sol.nodes = static_cast<std::uint64_t>(pool.size()) * width;
  return sol;
}

KnapsackSolution solve_greedy_density(const KnapsackInstance& inst) {
  inst.validate();
  std::vector<std::size_t> order = candidates(inst);
  std::vector<double> density(inst.items.size(), 0.0);
  for (std::size_t j : order) {
    const auto& item = inst.items[j];
    double load = 0.0;
    for (std::size_t d = 0; d < inst.dims; ++d) {
      load += item.consumption[d] / inst.capacities[d];
    }
    density[j] = load > 0.0 ? item.value / load
                            : std::numeric_limits<double>::infinity();
  }
  order_by_key_desc(order, [&](std::size_t j) { return density[j]; });
  std::vector<double> room = inst.capacities;
  std::vector<std::size_t> chosen;
  for (std::size_t j : order) {
    const auto& item = inst.items[j];
    if (!item_fits(item, room)) continue;
    for (std::size_t d = 0; d < inst.dims; ++d) room[d] -= item.consumption[d];
    chosen.push_back(j);
  }
  return make_solution(inst, std::move(chosen), SolutionKind::greedy);
}

KnapsackSolution solve_greedy_best_of(const KnapsackInstance& inst) {
  KnapsackSolution greedy = solve_greedy_density(inst);
  std::optional<std::size_t> single;
  for (std::size_t j : candidates(inst)) {
    if (!single || value_better(inst.items[j].value, inst.items[*single].value)) {
      single = j;
    }
  }
  if (single && value_better(inst.items[*single].value, greedy.total_value)) {
    return make_solution(inst, {*single}, SolutionKind::greedy);
  }
  return greedy;
}

std::string solver_name(SolverChoice::Kind kind) {
  switch (kind) {
    case SolverChoice::Kind::exact:
      return "exact";
    case SolverChoice::Kind::bruteforce:
      return "bruteforce";
    case SolverChoice::Kind::dp:
      return "dp";
    case SolverChoice::Kind::fptas:
      return "fptas";
    case SolverChoice::Kind::greedy:
      return "greedy";
  }
  return "unknown";
}

std::optional<SolverChoice::Kind> parse_solver_kind(const std::string& name) {
  for (auto kind : {SolverChoice::Kind::exact, SolverChoice::Kind::bruteforce,
                    SolverChoice::Kind::dp, SolverChoice::Kind::fptas,
                    SolverChoice::Kind::greedy}) {
    if (solver_name(kind) == name) return kind;
  }
  return std::nullopt;
}

KnapsackSolution solve(const KnapsackInstance& inst, const SolverChoice& choice) {
  switch (choice.kind) {
    case SolverChoice::Kind::exact:
      return solve_mdk_exact(inst, choice.bnb);
    case SolverChoice::Kind::bruteforce:
      return solve_bruteforce(inst);
    case SolverChoice::Kind::dp:
      return solve_1d_dp(inst, choice.unit);
    case SolverChoice::Kind::fptas:
      return solve_1d_fptas(inst, choice.epsilon);
    case SolverChoice::Kind::greedy:
      return solve_greedy_density(inst);
  }
  throw SolverError("unknown solver");
}

}  // namespace tfm
