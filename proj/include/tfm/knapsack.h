#pragma once

// Multidimensional 0/1 knapsack solvers used as block-building allocation
// rules.
//
// Every solver follows the same selection order so that results are
// comparable as sets, not just values:
//   * items with value 0 are never chosen;
//   * among subsets of equal total value the lexicographically smallest
//     sorted index list wins.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tfm {

struct KnapsackItem {
  double value = 0.0;
  std::vector<double> consumption;
};

struct KnapsackInstance {
  std::size_t dims = 1;
  std::vector<double> capacities;
  std::vector<KnapsackItem> items;

  void validate() const;
};

enum class SolutionKind { exact, fptas, greedy };

struct KnapsackSolution {
  std::vector<std::size_t> chosen;  // sorted ascending
  double total_value = 0.0;
  std::vector<double> totals;
  SolutionKind kind = SolutionKind::exact;
  double epsilon = 0.0;       // set for fptas
  std::uint64_t nodes = 0;    // search nodes (branch-and-bound) or DP cells
};

std::string kind_label(const KnapsackSolution& s);

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Branch-and-bound ran out of nodes or wall time. Never carries a partial
/// answer.
class BudgetExhausted : public SolverError {
 public:
  BudgetExhausted(const std::string& what, std::uint64_t nodes)
      : SolverError(what), nodes_(nodes) {}
  std::uint64_t nodes() const { return nodes_; }

 private:
  std::uint64_t nodes_;
};

inline constexpr std::size_t kBruteForceMaxItems = 25;
inline constexpr std::uint64_t kDefaultNodeBudget = 10'000'000;
inline constexpr double kMaxDpCapacityUnits = 1e7;
inline constexpr std::uint64_t kMaxDpTableBits = 2'000'000'000ULL;

/// Independent feasibility check: totals of `chosen` within capacities.
bool is_feasible(const KnapsackInstance& inst,
                 const std::vector<std::size_t>& chosen);

/// Builds a solution record (totals, value summed in index order).
KnapsackSolution make_solution(const KnapsackInstance& inst,
                               std::vector<std::size_t> chosen,
                               SolutionKind kind);

KnapsackSolution solve_bruteforce(const KnapsackInstance& inst);

struct BranchAndBoundOptions {
  std::uint64_t node_budget = kDefaultNodeBudget;
  std::optional<std::chrono::steady_clock::duration> time_budget;
};

KnapsackSolution solve_mdk_exact(const KnapsackInstance& inst,
                                 const BranchAndBoundOptions& opts = {});

/// Exact 1-D solver over integer capacity; consumptions must be multiples of
/// `unit`.
KnapsackSolution solve_1d_dp(const KnapsackInstance& inst, double unit);

/// Value-scaling FPTAS for m = 1: total_value >= (1 - epsilon) * optimum.
KnapsackSolution solve_1d_fptas(const KnapsackInstance& inst, double epsilon);

/// Items by value / sum_i(consumption_i / capacity_i), inserted while they
/// fit.
KnapsackSolution solve_greedy_density(const KnapsackInstance& inst);

/// Better of the density greedy and the best single feasible item. For m = 1
/// this is at least half the optimum.
KnapsackSolution solve_greedy_best_of(const KnapsackInstance& inst);

struct SolverChoice {
  enum class Kind { exact, bruteforce, dp, fptas, greedy };
  Kind kind = Kind::exact;
  double epsilon = 0.1;  // fptas
  double unit = 1.0;     // dp
  BranchAndBoundOptions bnb;

  static SolverChoice exact() { return {}; }
  static SolverChoice greedy() { return of(Kind::greedy); }
  static SolverChoice bruteforce() { return of(Kind::bruteforce); }
  static SolverChoice fptas(double eps) {
    SolverChoice c = of(Kind::fptas);
    c.epsilon = eps;
    return c;
  }
  static SolverChoice dp(double unit) {
    SolverChoice c = of(Kind::dp);
    c.unit = unit;
    return c;
  }
  static SolverChoice of(Kind kind) {
    SolverChoice c;
    c.kind = kind;
    return c;
  }
};

std::string solver_name(SolverChoice::Kind kind);
std::optional<SolverChoice::Kind> parse_solver_kind(const std::string& name);

KnapsackSolution solve(const KnapsackInstance& inst, const SolverChoice& choice);

}  // namespace tfm
