#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "support/generators.h"
#include "tfm/knapsack.h"

using namespace tfm;
using namespace tfm::testing;

namespace {

KnapsackInstance abc() {
  return {2, {2, 2}, {{3, {1, 2}}, {2, {1, 1}}, {2, {1, 1}}}};
}

KnapsackInstance one_dim(std::vector<double> values, std::vector<double> weights,
                         double cap) {
  KnapsackInstance inst{1, {cap}, {}};
  for (std::size_t j = 0; j < values.size(); ++j) {
    inst.items.push_back({values[j], {weights[j]}});
  }
  return inst;
}

void check_solution_consistent(const KnapsackInstance& inst,
                               const KnapsackSolution& s) {
  CHECK(std::is_sorted(s.chosen.begin(), s.chosen.end()));
  CHECK(is_feasible(inst, s.chosen));
  double v = 0;
  for (auto j : s.chosen) v += inst.items[j].value;
  CHECK(s.total_value == doctest::Approx(v).epsilon(1e-12));
  for (auto j : s.chosen) CHECK(inst.items[j].value > 0);
}

}  // namespace

TEST_CASE("brute force basics") {
  auto s = solve_bruteforce({2, {1, 1}, {}});
  CHECK(s.chosen.empty());
  CHECK(s.total_value == 0);

  s = solve_bruteforce(abc());
  CHECK(s.chosen == std::vector<std::size_t>{1, 2});
  CHECK(s.total_value == 4);

  s = solve_bruteforce(one_dim({5}, {1}, 2));
  CHECK(s.chosen == std::vector<std::size_t>{0});

  KnapsackInstance big{1, {1}, std::vector<KnapsackItem>(26, {1, {1}})};
  CHECK_THROWS_AS(solve_bruteforce(big), SolverError);
}

TEST_CASE("brute force agrees with an independent enumeration") {
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    auto inst = random_integer_instance(rng, 1 + trial % 12, 1 + trial % 4);
    auto s = solve_bruteforce(inst);
    auto o = enumerate_best(inst);
    CHECK(s.chosen == o.chosen);
    CHECK(s.total_value == o.value);
  }
}

TEST_CASE("instance validation") {
  CHECK_THROWS_AS((KnapsackInstance{2, {1}, {}}.validate()), DimensionMismatch);
  CHECK_THROWS_AS((KnapsackInstance{1, {1}, {{-1, {1}}}}.validate()), PreconditionError);
  CHECK_THROWS_AS((KnapsackInstance{1, {1}, {{1, {1, 2}}}}.validate()), DimensionMismatch);
  CHECK_NOTHROW((KnapsackInstance{1, {0}, {{0, {5}}}}.validate()));
}

TEST_CASE("exact branch and bound") {
  CHECK(solve_mdk_exact(abc()).chosen == std::vector<std::size_t>{1, 2});

  KnapsackInstance zeros{2, {5, 5}, std::vector<KnapsackItem>(4, {0, {1, 1}})};
  auto s = solve_mdk_exact(zeros);
  CHECK(s.chosen.empty());
  CHECK(s.total_value == 0);

  KnapsackInstance roomy{2, {100, 100}, {{1, {1, 1}}, {0, {1, 1}}, {2, {3, 1}}}};
  CHECK(solve_mdk_exact(roomy).chosen == std::vector<std::size_t>{0, 2});
}

TEST_CASE("exact solver matches brute force on random instances") {
  Rng rng(22);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 1 + trial % 15;
    const std::size_t m = 1 + trial % 4;
    auto inst = trial % 2 ? random_integer_instance(rng, n, m)
                          : random_real_instance(rng, n, m);
    auto oracle = solve_bruteforce(inst);
    auto s = solve_mdk_exact(inst);
    CHECK(s.chosen == oracle.chosen);
    check_solution_consistent(inst, s);
  }
}

TEST_CASE("exact solver on instances whose resources split into independent groups") {
  Rng rng(29);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = 2 + trial % 3;
    auto inst = random_integer_instance(rng, 1 + trial % 14, m);
    for (auto& item : inst.items) {
      // keep each item on one resource, or on the first two, or on none
      const auto keep = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(m)));
      for (std::size_t d = 0; d < m; ++d) {
        const bool pair = keep == m && d < 2;
        if (d != keep && !pair) item.consumption[d] = 0;
      }
    }
    auto s = solve_mdk_exact(inst);
    CHECK(s.chosen == enumerate_best(inst).chosen);
    check_solution_consistent(inst, s);
  }
}

TEST_CASE("node budget failure is explicit") {
  Rng rng(23);
  auto inst = random_real_instance(rng, 60, 5);
  BranchAndBoundOptions opts;
  opts.node_budget = 10;
  CHECK_THROWS_AS(solve_mdk_exact(inst, opts), BudgetExhausted);
  opts.node_budget = kDefaultNodeBudget;
  opts.time_budget = std::chrono::nanoseconds(0);
  CHECK_THROWS_AS(solve_mdk_exact(random_real_instance(rng, 200, 8), opts),
                  BudgetExhausted);
}

TEST_CASE("one-dimensional dynamic program") {
  CHECK(solve_1d_dp(one_dim({3}, {5}, 5), 1).chosen == std::vector<std::size_t>{0});
  CHECK(solve_1d_dp(one_dim({3, 4}, {1, 2}, 0), 1).chosen.empty());
  CHECK(solve_1d_dp(one_dim({3, 4}, {0.5, 1.0}, 1.0), 0.5).chosen ==
        std::vector<std::size_t>{1});
  CHECK_THROWS_AS(solve_1d_dp(one_dim({3}, {0.3}, 1), 1), SolverError);
  CHECK_THROWS_AS(solve_1d_dp(one_dim({3}, {1}, 1e8), 1), SolverError);
  CHECK_THROWS_AS(solve_1d_dp(abc(), 1), SolverError);

  Rng rng(24);
  for (int trial = 0; trial < 400; ++trial) {
    auto inst = random_integer_instance(rng, 1 + trial % 15, 1);
    auto s = solve_1d_dp(inst, 1.0);
    CHECK(s.chosen == solve_bruteforce(inst).chosen);
    check_solution_consistent(inst, s);
  }
}

TEST_CASE("fptas") {
  CHECK_THROWS_AS(solve_1d_fptas(one_dim({1}, {1}, 1), 0.0), SolverError);
  CHECK_THROWS_AS(solve_1d_fptas(one_dim({1}, {1}, 1), 1.0), SolverError);

  // optimum is one item
  auto single = one_dim({10, 1, 1}, {5, 4, 4}, 5);
  auto s = solve_1d_fptas(single, 0.1);
  CHECK(s.chosen == std::vector<std::size_t>{0});
  CHECK(s.total_value == 10);

  auto equal = one_dim(std::vector<double>(9, 2.0), std::vector<double>(9, 3.0), 13);
  CHECK(solve_1d_fptas(equal, 0.2).chosen.size() == solve_1d_dp(equal, 1).chosen.size());

  Rng rng(25);
  for (int trial = 0; trial < 150; ++trial) {
    auto inst = random_integer_instance(rng, 5 + trial % 96, 1);
    for (auto& item : inst.items) item.value = uniform(rng, 0, 50);
    const double opt = solve_1d_dp(inst, 1.0).total_value;
    for (double eps : {0.05, 0.1, 0.5}) {
      auto f = solve_1d_fptas(inst, eps);
      CHECK(f.total_value >= (1 - eps) * opt - 1e-9);
      CHECK(f.kind == SolutionKind::fptas);
      check_solution_consistent(inst, f);
    }
  }
}

TEST_CASE("greedy heuristics") {
  CHECK(solve_greedy_density({1, {3}, {}}).chosen.empty());
  auto identical = one_dim({1, 1, 1, 1}, {2, 2, 2, 2}, 8);
  CHECK(solve_greedy_density(identical).chosen.size() == 4);

  Rng rng(26);
  for (int trial = 0; trial < 300; ++trial) {
    auto inst = random_integer_instance(rng, 1 + trial % 15, 1);
    const double opt = solve_1d_dp(inst, 1.0).total_value;
    auto g = solve_greedy_density(inst);
    auto b = solve_greedy_best_of(inst);
    CHECK(b.total_value >= g.total_value);
    CHECK(b.total_value >= 0.5 * opt - 1e-9);
    check_solution_consistent(inst, g);
    check_solution_consistent(inst, b);
  }
}

TEST_CASE("scaling values leaves every solver's chosen set unchanged") {
  Rng rng(27);
  for (int trial = 0; trial < 150; ++trial) {
    auto inst = random_integer_instance(rng, 1 + trial % 12, 1 + trial % 3);
    for (double scale : {0.01, 3.0, 100.0}) {
      auto scaled = inst;
      for (auto& item : scaled.items) item.value *= scale;
      CHECK(solve_mdk_exact(scaled).chosen == solve_mdk_exact(inst).chosen);
      CHECK(solve_bruteforce(scaled).chosen == solve_bruteforce(inst).chosen);
      CHECK(solve_greedy_density(scaled).chosen == solve_greedy_density(inst).chosen);
      if (inst.dims == 1) {
        CHECK(solve_1d_dp(scaled, 1).chosen == solve_1d_dp(inst, 1).chosen);
        CHECK(solve_1d_fptas(scaled, 0.1).chosen == solve_1d_fptas(inst, 0.1).chosen);
      }
    }
  }
}

TEST_CASE("adding an item never lowers the optimum") {
  Rng rng(28);
  for (int trial = 0; trial < 200; ++trial) {
    auto inst = random_real_instance(rng, 1 + trial % 11, 1 + trial % 3);
    const double before = solve_mdk_exact(inst).total_value;
    KnapsackItem extra{uniform(rng, 0, 10), {}};
    for (std::size_t d = 0; d < inst.dims; ++d) extra.consumption.push_back(uniform(rng, 0, 5));
    inst.items.push_back(extra);
    CHECK(solve_mdk_exact(inst).total_value >= before);
  }
}

TEST_CASE("solver dispatch") {
  CHECK(parse_solver_kind("exact") == SolverChoice::Kind::exact);
  CHECK(parse_solver_kind("fptas") == SolverChoice::Kind::fptas);
  CHECK_FALSE(parse_solver_kind("simplex").has_value());
  for (auto kind : {SolverChoice::Kind::exact, SolverChoice::Kind::bruteforce,
                    SolverChoice::Kind::dp, SolverChoice::Kind::fptas,
                    SolverChoice::Kind::greedy}) {
    CHECK(parse_solver_kind(solver_name(kind)) == kind);
  }
  auto inst = one_dim({3, 4, 5}, {1, 2, 3}, 4);
  CHECK(solve(inst, SolverChoice::dp(1)).chosen == solve(inst, SolverChoice::exact()).chosen);
}
