#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "support/generators.h"
#include "tfm/analysis.h"

using namespace tfm;

namespace {

std::vector<DiscreteDist> parameter_grid() {
  return {DiscreteDist::geometric(0.1),  DiscreteDist::geometric(0.5),
          DiscreteDist::geometric(0.9),  DiscreteDist::poisson(0.5),
          DiscreteDist::poisson(5),      DiscreteDist::poisson(40),
          DiscreteDist::negative_binomial(1, 0.3), DiscreteDist::negative_binomial(3, 0.5),
          DiscreteDist::negative_binomial(10.5, 0.8), DiscreteDist::logarithmic(0.2),
          DiscreteDist::logarithmic(0.7), DiscreteDist::logarithmic(0.95)};
}

// E[max of m iid] from the pmf directly: sum_k k * (F(k)^m - F(k-1)^m).
double expected_max_by_pmf(const DiscreteDist& d, int m) {
  double cdf_prev = 0, total = 0;
  for (int k = 0; k < 20000; ++k) {
    const double cdf = cdf_prev + d.pmf(k);
    total += k * (std::pow(std::min(1.0, cdf), m) - std::pow(cdf_prev, m));
    cdf_prev = std::min(1.0, cdf);
  }
  return total;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tfm_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("pmf and cdf closed forms") {
  auto g = DiscreteDist::geometric(0.5);
  CHECK(g.pmf(1) == 0.5);
  CHECK(g.pmf(0) == 0);
  CHECK(g.cdf(2) == 0.75);
  CHECK(g.tail(6) == doctest::Approx(std::pow(0.5, 5)).epsilon(1e-15));
  CHECK(DiscreteDist::poisson(3).pmf(0) == doctest::Approx(std::exp(-3.0)).epsilon(1e-14));
  CHECK(DiscreteDist::logarithmic(0.5).pmf(1) ==
        doctest::Approx(-0.5 / std::log(0.5)).epsilon(1e-14));
  CHECK(DiscreteDist::negative_binomial(2, 0.5).pmf(1) ==
        doctest::Approx(2 * 0.25 * 0.5).epsilon(1e-14));
  CHECK_THROWS_AS(DiscreteDist::geometric(0), PreconditionError);
  CHECK_THROWS_AS(DiscreteDist::poisson(-1), PreconditionError);
  CHECK_THROWS_AS(DiscreteDist::negative_binomial(1, 1), PreconditionError);
  CHECK_THROWS_AS(DiscreteDist::logarithmic(1), PreconditionError);
}

TEST_CASE("pmf sums to one and matches the stated mean") {
  for (const auto& d : parameter_grid()) {
    CAPTURE(d.label());
    double total = 0, mean = 0;
    for (int k = 0; k < 20000; ++k) {
      total += d.pmf(k);
      mean += k * d.pmf(k);
    }
    CHECK(std::abs(total - 1) <= 1e-12);
    CHECK(mean == doctest::Approx(d.mean()).epsilon(1e-10));
    CHECK(d.cdf(30) + d.tail(31) == doctest::Approx(1).epsilon(1e-12));
  }
}

TEST_CASE("sampling matches the distribution") {
  for (const auto& d : parameter_grid()) {
    CAPTURE(d.label());
    Rng rng(8);
    double sum = 0;
    std::vector<int> counts(6, 0);
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const auto k = d.sample(rng);
      CHECK(k >= 0);
      sum += static_cast<double>(k);
      if (k < 6) ++counts[static_cast<std::size_t>(k)];
    }
    CHECK(sum / n == doctest::Approx(d.mean()).epsilon(0.03));
    for (int k = 0; k < 6; ++k) {
      CHECK(std::abs(counts[static_cast<std::size_t>(k)] / double(n) - d.pmf(k)) < 0.005);
    }
  }
}

TEST_CASE("exact expectation ratio") {
  auto g = DiscreteDist::geometric(0.5);
  CHECK(std::abs(exact_ratio_iid(g, 2) - 4.0 / 3.0) <= 1e-9);
  CHECK_THROWS_AS(exact_ratio_iid(g, 0), PreconditionError);
  for (const auto& d : parameter_grid()) {
    CAPTURE(d.label());
    CHECK(exact_ratio_iid(d, 1) == 1.0);
    double prev = 1.0;
    for (int m = 2; m <= 16; ++m) {
      const double r = exact_ratio_iid(d, m);
      CHECK(r >= prev);
      CHECK(r == doctest::Approx(expected_max_by_pmf(d, m) / d.mean()).epsilon(1e-9));
      prev = r;
    }
  }
}

TEST_CASE("Monte Carlo ratio") {
  auto g = DiscreteDist::geometric(0.5);
  auto a = mc_ratio_iid(g, 2, 100000, 3);
  auto b = mc_ratio_iid(g, 2, 100000, 3);
  CHECK(a.estimate == b.estimate);
  CHECK(a.ci.lo <= 4.0 / 3.0);
  CHECK(a.ci.hi >= 4.0 / 3.0);
  auto one = mc_ratio_iid(DiscreteDist::poisson(5), 1, 20000, 4);
  CHECK(one.ci.lo <= 1.0);
  CHECK(one.ci.hi >= 1.0);
  CHECK_THROWS_AS(mc_ratio_iid(g, 2, 999, 1), PreconditionError);
}

TEST_CASE("theoretical lower bound") {
  CHECK(theoretical_ratio_lower_bound(2, 0.2, 0, 1) == 0);
  CHECK(theoretical_ratio_lower_bound(2, 0.2, 0, 2) == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(theoretical_ratio_lower_bound(2, 0.3, 0, 5000) == doctest::Approx(3).epsilon(1e-12));
  CHECK_THROWS_AS(theoretical_ratio_lower_bound(2, 0.1, 0.1, 3), PreconditionError);
  CHECK_THROWS_AS(theoretical_ratio_lower_bound(2, 0.6, 0.5, 3), PreconditionError);
  CHECK_THROWS_AS(theoretical_ratio_lower_bound(0, 0.3, 0, 3), PreconditionError);
  CHECK_THROWS_AS(theoretical_ratio_lower_bound(1, 1.0, 0, 3), PreconditionError);

  Rng rng(9);
  for (int trial = 0; trial < 2000; ++trial) {
    const double c = testing::uniform(rng, 0.05, 5);
    const double delta = testing::uniform(rng, 0, 0.3);
    const double p = testing::uniform(rng, delta + 1e-3, 1 - delta - 1e-3);
    const int m = testing::uniform_int(rng, 1, 40);
    const double b = theoretical_ratio_lower_bound(c, p, delta, m);
    CHECK(b >= 0);
    CHECK(theoretical_ratio_lower_bound(c, p, delta, m + 1) >= b);
    CHECK(theoretical_ratio_lower_bound(c * 1.5, p, delta, m) >= b);
    const double d2 = std::min({delta + 0.01, p - 1e-4, 1 - p - 1e-4});
    CHECK(theoretical_ratio_lower_bound(c, p, d2, m) <= b);
  }
}

TEST_CASE("tail probability") {
  CHECK(tail_probability(std::vector<double>{4, 4, 4}, 0.5) == 0);
  CHECK(tail_probability(std::vector<double>{1, 1, 1, 9}, 1) == 0.25);
  CHECK_THROWS_AS(tail_probability(std::vector<double>{}, 1), PreconditionError);
  auto g = DiscreteDist::geometric(0.5);
  Rng rng(10);
  std::vector<double> xs;
  for (int i = 0; i < 1000000; ++i) xs.push_back(static_cast<double>(g.sample(rng)));
  // with the sample mean close to 2 the threshold stays inside (5, 6]
  CHECK(std::abs(tail_probability(xs, 2) - std::pow(0.5, 5)) < 0.002);
}

TEST_CASE("ratio curve files") {
  const auto dir = temp_dir("curves");
  RatioCurveOptions opts;
  opts.n_samples = 2000;
  opts.seed = 17;
  const auto dists = default_distributions();
  auto files = emit_ratio_curve(dists, opts, dir);
  CHECK(files.size() == 8);
  for (const auto& f : files) CHECK(std::filesystem::exists(f));

  for (const auto& d : dists) {
    const auto csv = slurp(dir / ("ratio_" + d.family_name() + ".csv"));
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "m,exact,mc,ci_lo,ci_hi,bound");
    double prev_exact = 0, prev_bound = -1;
    int rows = 0;
    while (std::getline(in, line)) {
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream row(line);
      int m;
      double exact, mc, lo, hi, bound;
      row >> m >> exact >> mc >> lo >> hi >> bound;
      CHECK(m == ++rows);
      if (m == 1) CHECK(exact == 1.0);
      CHECK(exact >= prev_exact);
      CHECK(bound >= prev_bound);
      CHECK(lo <= mc);
      CHECK(mc <= hi);
      prev_exact = exact;
      prev_bound = bound;
    }
    CHECK(rows == 16);
    const auto svg = slurp(dir / ("ratio_" + d.family_name() + ".svg"));
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
  }

  const auto again = temp_dir("curves_again");
  emit_ratio_curve(dists, opts, again);
  for (const auto& f : files) CHECK(slurp(f) == slurp(again / f.filename()));
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(again);
}

TEST_CASE("trace summary") {
  ChainTrace empty_block{"multi_dim", {}};
  TraceRecord rec;
  rec.fees = {{1}};
  rec.next_fees = {{0.875}};
  rec.consumption = ResourceVector::zeros(1);
  empty_block.records.push_back(rec);
  auto s = summarize_trace(empty_block);
  CHECK(s.total_welfare == 0);
  CHECK(s.total_tips == 0);
  CHECK(s.total_burn == 0);
  CHECK(s.final_fees == std::vector<double>{0.875});
  CHECK_THROWS_AS(summarize_trace(ChainTrace{}), PreconditionError);

  ChainTrace t{"one_dim", {}};
  for (int k = 0; k < 4; ++k) {
    rec.block = static_cast<std::uint64_t>(k);
    rec.welfare = k;
    rec.tips = 0.5 * k;
    rec.burn = 2;
    t.records.push_back(rec);
  }
  StabilizationResult z{{3, std::nullopt}, std::nullopt};
  auto j = to_json(summarize_trace(t, z));
  CHECK(j["totals"]["welfare"] == 6.0);
  CHECK(j["totals"]["tips"] == 3.0);
  CHECK(j["means"]["burn"] == 2.0);
  CHECK(j["stabilization"]["per_price"][0] == 3);
  CHECK(j["stabilization"]["per_price"][1].is_null());
  CHECK(j["stabilization"]["overall"].is_null());
  CHECK(j.dump() == to_json(summarize_trace(t, z)).dump());
}
