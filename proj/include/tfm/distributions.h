#pragma once

// Discrete distributions used as stabilization-time models.

#include <cstdint>
#include <random>
#include <string>

namespace tfm {

/// Geometric(q) and Logarithmic(q) live on {1, 2, ...}; Poisson(lambda) and
/// NegativeBinomial(r, q) (failures before the r-th success with success
/// probability q) on {0, 1, ...}.
class DiscreteDist {
 public:
  enum class Family { geometric, poisson, negative_binomial, logarithmic };

  static DiscreteDist geometric(double q);
  static DiscreteDist poisson(double lambda);
  static DiscreteDist negative_binomial(double r, double q);
  static DiscreteDist logarithmic(double q);

  Family family() const { return family_; }
  /// e.g. "geometric(q=0.5)"
  std::string label() const;
  /// e.g. "geometric"
  std::string family_name() const;

  double pmf(std::int64_t k) const;
  double cdf(std::int64_t k) const;
  /// P[Z >= k]
  double tail(std::int64_t k) const;
  double mean() const;
  std::int64_t sample(std::mt19937_64& rng) const;

 private:
  DiscreteDist(Family family, double a, double b);
  double log_pmf(std::int64_t k) const;

  Family family_;
  double a_;  // q, lambda or r
  double b_;  // q for the negative binomial
};

}  // namespace tfm
