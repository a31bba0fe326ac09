#include "tfm/distributions.h"

#include <cmath>
#include <sstream>

#include "tfm/mechanism.h"

namespace tfm {

DiscreteDist::DiscreteDist(Family family, double a, double b)
    : family_(family), a_(a), b_(b) {}

DiscreteDist DiscreteDist::geometric(double q) {
  if (!(q > 0.0 && q <= 1.0)) throw PreconditionError("geometric q must be in (0, 1]");
  return {Family::geometric, q, 0.0};
}

DiscreteDist DiscreteDist::poisson(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw PreconditionError("poisson lambda must be positive");
  }
  return {Family::poisson, lambda, 0.0};
}

DiscreteDist DiscreteDist::negative_binomial(double r, double q) {
  if (!(r > 0.0) || !std::isfinite(r) || !(q > 0.0 && q < 1.0)) {
    throw PreconditionError("negative binomial needs r > 0 and q in (0, 1)");
  }
  return {Family::negative_binomial, r, q};
}

DiscreteDist DiscreteDist::logarithmic(double q) {
  if (!(q > 0.0 && q < 1.0)) throw PreconditionError("logarithmic q must be in (0, 1)");
  return {Family::logarithmic, q, 0.0};
}

std::string DiscreteDist::family_name() const {
  switch (family_) {
    case Family::geometric:
      return "geometric";
    case Family::poisson:
      return "poisson";
    case Family::negative_binomial:
      return "negative_binomial";
    case Family::logarithmic:
      return "logarithmic";
  }
  return "unknown";
}

std::string DiscreteDist::label() const {
  std::ostringstream os;
  os << family_name() << '(';
  switch (family_) {
    case Family::poisson:
      os << "lambda=" << a_;
      break;
    case Family::negative_binomial:
      os << "r=" << a_ << ",q=" << b_;
      break;
    default:
      os << "q=" << a_;
  }
  os << ')';
  return os.str();
}

double DiscreteDist::log_pmf(std::int64_t k) const {
  const auto kd = static_cast<double>(k);
  switch (family_) {
    case Family::geometric:
      return a_ == 1.0 ? (k == 1 ? 0.0 : -INFINITY)
                       : (kd - 1.0) * std::log1p(-a_) + std::log(a_);
    case Family::poisson:
      return kd * std::log(a_) - a_ - std::lgamma(kd + 1.0);
    case Family::negative_binomial:
      return std::lgamma(kd + a_) - std::lgamma(a_) - std::lgamma(kd + 1.0) +
             a_ * std::log(b_) + kd * std::log1p(-b_);
    case Family::logarithmic:
      return kd * std::log(a_) - std::log(kd) - std::log(-std::log1p(-a_));
  }
  return -INFINITY;
}

double DiscreteDist::pmf(std::int64_t k) const {
  const bool starts_at_one =
      family_ == Family::geometric || family_ == Family::logarithmic;
  if (k < (starts_at_one ? 1 : 0)) return 0.0;
  return std::exp(log_pmf(k));
}

double DiscreteDist::cdf(std::int64_t k) const {
  if (k < 0) return 0.0;
  if (family_ == Family::geometric) {
    return -std::expm1(static_cast<double>(k) * std::log1p(-a_));
  }
  double s = 0.0;
  for (std::int64_t j = 0; j <= k; ++j) s += pmf(j);
  return std::min(1.0, s);
}

double DiscreteDist::tail(std::int64_t k) const {
  if (family_ == Family::geometric) {
    return k <= 1 ? 1.0 : std::exp(static_cast<double>(k - 1) * std::log1p(-a_));
  }
  return std::max(0.0, 1.0 - cdf(k - 1));
}

double DiscreteDist::mean() const {
  switch (family_) {
    case Family::geometric:
      return 1.0 / a_;
    case Family::poisson:
      return a_;
    case Family::negative_binomial:
      return a_ * (1.0 - b_) / b_;
    case Family::logarithmic:
      return -a_ / ((1.0 - a_) * std::log1p(-a_));
  }
  return 0.0;
}

std::int64_t DiscreteDist::sample(std::mt19937_64& rng) const {
  switch (family_) {
    case Family::geometric: {
      std::geometric_distribution<std::int64_t> g(a_);
      return g(rng) + 1;
    }
    case Family::poisson: {
      std::poisson_distribution<std::int64_t> p(a_);
      return p(rng);
    }
    case Family::negative_binomial: {
      // Gamma-Poisson mixture; valid for non-integer r.
      std::gamma_distribution<double> g(a_, (1.0 - b_) / b_);
      const double rate = g(rng);
      if (rate <= 0.0) return 0;
      std::poisson_distribution<std::int64_t> p(rate);
      return p(rng);
    }
    case Family::logarithmic: {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      double x = u(rng);
      std::int64_t k = 1;
      for (double mass = pmf(1); x > mass && k < (1LL << 40); mass = pmf(++k)) {
        x -= mass;
      }
      return k;
    }
  }
  return 0;
}

}  // namespace tfm
