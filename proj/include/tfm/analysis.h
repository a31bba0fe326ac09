#pragma once

// Expectation-ratio computations (exact summation, Monte Carlo, theoretical
// lower bound), ratio-curve files and trace summaries.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tfm/distributions.h"
#include "tfm/simulation.h"

namespace tfm {

inline constexpr double kSeriesTruncation = 1e-12;

/// E[max of m iid draws] / E[Z], both from sum_k (1 - cdf(k)^m).
double exact_ratio_iid(const DiscreteDist& dist, int m);

struct McEstimate {
  double estimate = 0.0;
  Interval ci;  // 95%, normal approximation of the mean of maxima
};

/// Monte Carlo version of exact_ratio_iid; the denominator is the exact mean.
McEstimate mc_ratio_iid(const DiscreteDist& dist, int m, std::size_t n_samples,
                        std::uint64_t seed);

/// (1 + c)(p - delta)(1 - (1 - p - delta)^(m - 1)) / (p + delta), clamped at 0.
/// Requires c > 0, 0 <= delta < p and p + delta < 1.
double theoretical_ratio_lower_bound(double c, double p, double delta, int m);

/// Fraction of samples >= (1 + c) * sample mean.
double tail_probability(std::span<const double> samples, double c);

struct RatioPoint {
  int m = 1;
  double exact = 0.0;
  double mc = 0.0;
  Interval ci;
  double bound = 0.0;
};

struct RatioCurve {
  std::string distribution;
  std::vector<RatioPoint> points;
};

struct RatioCurveOptions {
  int m_max = 16;
  std::size_t n_samples = 100'000;
  std::uint64_t seed = 0;
  double bound_c = 1.0;  // tail parameter for the bound column
};

/// Curve for m = 1..m_max. The bound column uses the exact tail probability
/// p = P[Z >= (1 + c) E[Z]] and delta = 0 (identical distributions).
RatioCurve compute_ratio_curve(const DiscreteDist& dist,
                               const RatioCurveOptions& opts);

std::string ratio_curve_csv(const RatioCurve& curve);
std::string ratio_curve_svg(const RatioCurve& curve);

/// The four default families used for ratio curves.
std::vector<DiscreteDist> default_distributions();

/// Writes ratio_<family>.csv and ratio_<family>.svg per distribution and
/// returns the written paths.
std::vector<std::filesystem::path> emit_ratio_curve(
    std::span<const DiscreteDist> dists, const RatioCurveOptions& opts,
    const std::filesystem::path& out_dir);

struct TraceSummary {
  std::string mechanism;
  std::size_t blocks = 0;
  double total_welfare = 0.0;
  double total_tips = 0.0;
  double total_burn = 0.0;
  double mean_welfare = 0.0;
  double mean_tips = 0.0;
  double mean_burn = 0.0;
  std::vector<double> final_fees;
  std::optional<StabilizationResult> stabilization;
};

TraceSummary summarize_trace(const ChainTrace& trace,
                             std::optional<StabilizationResult> stab = {});
nlohmann::ordered_json to_json(const TraceSummary& summary);
nlohmann::ordered_json to_json(const StabilizationResult& stab);

}  // namespace tfm
