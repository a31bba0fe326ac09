#include "tfm/analysis.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tfm {
namespace {

constexpr std::int64_t kMaxSeriesTerms = 100'000'000;

// Sum_{k>=0} (1 - cdf(k)^m), accumulating the cdf incrementally.
double expected_max(const DiscreteDist& dist, int m) {
  double cdf = 0.0;
  double total = 0.0;
  for (std::int64_t k = 0; k < kMaxSeriesTerms; ++k) {
    cdf = std::min(1.0, cdf + dist.pmf(k));
    const double term = cdf <= 0.0 ? 1.0 : -std::expm1(m * std::log(cdf));
    if (term < kSeriesTruncation) return total + term;
    total += term;
  }
  throw std::runtime_error("expected-maximum series did not converge for " +
                           dist.label());
}

std::string short_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

double exact_ratio_iid(const DiscreteDist& dist, int m) {
  if (m < 1) throw PreconditionError("m must be at least 1");
  if (m == 1) return 1.0;
  return expected_max(dist, m) / expected_max(dist, 1);
}

McEstimate mc_ratio_iid(const DiscreteDist& dist, int m, std::size_t n_samples,
                        std::uint64_t seed) {
  if (m < 1) throw PreconditionError("m must be at least 1");
  if (n_samples < 1000) throw PreconditionError("n_samples must be at least 1000");
  Rng rng(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    std::int64_t best = dist.sample(rng);
    for (int j = 1; j < m; ++j) best = std::max(best, dist.sample(rng));
    const auto x = static_cast<double>(best);
    sum += x;
    sum_sq += x * x;
  }
  const auto n = static_cast<double>(n_samples);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
  const double half = 1.959963984540054 * std::sqrt(var / n);
  const double ez = expected_max(dist, 1);
  return {mean / ez, {(mean - half) / ez, (mean + half) / ez}};
}

double theoretical_ratio_lower_bound(double c, double p, double delta, int m) {
  if (!(c > 0.0) || !std::isfinite(c)) throw PreconditionError("c must be positive");
  if (!(p > 0.0 && p < 1.0)) throw PreconditionError("p must be in (0, 1)");
  if (!(delta >= 0.0 && delta < 1.0)) throw PreconditionError("delta must be in [0, 1)");
  if (!(p > delta)) throw PreconditionError("p must exceed delta");
  if (!(p + delta < 1.0)) throw PreconditionError("p + delta must be below 1");
  if (m < 1) throw PreconditionError("m must be at least 1");
  const double miss = std::pow(1.0 - p - delta, m - 1);
  return std::max(0.0, (1.0 + c) * (p - delta) * (1.0 - miss) / (p + delta));
}

double tail_probability(std::span<const double> samples, double c) {
  if (samples.empty()) throw PreconditionError("tail_probability needs samples");
  const double threshold = (1.0 + c) * mean_of(samples);
  const auto hits = std::count_if(samples.begin(), samples.end(),
                                  [&](double x) { return x >= threshold; });
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

RatioCurve compute_ratio_curve(const DiscreteDist& dist,
                               const RatioCurveOptions& opts) {
  if (opts.m_max < 1) throw PreconditionError("m_max must be at least 1");
  RatioCurve curve{dist.label(), {}};
  const double threshold = (1.0 + opts.bound_c) * dist.mean();
  const double p = dist.tail(static_cast<std::int64_t>(std::ceil(threshold)));
  const std::uint64_t family_seed =
      mix_seed(opts.seed, static_cast<std::uint64_t>(dist.family()));
  for (int m = 1; m <= opts.m_max; ++m) {
    RatioPoint pt;
    pt.m = m;
    pt.exact = exact_ratio_iid(dist, m);
    const McEstimate mc = mc_ratio_iid(dist, m, opts.n_samples,
                                       mix_seed(family_seed, static_cast<std::uint64_t>(m)));
    pt.mc = mc.estimate;
    pt.ci = mc.ci;
    pt.bound = (p > 0.0 && p < 1.0)
                   ? theoretical_ratio_lower_bound(opts.bound_c, p, 0.0, m)
                   : 0.0;
    curve.points.push_back(pt);
  }
  return curve;
}

std::string ratio_curve_csv(const RatioCurve& curve) {
  std::ostringstream os;
  os << "m,exact,mc,ci_lo,ci_hi,bound\n";
  for (const auto& pt : curve.points) {
    os << pt.m << ',' << format_real(pt.exact) << ',' << format_real(pt.mc) << ','
       << format_real(pt.ci.lo) << ',' << format_real(pt.ci.hi) << ','
       << format_real(pt.bound) << '\n';
  }
  return os.str();
}

std::string ratio_curve_svg(const RatioCurve& curve) {
  constexpr double kW = 640, kH = 400, kLeft = 60, kRight = 160, kTop = 40,
                   kBottom = 50;
  const double plot_w = kW - kLeft - kRight;
  const double plot_h = kH - kTop - kBottom;
  const int m_lo = curve.points.empty() ? 1 : curve.points.front().m;
  const int m_hi = curve.points.empty() ? 1 : curve.points.back().m;
  double y_max = 1.0;
  for (const auto& pt : curve.points) {
    y_max = std::max({y_max, pt.exact, pt.ci.hi, pt.bound});
  }
  y_max = std::ceil(y_max * 1.1 * 2.0) / 2.0;
  auto sx = [&](double m) {
    return kLeft + (m_hi == m_lo ? 0.0 : (m - m_lo) / (m_hi - m_lo) * plot_w);
  };
  auto sy = [&](double y) { return kTop + plot_h - y / y_max * plot_h; };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kW
     << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"15\">"
     << curve.distribution << "</text>\n";

  // Axes and ticks.
  os << "<g stroke=\"black\" stroke-width=\"1\">\n"
     << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\""
     << kLeft + plot_w << "\" y2=\"" << kTop + plot_h << "\"/>\n"
     << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
     << "\" y2=\"" << kTop + plot_h << "\"/>\n</g>\n";
  os << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int m = m_lo; m <= m_hi; ++m) {
    os << "<text x=\"" << short_real(sx(m)) << "\" y=\"" << kTop + plot_h + 16
       << "\" text-anchor=\"middle\">" << m << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double y = y_max * i / 5.0;
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << short_real(sy(y) + 4)
       << "\" text-anchor=\"end\">" << short_real(y) << "</text>\n";
  }
  os << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kH - 12
     << "\" text-anchor=\"middle\">m</text>\n"
     << "<text x=\"16\" y=\"" << kTop + plot_h / 2
     << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << kTop + plot_h / 2
     << ")\">ratio</text>\n</g>\n";

  struct Series {
    const char* name;
    const char* color;
    const char* dash;
    double RatioPoint::*field;
  };
  const Series series[] = {{"exact", "#1f77b4", "", &RatioPoint::exact},
                           {"monte carlo", "#ff7f0e", "4 3", &RatioPoint::mc},
                           {"lower bound", "#2ca02c", "2 2", &RatioPoint::bound}};
  int row = 0;
  for (const auto& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\"";
    if (*s.dash) os << " stroke-dasharray=\"" << s.dash << '"';
    os << " points=\"";
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
      const auto& pt = curve.points[i];
      if (i) os << ' ';
      os << short_real(sx(pt.m)) << ',' << short_real(sy(pt.*s.field));
    }
    os << "\"/>\n";
    const double ly = kTop + 10 + 20 * row++;
    os << "<line x1=\"" << kLeft + plot_w + 15 << "\" y1=\"" << ly << "\" x2=\""
       << kLeft + plot_w + 45 << "\" y2=\"" << ly << "\" stroke=\"" << s.color
       << "\" stroke-width=\"2\"";
    if (*s.dash) os << " stroke-dasharray=\"" << s.dash << '"';
    os << "/>\n<text x=\"" << kLeft + plot_w + 52 << "\" y=\"" << ly + 4
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.name << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<DiscreteDist> default_distributions() {
  return {DiscreteDist::geometric(0.5), DiscreteDist::poisson(5.0),
          DiscreteDist::negative_binomial(3.0, 0.5), DiscreteDist::logarithmic(0.7)};
}

std::vector<std::filesystem::path> emit_ratio_curve(
    std::span<const DiscreteDist> dists, const RatioCurveOptions& opts,
    const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  auto write = [&](const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    out << body;
    if (!out) throw std::runtime_error("cannot write " + path.string());
    written.push_back(path);
  };
  for (const auto& dist : dists) {
    const RatioCurve curve = compute_ratio_curve(dist, opts);
    const std::string stem = "ratio_" + dist.family_name();
    write(out_dir / (stem + ".csv"), ratio_curve_csv(curve));
    write(out_dir / (stem + ".svg"), ratio_curve_svg(curve));
  }
  return written;
}

TraceSummary summarize_trace(const ChainTrace& trace,
                             std::optional<StabilizationResult> stab) {
  if (trace.records.empty()) throw PreconditionError("trace has no blocks");
  TraceSummary s;
  s.mechanism = trace.mechanism;
  s.blocks = trace.records.size();
  for (const auto& rec : trace.records) {
    s.total_welfare += rec.welfare;
    s.total_tips += rec.tips;
    s.total_burn += rec.burn;
  }
  const auto n = static_cast<double>(s.blocks);
  s.mean_welfare = s.total_welfare / n;
  s.mean_tips = s.total_tips / n;
  s.mean_burn = s.total_burn / n;
  s.final_fees = trace.records.back().next_fees.fees;
  s.stabilization = std::move(stab);
  return s;
}

nlohmann::ordered_json to_json(const StabilizationResult& stab) {
  nlohmann::ordered_json j;
  auto opt = [](const std::optional<std::size_t>& z) -> nlohmann::ordered_json {
    return z ? nlohmann::ordered_json(*z) : nlohmann::ordered_json(nullptr);
  };
  j["overall"] = opt(stab.overall);
  j["per_price"] = nlohmann::ordered_json::array();
  for (const auto& z : stab.per_price) j["per_price"].push_back(opt(z));
  return j;
}

nlohmann::ordered_json to_json(const TraceSummary& s) {
  nlohmann::ordered_json j;
  j["mechanism"] = s.mechanism;
  j["blocks"] = s.blocks;
  j["totals"] = {{"welfare", s.total_welfare}, {"tips", s.total_tips},
                 {"burn", s.total_burn}};
  j["means"] = {{"welfare", s.mean_welfare}, {"tips", s.mean_tips},
                {"burn", s.mean_burn}};
  j["final_fees"] = s.final_fees;
  j["stabilization"] =
      s.stabilization ? to_json(*s.stabilization) : nlohmann::ordered_json(nullptr);
  return j;
}

}  // namespace tfm
