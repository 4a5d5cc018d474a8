#include "qfr/goodness_of_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qfr/distributions.hpp"
#include "qfr/errors.hpp"

namespace qfr {

double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw DomainError("ks_statistic: empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

double kolmogorov_sf(double x) {
  if (!(x > 0.0)) return 1.0;
  if (x < 1.0) {
    // Jacobi theta form of the CDF converges fast for small x.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double cdf = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double m = 2.0 * k - 1.0;
      cdf += std::exp(-m * m * pi2 / (8.0 * x * x));
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / x;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_critical_value(double alpha, std::size_t n) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("ks_critical_value: alpha must lie in (0, 1)");
  if (n == 0) throw DomainError("ks_critical_value: sample size must be positive");
  double lo = 0.0;
  double hi = 5.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (kolmogorov_sf(mid) > alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi) / std::sqrt(static_cast<double>(n));
}

KsResult ks_test(std::span<const double> sample, const std::function<double(double)>& cdf, double alpha) {
  KsResult r;
  r.statistic = ks_statistic(sample, cdf);
  r.critical = ks_critical_value(alpha, sample.size());
  r.p_value = kolmogorov_sf(r.statistic * std::sqrt(static_cast<double>(sample.size())));
  r.passed = r.statistic <= r.critical;
  return r;
}

ChiSquareResult chi_square_test(std::span<const double> observed, std::span<const double> expected, double alpha,
                                double min_expected, std::size_t fitted_params) {
  if (observed.size() != expected.size()) throw DomainError("chi_square_test: size mismatch");
  std::vector<std::pair<double, double>> pooled;
  double o = 0.0;
  double e = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    o += observed[k];
    e += expected[k];
    if (e >= min_expected) {
      pooled.emplace_back(o, e);
      o = 0.0;
      e = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (pooled.empty()) {
      pooled.emplace_back(o, e);
    } else {
      pooled.back().first += o;
      pooled.back().second += e;
    }
  }
  if (pooled.size() < 2 + fitted_params) throw DomainError("chi_square_test: too few bins after pooling");
  ChiSquareResult r;
  for (const auto& [ob, ex] : pooled) r.statistic += (ob - ex) * (ob - ex) / ex;
  r.bins_used = pooled.size();
  r.df = pooled.size() - 1 - fitted_params;
  r.p_value = sf(ChiSquare{static_cast<double>(r.df)}, r.statistic);
  r.passed = r.p_value > alpha;
  return r;
}

}  // namespace qfr
