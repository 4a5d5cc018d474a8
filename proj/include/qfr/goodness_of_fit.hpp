#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace qfr {

// sup |F_n - F| of the sample against a continuous CDF.
double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf);

// Limiting Kolmogorov survival P(K > x).
double kolmogorov_sf(double x);

// Critical value of the KS statistic at level alpha from the limiting law.
double ks_critical_value(double alpha, std::size_t n);

struct KsResult {
  double statistic = 0.0;
  double critical = 0.0;
  double p_value = 0.0;
  bool passed = false;
};

KsResult ks_test(std::span<const double> sample, const std::function<double(double)>& cdf, double alpha = 0.01);

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t df = 0;
  std::size_t bins_used = 0;
  double p_value = 0.0;
  bool passed = false;
};

// Pearson test. Adjacent bins (in the given order) are pooled until each
// expected count reaches min_expected; df = pooled bins - 1 - fitted_params.
ChiSquareResult chi_square_test(std::span<const double> observed, std::span<const double> expected,
                                double alpha = 0.01, double min_expected = 5.0, std::size_t fitted_params = 0);

}  // namespace qfr
