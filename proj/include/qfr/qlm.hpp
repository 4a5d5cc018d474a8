#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qfr/quantile_encoding.hpp"

namespace qfr {

struct QuantilePairDataset {
  std::vector<GaussianQuantile> x;  // explanatory
  std::vector<GaussianQuantile> y;  // response

  std::size_t size() const { return x.size(); }
  // Throws when the fit preconditions fail.
  void validate() const;
};

struct QlmFit {
  std::size_t n = 0;
  double mu_x_bar = 0.0;
  double sigma_x_bar = 0.0;
  double mu_y_bar = 0.0;
  double sigma_y_bar = 0.0;
  double w = 0.0;  // (1/n) sum (mu_x - mu_x_bar)^2

  double beta0 = 0.0;
  double beta1 = 0.0;
  double sigma2_ml = 0.0;
  double sigma2 = 0.0;
  double beta2_ml = 0.0;
  double beta2 = 0.0;
  double beta_ml = 0.0;
  double beta = 0.0;
  std::size_t beta2_ml_index = 0;  // smallest i attaining min sigma_y/sigma_x

  double se_beta0 = 0.0;
  double se_beta1 = 0.0;
  double se_beta2 = 0.0;
  double se_sigma2 = 0.0;
  double se_beta = 0.0;

  QuantilePairDataset data;
  std::vector<std::string> warnings;

  std::size_t df() const { return n - 2; }
};

QlmFit fit(const QuantilePairDataset& data);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return lo <= v && v <= hi; }
};

struct ConfidenceIntervals {
  double alpha = 0.05;
  Interval beta0;
  Interval beta1;
  Interval beta2;
  Interval sigma2;
  Interval beta;
};

ConfidenceIntervals confidence_intervals(const QlmFit& fit, double alpha);

struct CoefficientTest {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double statistic = 0.0;
  double p_value = 0.0;
  std::string null_hypothesis;
};

struct TestReport {
  std::vector<CoefficientTest> tests;  // beta0, beta1, beta2, sigma2, beta
  std::size_t df = 0;
  std::vector<std::string> warnings;

  const CoefficientTest& at(const std::string& name) const;
};

TestReport summary_tests(const QlmFit& fit);

struct ResidualPair {
  double mu_e = 0.0;
  double sigma_e = 0.0;
};

std::vector<ResidualPair> residuals(const QlmFit& fit, const QuantilePairDataset& data);
std::vector<ResidualPair> residuals(const QlmFit& fit);

GaussianQuantile predict_mean_response(const QlmFit& fit, const GaussianQuantile& new_x);

}  // namespace qfr
