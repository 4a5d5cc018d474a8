#include "qfr/qlm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qfr/distributions.hpp"
#include "qfr/errors.hpp"

namespace qfr {
namespace {

double mean_of(const std::vector<GaussianQuantile>& v, double GaussianQuantile::*field) {
  double s = 0.0;
  for (const auto& g : v) s += g.*field;
  return s / static_cast<double>(v.size());
}

}  // namespace

void QuantilePairDataset::validate() const {
  if (x.size() != y.size()) throw ConsistencyError("dataset: explanatory and response lists differ in length");
  if (x.size() < 3) throw InsufficientDataError("dataset: at least 3 observations are required");
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto& a = x[i];
    const auto& b = y[i];
    if (!std::isfinite(a.mu) || !std::isfinite(a.sigma) || !std::isfinite(b.mu) || !std::isfinite(b.sigma)) {
      throw DomainError("dataset: non-finite parameter at observation " + std::to_string(i + 1));
    }
    if (!(a.sigma > 0.0)) throw DomainError("dataset: sigma_x must be positive at observation " + std::to_string(i + 1));
    if (!(b.sigma > 0.0)) throw DomainError("dataset: sigma_y must be positive at observation " + std::to_string(i + 1));
  }
}

QlmFit fit(const QuantilePairDataset& data) {
  data.validate();
  QlmFit f;
  const std::size_t n = data.size();
  const double nd = static_cast<double>(n);
  f.n = n;
  f.data = data;
  f.mu_x_bar = mean_of(data.x, &GaussianQuantile::mu);
  f.sigma_x_bar = mean_of(data.x, &GaussianQuantile::sigma);
  f.mu_y_bar = mean_of(data.y, &GaussianQuantile::mu);
  f.sigma_y_bar = mean_of(data.y, &GaussianQuantile::sigma);

  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = data.x[i].mu - f.mu_x_bar;
    const double dy = data.y[i].mu - f.mu_y_bar;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  f.w = sxx / nd;
  if (!(f.w > 0.0)) throw DegenerateDesignError("fit: explanatory means are all identical (w = 0)");

  f.beta1 = sxy / sxx;
  f.beta0 = f.mu_y_bar - f.beta1 * f.mu_x_bar;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (data.y[i].mu - f.mu_y_bar) - f.beta1 * (data.x[i].mu - f.mu_x_bar);
    rss += r * r;
  }
  f.sigma2_ml = rss / nd;
  f.sigma2 = nd / (nd - 2.0) * f.sigma2_ml;

  f.beta2_ml = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double ratio = data.y[i].sigma / data.x[i].sigma;
    if (ratio < f.beta2_ml) {
      f.beta2_ml = ratio;
      f.beta2_ml_index = i;
    }
  }
  f.beta_ml = std::max(0.0, f.sigma_y_bar - f.beta2_ml * f.sigma_x_bar);
  f.beta2 = nd / (nd - 1.0) * f.beta2_ml - f.sigma_y_bar / ((nd - 1.0) * f.sigma_x_bar);
  f.beta = nd / (nd - 1.0) * f.beta_ml;

  f.se_beta0 = std::sqrt(f.sigma2 / nd * (1.0 + f.mu_x_bar * f.mu_x_bar / f.w));
  f.se_beta1 = std::sqrt(f.sigma2 / (nd * f.w));
  f.se_beta2 = f.beta / std::sqrt(nd * (nd - 1.0)) / f.sigma_x_bar;
  f.se_beta = f.beta / std::sqrt(nd - 1.0);
  f.se_sigma2 = f.sigma2 * std::sqrt(2.0 / (nd - 2.0));

  if (n == 3) f.warnings.emplace_back("n = 3: t intervals and tests use a single degree of freedom");
  if (f.sigma2_ml <= 1e-24 * (syy / nd + f.mu_y_bar * f.mu_y_bar)) {
    f.warnings.emplace_back("degenerate noise: residual variance of the means is zero");
  }
  if (f.beta_ml <= 1e-12 * f.sigma_y_bar) {
    f.warnings.emplace_back("degenerate noise: scale noise estimate beta is zero; densities are unavailable");
  }
  if (f.beta2 < 0.0) f.warnings.emplace_back("unbiased beta2 estimate is negative");
  return f;
}

ConfidenceIntervals confidence_intervals(const QlmFit& f, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("confidence_intervals: alpha must lie in (0, 1)");
  const double nd = static_cast<double>(f.n);
  const double lo_p = alpha / 2.0;
  const double hi_p = 1.0 - alpha / 2.0;
  ConfidenceIntervals ci;
  ci.alpha = alpha;

  const StudentT t{nd - 2.0};
  const double tq = quantile(t, hi_p);
  ci.beta0 = {f.beta0 - tq * f.se_beta0, f.beta0 + tq * f.se_beta0};
  ci.beta1 = {f.beta1 - tq * f.se_beta1, f.beta1 + tq * f.se_beta1};

  const ChiSquare chi{nd - 2.0};
  const double ss = (nd - 2.0) * f.sigma2;
  ci.sigma2 = {ss / quantile(chi, hi_p), ss / quantile(chi, lo_p)};

  const ParetoII pareto{nd - 1.0, (1.0 - 1.0 / nd) / f.sigma_x_bar};
  const double offset = 1.0 / (nd * f.sigma_x_bar);
  ci.beta2 = {f.beta2 - f.beta * (quantile(pareto, hi_p) - offset),
              f.beta2 - f.beta * (quantile(pareto, lo_p) - offset)};

  const GammaShapeScale gamma{nd - 1.0, 1.0 / (nd - 1.0)};
  ci.beta = {f.beta / quantile(gamma, hi_p), f.beta / quantile(gamma, lo_p)};
  return ci;
}

const CoefficientTest& TestReport::at(const std::string& name) const {
  for (const auto& t : tests) {
    if (t.name == name) return t;
  }
  throw DomainError("test report: no entry named " + name);
}

TestReport summary_tests(const QlmFit& f) {
  const double nd = static_cast<double>(f.n);
  TestReport r;
  r.df = f.df();
  r.warnings = f.warnings;
  const StudentT t{nd - 2.0};
  auto two_sided = [&](const std::string& name, double est, double se) {
    CoefficientTest c{name, est, se, est / se, 0.0, name + " = 0"};
    c.p_value = std::min(1.0, 2.0 * sf(t, std::fabs(c.statistic)));
    return c;
  };
  r.tests.push_back(two_sided("beta0", f.beta0, f.se_beta0));
  r.tests.push_back(two_sided("beta1", f.beta1, f.se_beta1));

  CoefficientTest b2{"beta2", f.beta2, f.se_beta2, (f.beta2 - 1.0) / f.beta, 0.0, "beta2 >= 1"};
  const ParetoII pareto{nd - 1.0, (1.0 - 1.0 / nd) / f.sigma_x_bar};
  b2.p_value = std::isnan(b2.statistic) ? std::numeric_limits<double>::quiet_NaN()
                                        : std::clamp(cdf(pareto, b2.statistic + 1.0 / (nd * f.sigma_x_bar)), 0.0, 1.0);
  r.tests.push_back(b2);

  CoefficientTest s2{"sigma2", f.sigma2, f.se_sigma2, (nd - 2.0) * f.sigma2, 0.0, "sigma2 >= 1"};
  s2.p_value = cdf(ChiSquare{nd - 2.0}, s2.statistic);
  r.tests.push_back(s2);

  CoefficientTest b{"beta", f.beta, f.se_beta, f.beta, 0.0, "beta >= 1"};
  b.p_value = cdf(GammaShapeScale{nd - 1.0, 1.0 / (nd - 1.0)}, b.statistic);
  r.tests.push_back(b);
  return r;
}

std::vector<ResidualPair> residuals(const QlmFit& f, const QuantilePairDataset& data) {
  if (data.x != f.data.x || data.y != f.data.y) {
    throw ConsistencyError("residuals: dataset does not match the one the fit was produced from");
  }
  return residuals(f);
}

std::vector<ResidualPair> residuals(const QlmFit& f) {
  std::vector<ResidualPair> out;
  out.reserve(f.n);
  for (std::size_t i = 0; i < f.n; ++i) {
    const auto& x = f.data.x[i];
    const auto& y = f.data.y[i];
    out.push_back({y.mu - (f.beta0 + f.beta1 * x.mu), y.sigma - f.beta2 * x.sigma});
  }
  return out;
}

GaussianQuantile predict_mean_response(const QlmFit& f, const GaussianQuantile& new_x) {
  if (!std::isfinite(new_x.mu) || !std::isfinite(new_x.sigma)) {
    throw DomainError("predict_mean_response: non-finite explanatory parameters");
  }
  if (!(new_x.sigma > 0.0)) throw DomainError("predict_mean_response: sigma must be positive");
  const GaussianQuantile out{f.beta0 + f.beta1 * new_x.mu, f.beta2 * new_x.sigma + f.beta};
  if (!(out.sigma > 0.0)) {
    throw DegeneratePredictionError("predict_mean_response: predicted sigma " + std::to_string(out.sigma) +
                                    " is not positive");
  }
  return out;
}

}  // namespace qfr
