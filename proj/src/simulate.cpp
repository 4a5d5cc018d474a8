#include "qfr/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <mutex>
#include <cmath>
#include <numeric>
#include <thread>

#include "qfr/density.hpp"
#include "qfr/distributions.hpp"
#include "qfr/errors.hpp"
#include "qfr/goodness_of_fit.hpp"
#include "qfr/quadrature.hpp"
#include "qfr/special_functions.hpp"

namespace qfr {
namespace {

constexpr double kKsLevel = 0.01;

struct RepOutcome {
  double sigma2_ml_scaled = 0.0;
  double beta2_ml = 0.0;
  double beta_ml = 0.0;
  double beta_ratio = 0.0;
  double beta2_pivot = 0.0;
  double t_beta0 = 0.0;
  double t_beta1 = 0.0;
  std::array<bool, 5> covered{};
  std::array<double, 5> estimates{};
};

CheckResult ks_check(const std::string& name, const std::string& description, std::span<const double> sample,
                     const DistSpec& dist) {
  const auto r = ks_test(sample, [&dist](double x) { return cdf(dist, x); }, kKsLevel);
  return {name, description + " ~ " + describe(dist), r.statistic, r.critical, r.p_value, r.passed};
}

void require_reps(std::size_t reps) {
  if (reps < kMinReplications) {
    throw InsufficientDataError("Monte-Carlo check needs at least " + std::to_string(kMinReplications) +
                                " replications; got " + std::to_string(reps));
  }
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream) {
  // Stream k starts SplitMix64 at seed + k * golden gamma and takes one output.
  std::uint64_t state = seed + stream * 0x9E3779B97F4A7C15ULL;
  engine_.seed(splitmix64(state));
}

double RandomStream::uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

double RandomStream::normal() { return std_normal_quantile(uniform()); }

double RandomStream::exponential() { return -std::log(uniform()); }

void QneParams::validate() const {
  if (!std::isfinite(mu)) throw DomainError("QNE: mu must be finite");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("QNE: sigma2 must be positive");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("QNE: beta must be positive");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw DomainError("QNE: delta must be nonnegative");
}

std::vector<QneDraw> sample_qne(const QneParams& params, std::size_t count, std::uint64_t seed) {
  params.validate();
  if (count == 0) throw DomainError("sample_qne: count must be positive");
  RandomStream rng(seed);
  const double sd = std::sqrt(params.sigma2);
  std::vector<QneDraw> out(count);
  for (auto& d : out) {
    d.mu_e = params.mu + sd * rng.normal();
    d.sigma_e = params.delta + params.beta * rng.exponential();
  }
  return out;
}

void TrueModel::validate() const {
  if (!std::isfinite(beta0) || !std::isfinite(beta1)) throw DomainError("truth: beta0 and beta1 must be finite");
  if (!(beta2 > 0.0) || !std::isfinite(beta2)) throw DomainError("truth: beta2 must be positive");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("truth: sigma2 must be positive");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("truth: beta must be positive");
  if (design.size() < 3) throw InsufficientDataError("truth: design needs at least 3 points");
  for (const auto& g : design) {
    if (!std::isfinite(g.mu) || !(g.sigma > 0.0)) throw DomainError("truth: design sigmas must be positive");
  }
}

double TrueModel::sigma_x_bar() const {
  double s = 0.0;
  for (const auto& g : design) s += g.sigma;
  return s / static_cast<double>(design.size());
}

QuantilePairDataset sample_model(const TrueModel& truth, RandomStream& rng) {
  truth.validate();
  QuantilePairDataset data;
  data.x = truth.design;
  data.y.reserve(truth.design.size());
  const double sd = std::sqrt(truth.sigma2);
  for (const auto& x : truth.design) {
    const double mu_e = sd * rng.normal();
    const double sigma_e = truth.beta * rng.exponential();
    data.y.push_back({truth.beta0 + truth.beta1 * x.mu + mu_e, truth.beta2 * x.sigma + sigma_e});
  }
  return data;
}

QuantilePairDataset sample_model(const TrueModel& truth, std::uint64_t seed) {
  RandomStream rng(seed);
  return sample_model(truth, rng);
}

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::mutex failure_mutex;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

ValidationReport mc_estimator_check(const TrueModel& truth, std::size_t reps, std::uint64_t seed, double alpha) {
  truth.validate();
  require_reps(reps);
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("mc_estimator_check: alpha must lie in (0, 1)");
  const std::size_t n = truth.design.size();
  const double nd = static_cast<double>(n);
  const double sbar = truth.sigma_x_bar();
  const std::array<double, 5> true_values = {truth.beta0, truth.beta1, truth.sigma2, truth.beta2, truth.beta};

  std::vector<RepOutcome> outcomes(reps);
  parallel_for(reps, [&](std::size_t r) {
    RandomStream rng(seed, r);
    const QlmFit f = fit(sample_model(truth, rng));
    const auto ci = confidence_intervals(f, alpha);
    RepOutcome& o = outcomes[r];
    o.sigma2_ml_scaled = nd / truth.sigma2 * f.sigma2_ml;
    o.beta2_ml = f.beta2_ml;
    o.beta_ml = f.beta_ml;
    o.beta_ratio = f.beta / truth.beta;
    o.beta2_pivot = (f.beta2 - truth.beta2) / f.beta + 1.0 / (nd * sbar);
    o.t_beta0 = (f.beta0 - truth.beta0) / f.se_beta0;
    o.t_beta1 = (f.beta1 - truth.beta1) / f.se_beta1;
    o.covered = {ci.beta0.contains(truth.beta0), ci.beta1.contains(truth.beta1), ci.sigma2.contains(truth.sigma2),
                 ci.beta2.contains(truth.beta2), ci.beta.contains(truth.beta)};
    o.estimates = {f.beta0, f.beta1, f.sigma2, f.beta2, f.beta};
  });

  auto column = [&](double RepOutcome::*field) {
    std::vector<double> v(reps);
    for (std::size_t r = 0; r < reps; ++r) v[r] = outcomes[r].*field;
    return v;
  };

  ValidationReport report;
  report.seed = seed;
  report.reps = reps;
  report.n = n;
  report.alpha = alpha;
  auto& c = report.checks;
  c.push_back(ks_check("a_sigma2_ml", "n sigma2_ml / sigma2", column(&RepOutcome::sigma2_ml_scaled),
                       ChiSquare{nd - 2.0}));
  c.push_back(ks_check("b_beta2_ml", "beta2_ml", column(&RepOutcome::beta2_ml),
                       ShiftedExp{truth.beta / (nd * sbar), truth.beta2}));
  c.push_back(ks_check("c_beta_ml", "beta_ml", column(&RepOutcome::beta_ml), GammaShapeScale{nd - 1.0, truth.beta / nd}));
  c.push_back(ks_check("d_beta_ratio", "beta_hat / beta", column(&RepOutcome::beta_ratio),
                       GammaShapeScale{nd - 1.0, 1.0 / (nd - 1.0)}));
  c.push_back(ks_check("e_beta2_pivot", "(beta2_hat - beta2) / beta_hat + 1/(n sigma_x_bar)",
                       column(&RepOutcome::beta2_pivot), ParetoII{nd - 1.0, (1.0 - 1.0 / nd) / sbar}));
  c.push_back(ks_check("f_t_beta0", "(beta0_hat - beta0) / se", column(&RepOutcome::t_beta0), StudentT{nd - 2.0}));
  c.push_back(ks_check("f_t_beta1", "(beta1_hat - beta1) / se", column(&RepOutcome::t_beta1), StudentT{nd - 2.0}));

  const std::array<const char*, 5> names = {"beta0", "beta1", "sigma2", "beta2", "beta"};
  const double target = 1.0 - alpha;
  const double cover_sd = std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(reps));
  for (std::size_t k = 0; k < 5; ++k) {
    std::size_t hits = 0;
    for (const auto& o : outcomes) hits += o.covered[k] ? 1 : 0;
    const double rate = static_cast<double>(hits) / static_cast<double>(reps);
    const double z = (rate - target) / cover_sd;
    c.push_back({std::string("g_coverage_") + names[k],
                 "empirical coverage of the exact interval, target " + std::to_string(target), rate, 3.0 * cover_sd,
                 2.0 * std_normal_sf(std::fabs(z)), std::fabs(rate - target) <= 3.0 * cover_sd});
  }
  for (std::size_t k = 0; k < 5; ++k) {
    double mean = 0.0;
    for (const auto& o : outcomes) mean += o.estimates[k];
    mean /= static_cast<double>(reps);
    double ss = 0.0;
    for (const auto& o : outcomes) ss += (o.estimates[k] - mean) * (o.estimates[k] - mean);
    const double se = std::sqrt(ss / static_cast<double>(reps - 1) / static_cast<double>(reps));
    const double bias = mean - true_values[k];
    c.push_back({std::string("h_bias_") + names[k], "mean estimate minus truth against 4 Monte-Carlo se", bias,
                 4.0 * se, 2.0 * std_normal_sf(std::fabs(bias) / se), std::fabs(bias) <= 4.0 * se});
  }
  return report;
}

CheckResult mc_residual_law_check(const TrueModel& truth, std::size_t index, std::size_t reps, std::uint64_t seed) {
  truth.validate();
  require_reps(reps);
  if (index >= truth.design.size()) throw DomainError("mc_residual_law_check: index out of range");
  std::vector<double> sample(reps);
  parallel_for(reps, [&](std::size_t r) {
    RandomStream rng(seed, r);
    const QlmFit f = fit(sample_model(truth, rng));
    sample[r] = f.data.y[index].sigma - f.beta2 * f.data.x[index].sigma;
  });
  const ResidualScaleLaw law(truth.design.size(), truth.design[index].sigma, truth.sigma_x_bar(), truth.beta);
  const auto r = ks_test(sample, [&law](double t) { return law.cdf(t); }, kKsLevel);
  return {"residual_scale_law_" + std::to_string(index + 1), "residual scale against its exact law", r.statistic,
          r.critical, r.p_value, r.passed};
}

CheckResult mc_independence_check(const TrueModel& truth, std::size_t index, std::size_t reps, std::uint64_t seed) {
  truth.validate();
  require_reps(reps);
  if (index >= truth.design.size()) throw DomainError("mc_independence_check: index out of range");
  std::vector<double> mu(reps);
  std::vector<double> sigma(reps);
  parallel_for(reps, [&](std::size_t r) {
    RandomStream rng(seed, r);
    const auto data = sample_model(truth, rng);
    mu[r] = data.y[index].mu;
    sigma[r] = data.y[index].sigma;
  });
  const double rd = static_cast<double>(reps);
  const double mm = std::accumulate(mu.begin(), mu.end(), 0.0) / rd;
  const double ms = std::accumulate(sigma.begin(), sigma.end(), 0.0) / rd;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    sxy += (mu[r] - mm) * (sigma[r] - ms);
    sxx += (mu[r] - mm) * (mu[r] - mm);
    syy += (sigma[r] - ms) * (sigma[r] - ms);
  }
  const double rho = sxy / std::sqrt(sxx * syy);
  const double bound = 4.0 / std::sqrt(rd);
  return {"independence_" + std::to_string(index + 1), "correlation of response mean and scale", rho, bound,
          2.0 * std_normal_sf(std::fabs(rho) * std::sqrt(rd)), std::fabs(rho) <= bound};
}

CheckResult mc_chebyshev_check(const TrueModel& truth, double eps, std::size_t reps, std::uint64_t seed) {
  truth.validate();
  require_reps(reps);
  if (!(eps > 0.0)) throw DomainError("mc_chebyshev_check: eps must be positive");
  std::vector<char> below(reps);
  parallel_for(reps, [&](std::size_t r) {
    RandomStream rng(seed, r);
    below[r] = fit(sample_model(truth, rng)).beta2 < truth.beta2 - eps ? 1 : 0;
  });
  const double nd = static_cast<double>(truth.design.size());
  const double sbar = truth.sigma_x_bar();
  const double bound = truth.beta * truth.beta / (nd * (nd - 1.0) * eps * eps * sbar * sbar);
  const double freq = static_cast<double>(std::count(below.begin(), below.end(), 1)) / static_cast<double>(reps);
  const double b = std::min(bound, 1.0);
  const double limit = bound + 3.0 * std::sqrt(b * (1.0 - b) / static_cast<double>(reps));
  return {"chebyshev", "P(beta2_hat < beta2 - eps) against the Chebyshev bound", freq, limit, 1.0, freq <= limit};
}

double lemma_b1_density(std::span<const double> thetas, double x, double y) {
  if (thetas.size() < 2) throw DomainError("lemma_b1_density: need at least two rates");
  double c = 0.0;
  for (double t : thetas) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("lemma_b1_density: thetas must be positive");
    c += 1.0 / t;
  }
  const double nd = static_cast<double>(thetas.size());
  // Support: the minimum and the mean of positive variables are positive.
  if (!(x > 0.0 && y > 0.0 && c * x < nd * y)) return 0.0;
  return std::exp(std::log(nd) + std::log(c) + (nd - 2.0) * std::log(nd * y - c * x) - nd * y - std::lgamma(nd - 1.0));
}

double lemma_b1_survival(std::span<const double> thetas, double x, double y) {
  if (thetas.size() < 2) throw DomainError("lemma_b1_survival: need at least two rates");
  double c = 0.0;
  for (double t : thetas) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("lemma_b1_survival: thetas must be positive");
    c += 1.0 / t;
  }
  const double nd = static_cast<double>(thetas.size());
  const double xc = std::max(x, 0.0) * c;
  return std::exp(-xc) * reg_upper_gamma(nd, std::max(0.0, nd * y - xc));
}

double corollary_b2_density(std::span<const double> thetas, const Matrix2& a, double u, double v) {
  const double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
  if (!(std::fabs(det) > 0.0) || !std::isfinite(det)) throw DomainError("corollary_b2_density: matrix is singular");
  const double x = (a[1][1] * u - a[0][1] * v) / det;
  const double y = (-a[1][0] * u + a[0][0] * v) / det;
  return lemma_b1_density(thetas, x, y) / std::fabs(det);
}

std::vector<PairDraw> sample_min_mean(std::span<const double> thetas, std::size_t count, std::uint64_t seed) {
  if (thetas.size() < 2) throw DomainError("sample_min_mean: need at least two rates");
  RandomStream rng(seed);
  std::vector<PairDraw> out(count);
  for (auto& d : out) {
    double mn = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (double t : thetas) {
      const double e = rng.exponential();
      mn = std::min(mn, t * e);
      sum += e;
    }
    d = {mn, sum / static_cast<double>(thetas.size())};
  }
  return out;
}

CheckResult gof_2d(std::span<const PairDraw> draws, const std::function<double(double, double)>& density,
                   std::size_t bins_per_axis, const std::string& name, double alpha) {
  if (draws.size() < 100 || bins_per_axis < 2) throw DomainError("gof_2d: too few draws or bins");
  auto edges_of = [&](auto proj) {
    std::vector<double> v(draws.size());
    std::transform(draws.begin(), draws.end(), v.begin(), proj);
    std::sort(v.begin(), v.end());
    const double pad = 0.05 * (v.back() - v.front());
    std::vector<double> e{v.front() - pad};
    for (std::size_t k = 1; k < bins_per_axis; ++k) e.push_back(v[k * v.size() / bins_per_axis]);
    e.push_back(v.back() + pad);
    return e;
  };
  const auto xe = edges_of([](const PairDraw& d) { return d.first; });
  const auto ye = edges_of([](const PairDraw& d) { return d.second; });
  const std::size_t b = bins_per_axis;
  std::vector<double> observed(b * b, 0.0);
  for (const auto& d : draws) {
    const auto i = std::min<std::size_t>(b - 1, static_cast<std::size_t>(std::upper_bound(xe.begin() + 1, xe.end() - 1, d.first) - xe.begin() - 1));
    const auto j = std::min<std::size_t>(b - 1, static_cast<std::size_t>(std::upper_bound(ye.begin() + 1, ye.end() - 1, d.second) - ye.begin() - 1));
    observed[i * b + j] += 1.0;
  }
  std::vector<double> expected(b * b, 0.0);
  Cubature2DOptions opts;
  opts.abs_tol = 1e-8;
  opts.max_cells = 200000;
  const double total = static_cast<double>(draws.size());
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      const std::array<double, 2> xs = {xe[i], xe[i + 1]};
      const std::array<double, 2> ys = {ye[j], ye[j + 1]};
      expected[i * b + j] = total * integrate_2d(density, xs, ys, opts).value;
    }
  }
  const auto r = chi_square_test(observed, expected, alpha);
  return {name, "2-D chi-square goodness of fit, df " + std::to_string(r.df), r.statistic,
          quantile(ChiSquare{static_cast<double>(r.df)}, 1.0 - alpha), r.p_value, r.passed};
}

}  // namespace qfr
