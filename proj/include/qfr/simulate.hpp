#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qfr/qlm.hpp"

namespace qfr {

inline constexpr const char* kRngAlgorithm = "mt19937_64+splitmix64-substreams-v1";

std::uint64_t splitmix64(std::uint64_t& state);

// One deterministic sub-stream: std::mt19937_64 seeded with the SplitMix64
// hash of (seed, stream). Uniforms are taken from the top 53 bits.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0);

  // Uniform on the open interval (0, 1).
  double uniform();
  // Standard normal by inversion, one uniform per draw.
  double normal();
  // Exp(1) by inversion.
  double exponential();

 private:
  std::mt19937_64 engine_;
};

struct QneParams {
  double mu = 0.0;
  double sigma2 = 1.0;
  double beta = 1.0;
  double delta = 0.0;

  void validate() const;
};

struct QneDraw {
  double mu_e = 0.0;
  double sigma_e = 0.0;
};

std::vector<QneDraw> sample_qne(const QneParams& params, std::size_t count, std::uint64_t seed);

struct TrueModel {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double beta2 = 1.0;
  double sigma2 = 1.0;
  double beta = 1.0;
  std::vector<GaussianQuantile> design;

  void validate() const;
  double sigma_x_bar() const;
};

QuantilePairDataset sample_model(const TrueModel& truth, RandomStream& rng);
QuantilePairDataset sample_model(const TrueModel& truth, std::uint64_t seed);

struct CheckResult {
  std::string name;
  std::string description;
  double statistic = 0.0;
  double critical = 0.0;
  double p_value = 0.0;
  bool passed = false;
};

struct ValidationReport {
  std::string algorithm = kRngAlgorithm;
  std::uint64_t seed = 0;
  std::size_t reps = 0;
  std::size_t n = 0;
  double alpha = 0.05;
  std::vector<CheckResult> checks;

  bool passed() const;
};

inline constexpr std::size_t kMinReplications = 1000;

// Monte-Carlo validation of the sampling laws of every estimator and pivot,
// the exact intervals at level 1 - alpha, and unbiasedness. KS checks use the 1% level.
ValidationReport mc_estimator_check(const TrueModel& truth, std::size_t reps, std::uint64_t seed, double alpha = 0.05);

// KS of the residual scale of observation `index` against its exact law.
CheckResult mc_residual_law_check(const TrueModel& truth, std::size_t index, std::size_t reps, std::uint64_t seed);

// Correlation of the response mean and scale of observation `index` across replications.
CheckResult mc_independence_check(const TrueModel& truth, std::size_t index, std::size_t reps, std::uint64_t seed);

// Empirical P(beta2_hat < beta2 - eps) against the Chebyshev bound plus 3 binomial sd.
CheckResult mc_chebyshev_check(const TrueModel& truth, double eps, std::size_t reps, std::uint64_t seed);

// Joint law of (min theta_i X_i, mean X_i) for X_i iid Exp(1).
double lemma_b1_density(std::span<const double> thetas, double x, double y);
double lemma_b1_survival(std::span<const double> thetas, double x, double y);

using Matrix2 = std::array<std::array<double, 2>, 2>;

// Density of A (min theta_i X_i, mean X_i)^T.
double corollary_b2_density(std::span<const double> thetas, const Matrix2& a, double u, double v);

struct PairDraw {
  double first = 0.0;
  double second = 0.0;
};

std::vector<PairDraw> sample_min_mean(std::span<const double> thetas, std::size_t count, std::uint64_t seed);

// 2-D chi-square goodness of fit of draws against a density, with bins_per_axis
// bins per axis cut at empirical marginal quantiles.
CheckResult gof_2d(std::span<const PairDraw> draws, const std::function<double(double, double)>& density,
                   std::size_t bins_per_axis, const std::string& name, double alpha = 0.01);

// Runs `body(i)` for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, unsigned threads = 0);

}  // namespace qfr
