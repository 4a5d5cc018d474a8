#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace qfr {

// Value/count histogram of one subject. Construction sorts the values, merges
// duplicates and drops zero counts.
class HUHistogram {
 public:
  HUHistogram(std::vector<double> values, std::vector<std::int64_t> counts);

  std::span<const double> values() const { return values_; }
  std::span<const std::int64_t> counts() const { return counts_; }
  std::int64_t total() const { return total_; }
  bool empty() const { return values_.empty(); }

  // Throws DomainError unless every value lies in [lo, hi].
  void require_range(double lo, double hi) const;

 private:
  std::vector<double> values_;
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
};

// Step function p -> inf{x : p <= F(x)} of a histogram.
class EmpiricalQuantile {
 public:
  explicit EmpiricalQuantile(const HUHistogram& h);

  std::span<const double> values() const { return values_; }
  std::span<const double> cum_props() const { return cum_props_; }
  std::int64_t total() const { return total_; }

  double operator()(double p) const;

 private:
  std::vector<double> values_;
  std::vector<double> cum_props_;
  std::int64_t total_ = 0;
};

struct GaussianQuantile {
  double mu = 0.0;
  double sigma = 0.0;

  double operator()(double p) const;
  friend bool operator==(const GaussianQuantile&, const GaussianQuantile&) = default;
};

EmpiricalQuantile empirical_quantile(const HUHistogram& h);

// psi_j = sum over atoms of value * (Phi_j(upper cum. prop.) - Phi_j(lower cum. prop.)).
std::vector<double> psi_coefficients(const EmpiricalQuantile& eq, int j_max);

// L2 projection onto {mu + sigma * Phi^-1}.
GaussianQuantile project_d1(const EmpiricalQuantile& eq);

// sum_j a_j (sum_{l=j}^{j+d} a_{l-j} Phi_l(1) - 2 psi_j): the squared L2 distance
// between the polynomial sum_k a_k (Phi^-1)^k and the empirical quantile, minus
// the constant int q^2.
double projection_objective(std::span<const double> a, std::span<const double> psi, int d);

}  // namespace qfr
