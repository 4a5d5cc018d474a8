#include "qfr/quantile_encoding.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "qfr/errors.hpp"
#include "qfr/special_functions.hpp"

namespace qfr {

HUHistogram::HUHistogram(std::vector<double> values, std::vector<std::int64_t> counts) {
  if (values.size() != counts.size()) throw DomainError("histogram: values and counts differ in length");
  std::map<double, std::int64_t> merged;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw DomainError("histogram: non-finite value");
    if (counts[i] < 0) throw DomainError("histogram: negative count");
    if (counts[i] > 0) merged[values[i]] += counts[i];
  }
  values_.reserve(merged.size());
  counts_.reserve(merged.size());
  for (const auto& [v, c] : merged) {
    values_.push_back(v);
    counts_.push_back(c);
    total_ += c;
  }
}

void HUHistogram::require_range(double lo, double hi) const {
  for (double v : values_) {
    if (v < lo || v > hi) {
      throw DomainError("histogram: value " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
    }
  }
}

EmpiricalQuantile::EmpiricalQuantile(const HUHistogram& h) {
  if (h.empty()) throw DomainError("empirical_quantile: empty histogram");
  total_ = h.total();
  values_.assign(h.values().begin(), h.values().end());
  std::vector<std::int64_t> cum_counts(values_.size());
  std::partial_sum(h.counts().begin(), h.counts().end(), cum_counts.begin());
  cum_props_.resize(values_.size());
  for (std::size_t l = 0; l < values_.size(); ++l) {
    cum_props_[l] = static_cast<double>(cum_counts[l]) / static_cast<double>(total_);
  }
  cum_props_.back() = 1.0;
}

double EmpiricalQuantile::operator()(double p) const {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("empirical quantile: p must lie in (0, 1]");
  // Smallest l with p <= c_l / N.
  const auto it = std::lower_bound(cum_props_.begin(), cum_props_.end(), p);
  return values_[static_cast<std::size_t>(it - cum_props_.begin())];
}

double GaussianQuantile::operator()(double p) const { return mu + sigma * std_normal_quantile(p); }

EmpiricalQuantile empirical_quantile(const HUHistogram& h) { return EmpiricalQuantile(h); }

std::vector<double> psi_coefficients(const EmpiricalQuantile& eq, int j_max) {
  if (j_max < 0) throw DomainError("psi_coefficients: j_max must be nonnegative");
  std::vector<double> psi(static_cast<std::size_t>(j_max) + 1, 0.0);
  const auto values = eq.values();
  const auto props = eq.cum_props();
  for (int j = 0; j <= j_max; ++j) {
    double prev = 0.0;  // Phi_j(0) = 0
    double sum = 0.0;
    double comp = 0.0;
    for (std::size_t l = 0; l < values.size(); ++l) {
      const double cur = truncated_gaussian_moment(j, props[l]);
      const double term = values[l] * (cur - prev);
      const double t = sum + term;
      comp += std::fabs(sum) >= std::fabs(term) ? (sum - t) + term : (term - t) + sum;
      sum = t;
      prev = cur;
    }
    psi[static_cast<std::size_t>(j)] = sum + comp;
  }
  return psi;
}

GaussianQuantile project_d1(const EmpiricalQuantile& eq) {
  const auto psi = psi_coefficients(eq, 1);
  // A constant histogram has an exactly zero spread; avoid rounding residue.
  const double sigma = eq.values().size() == 1 ? 0.0 : psi[1];
  return {psi[0], sigma};
}

double projection_objective(std::span<const double> a, std::span<const double> psi, int d) {
  if (d < 0) throw DomainError("projection_objective: degree must be nonnegative");
  const auto need = static_cast<std::size_t>(d) + 1;
  if (a.size() != need) throw DomainError("projection_objective: coefficient vector must have length d+1");
  if (psi.size() < need) throw DomainError("projection_objective: need at least d+1 psi coefficients");
  double total = 0.0;
  for (int j = 0; j <= d; ++j) {
    double inner = 0.0;
    for (int l = j; l <= j + d; ++l) inner += a[static_cast<std::size_t>(l - j)] * gaussian_moment(l);
    total += a[static_cast<std::size_t>(j)] * (inner - 2.0 * psi[static_cast<std::size_t>(j)]);
  }
  return total;
}

}  // namespace qfr
