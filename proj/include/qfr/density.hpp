#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qfr/qlm.hpp"

namespace qfr {

// Law of the residual scale sigma_E_i: a two-component mixture on t > 0.
// Built from (n, sigma_x_i, sigma_x_bar, beta); pass beta_hat for the plug-in
// version or the true beta for the exact law.
class ResidualScaleLaw {
 public:
  ResidualScaleLaw(std::size_t n, double sigma_x_i, double sigma_x_bar, double beta);

  double log_pdf(double t) const;
  double pdf(double t) const;
  double cdf(double t) const;
  // Upper bound on the tail mass beyond t.
  double tail_bound(double t) const;

  double weight() const { return weight_; }
  double nu1() const { return nu1_; }
  double nu2() const { return nu2_; }
  double theta() const { return theta_; }
  double lower() const { return 0.0; }
  std::vector<double> landmarks() const;

 private:
  double n_;
  double weight_;
  double nu1_;
  double nu2_;
  double theta_;
  double log_ratio_;  // log(theta / nu2)
};

// Law of the predicted scale at a new explanatory scale sigma_new:
// lower + beta * (sigma_new * E + kappa * V), E ~ Exp(rate n sigma_bar),
// V ~ Gamma(n-1, 1/(n-1)).
class MeanResponseScaleLaw {
 public:
  MeanResponseScaleLaw(std::size_t n, double sigma_new, double sigma_x_bar, double beta, double beta2);

  double log_pdf(double t) const;
  double pdf(double t) const;
  double tail_bound(double t) const;

  double lower() const { return lower_; }
  double rate() const { return rate_; }
  double kappa() const { return kappa_; }
  double r() const { return r_; }
  std::vector<double> landmarks() const;

 private:
  double n_;
  double beta_;
  double lower_;
  double rate_;   // lambda = n sigma_bar / (beta sigma_new)
  double kappa_;  // 1 - sigma_new / (n sigma_bar)
  double r_;      // 1 - sigma_bar / sigma_new
};

struct Box {
  double s_lo = 0.0;
  double s_hi = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  bool contains(double s, double t) const { return s >= s_lo && s <= s_hi && t >= t_lo && t <= t_hi; }
};

// Separable density f(s, t) = g(s) h(t) with g Gaussian and h one of the scale laws.
class Density2D {
 public:
  enum class Kind { Residual, MeanResponse };

  // index is zero-based.
  static Density2D residual(const QlmFit& fit, std::size_t index);
  static Density2D mean_response(const QlmFit& fit, const GaussianQuantile& new_x);

  Kind kind() const { return kind_; }
  std::string label() const;

  double operator()(double s, double t) const;
  double log_density(double s, double t) const;
  double s_density(double s) const;
  double t_density(double t) const;
  double log_t_density(double t) const;

  double s_center() const { return s_center_; }
  double s_sd() const { return s_sd_; }
  double t_lower() const;
  double t_upper() const { return t_upper_; }
  Box box() const;

  // Breakpoints resolving h on [t_lower, t_upper] and the mass of h between them.
  const std::vector<double>& t_breakpoints() const { return t_breaks_; }
  const std::vector<double>& t_segment_mass() const { return t_mass_; }
  double t_marginal_cdf(double t) const;
  double t_marginal_quantile(double u) const;

  std::pair<double, double> mode() const { return {s_center_, t_mode_}; }
  double max_density() const;

  const std::variant<ResidualScaleLaw, MeanResponseScaleLaw>& scale_law() const { return law_; }

 private:
  Density2D(Kind kind, double s_center, double s_sd, std::variant<ResidualScaleLaw, MeanResponseScaleLaw> law);
  void build_profile();

  Kind kind_;
  double s_center_;
  double s_sd_;
  std::variant<ResidualScaleLaw, MeanResponseScaleLaw> law_;
  double t_upper_ = 0.0;
  double t_mode_ = 0.0;
  std::vector<double> t_breaks_;
  std::vector<double> t_mass_;
  std::vector<double> t_cum_;
};

double residual_density(const QlmFit& fit, std::size_t index, double s, double t);
double mean_response_density(const QlmFit& fit, const GaussianQuantile& new_x, double s, double t);

using RegionPredicate = std::function<bool(double s, double t)>;

// Mass of {predicate} under d, by adaptive 2-D cubature over the truncation box.
// Throws AccuracyError carrying the best estimate if tol is not reached.
double integrate_region(const Density2D& d, const RegionPredicate& predicate, double tol);

// Mass of {f > level}, through the separable 1-D reduction.
double superlevel_mass(const Density2D& d, double level);

// P(f(S, T) <= f(observed)).
double density_pvalue(const Density2D& d, double s, double t);
double residual_pvalue(const QlmFit& fit, std::size_t index, const ResidualPair& observed);

// L with mass{f >= L} = 1 - alpha.
double hdr_threshold(const Density2D& d, double alpha);

bool region_membership(const Density2D& d, double level, double s, double t);

struct DensityGrid {
  std::vector<double> s_axis;
  std::vector<double> t_axis;
  std::vector<double> s_weights;
  std::vector<double> t_weights;
  std::vector<double> values;  // row-major, values[i * t_axis.size() + j] = f(s_i, t_j)
  Box box;
  double total_mass = 0.0;
  double achieved_tolerance = 0.0;
  std::string label;

  double value(std::size_t i, std::size_t j) const { return values[i * t_axis.size() + j]; }
  double cell_mass(std::size_t i, std::size_t j) const { return s_weights[i] * t_weights[j]; }
};

// Evaluates d on a Simpson grid; throws AccuracyError if the grid mass is off by more than tol.
DensityGrid build_density_grid(const Density2D& d, std::size_t s_points = 201, double tol = 1e-4);

}  // namespace qfr
