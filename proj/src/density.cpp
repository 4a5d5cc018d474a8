#include "qfr/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qfr/errors.hpp"
#include "qfr/quadrature.hpp"
#include "qfr/special_functions.hpp"

namespace qfr {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kTailMass = 1e-12;

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

// Smallest x >= start (to bisection precision) with bound(x) <= eps; bound is nonincreasing.
template <class F>
double solve_tail(const F& bound, double start, double step) {
  double lo = start;
  double hi = start + step;
  while (bound(hi) > kTailMass) {
    lo = hi;
    step *= 2.0;
    hi = start + step;
    if (!std::isfinite(hi)) throw AccuracyError("tail bound search diverged", hi, 0.0);
  }
  for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, std::fabs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (bound(mid) > kTailMass ? lo : hi) = mid;
  }
  return hi;
}

QuadratureOptions fine_options() {
  QuadratureOptions o;
  o.abs_tol = 1e-15;
  o.rel_tol = 1e-12;
  o.max_subdivisions = 200;
  return o;
}

}  // namespace

ResidualScaleLaw::ResidualScaleLaw(std::size_t n, double sigma_x_i, double sigma_x_bar, double beta)
    : n_(static_cast<double>(n)) {
  if (n < 3) throw InsufficientDataError("residual scale law: n must be at least 3");
  if (!(sigma_x_i > 0.0) || !(sigma_x_bar > 0.0)) throw DomainError("residual scale law: scales must be positive");
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw InferenceUnavailableError("residual scale law: beta must be positive");
  }
  weight_ = sigma_x_i / (n_ * sigma_x_bar);
  if (!(weight_ < 1.0)) throw DomainError("residual scale law: sigma_x_i must be below n * sigma_x_bar");
  nu2_ = beta * sigma_x_i / (n_ * (n_ - 1.0) * sigma_x_bar);
  nu1_ = beta + nu2_;
  theta_ = nu1_ * nu2_ / beta;
  log_ratio_ = std::log(nu1_) - std::log(beta);
}

double ResidualScaleLaw::log_pdf(double t) const {
  if (!(t > 0.0)) return kNegInf;
  const double a = n_ - 1.0;
  const double bump = std::log(weight_) + (a - 1.0) * std::log(t) - t / nu2_ - a * std::log(nu2_) - std::lgamma(a);
  const double ramp = std::log1p(-weight_) - t / nu1_ - std::log(nu1_) + (n_ - 2.0) * log_ratio_ +
                      log_reg_lower_gamma(n_ - 2.0, t / theta_);
  return log_add(bump, ramp);
}

double ResidualScaleLaw::pdf(double t) const { return std::exp(log_pdf(t)); }

double ResidualScaleLaw::cdf(double t) const {
  if (!(t > 0.0)) return 0.0;
  const double second = reg_lower_gamma(n_ - 2.0, t / nu2_) -
                        std::exp(-t / nu1_ + (n_ - 2.0) * log_ratio_ + log_reg_lower_gamma(n_ - 2.0, t / theta_));
  return std::clamp(weight_ * reg_lower_gamma(n_ - 1.0, t / nu2_) + (1.0 - weight_) * second, 0.0, 1.0);
}

double ResidualScaleLaw::tail_bound(double t) const {
  if (!(t > 0.0)) return 1.0;
  return weight_ * reg_upper_gamma(n_ - 1.0, t / nu2_) +
         (1.0 - weight_) * (reg_upper_gamma(n_ - 2.0, t / nu2_) + std::exp((n_ - 2.0) * log_ratio_ - t / nu1_));
}

std::vector<double> ResidualScaleLaw::landmarks() const {
  std::vector<double> out;
  const double bump_mean = (n_ - 1.0) * nu2_;
  const double bump_sd = std::sqrt(n_ - 1.0) * nu2_;
  for (int k = -6; k <= 8; ++k) out.push_back(bump_mean + k * bump_sd);
  const double ramp_mid = (n_ - 2.0) * theta_;
  for (int k = -6; k <= 8; ++k) out.push_back(ramp_mid + k * std::sqrt(n_ - 2.0) * theta_);
  for (double k : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) out.push_back(k * nu1_);
  std::erase_if(out, [](double v) { return !(v > 0.0); });
  return out;
}

MeanResponseScaleLaw::MeanResponseScaleLaw(std::size_t n, double sigma_new, double sigma_x_bar, double beta,
                                           double beta2)
    : n_(static_cast<double>(n)), beta_(beta) {
  if (n < 3) throw InsufficientDataError("mean response scale law: n must be at least 3");
  if (!(sigma_x_bar > 0.0)) throw DomainError("mean response scale law: sigma_x_bar must be positive");
  const double bound = n_ * sigma_x_bar;
  if (!(sigma_new > 0.0 && sigma_new < bound)) {
    throw DomainError("mean response density requires 0 < sigma_new < n * sigma_x_bar = " + std::to_string(bound) +
                      "; got " + std::to_string(sigma_new));
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw InferenceUnavailableError("mean response scale law: beta must be positive");
  }
  lower_ = beta2 * sigma_new;
  rate_ = n_ * sigma_x_bar / (beta * sigma_new);
  kappa_ = 1.0 - sigma_new / bound;
  r_ = 1.0 - sigma_x_bar / sigma_new;
}

double MeanResponseScaleLaw::log_pdf(double t) const {
  const double u = t - lower_;
  if (!(u > 0.0)) return kNegInf;
  const double a = n_ - 1.0;
  // gamma_reg(a, b) / (c r)^a with b = c r z and z = (n-1) u / (kappa beta) > 0. Write
  // gamma_reg(a, b) = sign(b)^a |b|^a S(a, b) / Gamma(a); the sign of b equals the sign
  // of (c r), so the signed powers cancel and the ratio is z^a S(a, b) / Gamma(a).
  const double z = (n_ - 1.0) * u / (kappa_ * beta_);
  const double b = n_ * r_ * u / (kappa_ * beta_);
  return std::log(rate_) - rate_ * u + a * std::log(z) - std::lgamma(a) + log_scaled_lower_gamma(a, b);
}

double MeanResponseScaleLaw::pdf(double t) const { return std::exp(log_pdf(t)); }

double MeanResponseScaleLaw::tail_bound(double t) const {
  const double x = t - lower_;
  if (!(x > 0.0)) return 1.0;
  const double gamma_scale = kappa_ * beta_ / (n_ - 1.0);
  return std::exp(-0.5 * x * rate_) + reg_upper_gamma(n_ - 1.0, 0.5 * x / gamma_scale);
}

std::vector<double> MeanResponseScaleLaw::landmarks() const {
  const double exp_scale = 1.0 / rate_;
  const double mean = exp_scale + kappa_ * beta_;
  const double sd = std::sqrt(exp_scale * exp_scale + kappa_ * kappa_ * beta_ * beta_ / (n_ - 1.0));
  std::vector<double> out;
  for (int k = -6; k <= 10; ++k) out.push_back(lower_ + mean + k * sd);
  for (double k : {0.25, 0.5, 1.0, 2.0}) out.push_back(lower_ + k * exp_scale);
  std::erase_if(out, [this](double v) { return !(v > lower_); });
  return out;
}

Density2D::Density2D(Kind kind, double s_center, double s_sd, std::variant<ResidualScaleLaw, MeanResponseScaleLaw> law)
    : kind_(kind), s_center_(s_center), s_sd_(s_sd), law_(std::move(law)) {
  build_profile();
}

namespace {

struct Factors {
  double center;
  double sd;
  std::variant<ResidualScaleLaw, MeanResponseScaleLaw> law;
};

Factors residual_factors(const QlmFit& fit, std::size_t index) {
  if (index >= fit.n) throw DomainError("residual density: index out of range");
  if (!(fit.beta > 0.0)) throw InferenceUnavailableError("residual density: beta_hat must be positive");
  if (!(fit.sigma2 > 0.0)) throw InferenceUnavailableError("residual density: sigma2_hat must be positive");
  const double nd = static_cast<double>(fit.n);
  const double dx = fit.data.x[index].mu - fit.mu_x_bar;
  const double xi = 1.0 - 1.0 / nd - dx * dx / (nd * fit.w);
  if (!(xi > 0.0)) throw InferenceUnavailableError("residual density: variance deflation factor is not positive");
  return {0.0, std::sqrt(fit.sigma2 * xi), ResidualScaleLaw(fit.n, fit.data.x[index].sigma, fit.sigma_x_bar, fit.beta)};
}

Factors mean_response_factors(const QlmFit& fit, const GaussianQuantile& new_x) {
  if (!std::isfinite(new_x.mu)) throw DomainError("mean response density: mu must be finite");
  MeanResponseScaleLaw law(fit.n, new_x.sigma, fit.sigma_x_bar, fit.beta, fit.beta2);
  if (!(fit.sigma2 > 0.0)) throw InferenceUnavailableError("mean response density: sigma2_hat must be positive");
  const double nd = static_cast<double>(fit.n);
  const double dx = new_x.mu - fit.mu_x_bar;
  const double var = fit.sigma2 / nd * (1.0 + dx * dx / fit.w);
  return {fit.beta0 + fit.beta1 * new_x.mu, std::sqrt(var), std::move(law)};
}

double point_density(const Factors& f, double s, double t) {
  const double z = (s - f.center) / f.sd;
  const double log_h = std::visit([t](const auto& l) { return l.log_pdf(t); }, f.law);
  return std::exp(-0.5 * z * z - std::log(f.sd * std::sqrt(2.0 * std::numbers::pi)) + log_h);
}

}  // namespace

Density2D Density2D::residual(const QlmFit& fit, std::size_t index) {
  auto f = residual_factors(fit, index);
  return Density2D(Kind::Residual, f.center, f.sd, std::move(f.law));
}

Density2D Density2D::mean_response(const QlmFit& fit, const GaussianQuantile& new_x) {
  auto f = mean_response_factors(fit, new_x);
  return Density2D(Kind::MeanResponse, f.center, f.sd, std::move(f.law));
}

std::string Density2D::label() const { return kind_ == Kind::Residual ? "residual" : "mean_response"; }

double Density2D::t_lower() const {
  return std::visit([](const auto& l) { return l.lower(); }, law_);
}

double Density2D::log_t_density(double t) const {
  return std::visit([t](const auto& l) { return l.log_pdf(t); }, law_);
}

double Density2D::t_density(double t) const { return std::exp(log_t_density(t)); }

double Density2D::s_density(double s) const {
  const double z = (s - s_center_) / s_sd_;
  return std::exp(-0.5 * z * z) / (s_sd_ * std::sqrt(2.0 * std::numbers::pi));
}

double Density2D::log_density(double s, double t) const {
  const double z = (s - s_center_) / s_sd_;
  return -0.5 * z * z - std::log(s_sd_ * std::sqrt(2.0 * std::numbers::pi)) + log_t_density(t);
}

double Density2D::operator()(double s, double t) const { return std::exp(log_density(s, t)); }

double Density2D::max_density() const { return (*this)(s_center_, t_mode_); }

Box Density2D::box() const {
  return {s_center_ - 10.0 * s_sd_, s_center_ + 10.0 * s_sd_, t_lower(), t_upper_};
}

void Density2D::build_profile() {
  const double lo = t_lower();
  const auto marks = std::visit([](const auto& l) { return l.landmarks(); }, law_);
  const double reach = *std::max_element(marks.begin(), marks.end()) - lo;
  t_upper_ = std::visit([&](const auto& l) { return solve_tail([&l](double t) { return l.tail_bound(t); }, lo, reach); },
                        law_);
  const double span = t_upper_ - lo;

  std::vector<double> nodes;
  constexpr int kUniform = 128;
  for (int k = 0; k <= kUniform; ++k) nodes.push_back(lo + span * k / kUniform);
  for (int k = 1; k <= 60; ++k) nodes.push_back(lo + span * std::ldexp(1.0, -k));
  for (double m : marks) {
    if (m > lo && m < t_upper_) nodes.push_back(m);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  auto h = [this](double t) { return t_density(t); };
  std::vector<double> hv(nodes.size());
  std::transform(nodes.begin(), nodes.end(), hv.begin(), h);
  const double h_scale = *std::max_element(hv.begin(), hv.end());

  // Split until the midpoint agrees with linear interpolation.
  std::vector<double> refined;
  refined.push_back(nodes.front());
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    struct Piece {
      double a, b, ha, hb;
      int depth;
    };
    std::vector<Piece> stack{{nodes[k], nodes[k + 1], hv[k], hv[k + 1], 0}};
    while (!stack.empty()) {
      const Piece p = stack.back();
      stack.pop_back();
      const double mid = 0.5 * (p.a + p.b);
      const double hm = h(mid);
      if (p.depth < 40 && std::fabs(hm - 0.5 * (p.ha + p.hb)) > 1e-3 * h_scale) {
        stack.push_back({mid, p.b, hm, p.hb, p.depth + 1});
        stack.push_back({p.a, mid, p.ha, hm, p.depth + 1});
      } else {
        refined.push_back(p.b);
      }
    }
  }
  t_breaks_ = std::move(refined);

  const auto opts = fine_options();
  t_mass_.resize(t_breaks_.size() - 1);
  t_cum_.assign(t_breaks_.size(), 0.0);
  std::size_t best = 0;
  double best_log = kNegInf;
  for (std::size_t k = 0; k + 1 < t_breaks_.size(); ++k) {
    t_mass_[k] = integrate_gk(h, t_breaks_[k], t_breaks_[k + 1], opts).value;
    t_cum_[k + 1] = t_cum_[k] + t_mass_[k];
  }
  for (std::size_t k = 0; k < t_breaks_.size(); ++k) {
    const double v = log_t_density(t_breaks_[k]);
    if (v > best_log) {
      best_log = v;
      best = k;
    }
  }
  // Golden-section refinement of the t-mode between the neighbouring breakpoints.
  double a = t_breaks_[best == 0 ? 0 : best - 1];
  double b = t_breaks_[std::min(best + 1, t_breaks_.size() - 1)];
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = log_t_density(c);
  double fd = log_t_density(d);
  for (int i = 0; i < 200 && b - a > 1e-13 * std::max(1.0, std::fabs(b)); ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = log_t_density(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = log_t_density(d);
    }
  }
  t_mode_ = 0.5 * (a + b);
  if (log_t_density(t_mode_) < best_log) t_mode_ = t_breaks_[best];
}

double Density2D::t_marginal_cdf(double t) const {
  if (t <= t_breaks_.front()) return 0.0;
  if (t >= t_breaks_.back()) return t_cum_.back();
  const auto it = std::upper_bound(t_breaks_.begin(), t_breaks_.end(), t);
  const auto k = static_cast<std::size_t>(it - t_breaks_.begin()) - 1;
  return t_cum_[k] + integrate_gk([this](double x) { return t_density(x); }, t_breaks_[k], t, fine_options()).value;
}

double Density2D::t_marginal_quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("t_marginal_quantile: u must lie in [0, 1]");
  if (u <= 0.0) return t_breaks_.front();
  if (u >= t_cum_.back()) return t_breaks_.back();
  const auto it = std::upper_bound(t_cum_.begin(), t_cum_.end(), u);
  const auto k = static_cast<std::size_t>(it - t_cum_.begin()) - 1;
  double lo = t_breaks_[k];
  double hi = t_breaks_[std::min(k + 1, t_breaks_.size() - 1)];
  for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, std::fabs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (t_marginal_cdf(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double residual_density(const QlmFit& fit, std::size_t index, double s, double t) {
  return point_density(residual_factors(fit, index), s, t);
}

double mean_response_density(const QlmFit& fit, const GaussianQuantile& new_x, double s, double t) {
  return point_density(mean_response_factors(fit, new_x), s, t);
}

double integrate_region(const Density2D& d, const RegionPredicate& predicate, double tol) {
  if (!(tol > 0.0)) throw DomainError("integrate_region: tolerance must be positive");
  const Box box = d.box();
  std::vector<double> s_nodes;
  for (double z : {-10.0, -7.0, -5.0, -4.0, -3.0, -2.5, -2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0,
                   5.0, 7.0, 10.0}) {
    s_nodes.push_back(d.s_center() + z * d.s_sd());
  }
  std::vector<double> t_nodes{box.t_lo};
  for (double u : {1e-10, 1e-7, 1e-5, 1e-4, 1e-3, 0.005, 0.01, 0.025, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7,
                   0.8, 0.85, 0.9, 0.95, 0.975, 0.99, 0.995, 0.999, 1.0 - 1e-4, 1.0 - 1e-5, 1.0 - 1e-7,
                   1.0 - 1e-10}) {
    t_nodes.push_back(d.t_marginal_quantile(u));
  }
  t_nodes.push_back(box.t_hi);
  std::sort(t_nodes.begin(), t_nodes.end());
  t_nodes.erase(std::unique(t_nodes.begin(), t_nodes.end(), [](double a, double b) { return !(b > a); }),
                t_nodes.end());

  Cubature2DOptions opts;
  opts.abs_tol = 0.5 * tol;
  const auto r = integrate_2d(
      [&](double s, double t) { return predicate(s, t) ? d(s, t) : 0.0; }, s_nodes, t_nodes, opts);
  if (!r.converged) {
    throw AccuracyError("integrate_region: refinement budget exhausted before reaching tolerance", r.value, r.error);
  }
  return std::clamp(r.value, 0.0, 1.0);
}

double superlevel_mass(const Density2D& d, double level) {
  const auto& br = d.t_breakpoints();
  const auto& seg_mass = d.t_segment_mass();
  if (!(level > 0.0)) {
    double total = 0.0;
    for (double m : seg_mass) total += m;
    return total;
  }
  const double log_g_max = -std::log(d.s_sd() * std::sqrt(2.0 * std::numbers::pi));
  const double log_cut = std::log(level) - log_g_max;
  // {g h > level} at fixed t is an s-interval carrying Gaussian mass erf(sqrt(log(g_max h / level))).
  auto excess = [&](double t) { return d.log_t_density(t) - log_cut; };
  auto integrand = [&](double t) {
    const double e = excess(t);
    return e > 0.0 ? d.t_density(t) * std::erf(std::sqrt(e)) : 0.0;
  };
  auto root = [&](double a, double b, bool a_positive) {
    for (int i = 0; i < 100 && b - a > 1e-14 * std::max(1.0, std::fabs(b)); ++i) {
      const double mid = 0.5 * (a + b);
      ((excess(mid) > 0.0) == a_positive ? a : b) = mid;
    }
    return 0.5 * (a + b);
  };

  QuadratureOptions opts;
  opts.abs_tol = 1e-13;
  opts.rel_tol = 1e-10;
  opts.max_subdivisions = 200;
  constexpr int kSamples = 8;
  double mass = 0.0;
  for (std::size_t k = 0; k + 1 < br.size(); ++k) {
    std::vector<double> ts(kSamples + 1);
    std::vector<double> ex(kSamples + 1);
    for (int m = 0; m <= kSamples; ++m) {
      ts[m] = br[k] + (br[k + 1] - br[k]) * m / kSamples;
      ex[m] = excess(ts[m]);
    }
    std::vector<double> cuts{ts.front()};
    for (int m = 0; m < kSamples; ++m) {
      const bool pa = ex[m] > 0.0;
      const bool pb = ex[m + 1] > 0.0;
      if (pa != pb) cuts.push_back(root(ts[m], ts[m + 1], pa));
    }
    cuts.push_back(ts.back());
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double mid = 0.5 * (cuts[c] + cuts[c + 1]);
      if (excess(mid) <= 0.0) continue;
      mass += integrate_gk(integrand, cuts[c], cuts[c + 1], opts).value;
    }
  }
  return mass;
}

double density_pvalue(const Density2D& d, double s, double t) {
  const double f_obs = d(s, t);
  if (!(f_obs > 0.0)) return 0.0;
  return std::clamp(1.0 - superlevel_mass(d, f_obs), 0.0, 1.0);
}

double residual_pvalue(const QlmFit& fit, std::size_t index, const ResidualPair& observed) {
  return density_pvalue(Density2D::residual(fit, index), observed.mu_e, observed.sigma_e);
}

double hdr_threshold(const Density2D& d, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("hdr_threshold: alpha must lie in (0, 1)");
  const double target = 1.0 - alpha;
  const double f_max = d.max_density();
  double log_hi = std::log(f_max);
  double log_lo = log_hi - std::log(100.0);
  while (superlevel_mass(d, std::exp(log_lo)) < target) {
    log_hi = log_lo;
    log_lo -= std::log(100.0);
    if (log_lo < std::log(f_max) - 700.0) throw AccuracyError("hdr_threshold: failed to bracket", std::exp(log_lo), 0.0);
  }
  for (int i = 0; i < 200 && log_hi - log_lo > 1e-13; ++i) {
    const double mid = 0.5 * (log_lo + log_hi);
    const double m = superlevel_mass(d, std::exp(mid));
    if (std::fabs(m - target) < 1e-11) return std::exp(mid);
    (m > target ? log_lo : log_hi) = mid;
  }
  return std::exp(0.5 * (log_lo + log_hi));
}

bool region_membership(const Density2D& d, double level, double s, double t) {
  if (!(level > 0.0)) throw DomainError("region_membership: level must be positive");
  if (!d.box().contains(s, t)) return false;
  return d(s, t) >= level;
}

DensityGrid build_density_grid(const Density2D& d, std::size_t s_points, double tol) {
  if (s_points < 3) throw DomainError("build_density_grid: need at least 3 s points");
  if (s_points % 2 == 0) ++s_points;
  DensityGrid g;
  g.box = d.box();
  g.label = d.label();
  const double hs = (g.box.s_hi - g.box.s_lo) / static_cast<double>(s_points - 1);
  for (std::size_t i = 0; i < s_points; ++i) {
    g.s_axis.push_back(g.box.s_lo + hs * static_cast<double>(i));
    const double w = (i == 0 || i + 1 == s_points) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    g.s_weights.push_back(w * hs / 3.0);
  }
  // Simpson on each breakpoint segment, sharing endpoints.
  const auto& br = d.t_breakpoints();
  g.t_axis.push_back(br.front());
  g.t_weights.push_back(0.0);
  for (std::size_t k = 0; k + 1 < br.size(); ++k) {
    const double len = br[k + 1] - br[k];
    g.t_weights.back() += len / 6.0;
    g.t_axis.push_back(0.5 * (br[k] + br[k + 1]));
    g.t_weights.push_back(4.0 * len / 6.0);
    g.t_axis.push_back(br[k + 1]);
    g.t_weights.push_back(len / 6.0);
  }
  std::vector<double> hv(g.t_axis.size());
  for (std::size_t j = 0; j < g.t_axis.size(); ++j) hv[j] = d.t_density(g.t_axis[j]);
  g.values.resize(g.s_axis.size() * g.t_axis.size());
  double total = 0.0;
  for (std::size_t i = 0; i < g.s_axis.size(); ++i) {
    const double gs = d.s_density(g.s_axis[i]);
    double row = 0.0;
    for (std::size_t j = 0; j < g.t_axis.size(); ++j) {
      const double v = gs * hv[j];
      g.values[i * g.t_axis.size() + j] = v;
      row += g.t_weights[j] * v;
    }
    total += g.s_weights[i] * row;
  }
  g.total_mass = total;
  g.achieved_tolerance = std::fabs(total - 1.0);
  if (g.achieved_tolerance > tol) {
    throw AccuracyError("build_density_grid: grid mass deviates from 1 beyond tolerance", total, g.achieved_tolerance);
  }
  return g;
}

}  // namespace qfr
