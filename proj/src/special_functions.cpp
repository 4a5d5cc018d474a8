#include "qfr/special_functions.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "qfr/errors.hpp"

namespace qfr {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxIter = 100000;

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw DomainError(std::string(what) + ": non-finite argument");
}

// sum_{k>=0} b^k / ((a+1)...(a+k)) for 0 <= b < a + 1.
double lower_series_sum(double a, double b) {
  CompensatedSum sum;
  double term = 1.0;
  sum.add(term);
  double ap = a;
  for (int k = 1; k < kMaxIter; ++k) {
    ap += 1.0;
    term *= b / ap;
    sum.add(term);
    if (term < sum.value() * kEps * 0.25) return sum.value();
  }
  throw AccuracyError("incomplete gamma series did not converge", sum.value(), term);
}

// Continued fraction for Q(a, b) without the prefactor, b >= a + 1 (modified Lentz).
double upper_continued_fraction(double a, double b) {
  constexpr double tiny = 1e-300;
  double bb = b + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / bb;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    bb += 2.0;
    d = an * d + bb;
    if (std::fabs(d) < tiny) d = tiny;
    c = bb + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) return h;
  }
  throw AccuracyError("incomplete gamma continued fraction did not converge", h, 0.0);
}

void check_gamma_shape(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("incomplete gamma: shape must be positive");
}

// log of sum_k |b|^k / (k! (a+k)) for b < 0, summed outward from the largest term.
double log_negative_series(double a, double b) {
  const double m = -b;
  const double k0 = std::floor(m);
  const double log_peak = k0 * std::log(m) - m - std::lgamma(k0 + 1.0);
  // Terms are Poisson(m) weights times 1/(a+k), scaled by exp(m).
  CompensatedSum sum;
  const double peak = std::exp(log_peak);
  sum.add(peak / (a + k0));
  double w = peak;
  for (double k = k0 + 1.0;; k += 1.0) {
    w *= m / k;
    const double term = w / (a + k);
    sum.add(term);
    if (term < sum.value() * kEps * 0.25 && k > m) break;
  }
  w = peak;
  for (double k = k0; k >= 1.0; k -= 1.0) {
    w *= k / m;
    const double term = w / (a + k - 1.0);
    sum.add(term);
    if (term < sum.value() * kEps * 0.25) break;
  }
  return m + std::log(sum.value());
}

}  // namespace

double std_normal_pdf(double x) {
  require_finite(x, "std_normal_pdf");
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double std_normal_cdf(double x) {
  require_finite(x, "std_normal_cdf");
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double std_normal_sf(double x) {
  require_finite(x, "std_normal_sf");
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("std_normal_quantile: p must lie in (0, 1)");

  // Wichura's AS241 rational approximations.
  static constexpr std::array<double, 8> a = {
      3.3871328727963666080e0,  1.3314166789178437745e+2, 1.9715909503065514427e+3,
      1.3731693765509461125e+4, 4.5921953931549871457e+4, 6.7265770927008700853e+4,
      3.3430575583588128105e+4, 2.5090809287301226727e+3};
  static constexpr std::array<double, 8> b = {
      1.0,                      4.2313330701600911252e+1, 6.8718700749205790830e+2,
      5.3941960214247511077e+3, 2.1213794301586595867e+4, 3.9307895800092710610e+4,
      2.8729085735721942674e+4, 5.2264952788528545610e+3};
  static constexpr std::array<double, 8> c = {
      1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr std::array<double, 8> d = {
      1.0,                       2.05319162663775882187e0,  1.67638483018380384940e0,
      6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
      5.47593808499534494600e-4, 1.05075007164441684324e-9};
  static constexpr std::array<double, 8> e = {
      6.65790464350110377720e0,  5.46378491116411436990e0,  1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr std::array<double, 8> f = {
      1.0,                       5.99832206555887937690e-1, 1.36929880922735805310e-1,
      1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
      1.42151175831644588870e-7, 2.04426310338993978564e-15};
  auto poly = [](const std::array<double, 8>& k, double r) {
    double v = k[7];
    for (int i = 6; i >= 0; --i) v = v * r + k[i];
    return v;
  };

  const double q = p - 0.5;
  double x;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    x = q * poly(a, r) / poly(b, r);
  } else {
    double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
    if (r <= 5.0) {
      r -= 1.6;
      x = poly(c, r) / poly(d, r);
    } else {
      r -= 5.0;
      x = poly(e, r) / poly(f, r);
    }
    if (q < 0.0) x = -x;
  }

  // One Newton step, on the tail that carries relative precision.
  const double dens = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  if (dens > 0.0) {
    if (p < 0.5) {
      x -= (std_normal_cdf(x) - p) / dens;
    } else {
      x += (std_normal_sf(x) - (1.0 - p)) / dens;
    }
  }
  return x;
}

double log_gamma(double a) {
  require_finite(a, "log_gamma");
  return std::lgamma(a);
}

double reg_lower_gamma(double a, double b) {
  check_gamma_shape(a);
  require_finite(b, "reg_lower_gamma");
  if (b == 0.0) return 0.0;
  if (b < 0.0) {
    const double sign = std::fmod(std::floor(a), 2.0) == 0.0 ? 1.0 : -1.0;
    return sign * std::exp(a * std::log(-b) + log_negative_series(a, b) - std::lgamma(a));
  }
  if (b < a + 1.0) {
    return std::exp(a * std::log(b) - b - std::lgamma(a + 1.0)) * lower_series_sum(a, b);
  }
  return -std::expm1(log_reg_upper_gamma(a, b));
}

double reg_upper_gamma(double a, double b) {
  check_gamma_shape(a);
  require_finite(b, "reg_upper_gamma");
  if (b < 0.0) throw DomainError("reg_upper_gamma: argument must be nonnegative");
  if (b == 0.0) return 1.0;
  if (b < a + 1.0) return -std::expm1(log_reg_lower_gamma(a, b));
  return std::exp(a * std::log(b) - b - std::lgamma(a)) * upper_continued_fraction(a, b);
}

double log_reg_lower_gamma(double a, double b) {
  check_gamma_shape(a);
  require_finite(b, "log_reg_lower_gamma");
  if (b < 0.0) throw DomainError("log_reg_lower_gamma: argument must be nonnegative");
  if (b == 0.0) return -std::numeric_limits<double>::infinity();
  if (b < a + 1.0) {
    return a * std::log(b) - b - std::lgamma(a + 1.0) + std::log(lower_series_sum(a, b));
  }
  return std::log1p(-reg_upper_gamma(a, b));
}

double log_reg_upper_gamma(double a, double b) {
  check_gamma_shape(a);
  require_finite(b, "log_reg_upper_gamma");
  if (b < 0.0) throw DomainError("log_reg_upper_gamma: argument must be nonnegative");
  if (b == 0.0) return 0.0;
  if (b < a + 1.0) return std::log1p(-reg_lower_gamma(a, b));
  return a * std::log(b) - b - std::lgamma(a) + std::log(upper_continued_fraction(a, b));
}

double log_scaled_lower_gamma(double a, double b) {
  check_gamma_shape(a);
  require_finite(b, "log_scaled_lower_gamma");
  if (b == 0.0) return -std::log(a);
  if (b < 0.0) return log_negative_series(a, b);
  if (b < a + 1.0) return -b + std::log(lower_series_sum(a, b)) - std::log(a);
  return std::lgamma(a) + std::log1p(-reg_upper_gamma(a, b)) - a * std::log(b);
}

double reg_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("reg_incomplete_beta: shapes must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("reg_incomplete_beta: x must lie in [0, 1]");
  if (x == 0.0 || x == 1.0) return x;

  auto continued_fraction = [](double a, double b, double x) {
    constexpr double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m < kMaxIter; ++m) {
      const double m2 = 2.0 * m;
      double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
      d = 1.0 + aa * d;
      if (std::fabs(d) < tiny) d = tiny;
      c = 1.0 + aa / c;
      if (std::fabs(c) < tiny) c = tiny;
      d = 1.0 / d;
      h *= d * c;
      aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
      d = 1.0 + aa * d;
      if (std::fabs(d) < tiny) d = tiny;
      c = 1.0 + aa / c;
      if (std::fabs(c) < tiny) c = tiny;
      d = 1.0 / d;
      const double delta = d * c;
      h *= delta;
      if (std::fabs(delta - 1.0) < kEps) return h;
    }
    throw AccuracyError("incomplete beta continued fraction did not converge", h, 0.0);
  };

  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_front) * continued_fraction(a, b, x) / a;
  }
  return 1.0 - std::exp(log_front) * continued_fraction(b, a, 1.0 - x) / b;
}

double gaussian_moment(int j) {
  if (j < 0) throw DomainError("gaussian_moment: order must be nonnegative");
  if (j % 2 == 1) return 0.0;
  double m = 1.0;
  for (int k = j - 1; k > 1; k -= 2) m *= k;
  return m;
}

double truncated_gaussian_moment(int j, double b) {
  if (j < 0) throw DomainError("truncated_gaussian_moment: order must be nonnegative");
  if (!(b > 0.0 && b <= 1.0)) {
    throw DomainError("truncated_gaussian_moment: b must lie in (0, 1]");
  }
  if (b == 1.0) return gaussian_moment(j);
  if (j == 0) return b;

  const double z = std_normal_quantile(b);
  const double shape = 0.5 * j + 0.5;
  const double arg = 0.5 * z * z;
  // 2^(j/2-1)/sqrt(pi) * Gamma(shape), the tail moment scale.
  const double scale =
      std::exp((0.5 * j - 1.0) * std::numbers::ln2 + std::lgamma(shape)) / std::sqrt(std::numbers::pi);
  if (j % 2 == 1) return -scale * reg_upper_gamma(shape, arg);
  if (b < 0.5) return scale * reg_upper_gamma(shape, arg);
  return scale * (1.0 + reg_lower_gamma(shape, arg));
}

}  // namespace qfr
