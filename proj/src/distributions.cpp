#include "qfr/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qfr/errors.hpp"
#include "qfr/special_functions.hpp"

namespace qfr {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive and finite");
}

double student_t_cdf(double df, double x) {
  const double tail = 0.5 * reg_incomplete_beta(0.5 * df, 0.5, df / (df + x * x));
  return x < 0.0 ? tail : 1.0 - tail;
}

double student_t_sf(double df, double x) { return student_t_cdf(df, -x); }

// Support lower bound (or -inf).
double support_low(const DistSpec& dist) {
  return std::visit(overloaded{[](const Normal&) { return -kInf; },
                               [](const StudentT&) { return -kInf; },
                               [](const ChiSquare&) { return 0.0; },
                               [](const GammaShapeScale&) { return 0.0; },
                               [](const ShiftedExp& d) { return d.shift; },
                               [](const ParetoII&) { return 0.0; }},
                    dist);
}

// Bracket the root of cdf(x) = p, then bisect to an absolute width of 1e-12
// or until the midpoint stops moving.
double bisect_quantile(const DistSpec& dist, double p) {
  const double lo_support = support_low(dist);
  double lo;
  double hi;
  if (std::isfinite(lo_support)) {
    lo = lo_support;
    hi = std::max(1.0, 2.0 * mean(dist));
    while (cdf(dist, hi) < p) {
      lo = hi;
      hi *= 2.0;
      if (!std::isfinite(hi)) throw AccuracyError("quantile: failed to bracket", lo, 0.0);
    }
  } else {
    lo = -1.0;
    hi = 1.0;
    while (cdf(dist, lo) > p) {
      hi = lo;
      lo *= 2.0;
      if (!std::isfinite(lo)) throw AccuracyError("quantile: failed to bracket", hi, 0.0);
    }
    while (cdf(dist, hi) < p) {
      lo = hi;
      hi *= 2.0;
      if (!std::isfinite(hi)) throw AccuracyError("quantile: failed to bracket", lo, 0.0);
    }
  }
  // Upper tail: compare survival against 1 - p to keep relative precision.
  const bool upper = p > 0.5;
  const double q = 1.0 - p;
  for (int i = 0; i < 2000 && hi - lo > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const bool below = upper ? sf(dist, mid) > q : cdf(dist, mid) < p;
    (below ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

void validate(const DistSpec& dist) {
  std::visit(overloaded{[](const Normal& d) {
                          if (!std::isfinite(d.mean)) throw DomainError("Normal mean must be finite");
                          require_positive(d.variance, "Normal variance");
                        },
                        [](const StudentT& d) {
                          require_positive(d.df, "StudentT df");
                          if (d.df < 1.0) throw DomainError("StudentT df must be >= 1");
                        },
                        [](const ChiSquare& d) {
                          require_positive(d.df, "ChiSquare df");
                          if (d.df < 1.0) throw DomainError("ChiSquare df must be >= 1");
                        },
                        [](const GammaShapeScale& d) {
                          require_positive(d.shape, "Gamma shape");
                          require_positive(d.scale, "Gamma scale");
                        },
                        [](const ShiftedExp& d) {
                          require_positive(d.scale, "ShiftedExp scale");
                          if (!std::isfinite(d.shift)) throw DomainError("ShiftedExp shift must be finite");
                        },
                        [](const ParetoII& d) {
                          require_positive(d.shape, "ParetoII shape");
                          require_positive(d.scale, "ParetoII scale");
                        }},
             dist);
}

std::string describe(const DistSpec& dist) {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{[&](const Normal& d) { os << "Normal(" << d.mean << ", " << d.variance << ")"; },
                        [&](const StudentT& d) { os << "StudentT(" << d.df << ")"; },
                        [&](const ChiSquare& d) { os << "ChiSquare(" << d.df << ")"; },
                        [&](const GammaShapeScale& d) {
                          os << "Gamma(shape=" << d.shape << ", scale=" << d.scale << ")";
                        },
                        [&](const ShiftedExp& d) {
                          os << "ShiftedExp(scale=" << d.scale << ", shift=" << d.shift << ")";
                        },
                        [&](const ParetoII& d) {
                          os << "ParetoII(shape=" << d.shape << ", scale=" << d.scale << ")";
                        }},
             dist);
  return os.str();
}

double log_pdf(const DistSpec& dist, double x) {
  validate(dist);
  if (std::isnan(x)) throw DomainError("log_pdf: NaN argument");
  return std::visit(
      overloaded{
          [x](const Normal& d) {
            const double z = x - d.mean;
            return -0.5 * z * z / d.variance - 0.5 * std::log(2.0 * std::numbers::pi * d.variance);
          },
          [x](const StudentT& d) {
            const double v = d.df;
            return std::lgamma(0.5 * (v + 1.0)) - std::lgamma(0.5 * v) - 0.5 * std::log(v * std::numbers::pi) -
                   0.5 * (v + 1.0) * std::log1p(x * x / v);
          },
          [x](const ChiSquare& d) {
            if (x <= 0.0) return -kInf;
            const double k = 0.5 * d.df;
            return (k - 1.0) * std::log(x) - 0.5 * x - k * std::numbers::ln2 - std::lgamma(k);
          },
          [x](const GammaShapeScale& d) {
            if (x <= 0.0) return -kInf;
            return (d.shape - 1.0) * std::log(x) - x / d.scale - d.shape * std::log(d.scale) -
                   std::lgamma(d.shape);
          },
          [x](const ShiftedExp& d) {
            if (x < d.shift) return -kInf;
            return -(x - d.shift) / d.scale - std::log(d.scale);
          },
          [x](const ParetoII& d) {
            if (x < 0.0) return -kInf;
            return std::log(d.shape / d.scale) - (d.shape + 1.0) * std::log1p(x / d.scale);
          }},
      dist);
}

double pdf(const DistSpec& dist, double x) { return std::exp(log_pdf(dist, x)); }

double cdf(const DistSpec& dist, double x) {
  validate(dist);
  if (std::isnan(x)) throw DomainError("cdf: NaN argument");
  return std::visit(
      overloaded{[x](const Normal& d) {
                   if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
                   return std_normal_cdf((x - d.mean) / std::sqrt(d.variance));
                 },
                 [x](const StudentT& d) {
                   if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
                   return student_t_cdf(d.df, x);
                 },
                 [x](const ChiSquare& d) {
                   if (x <= 0.0) return 0.0;
                   if (std::isinf(x)) return 1.0;
                   return reg_lower_gamma(0.5 * d.df, 0.5 * x);
                 },
                 [x](const GammaShapeScale& d) {
                   if (x <= 0.0) return 0.0;
                   if (std::isinf(x)) return 1.0;
                   return reg_lower_gamma(d.shape, x / d.scale);
                 },
                 [x](const ShiftedExp& d) {
                   if (x <= d.shift) return 0.0;
                   return -std::expm1(-(x - d.shift) / d.scale);
                 },
                 [x](const ParetoII& d) {
                   if (x <= 0.0) return 0.0;
                   return -std::expm1(-d.shape * std::log1p(x / d.scale));
                 }},
      dist);
}

double sf(const DistSpec& dist, double x) {
  validate(dist);
  if (std::isnan(x)) throw DomainError("sf: NaN argument");
  return std::visit(
      overloaded{[x](const Normal& d) {
                   if (std::isinf(x)) return x > 0 ? 0.0 : 1.0;
                   return std_normal_sf((x - d.mean) / std::sqrt(d.variance));
                 },
                 [x](const StudentT& d) {
                   if (std::isinf(x)) return x > 0 ? 0.0 : 1.0;
                   return student_t_sf(d.df, x);
                 },
                 [x](const ChiSquare& d) {
                   if (x <= 0.0) return 1.0;
                   if (std::isinf(x)) return 0.0;
                   return reg_upper_gamma(0.5 * d.df, 0.5 * x);
                 },
                 [x](const GammaShapeScale& d) {
                   if (x <= 0.0) return 1.0;
                   if (std::isinf(x)) return 0.0;
                   return reg_upper_gamma(d.shape, x / d.scale);
                 },
                 [x](const ShiftedExp& d) {
                   if (x <= d.shift) return 1.0;
                   return std::exp(-(x - d.shift) / d.scale);
                 },
                 [x](const ParetoII& d) {
                   if (x <= 0.0) return 1.0;
                   return std::exp(-d.shape * std::log1p(x / d.scale));
                 }},
      dist);
}

double quantile(const DistSpec& dist, double p) {
  validate(dist);
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must lie in (0, 1)");
  return std::visit(
      overloaded{[p](const Normal& d) { return d.mean + std::sqrt(d.variance) * std_normal_quantile(p); },
                 [p](const ShiftedExp& d) { return d.shift - d.scale * std::log1p(-p); },
                 [p](const ParetoII& d) { return d.scale * std::expm1(-std::log1p(-p) / d.shape); },
                 [&dist, p](const auto&) { return bisect_quantile(dist, p); }},
      dist);
}

double mean(const DistSpec& dist) {
  validate(dist);
  return std::visit(overloaded{[](const Normal& d) { return d.mean; },
                               [](const StudentT& d) { return d.df > 1.0 ? 0.0 : kInf; },
                               [](const ChiSquare& d) { return d.df; },
                               [](const GammaShapeScale& d) { return d.shape * d.scale; },
                               [](const ShiftedExp& d) { return d.shift + d.scale; },
                               [](const ParetoII& d) {
                                 return d.shape > 1.0 ? d.scale / (d.shape - 1.0) : kInf;
                               }},
                    dist);
}

}  // namespace qfr
