#pragma once
// Reference numerics for tests, written independently of the library in long double.

#include <cmath>
#include <algorithm>
#include <functional>

namespace oracle {

using real = long double;

// Gauss-Legendre nodes on [-1, 1] from Newton iteration on P_n.
struct GaussLegendre {
  static constexpr int n = 20;
  real x[n];
  real w[n];
  GaussLegendre() {
    const real pi = 3.141592653589793238462643383279502884L;
    for (int i = 0; i < n; ++i) {
      real z = std::cos(pi * (i + 0.75L) / (n + 0.5L));
      real dp = 0;
      for (int it = 0; it < 100; ++it) {
        real p0 = 1, p1 = z;
        for (int k = 2; k <= n; ++k) {
          const real p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1);
        const real step = p1 / dp;
        z -= step;
        if (std::fabs(step) < 1e-19L) break;
      }
      x[i] = z;
      w[i] = 2 / ((1 - z * z) * dp * dp);
    }
  }
};

inline real composite(const std::function<real(real)>& f, real a, real b, int pieces) {
  static const GaussLegendre gl;
  real total = 0;
  for (int k = 0; k < pieces; ++k) {
    const real x0 = a + (b - a) * k / pieces;
    const real x1 = a + (b - a) * (k + 1) / pieces;
    const real c = (x0 + x1) / 2;
    const real h = (x1 - x0) / 2;
    real s = 0;
    for (int i = 0; i < GaussLegendre::n; ++i) s += gl.w[i] * f(c + h * gl.x[i]);
    total += s * h;
  }
  return total;
}

// Composite 20-point Gauss-Legendre, doubling the panel count until two
// successive passes agree to `eps` relative.
inline real integrate(const std::function<real(real)>& f, real a, real b, real eps = 1e-16L, int pieces = 16) {
  real prev = composite(f, a, b, pieces);
  for (int round = 0; round < 10; ++round) {
    pieces *= 2;
    const real cur = composite(f, a, b, pieces);
    if (std::fabs(cur - prev) <= eps * std::max<real>(1, std::fabs(cur))) return cur;
    prev = cur;
  }
  return prev;
}

// Root of an increasing function by bisection.
inline real bisect(const std::function<real(real)>& g, real lo, real hi, int iters = 200) {
  for (int i = 0; i < iters; ++i) {
    const real mid = (lo + hi) / 2;
    if (g(mid) < 0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return (lo + hi) / 2;
}

inline real normal_pdf(real x) { return std::exp(-x * x / 2) / std::sqrt(2 * 3.141592653589793238462643383279502884L); }

inline real normal_cdf(real x) { return std::erfc(-x / std::sqrt(2.0L)) / 2; }

inline real normal_quantile(real p) {
  return bisect([p](real x) { return normal_cdf(x) - p; }, -40, 40);
}

// Neumaier-compensated sum.
struct Sum {
  real s = 0;
  real c = 0;
  void add(real v) {
    const real t = s + v;
    c += std::fabs(s) >= std::fabs(v) ? (s - t) + v : (v - t) + s;
    s = t;
  }
  real value() const { return s + c; }
};

// P(a, b) for b >= 0 from e^-b sum_k b^(a+k) / Gamma(a+k+1), all terms positive.
inline real lower_gamma_series(real a, real b) {
  if (b == 0) return 0;
  Sum sum;
  real term = std::exp(a * std::log(b) - b - std::lgamma(a + 1));
  for (int k = 0; k < 100000; ++k) {
    sum.add(term);
    term *= b / (a + k + 1);
    if (k > b && term < 1e-22L * sum.value()) break;
  }
  return sum.value();
}

// sum_k |b|^(a+k) / (Gamma(a) (a+k) k!) for b < 0.
inline real negative_gamma_series(real a, real b) {
  const real m = -b;
  Sum sum;
  real pw = std::exp(a * std::log(m) - std::lgamma(a));  // |b|^a / Gamma(a)
  for (int k = 0; k < 100000; ++k) {
    const real term = pw / (a + k);
    sum.add(term);
    pw *= m / (k + 1);
    if (k > m && term < 1e-22L * sum.value()) break;
  }
  return sum.value();
}

}  // namespace oracle
