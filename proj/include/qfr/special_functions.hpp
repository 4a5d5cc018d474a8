#pragma once

namespace qfr {

// Standard normal distribution.
double std_normal_pdf(double x);
double std_normal_cdf(double x);
// Upper tail 1 - Phi(x) without cancellation.
double std_normal_sf(double x);
double std_normal_quantile(double p);

double log_gamma(double a);

// Regularized incomplete gamma functions P(a, b) and Q(a, b).
//
// For b < 0 the lower function is the real continuation
// Gamma(a)^-1 * int_0^b t^(a-1) e^-t dt, evaluated as
// sign * |b|^a * S(a, b) / Gamma(a), where S is the positive series below and
// sign = (-1)^floor(a). For integer a this is exactly (-1)^a.
double reg_lower_gamma(double a, double b);
double reg_upper_gamma(double a, double b);

// log P(a, b) for b >= 0; accurate when P underflows.
double log_reg_lower_gamma(double a, double b);
// log Q(a, b) for b >= 0; accurate when Q underflows.
double log_reg_upper_gamma(double a, double b);

// S(a, b) = int_0^1 s^(a-1) e^(-b s) ds = Gamma(a) P(a, b) / b^a.
// Positive and finite for every real b; S(a, 0) = 1/a. Returns log S.
double log_scaled_lower_gamma(double a, double b);

// Regularized incomplete beta I_x(a, b).
double reg_incomplete_beta(double a, double b, double x);

// Phi_j(b) = int_{-inf}^{Phi^-1(b)} x^j phi(x) dx for b in (0, 1].
double truncated_gaussian_moment(int j, double b);

// E[Z^j] for Z standard normal.
double gaussian_moment(int j);

}  // namespace qfr
