#pragma once

#include <string>
#include <variant>

namespace qfr {

struct Normal {
  double mean = 0.0;
  double variance = 1.0;
};

struct StudentT {
  double df = 1.0;
};

struct ChiSquare {
  double df = 1.0;
};

struct GammaShapeScale {
  double shape = 1.0;
  double scale = 1.0;
};

// Density scale^-1 exp(-(y - shift)/scale) on [shift, inf).
struct ShiftedExp {
  double scale = 1.0;
  double shift = 0.0;
};

// Lomax law: survival (1 + z/scale)^-shape on z >= 0.
struct ParetoII {
  double shape = 1.0;
  double scale = 1.0;
};

using DistSpec = std::variant<Normal, StudentT, ChiSquare, GammaShapeScale, ShiftedExp, ParetoII>;

// Throws DomainError when the parameters are outside their domain.
void validate(const DistSpec& dist);
std::string describe(const DistSpec& dist);

double pdf(const DistSpec& dist, double x);
double log_pdf(const DistSpec& dist, double x);
double cdf(const DistSpec& dist, double x);
// 1 - cdf, evaluated without cancellation in the upper tail.
double sf(const DistSpec& dist, double x);
double quantile(const DistSpec& dist, double p);

double mean(const DistSpec& dist);

}  // namespace qfr
