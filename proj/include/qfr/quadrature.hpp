#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace qfr {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

struct QuadratureOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  std::size_t max_subdivisions = 2000;
};

// Globally adaptive Gauss-Kronrod (7/15) quadrature on [a, b]. Never throws on
// non-convergence; inspect `converged`.
QuadratureResult integrate_gk(const std::function<double(double)>& f, double a, double b,
                              const QuadratureOptions& opts = {});

// Same, with the interval pre-split at the sorted interior breakpoints.
QuadratureResult integrate_gk(const std::function<double(double)>& f, std::span<const double> breakpoints,
                              const QuadratureOptions& opts = {});

struct Cubature2DOptions {
  double abs_tol = 1e-6;
  std::size_t max_cells = 400000;
};

// Globally adaptive cubature over the rectangle partitioned by the given axis
// nodes. Each cell is estimated by a tensor Gauss-Legendre rule and checked
// against the sum of the same rule over its four dyadic children; the cell with
// the largest discrepancy is split first.
QuadratureResult integrate_2d(const std::function<double(double, double)>& f, std::span<const double> x_nodes,
                              std::span<const double> y_nodes, const Cubature2DOptions& opts = {});

}  // namespace qfr
