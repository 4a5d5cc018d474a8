#include "qfr/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "qfr/errors.hpp"

namespace qfr {
namespace {

// Kronrod 15-point abscissae (positive half) and weights; Gauss 7-point weights.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082,
                                       0.279705391489276667901467771423780,
                                       0.381830050505118944950369775488975,
                                       0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double resk = fc * kWgk[7];
  double resg = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    resk += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  return {a, b, resk * h, std::fabs((resk - resg) * h)};
}

// 4-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr std::array<double, 4> kGl4x = {-0.861136311594052575223946488892809, -0.339981043584856264802665759103245,
                                         0.339981043584856264802665759103245, 0.861136311594052575223946488892809};
constexpr std::array<double, 4> kGl4w = {0.347854845137453857373063949221999, 0.652145154862546142626936050778001,
                                         0.652145154862546142626936050778001, 0.347854845137453857373063949221999};

double tensor_rule(const std::function<double(double, double)>& f, double x0, double x1, double y0, double y1) {
  const double cx = 0.5 * (x0 + x1);
  const double hx = 0.5 * (x1 - x0);
  const double cy = 0.5 * (y0 + y1);
  const double hy = 0.5 * (y1 - y0);
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double x = cx + hx * kGl4x[i];
    double row = 0.0;
    for (int j = 0; j < 4; ++j) row += kGl4w[j] * f(x, cy + hy * kGl4x[j]);
    sum += kGl4w[i] * row;
  }
  return sum * hx * hy;
}

struct Cell {
  double x0, x1, y0, y1;
  double coarse;
  std::array<double, 4> children;
  double error;
  std::size_t order;  // creation order, breaks ties deterministically
  double refined() const { return children[0] + children[1] + children[2] + children[3]; }
  bool operator<(const Cell& o) const {
    if (error != o.error) return error < o.error;
    return order > o.order;
  }
};

}  // namespace

QuadratureResult integrate_gk(const std::function<double(double)>& f, std::span<const double> breakpoints,
                              const QuadratureOptions& opts) {
  if (breakpoints.size() < 2) throw DomainError("integrate_gk: need at least two breakpoints");
  std::priority_queue<Segment> heap;
  QuadratureResult out;
  double total = 0.0;
  double err = 0.0;
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    if (!(breakpoints[k + 1] > breakpoints[k])) {
      if (breakpoints[k + 1] == breakpoints[k]) continue;
      throw DomainError("integrate_gk: breakpoints must be nondecreasing");
    }
    Segment s = gk15(f, breakpoints[k], breakpoints[k + 1]);
    out.evaluations += 15;
    total += s.value;
    err += s.error;
    heap.push(s);
  }
  std::size_t splits = 0;
  while (!heap.empty() && err > std::max(opts.abs_tol, opts.rel_tol * std::fabs(total)) &&
         splits < opts.max_subdivisions) {
    const Segment s = heap.top();
    heap.pop();
    const double mid = 0.5 * (s.a + s.b);
    if (!(mid > s.a && mid < s.b)) {
      heap.push(s);
      break;
    }
    const Segment l = gk15(f, s.a, mid);
    const Segment r = gk15(f, mid, s.b);
    out.evaluations += 30;
    total += l.value + r.value - s.value;
    err += l.error + r.error - s.error;
    heap.push(l);
    heap.push(r);
    ++splits;
  }
  // Re-sum to shed drift from the incremental updates.
  total = 0.0;
  err = 0.0;
  std::vector<Segment> all;
  all.reserve(heap.size());
  while (!heap.empty()) {
    all.push_back(heap.top());
    heap.pop();
  }
  std::sort(all.begin(), all.end(), [](const Segment& x, const Segment& y) { return x.a < y.a; });
  for (const auto& s : all) {
    total += s.value;
    err += s.error;
  }
  out.value = total;
  out.error = err;
  out.converged = err <= std::max(opts.abs_tol, opts.rel_tol * std::fabs(total));
  return out;
}

QuadratureResult integrate_gk(const std::function<double(double)>& f, double a, double b,
                              const QuadratureOptions& opts) {
  if (a == b) return {0.0, 0.0, 0, true};
  if (a > b) {
    QuadratureResult r = integrate_gk(f, b, a, opts);
    r.value = -r.value;
    return r;
  }
  const std::array<double, 2> ends = {a, b};
  return integrate_gk(f, std::span<const double>(ends), opts);
}

QuadratureResult integrate_2d(const std::function<double(double, double)>& f, std::span<const double> x_nodes,
                              std::span<const double> y_nodes, const Cubature2DOptions& opts) {
  if (x_nodes.size() < 2 || y_nodes.size() < 2) throw DomainError("integrate_2d: need at least two nodes per axis");
  if (!(opts.abs_tol > 0.0)) throw DomainError("integrate_2d: tolerance must be positive");
  QuadratureResult out;
  std::size_t order = 0;
  auto make_cell = [&](double x0, double x1, double y0, double y1, double coarse) {
    Cell c{x0, x1, y0, y1, coarse, {}, 0.0, order++};
    const double xm = 0.5 * (x0 + x1);
    const double ym = 0.5 * (y0 + y1);
    c.children = {tensor_rule(f, x0, xm, y0, ym), tensor_rule(f, xm, x1, y0, ym), tensor_rule(f, x0, xm, ym, y1),
                  tensor_rule(f, xm, x1, ym, y1)};
    out.evaluations += 64;
    c.error = std::fabs(c.refined() - c.coarse);
    return c;
  };

  std::priority_queue<Cell> heap;
  double err = 0.0;
  for (std::size_t i = 0; i + 1 < x_nodes.size(); ++i) {
    for (std::size_t j = 0; j + 1 < y_nodes.size(); ++j) {
      const double x0 = x_nodes[i], x1 = x_nodes[i + 1], y0 = y_nodes[j], y1 = y_nodes[j + 1];
      if (!(x1 > x0) || !(y1 > y0)) throw DomainError("integrate_2d: nodes must be strictly increasing");
      const double coarse = tensor_rule(f, x0, x1, y0, y1);
      out.evaluations += 16;
      Cell c = make_cell(x0, x1, y0, y1, coarse);
      err += c.error;
      heap.push(c);
    }
  }
  while (err > opts.abs_tol && heap.size() + 3 <= opts.max_cells) {
    const Cell c = heap.top();
    heap.pop();
    err -= c.error;
    const double xm = 0.5 * (c.x0 + c.x1);
    const double ym = 0.5 * (c.y0 + c.y1);
    const std::array<Cell, 4> kids = {make_cell(c.x0, xm, c.y0, ym, c.children[0]),
                                      make_cell(xm, c.x1, c.y0, ym, c.children[1]),
                                      make_cell(c.x0, xm, ym, c.y1, c.children[2]),
                                      make_cell(xm, c.x1, ym, c.y1, c.children[3])};
    for (const auto& k : kids) {
      err += k.error;
      heap.push(k);
    }
  }
  // Deterministic final summation in creation order.
  std::vector<Cell> all;
  all.reserve(heap.size());
  while (!heap.empty()) {
    all.push_back(heap.top());
    heap.pop();
  }
  std::sort(all.begin(), all.end(), [](const Cell& a, const Cell& b) { return a.order < b.order; });
  double total = 0.0;
  err = 0.0;
  for (const auto& c : all) {
    total += c.refined();
    err += c.error;
  }
  out.value = total;
  out.error = err;
  out.converged = err <= opts.abs_tol;
  return out;
}

}  // namespace qfr
