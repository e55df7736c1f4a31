#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <queue>
#include <vector>

#include "spincool/errors.hpp"

namespace spincool {

// Adaptive Gauss-Kronrod (7, 15) quadrature for complex-valued integrands.
// The error of each panel is |K15 - G7|; panels are split worst first until
// the summed error estimate drops below the absolute tolerance or the panel
// budget runs out, which raises convergence_error carrying the value
// reached.  Callers pass seed breakpoints at integrand kinks; oscillatory
// integrands should be pre-split so each seed panel spans a bounded phase.
struct QuadratureControl {
  double rel_tol = 1e-6;
  int max_panels = 40000;
};

namespace gk {

// Standard Kronrod-15 abscissae (positive half) and weights, with the
// embedded Gauss-7 rule on the odd-index nodes.
inline constexpr double xk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
inline constexpr double wk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double wg[4] = {0.129484966168870, 0.279705391489277,
                                 0.381830050505119, 0.417959183673469};

struct Panel {
  double a, b;
  std::complex<double> value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

inline Panel evaluate(const std::function<std::complex<double>(double)>& f,
                      double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::complex<double> k15{0.0, 0.0}, g7{0.0, 0.0};
  for (int i = 0; i < 8; ++i) {
    const std::complex<double> pair =
        i == 7 ? f(mid) : f(mid - half * xk[i]) + f(mid + half * xk[i]);
    k15 += wk[i] * pair;
    if (i % 2 == 1) g7 += wg[i / 2] * pair;
  }
  Panel p;
  p.a = a;
  p.b = b;
  p.value = half * k15;
  p.error = std::abs(half * (k15 - g7));
  return p;
}

}  // namespace gk

struct QuadratureResult {
  std::complex<double> value;
  double error_estimate = 0.0;
  int panels = 0;
};

// Integrates f over the union of [breaks[i], breaks[i+1]] panels to an
// absolute tolerance.
inline QuadratureResult integrate_adaptive(
    const std::function<std::complex<double>(double)>& f,
    const std::vector<double>& breaks, double abs_tol, int max_panels) {
  std::priority_queue<gk::Panel> queue;
  std::complex<double> total{0.0, 0.0};
  double error = 0.0;
  int panels = 0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    auto p = gk::evaluate(f, breaks[i], breaks[i + 1]);
    total += p.value;
    error += p.error;
    queue.push(p);
    ++panels;
  }
  while (error > abs_tol && !queue.empty()) {
    if (panels >= max_panels)
      throw convergence_error("quadrature panel budget exhausted",
                              std::abs(total), error);
    const gk::Panel worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    auto left = gk::evaluate(f, worst.a, mid);
    auto right = gk::evaluate(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++panels;
  }
  QuadratureResult r;
  r.value = total;
  r.error_estimate = error;
  r.panels = panels;
  return r;
}

}  // namespace spincool
