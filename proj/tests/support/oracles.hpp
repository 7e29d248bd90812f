// Independent numeric oracles for the tests: quadrature, series, finite
// differences, and brute-force search. Nothing here calls back into the
// library code under test except through the objective callables handed in.
#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace oracles {

// Gauss-Legendre nodes/weights on [-1, 1]; Newton iteration on the
// Legendre polynomial from the Chebyshev initial guess.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussRule gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

// integral of f over [a, b], composite 24-point Gauss-Legendre
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        int pieces = 64) {
  static const GaussRule rule = gauss_legendre(24);
  double total = 0.0;
  const double h = (b - a) / pieces;
  for (int p = 0; p < pieces; ++p) {
    const double lo = a + p * h;
    const double mid = lo + 0.5 * h;
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      s += rule.weights[i] * f(mid + 0.5 * h * rule.nodes[i]);
    }
    total += 0.5 * h * s;
  }
  return total;
}

// ln Gamma(x) from the incomplete-gamma split at t = 1:
// gamma(x,1) by its alternating series, Gamma(x,1) by quadrature with the
// substitution t = 1 + u/(1-u) mapping [1,inf) to [0,1).
inline double log_gamma_quadrature(double x) {
  double lower = 0.0;
  double factorial = 1.0;  // k!
  double term;
  int k = 0;
  do {
    term = (k % 2 == 0 ? 1.0 : -1.0) / (factorial * (x + k));
    lower += term;
    ++k;
    factorial *= k;
  } while (std::abs(term) > 1e-18 && k < 60);
  const double upper = integrate(
      [x](double u) {
        const double t = 1.0 + u / (1.0 - u);
        const double jac = 1.0 / ((1.0 - u) * (1.0 - u));
        return std::exp((x - 1.0) * std::log(t) - t) * jac;
      },
      0.0, 1.0 - 1e-12, 128);
  return std::log(lower + upper);
}

// factorial-free ascent: ln Gamma(x) = ln Gamma(frac in [1,2)) + sum ln
// (for cross-checking large arguments against the small-x oracle)
inline double log_gamma_recurrence(double x, const std::function<double(double)>& base) {
  double shift_sum = 0.0, comp = 0.0;
  while (x >= 2.0) {
    x -= 1.0;
    const double y = std::log(x) - comp;  // Kahan
    const double t = shift_sum + y;
    comp = (t - shift_sum) - y;
    shift_sum = t;
  }
  return base(x) + shift_sum;
}

// central finite-difference gradient
inline std::vector<double> fd_gradient(const std::function<double(std::span<const double>)>& f,
                                       std::span<const double> x, double eps = 1e-6) {
  std::vector<double> g(x.size());
  std::vector<double> p(x.begin(), x.end());
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double save = p[j];
    const double h = eps * std::max(1.0, std::abs(save));
    p[j] = save + h;
    const double up = f(p);
    p[j] = save - h;
    const double dn = f(p);
    p[j] = save;
    g[j] = (up - dn) / (2.0 * h);
  }
  return g;
}

// coarse-to-fine 2-d grid minimization; returns (x, y, value)
struct GridBest {
  double x = 0.0;
  double y = 0.0;
  double value = 0.0;
};

inline GridBest grid_search_2d(const std::function<double(double, double)>& f, double lo,
                               double hi, int steps, int refine_rounds) {
  GridBest best{lo, lo, f(lo, lo)};
  double x0 = lo, x1 = hi, y0 = lo, y1 = hi;
  // each round rescans, then shrinks the box to +-2 cells of the incumbent
  for (int round = 0; round <= refine_rounds; ++round) {
    for (int i = 0; i <= steps; ++i) {
      for (int j = 0; j <= steps; ++j) {
        const double x = x0 + (x1 - x0) * i / steps;
        const double y = y0 + (y1 - y0) * j / steps;
        const double v = f(x, y);
        if (v < best.value) best = {x, y, v};
      }
    }
    const double hx = (x1 - x0) * 2.0 / steps;
    const double hy = (y1 - y0) * 2.0 / steps;
    x0 = best.x - hx;
    x1 = best.x + hx;
    y0 = best.y - hy;
    y1 = best.y + hy;
  }
  return best;
}

}  // namespace oracles
