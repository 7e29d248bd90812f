#include "nitm/qcalc.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nitm::qcalc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.141592653589793238462643;
constexpr double kNormTol = 1e-12;
}  // namespace

double q_exp(double q, double x) {
  if (!std::isfinite(x)) throw std::domain_error("q_exp: x must be finite");
  if (std::isnan(q)) throw std::domain_error("q_exp: q must not be NaN");
  if (std::isinf(q)) {
    if (q > 0.0) throw std::domain_error("q_exp: q = +inf is not defined");
    return x < 0.0 ? 0.0 : 1.0;
  }
  if (q == 1.0) return std::exp(x);
  const double one_minus_q = 1.0 - q;
  const double base = 1.0 + one_minus_q * x;
  if (base <= 0.0) {
    // cutoff for q < 1, pole for q > 1
    return q < 1.0 ? 0.0 : kInf;
  }
  return std::pow(base, 1.0 / one_minus_q);
}

double q_log(double q, double x) {
  if (!std::isfinite(q)) throw std::domain_error("q_log: q must be finite");
  if (!(x > 0.0) || !std::isfinite(x)) throw std::domain_error("q_log: x must be positive and finite");
  if (q == 1.0) return std::log(x);
  const double one_minus_q = 1.0 - q;
  // (x^{1-q} - 1)/(1-q) without cancellation near x = 1
  return std::expm1(one_minus_q * std::log(x)) / one_minus_q;
}

namespace {

void check_probability(std::span<const double> p) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("tsallis_entropy: components must be finite and >= 0");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kNormTol) {
    throw std::invalid_argument("tsallis_entropy: probabilities must sum to 1 within 1e-12");
  }
}

}  // namespace

double tsallis_entropy(double q, std::span<const double> p) {
  if (!std::isfinite(q)) throw std::domain_error("tsallis_entropy: q must be finite");
  check_probability(p);
  if (q == 1.0) {
    double s = 0.0;
    for (double v : p) {
      if (v > 0.0) s -= v * std::log(v);
    }
    return s;
  }
  if (q == 0.0) {
    // p^0 = [p != 0]: entropy counts the support
    double support = 0.0;
    for (double v : p) {
      if (v != 0.0) support += 1.0;
    }
    return support - 1.0;
  }
  double moment = 0.0;
  for (double v : p) {
    if (v == 0.0) {
      if (q < 0.0) return kInf;
      continue;
    }
    moment += std::pow(v, q);
  }
  return (1.0 - moment) / (q - 1.0);
}

double tsallis_divergence(double q, std::span<const double> p, std::span<const double> t) {
  if (!std::isfinite(q)) throw std::domain_error("tsallis_divergence: q must be finite");
  if (p.size() != t.size()) throw std::invalid_argument("tsallis_divergence: size mismatch");
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0) || !std::isfinite(p[i]) || !(t[i] >= 0.0) || !std::isfinite(t[i])) {
      throw std::invalid_argument("tsallis_divergence: components must be finite and >= 0");
    }
  }
  if (q == 1.0) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] == 0.0) {
        s += t[i];
      } else if (t[i] == 0.0) {
        return kInf;
      } else {
        s += p[i] * std::log(p[i] / t[i]) - p[i] + t[i];
      }
    }
    return s;
  }
  // grouped per component so p == t contributes exactly zero
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == t[i]) continue;
    double cross;  // p^q t^{1-q}
    if (p[i] == 0.0) {
      if (q < 0.0 && t[i] > 0.0) return kInf;
      cross = 0.0;
    } else if (t[i] == 0.0) {
      if (q > 1.0) return kInf;
      cross = 0.0;
    } else {
      cross = std::pow(p[i], q) * std::pow(t[i], 1.0 - q);
    }
    s += (cross - q * p[i] + (q - 1.0) * t[i]) / (q - 1.0);
  }
  return s;
}

double d_infinity_to_ones(std::span<const double> p) {
  double s = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("d_infinity_to_ones: components must be finite and >= 0");
    }
    if (v > 1.0) return kInf;
    s += 1.0 - v;
  }
  return s;
}

double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: x must be positive");
  if (std::isinf(x)) throw std::domain_error("log_gamma: x must be finite");
  // Lanczos approximation, g = 7, 9 terms
  static constexpr double kCoef[9] = {
      0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,    12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6,  1.5056327351493116e-7};
  if (x < 0.5) {
    // reflection Gamma(x) Gamma(1-x) = pi / sin(pi x)
    return std::log(kPi / std::sin(kPi * x)) - log_gamma(1.0 - x);
  }
  const double z = x - 1.0;
  double a = kCoef[0];
  for (int i = 1; i < 9; ++i) a += kCoef[i] / (z + i);
  const double t = z + 7.5;
  return 0.5 * std::log(2.0 * kPi) + (z + 0.5) * std::log(t) - t + std::log(a);
}

}  // namespace nitm::qcalc
