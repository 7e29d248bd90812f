#include "nitm/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "nitm/qcalc.hpp"

namespace nitm::loss {

namespace {

void check_args(double q_prime, double z, const char* who) {
  if (!(q_prime >= 0.0 && q_prime <= 1.0)) {
    throw std::invalid_argument(std::string(who) + ": q' must lie in [0, 1]");
  }
  if (!std::isfinite(z)) throw std::domain_error(std::string(who) + ": z must be finite");
}

}  // namespace

double loss_value(double q_prime, double z) {
  check_args(q_prime, z, "loss_value");
  return qcalc::q_exp(q_prime, -z);
}

double DerivativeInterval::chosen() const { return lower == upper ? lower : upper; }

DerivativeInterval loss_derivative(double q_prime, double z) {
  check_args(q_prime, z, "loss_derivative");
  if (q_prime == 0.0) {
    if (z < 1.0) return {-1.0, -1.0};
    if (z > 1.0) return {0.0, 0.0};
    return {-1.0, 0.0};  // kink
  }
  if (q_prime == 1.0) {
    const double d = -std::exp(-z);
    return {d, d};
  }
  // -(d/dz) q_exp(q', -z) = -[1 - (1-q')z]_+^{q'/(1-q')}
  const double base = 1.0 - (1.0 - q_prime) * z;
  if (base <= 0.0) return {0.0, 0.0};
  const double d = -std::pow(base, q_prime / (1.0 - q_prime));
  return {d, d};
}

double loss_derivative_point(double q_prime, double z) {
  return loss_derivative(q_prime, z).chosen();
}

double zero_one_loss(double z) {
  if (std::isnan(z)) throw std::domain_error("zero_one_loss: z must not be NaN");
  return z < 0.0 ? 1.0 : 0.0;
}

}  // namespace nitm::loss
