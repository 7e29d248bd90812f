#pragma once

namespace nitm::loss {

// Margin losses of the family loss(z) = q_exp(q', -z) for q' in [0, 1]:
// q' = 0 is the hinge [1 - z]_+, q' = 0.5 the squared hinge [1 - z/2]_+^2,
// q' = 1 the exponential e^{-z}. All are convex and nonincreasing in z.
double loss_value(double q_prime, double z);

// One-sided derivative pair; lower == upper except at the hinge kink z = 1
// for q' = 0, where the subdifferential is [-1, 0].
struct DerivativeInterval {
  double lower;
  double upper;
  // element used by the solvers: -1 strictly left of the kink, 0 at and
  // right of it; equal to the derivative wherever it exists
  double chosen() const;
};

DerivativeInterval loss_derivative(double q_prime, double z);

// chosen() of loss_derivative, the value plugged into gradients
double loss_derivative_point(double q_prime, double z);

// 1 if z < 0 (misclassified), else 0; a zero margin counts as correct.
double zero_one_loss(double z);

}  // namespace nitm::loss
