#pragma once

#include <span>

namespace nitm::qcalc {

// q-deformed exponential: [1 + (1-q)x]_+^{1/(1-q)} for q != 1, exp(x) at
// q = 1. q = -inf is accepted as the pointwise limit: 0 for x < 0, 1 for
// x >= 0. For q > 1 a zero base is a pole and returns +inf.
double q_exp(double q, double x);

// q-deformed logarithm: (x^{1-q} - 1)/(1-q) for q != 1, ln(x) at q = 1.
// Requires finite q and x > 0. Inverse of q_exp on q_exp's range.
double q_log(double q, double x);

// Tsallis entropy of a probability vector (components >= 0, sum within
// 1e-12 of 1). q = 1 is Shannon entropy; q = 0 uses the support-count
// convention p^0 = [p != 0], giving (support size) - 1.
double tsallis_entropy(double q, std::span<const double> p);

// Divergence between nonnegative vectors p and t (not necessarily
// normalized): sum of [p^q t^{1-q} - q p + (q-1) t]/(q-1), with the
// q = 1 limit sum of [p ln(p/t) - p + t]. Zero iff p == t. A component
// with t = 0 < p and q >= 1 yields +inf.
double tsallis_divergence(double q, std::span<const double> p, std::span<const double> t);

// q -> +inf limit of the divergence to the all-ones vector: sum of (1 - p_i)
// when every p_i <= 1, else +inf.
double d_infinity_to_ones(std::span<const double> p);

// ln Gamma(x) for x > 0.
double log_gamma(double x);

}  // namespace nitm::qcalc
