#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "nitm/matrix.hpp"
#include "nitm/objective.hpp"

namespace nitm::model {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Student-t weight prior with nu degrees of freedom in dimension d,
// p0(w) = (1/Z0) (1 + |w|^2/nu)^{-(nu+d)/2}. nu = +inf selects the
// standard normal branch. The entropic index tied to the prior is
// q = 1 + 2/(nu+d).
struct PriorSpec {
  double nu = kInfinity;
  int dim = 0;
  double q = 1.0;
  double log_z0 = 0.0;  // ln of the normalizer Z0

  static PriorSpec make(double nu, int dim);

  bool gaussian() const { return nu == kInfinity; }
  double z0() const;

  // exponents and coefficients shared by the objectives; Gaussian limits
  // are mean_coefficient = 1, scale_exponent = 0, dual_exponent = 1
  double scale_exponent() const;    // a = d/(nu+d)
  double dual_exponent() const;     // r = nu/(nu+d)
  double mean_coefficient() const;  // k = (nu/(nu+d)) Z0^{-2/(nu+d)}
  double log_mean_coefficient() const;
};

// Rows are the label-signed feature vectors: row i equals y_i * phi_i.
struct DesignMatrix {
  Matrix h;

  static DesignMatrix make(const Matrix& features, std::span<const int> labels);

  std::size_t count() const { return h.rows(); }
  std::size_t dim() const { return h.cols(); }
};

// Posterior summary induced by dual variables: mu = k H^T beta and the
// feasibility factor c = 1 - |mu|^2/nu (1 on the Gaussian branch).
struct PosteriorState {
  std::vector<double> mu;
  double c = 1.0;
  std::optional<std::vector<double>> beta;
};

// One training problem: prior, loss index q' in [0, 1], loss weight C > 0,
// and the signed design.
struct ObjectiveSpec {
  PriorSpec prior;
  double q_prime = 0.0;
  double c_reg = 1.0;
  std::shared_ptr<const DesignMatrix> design;

  static ObjectiveSpec make(PriorSpec prior, double q_prime, double c_reg,
                            std::shared_ptr<const DesignMatrix> design);
};

// Prior density at w (not log). Throws if w has the wrong dimension.
double prior_density(const PriorSpec& prior, std::span<const double> w);

PosteriorState posterior_from_beta(const PriorSpec& prior, const DesignMatrix& design,
                                   std::span<const double> beta);

// Divergence-to-prior penalty as a function of mu. Zero at mu = 0, grows
// without bound as |mu|^2 -> nu (finite nu), and equals |mu|^2/2 on the
// Gaussian branch. Returns +inf when |mu|^2 >= nu.
double primal_regularizer(const PriorSpec& prior, std::span<const double> mu);

// Scale applied to raw margins H mu inside the loss: k (1 - |mu|^2/nu)^{-a}.
// +inf when |mu|^2 >= nu.
double margin_scale(const PriorSpec& prior, std::span<const double> mu);

// Full primal objective R(mu) + C sum_i loss(q', s(mu) (H mu)_i) with
// gradient. Infeasible mu (|mu|^2 >= nu) evaluates to {+inf, zeros}.
// threads > 1 parallelizes the row reduction; the result is bitwise
// identical for any thread count.
Evaluation primal_objective(const ObjectiveSpec& spec, std::span<const double> mu,
                            int threads = 1);

// Divergence from beta/C to the flat measure, the dual's penalty block:
// C * D_{1/q'}(beta/C || 1). q' = 0 is the box indicator on [0, C] (value
// C*m - sum beta inside), q' = 1 the KL form sum beta ln(beta/C) - beta + C.
// Requires beta >= 0; +inf outside the q' = 0 box.
double dual_penalty(double q_prime, std::span<const double> beta, double c_reg);

// Negated dual to minimize: smooth coupling (nu+d)(1 - c^r)/2 with
// c = 1 - k^2 |H^T beta|^2 / nu, plus dual_penalty. Evaluates to
// {+inf, zeros} when c <= 0 or outside the penalty domain.
Evaluation dual_objective(const ObjectiveSpec& spec, std::span<const double> beta);

// ln of the dual normalizer Z_q = c^{-nu/2} at the given beta (Gaussian
// branch: |H^T beta|^2 / 2).
double log_z_q(const ObjectiveSpec& spec, std::span<const double> beta);

// Sign of the score mu . f: +1 for >= 0, else -1.
int predict(std::span<const double> mu, std::span<const double> features);

namespace detail {
// Plain single-loop evaluation, kept as the reference for the chunked
// kernel above.
Evaluation primal_objective_serial(const ObjectiveSpec& spec, std::span<const double> mu);
}  // namespace detail

}  // namespace nitm::model
