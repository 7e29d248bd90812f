#include "nitm/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "nitm/loss.hpp"
#include "nitm/parallel.hpp"
#include "nitm/qcalc.hpp"

namespace nitm::model {

namespace {

constexpr double kInf = kInfinity;
constexpr double kPi = 3.141592653589793238462643;
constexpr double kLog2Pi = 1.837877066409345483560659;

void check_dim(const PriorSpec& prior, std::span<const double> v, const char* who) {
  if (static_cast<int>(v.size()) != prior.dim) {
    throw std::invalid_argument(std::string(who) + ": vector length must equal prior dimension");
  }
}

Evaluation infeasible(std::size_t dim) {
  return {kInf, std::vector<double>(dim, 0.0)};
}

}  // namespace

PriorSpec PriorSpec::make(double nu, int dim) {
  if (std::isnan(nu) || !(nu > 0.0)) throw std::invalid_argument("PriorSpec: nu must be > 0");
  if (dim < 1) throw std::invalid_argument("PriorSpec: dim must be >= 1");
  PriorSpec p;
  p.nu = nu;
  p.dim = dim;
  if (nu == kInfinity) {
    p.q = 1.0;
    p.log_z0 = 0.5 * dim * kLog2Pi;
    return p;
  }
  const double d = dim;
  p.q = 1.0 + 2.0 / (nu + d);
  // Z0 = Gamma(nu/2) nu^{d/2} pi^{d/2} / Gamma((nu+d)/2), in log space
  p.log_z0 = qcalc::log_gamma(nu / 2.0) + 0.5 * d * std::log(nu) + 0.5 * d * std::log(kPi) -
             qcalc::log_gamma((nu + d) / 2.0);
  return p;
}

double PriorSpec::z0() const { return std::exp(log_z0); }

double PriorSpec::scale_exponent() const {
  return gaussian() ? 0.0 : static_cast<double>(dim) / (nu + dim);
}

double PriorSpec::dual_exponent() const { return gaussian() ? 1.0 : nu / (nu + dim); }

double PriorSpec::log_mean_coefficient() const {
  if (gaussian()) return 0.0;
  return -std::log1p(dim / nu) - 2.0 / (nu + dim) * log_z0;
}

double PriorSpec::mean_coefficient() const { return std::exp(log_mean_coefficient()); }

DesignMatrix DesignMatrix::make(const Matrix& features, std::span<const int> labels) {
  if (features.rows() != labels.size()) {
    throw std::invalid_argument("DesignMatrix: feature/label count mismatch");
  }
  if (features.rows() == 0 || features.cols() == 0) {
    throw std::invalid_argument("DesignMatrix: empty design");
  }
  DesignMatrix d;
  d.h = Matrix(features.rows(), features.cols());
  for (std::size_t i = 0; i < features.rows(); ++i) {
    if (labels[i] != 1 && labels[i] != -1) {
      throw std::invalid_argument("DesignMatrix: labels must be +1 or -1");
    }
    const double y = labels[i];
    for (std::size_t j = 0; j < features.cols(); ++j) d.h(i, j) = y * features(i, j);
  }
  return d;
}

ObjectiveSpec ObjectiveSpec::make(PriorSpec prior, double q_prime, double c_reg,
                                  std::shared_ptr<const DesignMatrix> design) {
  if (!(q_prime >= 0.0 && q_prime <= 1.0)) {
    throw std::invalid_argument("ObjectiveSpec: q' must lie in [0, 1]");
  }
  if (!(c_reg > 0.0) || !std::isfinite(c_reg)) {
    throw std::invalid_argument("ObjectiveSpec: C must be positive and finite");
  }
  if (!design) throw std::invalid_argument("ObjectiveSpec: design must be set");
  if (static_cast<int>(design->dim()) != prior.dim) {
    throw std::invalid_argument("ObjectiveSpec: design dimension must equal prior dimension");
  }
  return {std::move(prior), q_prime, c_reg, std::move(design)};
}

double prior_density(const PriorSpec& prior, std::span<const double> w) {
  check_dim(prior, w, "prior_density");
  const double u = norm_sq(w);
  if (prior.gaussian()) return std::exp(-prior.log_z0 - 0.5 * u);
  return std::exp(-prior.log_z0 - 0.5 * (prior.nu + prior.dim) * std::log1p(u / prior.nu));
}

PosteriorState posterior_from_beta(const PriorSpec& prior, const DesignMatrix& design,
                                   std::span<const double> beta) {
  if (beta.size() != design.count()) {
    throw std::invalid_argument("posterior_from_beta: beta length must equal row count");
  }
  if (static_cast<int>(design.dim()) != prior.dim) {
    throw std::invalid_argument("posterior_from_beta: design dimension must equal prior dimension");
  }
  for (double b : beta) {
    if (!(b >= 0.0) || !std::isfinite(b)) {
      throw std::invalid_argument("posterior_from_beta: beta must be finite and >= 0");
    }
  }
  PosteriorState s;
  s.mu = mat_t_vec(design.h, beta);
  const double k = prior.mean_coefficient();
  for (double& v : s.mu) v *= k;
  if (prior.gaussian()) {
    s.c = 1.0;
  } else {
    const double u = norm_sq(s.mu);
    if (u >= prior.nu) {
      throw std::domain_error("posterior_from_beta: induced mean leaves the feasible ball");
    }
    s.c = 1.0 - u / prior.nu;
  }
  s.beta.emplace(beta.begin(), beta.end());
  return s;
}

double primal_regularizer(const PriorSpec& prior, std::span<const double> mu) {
  check_dim(prior, mu, "primal_regularizer");
  const double u = norm_sq(mu);
  if (prior.gaussian()) return 0.5 * u;
  const double nu = prior.nu;
  if (u >= nu) return kInf;
  const double d = prior.dim;
  const double a = prior.scale_exponent();
  const double b = (nu - d) / nu;
  // (1/2)[c^{-a}(b u + nu + d) - (nu + d)] rearranged through expm1 so the
  // large (nu+d) terms never cancel in float
  const double log_c = std::log1p(-u / nu);
  const double em = std::expm1(-a * log_c);  // c^{-a} - 1
  return 0.5 * (em * (nu + d) + (em + 1.0) * b * u);
}

double margin_scale(const PriorSpec& prior, std::span<const double> mu) {
  check_dim(prior, mu, "margin_scale");
  if (prior.gaussian()) return 1.0;
  const double u = norm_sq(mu);
  if (u >= prior.nu) return kInf;
  const double log_c = std::log1p(-u / prior.nu);
  return std::exp(prior.log_mean_coefficient() - prior.scale_exponent() * log_c);
}

namespace {

// Per-row reduction terms of the primal: loss sum, g.z, and H^T g with
// g_i = dloss/dz at z_i = s (H mu)_i.
struct RowAccum {
  double loss_sum = 0.0;
  double g_dot_z = 0.0;
  std::vector<double> h_t_g;
};

void accumulate_rows(const DesignMatrix& design, double q_prime, double s,
                     std::span<const double> mu, std::size_t begin, std::size_t end,
                     RowAccum& out) {
  const std::size_t dim = design.dim();
  out.h_t_g.assign(dim, 0.0);
  for (std::size_t i = begin; i < end; ++i) {
    const auto row = design.h.row(i);
    const double z = s * dot(row, mu);
    out.loss_sum += loss::loss_value(q_prime, z);
    const double g = loss::loss_derivative_point(q_prime, z);
    if (g != 0.0) {
      out.g_dot_z += g * z;
      for (std::size_t j = 0; j < dim; ++j) out.h_t_g[j] += g * row[j];
    }
  }
}

Evaluation assemble_primal(const ObjectiveSpec& spec, std::span<const double> mu,
                           const RowAccum& acc) {
  const PriorSpec& prior = spec.prior;
  const std::size_t dim = mu.size();
  const double c_reg = spec.c_reg;
  const double reg = primal_regularizer(prior, mu);
  const double value = reg + c_reg * acc.loss_sum;
  if (!std::isfinite(value)) return infeasible(dim);

  Evaluation ev;
  ev.value = value;
  ev.gradient.resize(dim);
  const double s = margin_scale(prior, mu);
  if (prior.gaussian()) {
    for (std::size_t j = 0; j < dim; ++j) {
      ev.gradient[j] = mu[j] + c_reg * acc.h_t_g[j];
    }
    return ev;
  }
  const double nu = prior.nu;
  const double d = prior.dim;
  const double u = norm_sq(mu);
  const double a = prior.scale_exponent();
  const double b = (nu - d) / nu;
  const double c = 1.0 - u / nu;
  const double log_c = std::log1p(-u / nu);
  const double c_pow_ma = std::exp(-a * log_c);
  // d/dmu of the regularizer: [c^{-a} b + (a/nu) c^{-a-1} (b u + nu + d)] mu
  const double reg_coef = c_pow_ma * b + (a / nu) * (c_pow_ma / c) * (b * u + nu + d);
  // chain rule through s(mu): dz_i/dmu = s h_i + (2a/(nu c)) z_i mu
  const double scale_coef = c_reg * (2.0 * a / (nu * c)) * acc.g_dot_z;
  for (std::size_t j = 0; j < dim; ++j) {
    ev.gradient[j] = reg_coef * mu[j] + c_reg * s * acc.h_t_g[j] + scale_coef * mu[j];
  }
  return ev;
}

}  // namespace

Evaluation primal_objective(const ObjectiveSpec& spec, std::span<const double> mu, int threads) {
  check_dim(spec.prior, mu, "primal_objective");
  const DesignMatrix& design = *spec.design;
  if (!spec.prior.gaussian() && norm_sq(mu) >= spec.prior.nu) return infeasible(mu.size());

  const double s = margin_scale(spec.prior, mu);
  const std::size_t m = design.count();
  const std::size_t chunks = parallel::chunk_count(m);
  std::vector<RowAccum> partial(chunks);
  parallel::for_each_chunk(m, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
    accumulate_rows(design, spec.q_prime, s, mu, begin, end, partial[c]);
  });

  // fold partials in chunk order: result is thread-count independent
  RowAccum total;
  total.h_t_g.assign(design.dim(), 0.0);
  for (const RowAccum& p : partial) {
    total.loss_sum += p.loss_sum;
    total.g_dot_z += p.g_dot_z;
    for (std::size_t j = 0; j < p.h_t_g.size(); ++j) total.h_t_g[j] += p.h_t_g[j];
  }
  return assemble_primal(spec, mu, total);
}

namespace detail {

Evaluation primal_objective_serial(const ObjectiveSpec& spec, std::span<const double> mu) {
  check_dim(spec.prior, mu, "primal_objective");
  const DesignMatrix& design = *spec.design;
  if (!spec.prior.gaussian() && norm_sq(mu) >= spec.prior.nu) return infeasible(mu.size());
  const double s = margin_scale(spec.prior, mu);
  RowAccum acc;
  accumulate_rows(design, spec.q_prime, s, mu, 0, design.count(), acc);
  return assemble_primal(spec, mu, acc);
}

}  // namespace detail

double dual_penalty(double q_prime, std::span<const double> beta, double c_reg) {
  if (!(q_prime >= 0.0 && q_prime <= 1.0)) {
    throw std::invalid_argument("dual_penalty: q' must lie in [0, 1]");
  }
  if (!(c_reg > 0.0) || !std::isfinite(c_reg)) {
    throw std::invalid_argument("dual_penalty: C must be positive and finite");
  }
  std::vector<double> p(beta.size());
  for (std::size_t i = 0; i < beta.size(); ++i) {
    if (!(beta[i] >= 0.0) || !std::isfinite(beta[i])) {
      throw std::invalid_argument("dual_penalty: beta must be finite and >= 0");
    }
    p[i] = beta[i] / c_reg;
  }
  if (q_prime == 0.0) {
    return c_reg * qcalc::d_infinity_to_ones(p);
  }
  const std::vector<double> ones(beta.size(), 1.0);
  return c_reg * qcalc::tsallis_divergence(1.0 / q_prime, p, ones);
}

Evaluation dual_objective(const ObjectiveSpec& spec, std::span<const double> beta) {
  const DesignMatrix& design = *spec.design;
  if (beta.size() != design.count()) {
    throw std::invalid_argument("dual_objective: beta length must equal row count");
  }
  for (double b : beta) {
    if (!(b >= 0.0) || !std::isfinite(b)) {
      throw std::invalid_argument("dual_objective: beta must be finite and >= 0");
    }
  }
  const PriorSpec& prior = spec.prior;
  const std::size_t m = beta.size();
  const double c_reg = spec.c_reg;
  const double q_prime = spec.q_prime;

  const double pen = dual_penalty(q_prime, beta, c_reg);
  if (!std::isfinite(pen)) return infeasible(m);

  const std::vector<double> hb = mat_t_vec(design.h, beta);  // H^T beta
  const double t = norm_sq(hb);

  double smooth;
  double smooth_coef;  // gradient of smooth part is smooth_coef * H (H^T beta)
  if (prior.gaussian()) {
    smooth = 0.5 * t;
    smooth_coef = 1.0;
  } else {
    const double nu = prior.nu;
    const double d = prior.dim;
    const double k = prior.mean_coefficient();
    const double c = 1.0 - k * k * t / nu;
    if (c <= 0.0) return infeasible(m);
    const double r = prior.dual_exponent();
    const double log_c = std::log1p(-k * k * t / nu);
    // (nu+d)(1 - c^r)/2 through expm1, exact at beta = 0
    smooth = -0.5 * (nu + d) * std::expm1(r * log_c);
    smooth_coef = k * k * std::exp((r - 1.0) * log_c);
  }

  Evaluation ev;
  ev.value = smooth + pen;
  ev.gradient.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    ev.gradient[i] = smooth_coef * dot(design.h.row(i), hb);
  }
  if (q_prime == 0.0) {
    for (double& g : ev.gradient) g -= 1.0;
  } else if (q_prime == 1.0) {
    for (std::size_t i = 0; i < m; ++i) {
      // beta floored inside the log; the KL optimum is interior so solvers
      // move off zero immediately
      ev.gradient[i] += std::log(std::max(beta[i], 1e-300) / c_reg);
    }
  } else {
    const double e = (1.0 - q_prime) / q_prime;
    for (std::size_t i = 0; i < m; ++i) {
      const double p = beta[i] / c_reg;
      ev.gradient[i] +=
          (p == 0.0 ? -1.0 : std::expm1(e * std::log(p))) / (1.0 - q_prime);
    }
  }
  return ev;
}

double log_z_q(const ObjectiveSpec& spec, std::span<const double> beta) {
  const DesignMatrix& design = *spec.design;
  if (beta.size() != design.count()) {
    throw std::invalid_argument("log_z_q: beta length must equal row count");
  }
  const double t = norm_sq(mat_t_vec(design.h, beta));
  const PriorSpec& prior = spec.prior;
  if (prior.gaussian()) return 0.5 * t;
  const double k = prior.mean_coefficient();
  const double arg = k * k * t / prior.nu;
  if (arg >= 1.0) return kInf;
  return -0.5 * prior.nu * std::log1p(-arg);
}

int predict(std::span<const double> mu, std::span<const double> features) {
  if (mu.size() != features.size()) {
    throw std::invalid_argument("predict: feature length must equal weight length");
  }
  const double score = dot(mu, features);
  if (std::isnan(score)) throw std::domain_error("predict: score is NaN");
  return score >= 0.0 ? 1 : -1;
}

}  // namespace nitm::model
