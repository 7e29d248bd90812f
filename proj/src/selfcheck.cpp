#include "nitm/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "nitm/experiment.hpp"
#include "nitm/loss.hpp"
#include "nitm/model.hpp"
#include "nitm/qcalc.hpp"
#include "nitm/rng.hpp"
#include "nitm/solver.hpp"

namespace nitm::selfcheck {

namespace {

std::string worst_detail(double err, double tol) {
  std::ostringstream os;
  os << "worst error " << err << " (tolerance " << tol << ")";
  return os.str();
}

CheckResult check(const std::string& name, double worst, double tol) {
  return {name, worst <= tol, worst_detail(worst, tol)};
}

// random feasible problem: m rows, dim columns, labels alternating
model::ObjectiveSpec toy_spec(Rng& rng, double nu, double q_prime, double c_reg, std::size_t m,
                              std::size_t dim) {
  Matrix f(m, dim);
  std::vector<int> labels(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < dim; ++j) f(i, j) = rng.uniform(-1.0, 1.0);
    labels[i] = i % 2 == 0 ? 1 : -1;
  }
  auto design = std::make_shared<model::DesignMatrix>(model::DesignMatrix::make(f, labels));
  return model::ObjectiveSpec::make(model::PriorSpec::make(nu, static_cast<int>(dim)), q_prime,
                                    c_reg, design);
}

double rel_gap(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

CheckResult round_trip_check() {
  Rng rng(11);
  double worst = 0.0;
  for (int t = 0; t < 300; ++t) {
    const double q = rng.uniform(-2.0, 3.0);
    if (std::abs(q - 1.0) < 1e-3) continue;
    const double x = rng.uniform(0.05, 20.0);
    worst = std::max(worst, rel_gap(qcalc::q_exp(q, qcalc::q_log(q, x)), x));
    // forward direction needs q_exp(x') > 0
    const double lo = q < 1.0 ? -0.9 / (1.0 - q) : -10.0;
    const double hi = q > 1.0 ? 0.9 / (q - 1.0) : 10.0;
    const double z = rng.uniform(lo, hi);
    worst = std::max(worst, rel_gap(qcalc::q_log(q, qcalc::q_exp(q, z)), z));
  }
  return check("qexp_qlog_round_trip", worst, 1e-10);
}

CheckResult nonextensivity_check() {
  Rng rng(12);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const double q = rng.uniform(-1.0, 3.0);
    std::vector<double> pa(3), pb(4);
    double sa = 0.0, sb = 0.0;
    for (double& v : pa) sa += v = rng.uniform(0.05, 1.0);
    for (double& v : pb) sb += v = rng.uniform(0.05, 1.0);
    for (double& v : pa) v /= sa;
    for (double& v : pb) v /= sb;
    std::vector<double> joint;
    for (double a : pa)
      for (double b : pb) joint.push_back(a * b);
    const double ha = qcalc::tsallis_entropy(q, pa);
    const double hb = qcalc::tsallis_entropy(q, pb);
    const double hj = qcalc::tsallis_entropy(q, joint);
    worst = std::max(worst, rel_gap(hj, ha + hb + (1.0 - q) * ha * hb));
  }
  return check("tsallis_nonextensivity", worst, 1e-10);
}

CheckResult loss_forms_check() {
  Rng rng(13);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const double z = rng.uniform(-4.0, 4.0);
    worst = std::max(worst, rel_gap(loss::loss_value(0.0, z), std::max(1.0 - z, 0.0)));
    const double h = std::max(1.0 - 0.5 * z, 0.0);
    worst = std::max(worst, rel_gap(loss::loss_value(0.5, z), h * h));
    worst = std::max(worst, rel_gap(loss::loss_value(1.0, z), std::exp(-z)));
  }
  return check("loss_closed_forms", worst, 1e-12);
}

CheckResult loss_derivative_check(const Options& options) {
  Rng rng(14);
  double worst = 0.0;
  const double eps = 1e-6;
  for (int t = 0; t < 200; ++t) {
    const double qp = rng.uniform(0.1, 1.0);
    double z = rng.uniform(-3.0, 3.0);
    if (qp < 1.0) {
      // stay away from the cutoff where the derivative jumps
      const double cut = 1.0 / (1.0 - qp);
      if (std::abs(z - cut) < 0.05) z -= 0.1;
    }
    double d = loss::loss_derivative_point(qp, z);
    if (options.perturb_gradient) d += 1e-3;
    const double fd = (loss::loss_value(qp, z + eps) - loss::loss_value(qp, z - eps)) / (2 * eps);
    worst = std::max(worst, rel_gap(d, fd));
  }
  return check("loss_derivative_vs_difference", worst, 1e-6);
}

double fd_gradient_worst(const Objective& objective, std::span<const double> x, double eps) {
  const Evaluation ev = objective(x);
  double worst = 0.0;
  std::vector<double> p(x.begin(), x.end());
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double save = p[j];
    p[j] = save + eps;
    const double up = objective(p).value;
    p[j] = save - eps;
    const double dn = objective(p).value;
    p[j] = save;
    worst = std::max(worst, rel_gap(ev.gradient[j], (up - dn) / (2 * eps)));
  }
  return worst;
}

CheckResult primal_gradient_check(const Options& options) {
  Rng rng(15);
  double worst = 0.0;
  for (const double nu : {10.0, model::kInfinity}) {
    for (const double qp : {0.5, 1.0}) {
      const auto spec = toy_spec(rng, nu, qp, 2.0, 6, 3);
      const Objective objective = [&spec, &options](std::span<const double> mu) {
        Evaluation ev = model::primal_objective(spec, mu);
        if (options.perturb_gradient && !ev.gradient.empty()) {
          ev.gradient[0] += 1e-3 * (1.0 + std::abs(ev.gradient[0]));
        }
        return ev;
      };
      for (int t = 0; t < 5; ++t) {
        std::vector<double> mu(3);
        for (double& v : mu) v = rng.uniform(-0.4, 0.4);
        worst = std::max(worst, fd_gradient_worst(objective, mu, 1e-6));
      }
    }
  }
  return check("primal_gradient_vs_difference", worst, 1e-5);
}

CheckResult dual_gradient_check() {
  Rng rng(16);
  double worst = 0.0;
  for (const double nu : {10.0, model::kInfinity}) {
    for (const double qp : {0.5, 1.0}) {
      const auto spec = toy_spec(rng, nu, qp, 2.0, 5, 3);
      const Objective objective = [&spec](std::span<const double> beta) {
        return model::dual_objective(spec, beta);
      };
      for (int t = 0; t < 5; ++t) {
        std::vector<double> beta(5);
        for (double& v : beta) v = rng.uniform(0.2, 1.5);
        worst = std::max(worst, fd_gradient_worst(objective, beta, 1e-6));
      }
    }
  }
  return check("dual_gradient_vs_difference", worst, 1e-5);
}

CheckResult zq_identity_check() {
  Rng rng(17);
  double worst = 0.0;
  for (const double nu : {1.0, 10.0, 250.0}) {
    const auto spec = toy_spec(rng, nu, 0.5, 1.0, 5, 3);
    const double q = spec.prior.q;
    const double r = spec.prior.dual_exponent();
    for (int t = 0; t < 30; ++t) {
      std::vector<double> beta(5);
      for (double& v : beta) v = rng.uniform(0.0, 0.25);
      const auto post = model::posterior_from_beta(spec.prior, *spec.design, beta);
      const double tt = norm_sq(mat_t_vec(spec.design->h, beta));
      const double arg = 0.5 * r * std::exp(2.0 * (1.0 - q) * spec.prior.log_z0) * tt;
      const double lhs = r * std::log(qcalc::q_exp(q, arg));
      const double rhs = model::log_z_q(spec, beta);
      worst = std::max(worst, rel_gap(lhs, rhs));
      worst = std::max(worst, rel_gap(-0.5 * nu * std::log(post.c), rhs));
    }
  }
  return check("zq_closed_form", worst, 1e-10);
}

CheckResult primal_dual_check() {
  Rng rng(18);
  const auto spec = toy_spec(rng, model::kInfinity, 1.0, 1.0, 4, 2);
  const Objective primal = [&spec](std::span<const double> mu) {
    return model::primal_objective(spec, mu);
  };
  const Objective dual = [&spec](std::span<const double> beta) {
    return model::dual_objective(spec, beta);
  };
  solver::SolverConfig cfg;
  cfg.gradient_tolerance = 1e-10;
  const auto p = solver::bfgs_minimize(primal, std::vector<double>(2, 0.0), cfg);
  const auto d = solver::projected_gradient_minimize(dual, std::vector<double>(4, 0.0), cfg);
  const auto post = model::posterior_from_beta(spec.prior, *spec.design, d.point);
  double worst = 0.0;
  for (std::size_t j = 0; j < post.mu.size(); ++j) {
    worst = std::max(worst, std::abs(post.mu[j] - p.point[j]));
  }
  return check("primal_dual_mean_agreement", worst, 1e-4);
}

CheckResult normalization_check() {
  data::RawDataset raw;
  raw.name = "selfcheck";
  raw.attr_names = {"x1", "x2"};
  raw.attr_kinds = {data::AttrKind::numeric, data::AttrKind::nominal};
  raw.nominal_values = {{}, {"red", "green", "blue"}};
  raw.class_values = {"yes", "no"};
  Rng rng(19);
  const char* noms[] = {"red", "green", "blue"};
  for (int i = 0; i < 12; ++i) {
    std::ostringstream num;
    num.precision(17);
    num << rng.uniform(-5.0, 5.0);
    raw.cells.push_back({num.str(), noms[rng.below(3)]});
    raw.label_index.push_back(static_cast<int>(rng.below(2)));
  }
  std::vector<std::size_t> fit{0, 1, 2, 3, 4, 5, 6, 7};
  const auto prepared = data::encode_and_prepare(raw, fit);
  const Matrix replay = data::apply_preparation(prepared.params, raw);
  const bool same = replay == prepared.features;
  double mean_err = 0.0, norm_err = 0.0;
  for (std::size_t j = 0; j + 1 < prepared.features.cols(); ++j) {
    double mean = 0.0, nsq = 0.0;
    for (std::size_t i : fit) mean += prepared.features(i, j);
    mean /= static_cast<double>(fit.size());
    for (std::size_t i : fit) nsq += prepared.features(i, j) * prepared.features(i, j);
    mean_err = std::max(mean_err, std::abs(mean));
    norm_err = std::max(norm_err, std::abs(nsq - 1.0));
  }
  const double worst = std::max({same ? 0.0 : 1.0, mean_err, norm_err});
  return check("normalization_round_trip", worst, 1e-10);
}

CheckResult dobscv_balance_check() {
  Rng rng(20);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const std::size_t m = 17 + rng.below(40);
    Matrix f(m, 2);
    std::vector<int> labels(m);
    for (std::size_t i = 0; i < m; ++i) {
      f(i, 0) = rng.uniform(-1.0, 1.0);
      f(i, 1) = rng.uniform(-1.0, 1.0);
      labels[i] = rng.below(3) == 0 ? -1 : 1;
    }
    if (std::count(labels.begin(), labels.end(), -1) == 0) labels[0] = -1;
    const int k = 2 + static_cast<int>(rng.below(9));
    const auto fa = experiment::dobscv_split(f, labels, k, rng.raw());
    for (const int cls : {1, -1}) {
      std::vector<int> count(static_cast<std::size_t>(k), 0);
      for (std::size_t i = 0; i < m; ++i) {
        if (labels[i] == cls) ++count[static_cast<std::size_t>(fa.fold_of[i])];
      }
      const auto [lo, hi] = std::minmax_element(count.begin(), count.end());
      worst = std::max(worst, static_cast<double>(*hi - *lo) - 1.0);
    }
  }
  return check("dobscv_class_balance", worst, 0.0);
}

}  // namespace

std::vector<CheckResult> run(const Options& options) {
  return {
      round_trip_check(),
      nonextensivity_check(),
      loss_forms_check(),
      loss_derivative_check(options),
      primal_gradient_check(options),
      dual_gradient_check(),
      zq_identity_check(),
      primal_dual_check(),
      normalization_check(),
      dobscv_balance_check(),
  };
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const CheckResult& r) { return r.pass; });
}

}  // namespace nitm::selfcheck
