#include "nitm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nitm/matrix.hpp"

namespace nitm::solver {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCurvatureFloor = 1e-12;

void check_config(const SolverConfig& c) {
  if (c.max_iterations < 1) throw std::invalid_argument("SolverConfig: max_iterations >= 1");
  if (!(c.orthogonality_tolerance > 0.0) || !(c.gradient_tolerance > 0.0)) {
    throw std::invalid_argument("SolverConfig: tolerances must be positive");
  }
  if (!(c.armijo_constant > 0.0 && c.armijo_constant < 1.0)) {
    throw std::invalid_argument("SolverConfig: armijo_constant in (0,1)");
  }
  if (!(c.backtrack_factor > 0.0 && c.backtrack_factor < 1.0)) {
    throw std::invalid_argument("SolverConfig: backtrack_factor in (0,1)");
  }
  if (c.max_backtracks < 1) throw std::invalid_argument("SolverConfig: max_backtracks >= 1");
}

struct LineSearchHit {
  bool ok = false;
  double step = 0.0;
  std::vector<double> point;
  Evaluation eval;
};

// Backtracking Armijo: f(x + t d) <= f(x) + c1 t g.d. Non-finite trial
// values count as rejections.
LineSearchHit line_search(const Objective& objective, std::span<const double> x, double fx,
                          std::span<const double> d, double gd, const SolverConfig& cfg) {
  LineSearchHit hit;
  double t = 1.0;
  for (int k = 0; k < cfg.max_backtracks; ++k, t *= cfg.backtrack_factor) {
    std::vector<double> cand(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) cand[i] = x[i] + t * d[i];
    Evaluation ev = objective(cand);
    if (std::isfinite(ev.value) && ev.value <= fx + cfg.armijo_constant * t * gd) {
      hit.ok = true;
      hit.step = t;
      hit.point = std::move(cand);
      hit.eval = std::move(ev);
      return hit;
    }
  }
  return hit;
}

// One BFGS loop. track_best switches on the subgradient behavior
// (best-iterate tracking plus the stall stop).
SolveResult bfgs_loop(const Objective& objective, std::span<const double> start,
                      const SolverConfig& cfg, bool track_best) {
  check_config(cfg);
  const std::size_t n = start.size();
  if (n == 0) throw std::invalid_argument("bfgs_minimize: empty start point");

  std::vector<double> x(start.begin(), start.end());
  Evaluation cur = objective(x);
  if (!std::isfinite(cur.value)) {
    throw std::invalid_argument("bfgs_minimize: objective not finite at start");
  }
  if (cur.gradient.size() != n) {
    throw std::invalid_argument("bfgs_minimize: gradient size mismatch");
  }

  Matrix h_inv(n, n);  // inverse Hessian approximation
  for (std::size_t i = 0; i < n; ++i) h_inv(i, i) = 1.0;
  bool first_update = true;

  SolveResult res;
  res.point = x;
  res.value = cur.value;
  res.gradient_norm = norm2(cur.gradient);
  res.reason = Termination::max_iterations;

  double best_value = cur.value;
  std::vector<double> best_point = x;
  double best_gnorm = res.gradient_norm;
  double window_best = cur.value;
  constexpr int kStallWindow = 50;
  constexpr double kStallTol = 1e-10;

  auto finish = [&](Termination why, int iters) {
    res.reason = why;
    res.iterations = iters;
    if (track_best) {
      res.point = best_point;
      res.value = best_value;
      res.gradient_norm = best_gnorm;
    } else {
      res.point = x;
      res.value = cur.value;
      res.gradient_norm = norm2(cur.gradient);
    }
    return res;
  };

  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    const double gnorm = norm2(cur.gradient);
    if (gnorm <= cfg.gradient_tolerance) return finish(Termination::small_gradient, iter - 1);

    // d = -H g
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += h_inv(i, j) * cur.gradient[j];
      d[i] = -s;
    }
    double gd = dot(d, cur.gradient);
    const double dnorm = norm2(d);
    if (std::abs(gd) <= cfg.orthogonality_tolerance * dnorm * gnorm) {
      return finish(Termination::orthogonal_direction, iter - 1);
    }
    if (gd >= 0.0) {
      // approximation lost positive definiteness: restart from steepest descent
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) h_inv(i, j) = i == j ? 1.0 : 0.0;
      first_update = true;
      d = cur.gradient;
      for (double& v : d) v = -v;
      gd = -gnorm * gnorm;
    }

    LineSearchHit hit = line_search(objective, x, cur.value, d, gd, cfg);
    if (!hit.ok && track_best) {
      // at a kink the quasi-Newton direction may be useless; retry once
      // along the raw subgradient
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) h_inv(i, j) = i == j ? 1.0 : 0.0;
      first_update = true;
      d = cur.gradient;
      for (double& v : d) v = -v;
      gd = -gnorm * gnorm;
      hit = line_search(objective, x, cur.value, d, gd, cfg);
    }
    if (!hit.ok) return finish(Termination::line_search_failure, iter - 1);

    // s = x+ - x, y = g+ - g
    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = hit.point[i] - x[i];
      y[i] = hit.eval.gradient[i] - cur.gradient[i];
    }
    x = std::move(hit.point);
    cur = std::move(hit.eval);

    if (cfg.on_iteration) {
      cfg.on_iteration({iter, cur.value, norm2(cur.gradient), hit.step});
    }

    if (track_best) {
      if (cur.value < best_value) {
        best_value = cur.value;
        best_point = x;
        best_gnorm = norm2(cur.gradient);
      }
      if (iter % kStallWindow == 0) {
        const double drop = window_best - best_value;
        if (drop < kStallTol * std::max(1.0, std::abs(best_value))) {
          return finish(Termination::stalled, iter);
        }
        window_best = best_value;
      }
    }

    const double ys = dot(y, s);
    if (ys > kCurvatureFloor) {
      if (first_update) {
        // scale the seed matrix to the first curvature pair
        const double yy = dot(y, y);
        if (yy > 0.0) {
          const double gamma = ys / yy;
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) h_inv(i, j) = i == j ? gamma : 0.0;
        }
        first_update = false;
      }
      // BFGS inverse update:
      // H+ = (I - s y^T / ys) H (I - y s^T / ys) + s s^T / ys
      std::vector<double> hy(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += h_inv(i, j) * y[j];
        hy[i] = acc;
      }
      const double yhy = dot(y, hy);
      const double f1 = (ys + yhy) / (ys * ys);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          h_inv(i, j) += f1 * s[i] * s[j] - (hy[i] * s[j] + s[i] * hy[j]) / ys;
        }
      }
    }
  }
  return finish(Termination::max_iterations, cfg.max_iterations);
}

}  // namespace

std::string to_string(Termination t) {
  switch (t) {
    case Termination::max_iterations: return "max_iterations";
    case Termination::orthogonal_direction: return "orthogonal_direction";
    case Termination::small_gradient: return "small_gradient";
    case Termination::line_search_failure: return "line_search_failure";
    case Termination::stalled: return "stalled";
  }
  return "unknown";
}

SolveResult bfgs_minimize(const Objective& objective, std::span<const double> start,
                          const SolverConfig& config) {
  return bfgs_loop(objective, start, config, false);
}

SolveResult subgradient_bfgs_minimize(const Objective& objective, std::span<const double> start,
                                      const SolverConfig& config) {
  return bfgs_loop(objective, start, config, true);
}

SolveResult projected_gradient_minimize(const Objective& objective, std::span<const double> start,
                                        const SolverConfig& config, Box box) {
  check_config(config);
  if (!(box.lower <= box.upper)) {
    throw std::invalid_argument("projected_gradient_minimize: empty box");
  }
  const std::size_t n = start.size();
  if (n == 0) throw std::invalid_argument("projected_gradient_minimize: empty start point");

  auto clamp = [&](std::vector<double>& v) {
    for (double& e : v) e = std::clamp(e, box.lower, box.upper);
  };

  std::vector<double> x(start.begin(), start.end());
  clamp(x);
  Evaluation cur = objective(x);
  if (!std::isfinite(cur.value)) {
    throw std::invalid_argument("projected_gradient_minimize: objective not finite at start");
  }

  SolveResult res;
  res.reason = Termination::max_iterations;
  res.iterations = config.max_iterations;

  auto projected_gap = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double moved = std::clamp(x[i] - cur.gradient[i], box.lower, box.upper);
      s += (x[i] - moved) * (x[i] - moved);
    }
    return std::sqrt(s);
  };

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    const double gap = projected_gap();
    if (gap <= config.gradient_tolerance) {
      res.reason = Termination::small_gradient;
      res.iterations = iter - 1;
      break;
    }
    double t = 1.0;
    bool moved = false;
    for (int k = 0; k < config.max_backtracks; ++k, t *= config.backtrack_factor) {
      std::vector<double> cand(n);
      for (std::size_t i = 0; i < n; ++i) cand[i] = x[i] - t * cur.gradient[i];
      clamp(cand);
      double gstep = 0.0;  // g . (cand - x), the projected-path slope
      for (std::size_t i = 0; i < n; ++i) gstep += cur.gradient[i] * (cand[i] - x[i]);
      if (gstep >= 0.0) continue;  // fully blocked direction at this step size
      Evaluation ev = objective(cand);
      if (std::isfinite(ev.value) && ev.value <= cur.value + config.armijo_constant * gstep) {
        x = std::move(cand);
        cur = std::move(ev);
        moved = true;
        if (config.on_iteration) {
          config.on_iteration({iter, cur.value, projected_gap(), t});
        }
        break;
      }
    }
    if (!moved) {
      res.reason = Termination::line_search_failure;
      res.iterations = iter - 1;
      break;
    }
  }

  res.value = cur.value;
  res.gradient_norm = projected_gap();
  res.point = std::move(x);
  return res;
}

}  // namespace nitm::solver
