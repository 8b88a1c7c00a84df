#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>

namespace spmo {

/// Objective for the box minimiser: returns f(x) and writes the gradient.
using GradientFunction = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct BoxMinimiserOptions {
  int max_iterations = 200;
  int memory = 8;
  double projected_gradient_tol = 1e-6;
  double relative_function_tol = 1e-12;
  double step_tol = 1e-10;
};

struct BoxMinimiserResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  bool converged = false;
};

inline Eigen::VectorXd project_box(const Eigen::VectorXd& x, const Eigen::VectorXd& lower,
                                   const Eigen::VectorXd& upper) {
  return x.cwiseMax(lower).cwiseMin(upper);
}

/// Projected limited-memory BFGS over [lower, upper].
///
/// Variables sitting on a bound with the gradient pushing outwards are held
/// fixed for the step; the rest follow the two-loop quasi-Newton direction.
/// Each trial point is projected back onto the box and accepted under an
/// Armijo condition, so the returned value never exceeds f(project(x0)).
inline BoxMinimiserResult minimise_box(const GradientFunction& f, Eigen::VectorXd x0,
                                       const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                       const BoxMinimiserOptions& opt = {}) {
  const Eigen::Index d = x0.size();
  BoxMinimiserResult res;
  Eigen::VectorXd x = project_box(x0, lower, upper);
  Eigen::VectorXd g(d);
  double fx = f(x, g);
  res.x = x;
  res.value = fx;
  if (!std::isfinite(fx) || !g.allFinite()) return res;

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  auto free_mask = [&](const Eigen::VectorXd& pt, const Eigen::VectorXd& grad) {
    Eigen::VectorXd mask = Eigen::VectorXd::Ones(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const bool at_lower = pt[i] <= lower[i] && grad[i] > 0.0;
      const bool at_upper = pt[i] >= upper[i] && grad[i] < 0.0;
      if (at_lower || at_upper) mask[i] = 0.0;
    }
    return mask;
  };

  for (int it = 0; it < opt.max_iterations; ++it) {
    res.iterations = it + 1;
    const Eigen::VectorXd pg = x - project_box(x - g, lower, upper);
    if (pg.lpNorm<Eigen::Infinity>() < opt.projected_gradient_tol) {
      res.converged = true;
      break;
    }
    const Eigen::VectorXd mask = free_mask(x, g);
    Eigen::VectorXd q = g.cwiseProduct(mask);

    // Two-loop recursion restricted to the free variables.
    const std::size_t k = s_hist.size();
    std::vector<double> a(k);
    for (std::size_t i = k; i-- > 0;) {
      a[i] = rho_hist[i] * s_hist[i].cwiseProduct(mask).dot(q);
      q -= a[i] * y_hist[i].cwiseProduct(mask);
    }
    if (k > 0) {
      const double sy = s_hist.back().dot(y_hist.back());
      const double yy = y_hist.back().squaredNorm();
      if (yy > 0.0) q *= sy / yy;
    } else {
      const double gn = q.norm();
      if (gn > 0.0) q *= std::min(1.0, 1.0 / gn);
    }
    for (std::size_t i = 0; i < k; ++i) {
      const double b = rho_hist[i] * y_hist[i].cwiseProduct(mask).dot(q);
      q += (a[i] - b) * s_hist[i].cwiseProduct(mask);
    }
    Eigen::VectorXd dir = -q.cwiseProduct(mask);
    if (!(dir.dot(g) < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -g.cwiseProduct(mask);
      const double gn = dir.norm();
      if (gn > 0.0) dir *= std::min(1.0, 1.0 / gn);
    }

    double step = 1.0;
    Eigen::VectorXd x_new(d), g_new(d);
    double f_new = fx;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = project_box(x + step * dir, lower, upper);
      f_new = f(x_new, g_new);
      const double decrease = g.dot(x_new - x);
      if (std::isfinite(f_new) && g_new.allFinite() && f_new <= fx + 1e-4 * decrease) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd yv = g_new - g;
    const double f_prev = fx;
    x = x_new;
    g = g_new;
    fx = f_new;
    res.x = x;
    res.value = fx;

    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(yv);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opt.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    if (s.lpNorm<Eigen::Infinity>() < opt.step_tol ||
        std::abs(f_prev - fx) <= opt.relative_function_tol * std::max(1.0, std::abs(fx))) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace spmo
