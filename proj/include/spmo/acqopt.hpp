#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "spmo/errors.hpp"
#include "spmo/lbfgsb.hpp"
#include "spmo/sampling.hpp"

namespace spmo {

/// Multi-start settings for maximising an acquisition surface over [0,1]^d.
struct AcqOptimiser {
  int num_restarts = 10;
  int raw_candidates = 512;
  int max_iterations = 200;
  double gradient_tol = 1e-6;
  double step_tol = 1e-10;
  std::uint64_t seed = 0;

  void validate() const {
    if (num_restarts < 1) throw InvalidArgument("acqopt: num_restarts must be >= 1");
    if (num_restarts > raw_candidates) throw InvalidArgument("acqopt: num_restarts exceeds raw_candidates");
    if (max_iterations < 1) throw InvalidArgument("acqopt: max_iterations must be >= 1");
  }
};

/// f(x, grad): value at x; fills *grad when non-null.
using AcquisitionSurface = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

struct RestartOutcome {
  Point start;
  double start_value;
  Point x;
  double value;
};

struct MaximiseResult {
  Point x;
  double value = -std::numeric_limits<double>::infinity();
  /// All restarts, best first.
  std::vector<RestartOutcome> restarts;
};

/// Box-constrained multi-start maximisation.
///
/// Starts are the best `num_restarts` of `raw_candidates` scrambled Sobol
/// points; each is refined with projected L-BFGS.
inline MaximiseResult maximise(const AcquisitionSurface& f, Eigen::Index dim, const AcqOptimiser& opt) {
  opt.validate();
  if (dim < 1) throw InvalidArgument("acqopt: dimension must be >= 1");
  const Eigen::MatrixXd raw =
      sobol_points(static_cast<std::size_t>(dim), static_cast<std::size_t>(opt.raw_candidates), opt.seed);

  std::vector<std::pair<double, Eigen::Index>> scored;
  scored.reserve(static_cast<std::size_t>(raw.rows()));
  for (Eigen::Index r = 0; r < raw.rows(); ++r) {
    const double v = f(raw.row(r).transpose(), nullptr);
    if (!std::isnan(v)) scored.emplace_back(v, r);
  }
  if (scored.empty()) throw OptimisationFailed("acqopt: acquisition is NaN at every raw candidate");
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  const std::size_t n_starts = std::min<std::size_t>(scored.size(), static_cast<std::size_t>(opt.num_restarts));

  const Eigen::VectorXd lower = Eigen::VectorXd::Zero(dim);
  const Eigen::VectorXd upper = Eigen::VectorXd::Ones(dim);
  const GradientFunction neg = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g.resize(dim);
    const double v = f(x, &g);
    g = -g;
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : -v;
  };
  BoxMinimiserOptions bo;
  bo.max_iterations = opt.max_iterations;
  bo.projected_gradient_tol = opt.gradient_tol;
  bo.step_tol = opt.step_tol;

  MaximiseResult result;
  for (std::size_t s = 0; s < n_starts; ++s) {
    const Point start = raw.row(scored[s].second).transpose();
    const BoxMinimiserResult r = minimise_box(neg, start, lower, upper, bo);
    RestartOutcome out{start, scored[s].first, project_box(r.x, lower, upper), -r.value};
    if (!std::isfinite(out.value) || out.value < out.start_value) {
      out.x = start;
      out.value = out.start_value;
    }
    result.restarts.push_back(std::move(out));
  }
  std::stable_sort(result.restarts.begin(), result.restarts.end(),
                   [](const RestartOutcome& a, const RestartOutcome& b) { return a.value > b.value; });
  result.x = result.restarts.front().x;
  result.value = result.restarts.front().value;
  if (std::isnan(result.value)) throw OptimisationFailed("acqopt: every restart produced NaN");
  return result;
}

}  // namespace spmo
