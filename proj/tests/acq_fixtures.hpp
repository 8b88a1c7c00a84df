#pragma once
// Small hand-built surrogate states shared by the acquisition tests and the
// acceptance binary.

#include <Eigen/Core>

#include <memory>
#include <vector>

#include "spmo/acquisition.hpp"
#include "spmo/rng.hpp"

namespace fixtures {

// Independent Gaussians N(mu_i, sd_i^2) at every query in [0.5, 1]: the single
// training input sits at 0 with a lengthscale so short that the kernel
// underflows to exactly zero there.
inline std::shared_ptr<const spmo::MultiSurrogate> prior_surrogate(const std::vector<double>& mu,
                                                                  const std::vector<double>& sd) {
  std::vector<spmo::GaussianProcess> models;
  std::vector<spmo::OutputStandardiser> stds;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    spmo::KernelParams p;
    p.signal_variance = sd[i] * sd[i];
    p.lengthscales = Eigen::VectorXd::Constant(1, 1e-3);
    p.noise_variance = 0.0;
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(1, 1);
    Eigen::VectorXd y = Eigen::VectorXd::Constant(1, mu[i]);
    models.push_back(spmo::GaussianProcess::condition(x, y, p, mu[i]));
    stds.push_back({0.0, 1.0});
  }
  spmo::InputNormaliser norm{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)};
  return std::make_shared<const spmo::MultiSurrogate>(norm, stds, models);
}

struct RandomState {
  std::shared_ptr<const spmo::MultiSurrogate> surrogate;
  Eigen::MatrixXd x;  // unit-cube inputs
  Eigen::MatrixXd y;  // original-unit outputs
};

// n random points in [0,1]^d with smooth outputs; each model has the given
// noise variance (standardised units).
inline RandomState random_state(Eigen::Index n, Eigen::Index d, Eigen::Index m, double noise, std::uint64_t seed) {
  spmo::Rng rng(seed);
  RandomState s;
  s.x.resize(n, d);
  for (Eigen::Index k = 0; k < s.x.size(); ++k) s.x.data()[k] = rng.uniform();
  s.y.resize(n, m);
  std::vector<spmo::GaussianProcess> models;
  std::vector<spmo::OutputStandardiser> stds;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double phase = rng.uniform() * 3.0;
    for (Eigen::Index r = 0; r < n; ++r) {
      s.y(r, i) = 1.0 + 0.5 * std::sin(3.0 * s.x(r, 0) + phase) + 0.3 * s.x.row(r).sum() + 0.05 * rng.normal();
    }
    const spmo::OutputStandardiser st = spmo::OutputStandardiser::from_data(s.y.col(i));
    Eigen::VectorXd f(n);
    for (Eigen::Index r = 0; r < n; ++r) f[r] = st.standardise(s.y(r, i));
    spmo::KernelParams p;
    p.signal_variance = 0.5 + rng.uniform();
    p.lengthscales = Eigen::VectorXd::Constant(d, 0.2 + 0.4 * rng.uniform());
    p.noise_variance = noise;
    models.push_back(spmo::GaussianProcess::condition(s.x, f, p, f.mean()));
    stds.push_back(st);
  }
  spmo::InputNormaliser norm{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d)};
  s.surrogate = std::make_shared<const spmo::MultiSurrogate>(norm, stds, models);
  return s;
}

}  // namespace fixtures
