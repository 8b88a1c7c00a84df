#pragma once
// Straightforward GP formulas via an explicit matrix inverse. Shares no code
// with the library beyond the KernelParams struct.

#include <Eigen/Dense>

#include <cmath>

#include "spmo/surrogate.hpp"

namespace oracle {

inline double dense_matern52(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const spmo::KernelParams& p) {
  double r2 = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const double z = (a[k] - b[k]) / p.lengthscales[k];
    r2 += z * z;
  }
  const double r = std::sqrt(r2);
  return p.signal_variance * (1.0 + std::sqrt(5.0) * r + 5.0 * r2 / 3.0) * std::exp(-std::sqrt(5.0) * r);
}

struct DenseGp {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  spmo::KernelParams p;
  double mean;
  Eigen::MatrixXd kinv;

  // `jitter` is the diagonal regulariser the model reports having used.
  DenseGp(Eigen::MatrixXd xs, Eigen::VectorXd ys, spmo::KernelParams ps, double m, double jitter = 0.0)
      : x(std::move(xs)), y(std::move(ys)), p(std::move(ps)), mean(m) {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        k(i, j) = dense_matern52(x.row(i), x.row(j), p) + (i == j ? p.noise_variance + jitter : 0.0);
    kinv = k.fullPivLu().inverse();
  }

  Eigen::VectorXd cross(const Eigen::VectorXd& q) const {
    Eigen::VectorXd kq(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) kq[i] = dense_matern52(q, x.row(i), p);
    return kq;
  }

  std::pair<double, double> predict(const Eigen::VectorXd& q) const {
    const Eigen::VectorXd kq = cross(q);
    const double mu = mean + kq.dot(kinv * (y.array() - mean).matrix());
    const double var = dense_matern52(q, q, p) - kq.dot(kinv * kq);
    return {mu, var};
  }

  double covariance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    return dense_matern52(a, b, p) - cross(a).dot(kinv * cross(b));
  }
};

}  // namespace oracle
