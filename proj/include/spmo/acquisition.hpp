#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spmo/acqopt.hpp"
#include "spmo/errors.hpp"
#include "spmo/sampling.hpp"
#include "spmo/surrogate.hpp"

namespace spmo {

/// Reference point that every objective value weakly exceeds.
struct UtopianPoint {
  Eigen::VectorXd z;
};

/// Quality measure of a single objective vector relative to z*; lower is better.
struct SinglePointMetric {
  enum class Kind { euclidean_distance, weighted_sum, augmented_tchebycheff };

  Kind kind = Kind::euclidean_distance;
  Eigen::VectorXd weights;  // empty means uniform 1/m
  double alpha_aug = 0.05;

  static SinglePointMetric euclidean() { return {}; }
  static SinglePointMetric weighted_sum(Eigen::VectorXd w = {}) { return {Kind::weighted_sum, std::move(w), 0.05}; }
  static SinglePointMetric augmented_tchebycheff(Eigen::VectorXd w = {}, double alpha = 0.05) {
    return {Kind::augmented_tchebycheff, std::move(w), alpha};
  }

  void validate(Eigen::Index m) const {
    if (weights.size() == 0) return;
    if (weights.size() != m) throw InvalidArgument("metric: weight vector has wrong length");
    if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-9) {
      throw InvalidArgument("metric: weights must be non-negative and sum to 1");
    }
  }

  Eigen::VectorXd resolved_weights(Eigen::Index m) const {
    return weights.size() == 0 ? Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m)) : weights;
  }

  /// g(y); writes dg/dy into *grad when non-null.
  double evaluate(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::VectorXd>& z,
                  Eigen::VectorXd* grad = nullptr) const {
    const Eigen::Index m = y.size();
    switch (kind) {
      case Kind::euclidean_distance: {
        const Eigen::VectorXd diff = y - z;
        const double dist = diff.norm();
        if (grad) *grad = dist > 0.0 ? Eigen::VectorXd(diff / dist) : Eigen::VectorXd::Zero(m);
        return dist;
      }
      case Kind::weighted_sum: {
        const Eigen::VectorXd w = resolved_weights(m);
        if (grad) *grad = w;
        return w.dot(y - z);
      }
      case Kind::augmented_tchebycheff: {
        const Eigen::VectorXd w = resolved_weights(m);
        const Eigen::VectorXd wd = w.cwiseProduct(y - z);
        Eigen::Index arg = 0;
        const double mx = wd.maxCoeff(&arg);
        if (grad) {
          *grad = alpha_aug * w;
          (*grad)[arg] += w[arg];
        }
        return mx + alpha_aug * wd.sum();
      }
    }
    return std::numeric_limits<double>::quiet_NaN();
  }
};

inline double metric_value(const Eigen::Ref<const Eigen::VectorXd>& y, const SinglePointMetric& metric,
                           const UtopianPoint& z_star) {
  return metric.evaluate(y, z_star.z);
}

/// Single-point improvement: max(0, g* - ||y - z*||).
inline double spi(const Eigen::Ref<const Eigen::VectorXd>& y, double g_star, const UtopianPoint& z_star) {
  return std::max(0.0, g_star - (y - z_star.z).norm());
}

// Numerically stable softplus pieces.
inline double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

inline double log_softplus(double z) {
  if (z < -30.0) return z;
  return std::log(softplus(z));
}

inline double log_sigmoid(double z) { return -softplus(-z); }

/// tau * softplus(u / tau): the smooth stand-in for max(0, u).
inline double smoothed_improvement(double u, double tau) { return tau * softplus(u / tau); }

/// log of the MC mean of smoothed improvements, computed in log space so
/// that tiny averages stay finite.
inline double log_smoothed_improvement(std::span<const double> u, double tau) {
  if (u.empty()) throw InvalidArgument("log_smoothed_improvement: empty sample");
  double mx = -std::numeric_limits<double>::infinity();
  std::vector<double> logs(u.size());
  for (std::size_t t = 0; t < u.size(); ++t) {
    logs[t] = std::log(tau) + log_softplus(u[t] / tau);
    mx = std::max(mx, logs[t]);
  }
  double acc = 0.0;
  for (double l : logs) acc += std::exp(l - mx);
  return mx + std::log(acc) - std::log(static_cast<double>(u.size()));
}

struct Smoothing {
  enum class Kind { hard, log_smoothed };
  Kind kind = Kind::log_smoothed;
  double tau = 1e-3;

  static Smoothing hard() { return {Kind::hard, 0.0}; }
  static Smoothing log_smoothed(double tau = 1e-3) {
    if (!(tau > 0.0)) throw InvalidArgument("smoothing: tau must be > 0");
    return {Kind::log_smoothed, tau};
  }
};

/// Monte-Carlo ESPI / NESPI over fixed base samples.
///
/// Base-sample columns are laid out point-major: column j*m + i drives
/// objective i at joint point j, where j = 0 is the candidate, then the
/// pending batch points, then (noisy mode) the observed inputs.
///
/// Within one state the sampled objective values at pending and observed
/// points do not depend on the candidate, so they and the per-sample
/// baselines are computed once. The candidate's sample is the last row of a
/// Cholesky root of the joint posterior covariance, which keeps the
/// estimator a smooth function of x with an analytic gradient.
class SinglePointAcquisition {
 public:
  enum class Mode { noiseless, noisy };

  /// ESPI: the incumbent baseline is g_star (original objective units).
  static SinglePointAcquisition espi(std::shared_ptr<const MultiSurrogate> surrogate, UtopianPoint utopian,
                                     double g_star, std::shared_ptr<const BaseSampleMatrix> base,
                                     std::vector<Point> pending = {}, SinglePointMetric metric = {},
                                     Smoothing smoothing = Smoothing::log_smoothed()) {
    if (!(g_star >= 0.0) && metric.kind == SinglePointMetric::Kind::euclidean_distance) {
      throw InvalidArgument("espi: g_star must be >= 0");
    }
    SinglePointAcquisition a(std::move(surrogate), std::move(utopian), std::move(base), std::move(pending),
                             std::move(metric), smoothing, Mode::noiseless);
    a.g_star_ = g_star;
    a.prepare();
    return a;
  }

  /// NESPI: the baseline is the per-sample best value over the observed
  /// inputs (unit cube). Defaults to the surrogate's training inputs.
  static SinglePointAcquisition nespi(std::shared_ptr<const MultiSurrogate> surrogate, UtopianPoint utopian,
                                      std::shared_ptr<const BaseSampleMatrix> base, std::vector<Point> pending = {},
                                      SinglePointMetric metric = {}, Smoothing smoothing = Smoothing::log_smoothed(),
                                      std::optional<Eigen::MatrixXd> observed_inputs = std::nullopt) {
    SinglePointAcquisition a(std::move(surrogate), std::move(utopian), std::move(base), std::move(pending),
                             std::move(metric), smoothing, Mode::noisy);
    a.observed_ = observed_inputs ? *observed_inputs : a.surrogate_->train_inputs();
    if (a.observed_.rows() == 0) throw InvalidState("nespi: no observed inputs, baseline undefined");
    a.prepare();
    return a;
  }

  /// Same state with a different pending set (sequential greedy batching).
  SinglePointAcquisition with_pending(std::vector<Point> pending) const {
    SinglePointAcquisition a(surrogate_, utopian_, base_, std::move(pending), metric_, smoothing_, mode_);
    a.g_star_ = g_star_;
    a.observed_ = observed_;
    a.prepare();
    return a;
  }

  Mode mode() const { return mode_; }
  const std::vector<Point>& pending() const { return pending_; }
  const BaseSampleMatrix& base() const { return *base_; }
  const MultiSurrogate& surrogate() const { return *surrogate_; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(surrogate_->train_inputs().cols()); }
  double g_star() const { return g_star_; }
  const Smoothing& smoothing() const { return smoothing_; }

  /// Per-sample baselines min(incumbent, pending values).
  const Eigen::VectorXd& baselines() const { return baseline_; }

  /// Sampled objective vectors (original units) at the candidate, one row per base sample.
  Eigen::MatrixXd candidate_samples(const Point& x) const {
    Eigen::MatrixXd y;
    CandidateCache cache;
    sample_candidate(x, y, cache, false);
    return y;
  }

  /// The hard MC estimator (1/N) sum_t max(0, baseline_t - g(y_t(x))).
  double value(const Point& x) const { return evaluate_with(x, Smoothing::hard(), nullptr); }

  /// Acquisition under the state's smoothing; the gradient is with respect
  /// to the unit-cube candidate.
  double evaluate(const Point& x, Eigen::VectorXd* grad = nullptr) const { return evaluate_with(x, smoothing_, grad); }

  double evaluate_with(const Point& x, const Smoothing& smoothing, Eigen::VectorXd* grad) const {
    const Eigen::Index n_samples = base_->rows();
    const Eigen::Index m = num_objectives();
    Eigen::MatrixXd y;
    CandidateCache cache;
    sample_candidate(x, y, cache, grad != nullptr);

    Eigen::VectorXd u(n_samples);
    Eigen::MatrixXd dg;
    if (grad) dg.resize(n_samples, m);
    Eigen::VectorXd dgt;
    for (Eigen::Index t = 0; t < n_samples; ++t) {
      const double g = metric_.evaluate(y.row(t).transpose(), utopian_.z, grad ? &dgt : nullptr);
      u[t] = baseline_[t] - g;
      if (grad) dg.row(t) = dgt.transpose();
    }

    double value = 0.0;
    Eigen::VectorXd du;  // dValue/du_t
    if (grad) du.resize(n_samples);
    if (smoothing.kind == Smoothing::Kind::hard) {
      for (Eigen::Index t = 0; t < n_samples; ++t) {
        value += std::max(0.0, u[t]);
        if (grad) du[t] = u[t] > 0.0 ? 1.0 / static_cast<double>(n_samples) : 0.0;
      }
      value /= static_cast<double>(n_samples);
    } else {
      value = log_smoothed_improvement(std::span<const double>(u.data(), static_cast<std::size_t>(n_samples)),
                                       smoothing.tau);
      if (grad) {
        // d/du_t log mean h(u) = sigmoid(u_t/tau) / sum_s h(u_s).
        const double log_sum = value + std::log(static_cast<double>(n_samples));
        for (Eigen::Index t = 0; t < n_samples; ++t) {
          du[t] = std::exp(log_sigmoid(u[t] / smoothing.tau) - log_sum);
        }
      }
    }
    if (grad) *grad = backpropagate(x, cache, du, dg);
    return value;
  }

  /// Adapter for the multi-start optimiser.
  AcquisitionSurface surface() const {
    return [this](const Eigen::VectorXd& x, Eigen::VectorXd* g) { return evaluate(x, g); };
  }

 private:
  struct ObjectiveBlock {
    Eigen::MatrixXd points;         // joint rows other than the candidate (unit cube)
    Eigen::MatrixXd chol;           // root of their posterior covariance
    Eigen::MatrixXd eps;            // N x |F| base samples for those rows
    Eigen::MatrixXd kinv_kxf;       // K^{-1} K(X, F)
    Eigen::Index candidate_col = 0; // base column for the candidate
  };

  struct CandidateCache {
    std::vector<Eigen::VectorXd> kinv_k, b;
    std::vector<double> cond_sd;
  };

  SinglePointAcquisition(std::shared_ptr<const MultiSurrogate> surrogate, UtopianPoint utopian,
                         std::shared_ptr<const BaseSampleMatrix> base, std::vector<Point> pending,
                         SinglePointMetric metric, Smoothing smoothing, Mode mode)
      : surrogate_(std::move(surrogate)),
        utopian_(std::move(utopian)),
        base_(std::move(base)),
        pending_(std::move(pending)),
        metric_(std::move(metric)),
        smoothing_(smoothing),
        mode_(mode) {
    if (!surrogate_ || !base_) throw InvalidArgument("acquisition: null surrogate or base samples");
    if (utopian_.z.size() != static_cast<Eigen::Index>(surrogate_->num_objectives())) {
      throw InvalidArgument("acquisition: utopian point has wrong length");
    }
    metric_.validate(utopian_.z.size());
  }

  Eigen::Index num_objectives() const { return static_cast<Eigen::Index>(surrogate_->num_objectives()); }

  Eigen::Index required_columns() const {
    const Eigen::Index joint = 1 + static_cast<Eigen::Index>(pending_.size()) +
                               (mode_ == Mode::noisy ? observed_.rows() : 0);
    return joint * num_objectives();
  }

  // Training row index equal to `p`, or -1.
  static Eigen::Index find_training_row(const GaussianProcess& gp, const Eigen::Ref<const Eigen::VectorXd>& p) {
    const Eigen::MatrixXd& x = gp.train_inputs();
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      if ((x.row(r).transpose() - p).cwiseAbs().maxCoeff() == 0.0) return r;
    }
    return -1;
  }

  void prepare() {
    const Eigen::Index m = num_objectives();
    const Eigen::Index n_samples = base_->rows();
    const Eigen::Index d = dim();
    if (base_->cols() < required_columns()) {
      throw InvalidArgument("acquisition: base sample matrix has " + std::to_string(base_->cols()) +
                            " columns, need " + std::to_string(required_columns()));
    }
    for (const auto& p : pending_) {
      if (p.size() != d) throw InvalidArgument("acquisition: pending point has wrong dimension");
    }
    const Eigen::Index n_pending = static_cast<Eigen::Index>(pending_.size());
    const Eigen::Index n_obs = mode_ == Mode::noisy ? observed_.rows() : 0;

    // Sampled objective values (original units) at pending and observed rows.
    std::vector<Eigen::MatrixXd> pending_y(static_cast<std::size_t>(n_pending), Eigen::MatrixXd(n_samples, m));
    std::vector<Eigen::MatrixXd> observed_y(static_cast<std::size_t>(n_obs), Eigen::MatrixXd(n_samples, m));

    blocks_.assign(static_cast<std::size_t>(m), {});
    for (Eigen::Index i = 0; i < m; ++i) {
      const GaussianProcess& gp = surrogate_->model(static_cast<std::size_t>(i));
      const OutputStandardiser& st = surrogate_->standardisers()[static_cast<std::size_t>(i)];
      ObjectiveBlock& blk = blocks_[static_cast<std::size_t>(i)];
      blk.candidate_col = i;

      // Rows whose sampled values are Gaussian; an interpolating model pins
      // f at its own training inputs to the data.
      std::vector<Eigen::Index> cols;
      std::vector<Point> rows;
      std::vector<std::pair<Eigen::Index, Eigen::Index>> slot;  // (kind 0 pending / 1 observed, index)
      for (Eigen::Index k = 0; k < n_pending; ++k) {
        rows.push_back(pending_[static_cast<std::size_t>(k)]);
        cols.push_back((1 + k) * m + i);
        slot.emplace_back(0, k);
      }
      for (Eigen::Index j = 0; j < n_obs; ++j) {
        const Point p = observed_.row(j).transpose();
        if (gp.interpolating()) {
          const Eigen::Index r = find_training_row(gp, p);
          if (r >= 0) {
            const double yv = st.destandardise(gp.train_targets()[r]);
            observed_y[static_cast<std::size_t>(j)].col(i).setConstant(yv);
            continue;
          }
        }
        rows.push_back(p);
        cols.push_back((1 + n_pending + j) * m + i);
        slot.emplace_back(1, j);
      }

      const Eigen::Index nf = static_cast<Eigen::Index>(rows.size());
      blk.points.resize(nf, d);
      for (Eigen::Index r = 0; r < nf; ++r) blk.points.row(r) = rows[static_cast<std::size_t>(r)].transpose();
      blk.eps.resize(n_samples, nf);
      for (Eigen::Index r = 0; r < nf; ++r) blk.eps.col(r) = base_->values().col(cols[static_cast<std::size_t>(r)]);
      if (nf == 0) continue;

      const Eigen::MatrixXd cov = gp.posterior_covariance(blk.points, blk.points);
      blk.chol = detail::cholesky_escalating(cov, gp.params().signal_variance, true, nullptr, "acquisition");
      blk.kinv_kxf = gp.solve(kernel_matrix(gp.train_inputs(), blk.points, gp.params()));
      const Eigen::VectorXd mu = gp.posterior_mean(blk.points);
      const Eigen::MatrixXd f = (blk.eps * blk.chol.transpose()).rowwise() + mu.transpose();
      for (Eigen::Index r = 0; r < nf; ++r) {
        const auto [kind, idx] = slot[static_cast<std::size_t>(r)];
        Eigen::MatrixXd& dst = kind == 0 ? pending_y[static_cast<std::size_t>(idx)] : observed_y[static_cast<std::size_t>(idx)];
        dst.col(i) = (f.col(r).array() * st.scale + st.mean).matrix();
      }
    }

    baseline_.resize(n_samples);
    for (Eigen::Index t = 0; t < n_samples; ++t) {
      double best = mode_ == Mode::noiseless ? g_star_ : std::numeric_limits<double>::infinity();
      for (const auto& oy : observed_y) best = std::min(best, metric_.evaluate(oy.row(t).transpose(), utopian_.z));
      for (const auto& py : pending_y) best = std::min(best, metric_.evaluate(py.row(t).transpose(), utopian_.z));
      baseline_[t] = best;
    }
  }

  void sample_candidate(const Point& x, Eigen::MatrixXd& y, CandidateCache& cache, bool keep) const {
    const Eigen::Index m = num_objectives();
    const Eigen::Index n_samples = base_->rows();
    if (x.size() != dim()) throw InvalidArgument("acquisition: candidate has wrong dimension");
    y.resize(n_samples, m);
    if (keep) {
      cache.kinv_k.resize(static_cast<std::size_t>(m));
      cache.b.resize(static_cast<std::size_t>(m));
      cache.cond_sd.resize(static_cast<std::size_t>(m));
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      const GaussianProcess& gp = surrogate_->model(static_cast<std::size_t>(i));
      const OutputStandardiser& st = surrogate_->standardisers()[static_cast<std::size_t>(i)];
      const ObjectiveBlock& blk = blocks_[static_cast<std::size_t>(i)];
      const Eigen::VectorXd k = gp.kernel_vector(x);
      const auto lower = gp.chol_factor().triangularView<Eigen::Lower>();
      Eigen::VectorXd v = lower.solve(k);
      const double mu = gp.mean_constant() + k.dot(gp.alpha());
      double var = std::max(0.0, gp.params().signal_variance - v.squaredNorm());
      Eigen::VectorXd b;
      Eigen::VectorXd f = Eigen::VectorXd::Constant(n_samples, mu);
      if (blk.points.rows() > 0) {
        Eigen::VectorXd c(blk.points.rows());
        for (Eigen::Index r = 0; r < blk.points.rows(); ++r) c[r] = gp.kernel(blk.points.row(r).transpose(), x);
        c.noalias() -= blk.kinv_kxf.transpose() * k;
        b = blk.chol.triangularView<Eigen::Lower>().solve(c);
        var = std::max(0.0, var - b.squaredNorm());
        f.noalias() += blk.eps * b;
      }
      const double sd = std::sqrt(var);
      f.noalias() += sd * base_->values().col(blk.candidate_col);
      y.col(i) = (f.array() * st.scale + st.mean).matrix();
      if (keep) {
        gp.chol_factor().transpose().triangularView<Eigen::Upper>().solveInPlace(v);  // now K^{-1} k
        cache.kinv_k[static_cast<std::size_t>(i)] = std::move(v);
        cache.b[static_cast<std::size_t>(i)] = std::move(b);
        cache.cond_sd[static_cast<std::size_t>(i)] = sd;
      }
    }
  }

  // Reverse-mode pass through y = mean + scale * (mu + eps_F b + sd eps_x).
  Eigen::VectorXd backpropagate(const Point& x, const CandidateCache& cache, const Eigen::VectorXd& du,
                                const Eigen::MatrixXd& dg) const {
    const Eigen::Index m = num_objectives();
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(x.size());
    for (Eigen::Index i = 0; i < m; ++i) {
      const GaussianProcess& gp = surrogate_->model(static_cast<std::size_t>(i));
      const OutputStandardiser& st = surrogate_->standardisers()[static_cast<std::size_t>(i)];
      const ObjectiveBlock& blk = blocks_[static_cast<std::size_t>(i)];
      // dValue/df_t for this objective (u = baseline - g, so the sign flips).
      const Eigen::VectorXd w = -(du.array() * dg.col(i).array()).matrix() * st.scale;
      const double a = w.sum();
      const double e = w.dot(base_->values().col(blk.candidate_col));
      const double sd = cache.cond_sd[static_cast<std::size_t>(i)];
      const bool has_sd = sd > 1e-12;
      const double var_coef = has_sd ? e / (2.0 * sd) : 0.0;

      Eigen::VectorXd train_w = a * gp.alpha() - 2.0 * var_coef * cache.kinv_k[static_cast<std::size_t>(i)];
      if (blk.points.rows() > 0) {
        Eigen::VectorXd s = blk.eps.transpose() * w;
        if (has_sd) s -= (e / sd) * cache.b[static_cast<std::size_t>(i)];
        blk.chol.transpose().triangularView<Eigen::Upper>().solveInPlace(s);  // rho
        train_w.noalias() -= blk.kinv_kxf * s;
        grad += gp.kernel_gradient_contract(x, blk.points, s);
      }
      grad += gp.kernel_gradient_contract(x, gp.train_inputs(), train_w);
    }
    return grad;
  }

  std::shared_ptr<const MultiSurrogate> surrogate_;
  UtopianPoint utopian_;
  std::shared_ptr<const BaseSampleMatrix> base_;
  std::vector<Point> pending_;
  SinglePointMetric metric_;
  Smoothing smoothing_;
  Mode mode_;
  double g_star_ = 0.0;
  Eigen::MatrixXd observed_;
  std::vector<ObjectiveBlock> blocks_;
  Eigen::VectorXd baseline_;
};

// ---------------------------------------------------------------------------
// Closed-form expected improvement (minimisation) for the scalarised baseline.

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// (incumbent - mu) Phi(u) + sigma phi(u), u = (incumbent - mu) / sigma.
inline double scalarized_ei(double mu, double sigma, double incumbent) {
  if (!(sigma > 0.0)) return std::max(0.0, incumbent - mu);
  const double u = (incumbent - mu) / sigma;
  return (incumbent - mu) * normal_cdf(u) + sigma * normal_pdf(u);
}

namespace detail {

// Mills ratio Phi(-z)/phi(z) for z >= 0 by continued fraction.
inline double mills_ratio(double z) {
  if (z < 3.0) return normal_cdf(-z) / normal_pdf(z);
  double f = z;
  for (int k = 60; k >= 1; --k) f = z + static_cast<double>(k) / f;
  return 1.0 / f;
}

// log h(u) with h(u) = phi(u) + u Phi(u); stable for very negative u.
inline double log_h(double u) {
  if (u > -3.0) return std::log(normal_pdf(u) + u * normal_cdf(u));
  const double z = -u;
  const double r = mills_ratio(z);
  return -0.5 * u * u - 0.5 * std::log(2.0 * std::numbers::pi) + std::log1p(-z * r);
}

// Phi(u) / h(u).
inline double cdf_over_h(double u) {
  if (u > -3.0) return normal_cdf(u) / (normal_pdf(u) + u * normal_cdf(u));
  const double z = -u;
  const double r = mills_ratio(z);
  return r / (1.0 - z * r);
}

}  // namespace detail

/// log EI with gradients with respect to mu and sigma.
inline double log_scalarized_ei(double mu, double sigma, double incumbent, double* dmu = nullptr,
                                double* dsigma = nullptr) {
  sigma = std::max(sigma, 1e-12);
  const double u = (incumbent - mu) / sigma;
  const double lh = detail::log_h(u);
  if (dmu || dsigma) {
    // EI = sigma h(u); dEI/dmu = -Phi(u); dEI/dsigma = phi(u).
    const double q = detail::cdf_over_h(u);
    if (dmu) *dmu = -q / sigma;
    const double log_phi = -0.5 * u * u - 0.5 * std::log(2.0 * std::numbers::pi);
    if (dsigma) *dsigma = std::exp(log_phi - lh) / sigma;
  }
  return std::log(sigma) + lh;
}

/// Expected improvement of a single scalarised GP (standardised units).
class ScalarisedEI {
 public:
  ScalarisedEI(std::shared_ptr<const GaussianProcess> gp, double incumbent, bool log_version = true)
      : gp_(std::move(gp)), incumbent_(incumbent), log_(log_version) {}

  double value(const Point& x) const {
    const PosteriorMoments pm = gp_->posterior(x);
    return scalarized_ei(pm.mean, std::sqrt(pm.variance), incumbent_);
  }

  double evaluate(const Point& x, Eigen::VectorXd* grad) const {
    const Eigen::VectorXd k = gp_->kernel_vector(x);
    const auto lower = gp_->chol_factor().triangularView<Eigen::Lower>();
    Eigen::VectorXd v = lower.solve(k);
    const double mu = gp_->mean_constant() + k.dot(gp_->alpha());
    const double var = std::max(0.0, gp_->params().signal_variance - v.squaredNorm());
    const double sd = std::sqrt(var);
    if (!log_) {
      const double val = scalarized_ei(mu, sd, incumbent_);
      if (grad) {
        gp_->chol_factor().transpose().triangularView<Eigen::Upper>().solveInPlace(v);
        const double u = sd > 0.0 ? (incumbent_ - mu) / sd : 0.0;
        const double dmu = sd > 0.0 ? -normal_cdf(u) : (incumbent_ > mu ? -1.0 : 0.0);
        const double dsd = sd > 0.0 ? normal_pdf(u) : 0.0;
        const double dvar = sd > 1e-12 ? dsd / (2.0 * sd) : 0.0;
        *grad = gp_->kernel_gradient_contract(x, gp_->train_inputs(), dmu * gp_->alpha() - 2.0 * dvar * v);
      }
      return val;
    }
    double dmu = 0.0, dsd = 0.0;
    const double val = log_scalarized_ei(mu, sd, incumbent_, &dmu, &dsd);
    if (grad) {
      gp_->chol_factor().transpose().triangularView<Eigen::Upper>().solveInPlace(v);
      const double dvar = sd > 1e-12 ? dsd / (2.0 * sd) : 0.0;
      *grad = gp_->kernel_gradient_contract(x, gp_->train_inputs(), dmu * gp_->alpha() - 2.0 * dvar * v);
    }
    return val;
  }

  AcquisitionSurface surface() const {
    return [this](const Eigen::VectorXd& x, Eigen::VectorXd* g) { return evaluate(x, g); };
  }

 private:
  std::shared_ptr<const GaussianProcess> gp_;
  double incumbent_;
  bool log_;
};

/// Sequential greedy batch: each slot maximises the acquisition with the
/// previously chosen points appended to the pending set.
inline std::vector<Point> select_batch(const SinglePointAcquisition& state, int q, const AcqOptimiser& opt) {
  if (q < 1) throw InvalidArgument("select_batch: q must be >= 1");
  std::vector<Point> pending = state.pending();
  std::vector<Point> chosen;
  for (int slot = 0; slot < q; ++slot) {
    try {
      const SinglePointAcquisition acq = slot == 0 ? state : state.with_pending(pending);
      AcqOptimiser o = opt;
      o.seed = derive_seed(opt.seed, static_cast<std::uint64_t>(slot));
      const MaximiseResult res = maximise(acq.surface(), acq.dim(), o);
      auto distinct = [&](const Point& p) {
        for (const auto& c : pending) {
          if ((p - c).norm() <= 1e-9) return false;
        }
        return true;
      };
      // Restarts can all collapse onto a pending point when nothing beats
      // it; fall back to the best distinct restart start.
      const Point* pick = nullptr;
      for (const auto& r : res.restarts) {
        if (distinct(r.x)) {
          pick = &r.x;
          break;
        }
      }
      if (!pick) {
        for (const auto& r : res.restarts) {
          if (distinct(r.start)) {
            pick = &r.start;
            break;
          }
        }
      }
      if (!pick) throw OptimisationFailed("no distinct maximiser found");
      chosen.push_back(*pick);
      pending.push_back(*pick);
    } catch (const Error& e) {
      throw OptimisationFailed("select_batch slot " + std::to_string(slot) + ": " + e.what());
    }
  }
  return chosen;
}

}  // namespace spmo
