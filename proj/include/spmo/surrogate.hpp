#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "spmo/errors.hpp"
#include "spmo/lbfgsb.hpp"
#include "spmo/sampling.hpp"

namespace spmo {

/// Matern 5/2 ARD hyperparameters.
struct KernelParams {
  double signal_variance = 1.0;
  Eigen::VectorXd lengthscales;
  double noise_variance = 0.0;

  void validate() const {
    if (!(signal_variance > 0.0)) throw InvalidArgument("kernel: signal variance must be > 0");
    if (lengthscales.size() == 0) throw InvalidArgument("kernel: empty lengthscale vector");
    for (Eigen::Index i = 0; i < lengthscales.size(); ++i) {
      if (!(lengthscales[i] > 0.0)) throw InvalidArgument("kernel: lengthscales must be > 0");
    }
    if (!(noise_variance >= 0.0)) throw InvalidArgument("kernel: noise variance must be >= 0");
  }
};

namespace detail {

inline constexpr double kSqrt5 = 2.23606797749978969640917366873128;

// k(r) for the scaled distance r.
inline double matern52_profile(double r, double sf) {
  const double sr = kSqrt5 * r;
  return sf * (1.0 + sr + 5.0 * r * r / 3.0) * std::exp(-sr);
}

// -(dk/dr)/r; finite at r = 0.
inline double matern52_slope(double r, double sf) {
  const double sr = kSqrt5 * r;
  return (5.0 / 3.0) * sf * (1.0 + sr) * std::exp(-sr);
}

inline double scaled_distance(const Eigen::Ref<const Eigen::VectorXd>& x,
                              const Eigen::Ref<const Eigen::VectorXd>& y,
                              const Eigen::VectorXd& inv_ls) {
  return (x - y).cwiseProduct(inv_ls).norm();
}

// Lower Cholesky factor of `k + jitter*I`, escalating jitter by 10x from
// `first_jitter` until `max_jitter`. A zero first_jitter tries the bare
// matrix before escalating from `scale * 1e-8`.
inline Eigen::MatrixXd cholesky_escalating(const Eigen::MatrixXd& k, double scale, bool try_bare,
                                           double* jitter_used, const char* what) {
  const Eigen::Index n = k.rows();
  if (try_bare) {
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() == Eigen::Success) {
      if (jitter_used) *jitter_used = 0.0;
      return llt.matrixL();
    }
  }
  for (double jitter = 1e-8 * scale; jitter <= 1e-2 * scale * (1.0 + 1e-9); jitter *= 10.0) {
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(kj);
    if (llt.info() == Eigen::Success) {
      if (jitter_used) *jitter_used = jitter;
      return llt.matrixL();
    }
  }
  (void)n;
  throw IllConditioned(std::string(what) + ": Cholesky failed after maximum jitter");
}

}  // namespace detail

/// Matern 5/2 ARD kernel value.
inline double matern52(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                       const KernelParams& params) {
  if (x.size() != params.lengthscales.size() || y.size() != params.lengthscales.size()) {
    throw InvalidArgument("matern52: dimension mismatch");
  }
  params.validate();
  const Eigen::VectorXd inv_ls = params.lengthscales.cwiseInverse();
  return detail::matern52_profile(detail::scaled_distance(x, y, inv_ls), params.signal_variance);
}

/// Matern 5/2 kernel matrix between the rows of `a` and `b`.
inline Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const KernelParams& params) {
  const Eigen::VectorXd inv_ls = params.lengthscales.cwiseInverse();
  Eigen::MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      const double r = (a.row(i) - b.row(j)).transpose().cwiseProduct(inv_ls).norm();
      k(i, j) = detail::matern52_profile(r, params.signal_variance);
    }
  }
  return k;
}

struct NoiseMode {
  enum class Kind { inferred, fixed };
  Kind kind = Kind::inferred;
  double value = 0.0;

  static NoiseMode inferred() { return {Kind::inferred, 0.0}; }
  static NoiseMode fixed(double v) { return {Kind::fixed, v}; }
};

/// Hyperparameter box, applied in log space during fitting.
struct HyperBounds {
  double lengthscale_min = 1e-3, lengthscale_max = 1e3;
  double signal_min = 1e-4, signal_max = 1e4;
  double noise_min = 1e-8, noise_max = 1.0;
};

/// Optional hyperpriors; when enabled the fit maximises the log posterior
/// instead of the bare likelihood. Lengthscales get either a Gamma(shape,
/// rate) prior or a log-normal whose location grows with log(d); signal and
/// noise variances get Gamma priors.
struct HyperPrior {
  enum class Kind { none, gamma, dim_scaled_lognormal };
  Kind kind = Kind::none;
  double lengthscale_shape = 3.0, lengthscale_rate = 6.0;
  double lognormal_loc = std::numbers::sqrt2, lognormal_scale = std::numbers::sqrt3;
  double signal_shape = 2.0, signal_rate = 0.15;
  double noise_shape = 1.1, noise_rate = 0.05;

  static HyperPrior none() { return {}; }
  static HyperPrior gamma() { return {Kind::gamma}; }
  static HyperPrior dim_scaled_lognormal() { return {Kind::dim_scaled_lognormal}; }

  /// Log density up to a constant and its gradient with respect to
  /// (log signal variance, log lengthscales..., log noise variance).
  double log_density(const KernelParams& k, bool with_noise, Eigen::VectorXd* grad) const {
    const Eigen::Index d = k.lengthscales.size();
    if (grad) grad->setZero(d + 2);
    if (kind == Kind::none) return 0.0;
    // Gamma density of v expressed in t = log v, without the Jacobian.
    auto gamma_term = [](double v, double shape, double rate, double* g) {
      *g = (shape - 1.0) - rate * v;
      return (shape - 1.0) * std::log(v) - rate * v;
    };
    double lp = 0.0;
    double g = 0.0;
    lp += gamma_term(k.signal_variance, signal_shape, signal_rate, &g);
    if (grad) (*grad)[0] = g;
    const double loc = lognormal_loc + 0.5 * std::log(static_cast<double>(d));
    for (Eigen::Index i = 0; i < d; ++i) {
      if (kind == Kind::gamma) {
        lp += gamma_term(k.lengthscales[i], lengthscale_shape, lengthscale_rate, &g);
      } else {
        const double z = (std::log(k.lengthscales[i]) - loc) / lognormal_scale;
        lp += -0.5 * z * z;
        g = -z / lognormal_scale;
      }
      if (grad) (*grad)[1 + i] = g;
    }
    if (with_noise) {
      lp += gamma_term(k.noise_variance, noise_shape, noise_rate, &g);
      if (grad) (*grad)[d + 1] = g;
    }
    return lp;
  }
};

struct FitOptions {
  NoiseMode noise = NoiseMode::inferred();
  HyperPrior prior;
  int restarts = 8;
  std::uint64_t seed = 0;
  std::optional<KernelParams> warm_start;
  int max_iterations = 100;
  HyperBounds bounds;
};

struct PosteriorMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Exact GP regression with a constant mean and Matern 5/2 ARD kernel.
///
/// Inputs are expected in the unit cube and targets standardised; the
/// MultiSurrogate below owns both transforms.
class GaussianProcess {
 public:
  GaussianProcess() = default;

  /// Conditions on data with fixed hyperparameters.
  static GaussianProcess condition(Eigen::MatrixXd inputs, Eigen::VectorXd targets, KernelParams params,
                                   double mean_constant) {
    params.validate();
    if (inputs.rows() != targets.size()) throw InvalidArgument("gp: inputs/targets size mismatch");
    if (inputs.cols() != params.lengthscales.size()) throw InvalidArgument("gp: input dimension mismatch");
    if (!targets.allFinite()) throw InvalidData("gp: non-finite targets");
    GaussianProcess gp;
    gp.params_ = std::move(params);
    gp.mean_ = mean_constant;
    gp.inputs_ = std::move(inputs);
    gp.targets_ = std::move(targets);
    gp.inv_ls_ = gp.params_.lengthscales.cwiseInverse();
    Eigen::MatrixXd k = kernel_matrix(gp.inputs_, gp.inputs_, gp.params_);
    k.diagonal().array() += gp.params_.noise_variance;
    gp.chol_ = detail::cholesky_escalating(k, gp.params_.signal_variance, false, &gp.jitter_, "gp");
    const Eigen::VectorXd resid = gp.targets_.array() - gp.mean_;
    gp.alpha_ = gp.solve(resid);
    return gp;
  }

  /// Maximises the log marginal likelihood (plus the log prior when one is
  /// enabled) over the hyperparameter box from several starts and
  /// conditions on the best.
  static GaussianProcess fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                             const FitOptions& opt) {
    const Eigen::Index n = inputs.rows();
    const Eigen::Index d = inputs.cols();
    if (n < 2) throw InvalidArgument("gp fit: need at least two observations");
    if (targets.size() != n) throw InvalidArgument("gp fit: inputs/targets size mismatch");
    if (!targets.allFinite()) throw InvalidData("gp fit: non-finite targets");
    if (!inputs.allFinite()) throw InvalidData("gp fit: non-finite inputs");

    const bool infer_noise = opt.noise.kind == NoiseMode::Kind::inferred;
    const double mean = targets.mean();
    const Eigen::Index np = 1 + d + (infer_noise ? 1 : 0);
    const HyperBounds& hb = opt.bounds;

    Eigen::VectorXd lo(np), hi(np);
    lo[0] = std::log(hb.signal_min);
    hi[0] = std::log(hb.signal_max);
    lo.segment(1, d).setConstant(std::log(hb.lengthscale_min));
    hi.segment(1, d).setConstant(std::log(hb.lengthscale_max));
    if (infer_noise) {
      lo[np - 1] = std::log(hb.noise_min);
      hi[np - 1] = std::log(hb.noise_max);
    }

    auto unpack = [&](const Eigen::VectorXd& theta) {
      KernelParams p;
      p.signal_variance = std::exp(theta[0]);
      p.lengthscales = theta.segment(1, d).array().exp();
      p.noise_variance = infer_noise ? std::exp(theta[np - 1]) : opt.noise.value;
      return p;
    };
    auto pack = [&](const KernelParams& p) {
      Eigen::VectorXd theta(np);
      theta[0] = std::log(p.signal_variance);
      theta.segment(1, d) = p.lengthscales.array().log();
      if (infer_noise) theta[np - 1] = std::log(std::max(p.noise_variance, hb.noise_min));
      return project_box(theta, lo, hi);
    };

    GradientFunction objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
      Eigen::VectorXd g_full, g_prior;
      const KernelParams k = unpack(theta);
      const double lml = log_marginal_likelihood(inputs, targets, k, mean, &g_full);
      if (!std::isfinite(lml)) {
        grad = Eigen::VectorXd::Zero(np);
        return std::numeric_limits<double>::infinity();
      }
      const double lp = opt.prior.log_density(k, infer_noise, &g_prior);
      grad = -(g_full + g_prior).head(np);
      return -(lml + lp);
    };

    std::vector<Eigen::VectorXd> starts;
    if (opt.warm_start && opt.warm_start->lengthscales.size() == d) starts.push_back(pack(*opt.warm_start));
    {
      KernelParams def;
      def.signal_variance = 1.0;
      def.lengthscales = Eigen::VectorXd::Constant(d, 0.5);
      def.noise_variance = 1e-3;
      starts.push_back(pack(def));
    }
    if (opt.restarts > 0) {
      const Eigen::MatrixXd u = sobol_points(static_cast<std::size_t>(np), static_cast<std::size_t>(opt.restarts), opt.seed);
      for (Eigen::Index r = 0; r < u.rows(); ++r) {
        starts.push_back(lo.array() + u.row(r).transpose().array() * (hi - lo).array());
      }
    }

    BoxMinimiserOptions bo;
    bo.max_iterations = opt.max_iterations;
    bo.projected_gradient_tol = 1e-5;
    bo.relative_function_tol = 1e-10;
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_theta;
    for (const auto& s : starts) {
      const BoxMinimiserResult r = minimise_box(objective, s, lo, hi, bo);
      if (std::isfinite(r.value) && r.value < best) {
        best = r.value;
        best_theta = r.x;
      }
    }
    if (best_theta.size() == 0) throw IllConditioned("gp fit: no start produced a finite likelihood");
    return condition(inputs, targets, unpack(best_theta), mean);
  }

  /// Log marginal likelihood; optionally its gradient with respect to
  /// (log signal variance, log lengthscales..., log noise variance).
  /// Returns -inf when the kernel cannot be factorised.
  static double log_marginal_likelihood(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                                        const KernelParams& params, double mean, Eigen::VectorXd* grad) {
    const Eigen::Index n = inputs.rows();
    const Eigen::Index d = inputs.cols();
    const double sf = params.signal_variance;
    const Eigen::VectorXd inv_ls = params.lengthscales.cwiseInverse();
    Eigen::MatrixXd dist(n, n);
    Eigen::MatrixXd kf(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      kf(i, i) = sf;
      dist(i, i) = 0.0;
      for (Eigen::Index j = 0; j < i; ++j) {
        const double r = (inputs.row(i) - inputs.row(j)).transpose().cwiseProduct(inv_ls).norm();
        dist(i, j) = dist(j, i) = r;
        kf(i, j) = kf(j, i) = detail::matern52_profile(r, sf);
      }
    }
    Eigen::MatrixXd k = kf;
    k.diagonal().array() += params.noise_variance;
    Eigen::MatrixXd chol;
    try {
      chol = detail::cholesky_escalating(k, sf, false, nullptr, "lml");
    } catch (const IllConditioned&) {
      return -std::numeric_limits<double>::infinity();
    }
    const Eigen::VectorXd resid = targets.array() - mean;
    const auto lower = chol.triangularView<Eigen::Lower>();
    Eigen::VectorXd alpha = lower.solve(resid);
    const double quad = alpha.squaredNorm();
    chol.transpose().triangularView<Eigen::Upper>().solveInPlace(alpha);
    const double logdet = 2.0 * chol.diagonal().array().log().sum();
    const double lml = -0.5 * quad - 0.5 * logdet - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    if (grad) {
      Eigen::MatrixXd kinv = Eigen::MatrixXd::Identity(n, n);
      lower.solveInPlace(kinv);
      chol.transpose().triangularView<Eigen::Upper>().solveInPlace(kinv);
      const Eigen::MatrixXd a = alpha * alpha.transpose() - kinv;
      grad->setZero(d + 2);
      (*grad)[0] = 0.5 * (a.array() * kf.array()).sum();
      (*grad)[d + 1] = 0.5 * params.noise_variance * a.trace();
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
          const double w = a(i, j) * detail::matern52_slope(dist(i, j), sf);
          for (Eigen::Index c = 0; c < d; ++c) {
            const double z = (inputs(i, c) - inputs(j, c)) * inv_ls[c];
            (*grad)[1 + c] += w * z * z;
          }
        }
      }
    }
    return lml;
  }

  const KernelParams& params() const { return params_; }
  double mean_constant() const { return mean_; }
  double jitter() const { return jitter_; }
  const Eigen::MatrixXd& train_inputs() const { return inputs_; }
  const Eigen::VectorXd& train_targets() const { return targets_; }
  const Eigen::MatrixXd& chol_factor() const { return chol_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  Eigen::Index size() const { return inputs_.rows(); }
  Eigen::Index dim() const { return inputs_.cols(); }

  /// Zero observation noise: the model interpolates, so f at the training
  /// inputs is known exactly.
  bool interpolating() const { return params_.noise_variance == 0.0; }

  /// (K + noise I + jitter I)^{-1} b.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const {
    const auto lower = chol_.triangularView<Eigen::Lower>();
    Eigen::MatrixXd x = lower.solve(b);
    chol_.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
    return x;
  }

  Eigen::VectorXd kernel_vector(const Eigen::Ref<const Eigen::VectorXd>& q) const {
    Eigen::VectorXd k(size());
    for (Eigen::Index j = 0; j < size(); ++j) {
      k[j] = detail::matern52_profile(detail::scaled_distance(inputs_.row(j).transpose(), q, inv_ls_),
                                      params_.signal_variance);
    }
    return k;
  }

  double kernel(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) const {
    return detail::matern52_profile(detail::scaled_distance(a, b, inv_ls_), params_.signal_variance);
  }

  /// sum_j w_j * d k(q, p_j) / d q for the rows p_j of `points`.
  Eigen::VectorXd kernel_gradient_contract(const Eigen::Ref<const Eigen::VectorXd>& q, const Eigen::MatrixXd& points,
                                           const Eigen::Ref<const Eigen::VectorXd>& w) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(q.size());
    const Eigen::VectorXd inv_ls2 = inv_ls_.cwiseAbs2();
    for (Eigen::Index j = 0; j < points.rows(); ++j) {
      if (w[j] == 0.0) continue;
      const Eigen::VectorXd delta = q - points.row(j).transpose();
      const double r = delta.cwiseProduct(inv_ls_).norm();
      const double s = detail::matern52_slope(r, params_.signal_variance);
      g.noalias() -= (w[j] * s) * delta.cwiseProduct(inv_ls2);
    }
    return g;
  }

  PosteriorMoments posterior(const Eigen::Ref<const Eigen::VectorXd>& q) const {
    const Eigen::VectorXd k = kernel_vector(q);
    PosteriorMoments pm;
    pm.mean = mean_ + k.dot(alpha_);
    const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
    pm.variance = std::max(0.0, params_.signal_variance - v.squaredNorm());
    return pm;
  }

  /// Posterior covariance between the rows of `a` and `b`.
  Eigen::MatrixXd posterior_covariance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) const {
    const Eigen::MatrixXd ka = kernel_matrix(inputs_, a, params_);
    const Eigen::MatrixXd kb = kernel_matrix(inputs_, b, params_);
    const auto lower = chol_.triangularView<Eigen::Lower>();
    const Eigen::MatrixXd va = lower.solve(ka);
    const Eigen::MatrixXd vb = lower.solve(kb);
    return kernel_matrix(a, b, params_) - va.transpose() * vb;
  }

  Eigen::VectorXd posterior_mean(const Eigen::MatrixXd& q) const {
    return (kernel_matrix(q, inputs_, params_) * alpha_).array() + mean_;
  }

 private:
  KernelParams params_;
  double mean_ = 0.0;
  double jitter_ = 0.0;
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd targets_;
  Eigen::VectorXd inv_ls_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd alpha_;
};

/// Per-dimension affine map from the problem box onto [0,1].
struct InputNormaliser {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::VectorXd to_unit(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return (x - lower).cwiseQuotient(upper - lower);
  }
  Eigen::VectorXd from_unit(const Eigen::Ref<const Eigen::VectorXd>& u) const {
    return (lower.array() + u.array() * (upper - lower).array()).matrix();
  }
  Eigen::MatrixXd to_unit_rows(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) out.row(i) = to_unit(x.row(i).transpose()).transpose();
    return out;
  }
};

/// Affine standardisation of one objective: f = (y - mean) / scale.
struct OutputStandardiser {
  double mean = 0.0;
  double scale = 1.0;

  static OutputStandardiser from_data(const Eigen::Ref<const Eigen::VectorXd>& y) {
    OutputStandardiser s;
    s.mean = y.mean();
    const double var = y.size() > 1 ? (y.array() - s.mean).square().sum() / static_cast<double>(y.size() - 1) : 0.0;
    const double sd = std::sqrt(var);
    s.scale = (sd > 1e-12 * std::max(1.0, std::abs(s.mean))) ? sd : 1.0;
    return s;
  }
  double standardise(double y) const { return (y - mean) / scale; }
  double destandardise(double f) const { return mean + scale * f; }
};

/// One independent GP per objective over a shared, normalised input set.
class MultiSurrogate {
 public:
  MultiSurrogate() = default;

  MultiSurrogate(InputNormaliser normaliser, std::vector<OutputStandardiser> standardisers,
                 std::vector<GaussianProcess> models)
      : normaliser_(std::move(normaliser)), standardisers_(std::move(standardisers)), models_(std::move(models)) {
    if (standardisers_.size() != models_.size()) throw InvalidArgument("surrogate: model/standardiser count mismatch");
  }

  /// Fits one model per column of `outputs`. `inputs` are in problem units.
  /// `warm` optionally carries previous hyperparameters per objective.
  static MultiSurrogate fit(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& outputs,
                            const InputNormaliser& normaliser, const FitOptions& base,
                            const std::vector<KernelParams>& warm = {}) {
    if (inputs.rows() != outputs.rows()) throw InvalidArgument("surrogate: row count mismatch");
    const Eigen::MatrixXd unit = normaliser.to_unit_rows(inputs);
    std::vector<OutputStandardiser> stds;
    std::vector<GaussianProcess> models;
    for (Eigen::Index i = 0; i < outputs.cols(); ++i) {
      const Eigen::VectorXd y = outputs.col(i);
      if (!y.allFinite()) throw InvalidData("surrogate: non-finite outputs");
      const OutputStandardiser s = OutputStandardiser::from_data(y);
      const Eigen::VectorXd f = (y.array() - s.mean) / s.scale;
      FitOptions opt = base;
      opt.seed = derive_seed(base.seed, static_cast<std::uint64_t>(i));
      if (static_cast<std::size_t>(i) < warm.size()) opt.warm_start = warm[static_cast<std::size_t>(i)];
      models.push_back(GaussianProcess::fit(unit, f, opt));
      stds.push_back(s);
    }
    return MultiSurrogate(normaliser, std::move(stds), std::move(models));
  }

  std::size_t num_objectives() const { return models_.size(); }
  const std::vector<GaussianProcess>& models() const { return models_; }
  const GaussianProcess& model(std::size_t i) const { return models_[i]; }
  const std::vector<OutputStandardiser>& standardisers() const { return standardisers_; }
  const InputNormaliser& normaliser() const { return normaliser_; }
  const Eigen::MatrixXd& train_inputs() const { return models_.front().train_inputs(); }

  std::vector<KernelParams> params() const {
    std::vector<KernelParams> out;
    for (const auto& m : models_) out.push_back(m.params());
    return out;
  }

 private:
  InputNormaliser normaliser_;
  std::vector<OutputStandardiser> standardisers_;
  std::vector<GaussianProcess> models_;
};

/// Draws from the joint posterior at the rows of `query_points` (unit cube).
///
/// Column j*m + i of `base` drives objective i at query point j. Returns N
/// matrices of shape p x m in original objective units.
inline std::vector<Eigen::MatrixXd> joint_posterior_sample(const MultiSurrogate& surrogate,
                                                           const Eigen::MatrixXd& query_points,
                                                           const BaseSampleMatrix& base) {
  const Eigen::Index p = query_points.rows();
  const Eigen::Index m = static_cast<Eigen::Index>(surrogate.num_objectives());
  if (p < 1) throw InvalidArgument("joint sample: need at least one query point");
  if (base.cols() != p * m) throw InvalidArgument("joint sample: base columns must equal p*m");
  const Eigen::Index n_samples = base.rows();
  std::vector<Eigen::MatrixXd> out(static_cast<std::size_t>(n_samples), Eigen::MatrixXd(p, m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const GaussianProcess& gp = surrogate.model(static_cast<std::size_t>(i));
    const OutputStandardiser& st = surrogate.standardisers()[static_cast<std::size_t>(i)];
    const Eigen::VectorXd mu = gp.posterior_mean(query_points);
    Eigen::MatrixXd root;
    if (p == 1) {
      root = Eigen::MatrixXd::Constant(1, 1, std::sqrt(gp.posterior(query_points.row(0).transpose()).variance));
    } else {
      const Eigen::MatrixXd cov = gp.posterior_covariance(query_points, query_points);
      root = detail::cholesky_escalating(cov, gp.params().signal_variance, true, nullptr, "joint sample");
    }
    Eigen::MatrixXd eps(n_samples, p);
    for (Eigen::Index j = 0; j < p; ++j) eps.col(j) = base.values().col(j * m + i);
    const Eigen::MatrixXd f = (eps * root.transpose()).rowwise() + mu.transpose();
    for (Eigen::Index t = 0; t < n_samples; ++t) {
      for (Eigen::Index j = 0; j < p; ++j) out[static_cast<std::size_t>(t)](j, i) = st.destandardise(f(t, j));
    }
  }
  return out;
}

}  // namespace spmo
