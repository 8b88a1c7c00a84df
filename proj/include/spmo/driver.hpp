#pragma once

#include <Eigen/Core>

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spmo/acqopt.hpp"
#include "spmo/acquisition.hpp"
#include "spmo/errors.hpp"
#include "spmo/metrics.hpp"
#include "spmo/problems.hpp"
#include "spmo/rng.hpp"
#include "spmo/sampling.hpp"
#include "spmo/surrogate.hpp"

namespace spmo {

enum class Method { spmo, sobol, scalarized_ei };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::spmo:
      return "spmo";
    case Method::sobol:
      return "sobol";
    case Method::scalarized_ei:
      return "scalarized_ei";
  }
  return "unknown";
}

inline Method parse_method(const std::string& s) {
  if (s == "spmo") return Method::spmo;
  if (s == "sobol") return Method::sobol;
  if (s == "scalarized_ei" || s == "parego") return Method::scalarized_ei;
  throw InvalidArgument("unknown method '" + s + "'");
}

/// Where the utopian point comes from.
struct UtopianSource {
  enum class Kind { ideal, explicit_point, ideal_minus };
  Kind kind = Kind::ideal;
  Eigen::VectorXd z;   // explicit_point
  double delta = 0.0;  // ideal_minus

  static UtopianSource ideal() { return {}; }
  static UtopianSource explicit_point(Eigen::VectorXd z) { return {Kind::explicit_point, std::move(z), 0.0}; }
  static UtopianSource ideal_minus(double delta) { return {Kind::ideal_minus, {}, delta}; }

  UtopianPoint resolve(const Problem& p) const {
    if (kind == Kind::explicit_point) {
      if (z.size() != p.m) throw InvalidArgument("utopian: explicit point has wrong length for " + p.name);
      return {z};
    }
    if (!p.ideal_point) {
      throw InvalidArgument("utopian: " + p.name + " has no known ideal point; supply one explicitly");
    }
    const double shift = kind == Kind::ideal_minus ? delta : 0.0;
    return {(p.ideal_point->array() - shift).matrix()};
  }
};

struct MethodConfig {
  Method method = Method::spmo;
  std::string label;  // defaults to the method name
  SinglePointMetric metric;
  UtopianSource utopian;
  int mc_samples = 128;
  Smoothing smoothing;  // surface handed to the optimiser
  int batch_size = 1;
  bool noisy = false;  // NESPI instead of ESPI
  double alpha_aug = 0.05;
  double fixed_noise = 1e-6;  // standardised noise variance of noiseless models
  HyperPrior::Kind gp_prior = HyperPrior::Kind::gamma;  // none gives a plain likelihood fit
  int gp_restarts = 8;
  int gp_max_iterations = 100;
  AcqOptimiser optimiser;
  int initial_points = 0;  // 0 means 2 (d + 1)

  std::string display_name() const { return label.empty() ? method_name(method) : label; }
};

struct RunOptions {
  int budget = 200;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
};

struct TrajectoryEntry {
  int index = 0;
  int iteration = 0;  // 0 for the initial design
  bool initial = false;
  Eigen::VectorXd x;       // problem units
  Eigen::VectorXd y;       // as observed
  Eigen::VectorXd y_true;  // noiseless
  /// (mean, scale) per objective of the fit that proposed this point.
  std::vector<std::pair<double, double>> standardisers;
};

struct RunSummary {
  std::vector<double> best_distance;  // running minimum after each evaluation
  double distance = 0.0;
  double log_distance = 0.0;
  double single_point_hv = 0.0;
  double set_hv = 0.0;
};

struct RunRecord {
  std::string problem;
  std::string method;
  MethodConfig config;
  RunOptions options;
  Eigen::VectorXd utopian;
  Eigen::VectorXd reference_point;
  std::vector<TrajectoryEntry> entries;
  RunSummary summary;
  bool aborted = false;
  std::string error;
  /// Seconds per acquisition optimisation; kept out of the serialised record.
  std::vector<double> acquisition_seconds;
};

// ---------------------------------------------------------------------------
// Metrics over a record

/// Objective vectors in the space where the problem's HV reference lives.
inline Eigen::VectorXd hv_space(const Problem& p, const Eigen::VectorXd& y) {
  if (!p.normalised_reference) return y;
  if (!p.ideal_point || !p.nadir_point) {
    throw InvalidArgument(p.name + ": normalised reference needs configured ideal and nadir points");
  }
  return (y - *p.ideal_point).cwiseQuotient(*p.nadir_point - *p.ideal_point);
}

inline RunSummary summarise(const Problem& p, const std::vector<TrajectoryEntry>& entries, const Eigen::VectorXd& z,
                            std::uint64_t hv_seed = 0) {
  RunSummary s;
  if (entries.empty()) return s;
  std::vector<Eigen::VectorXd> ys, hs;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : entries) {
    ys.push_back(e.y_true);
    hs.push_back(hv_space(p, e.y_true));
    best = std::min(best, (e.y_true - z).norm());
    s.best_distance.push_back(best);
  }
  const UtopianDistance ud = utopian_distance(ys, z);
  s.distance = ud.distance;
  s.log_distance = ud.log_distance;
  const HvConfig cfg = HvConfig::automatic(p.reference_point, hv_seed);
  s.single_point_hv = single_point_hv(hs, cfg).hv;
  s.set_hv = hypervolume(nondominated_filter(hs), cfg);
  return s;
}

// ---------------------------------------------------------------------------
// Runs

namespace detail {

struct Dataset {
  Eigen::MatrixXd x;       // problem units
  Eigen::MatrixXd unit;    // unit cube
  Eigen::MatrixXd y;       // observed
  Eigen::Index n = 0;

  void reserve(Eigen::Index rows, Eigen::Index d, Eigen::Index m) {
    x.resize(rows, d);
    unit.resize(rows, d);
    y.resize(rows, m);
  }
  void push(const Eigen::VectorXd& xp, const Eigen::VectorXd& u, const Eigen::VectorXd& yo) {
    x.row(n) = xp.transpose();
    unit.row(n) = u.transpose();
    y.row(n) = yo.transpose();
    ++n;
  }
  Eigen::MatrixXd xs() const { return x.topRows(n); }
  Eigen::MatrixXd units() const { return unit.topRows(n); }
  Eigen::MatrixXd ys() const { return y.topRows(n); }
};

class RunContext {
 public:
  RunContext(const Problem& p, const MethodConfig& cfg, const RunOptions& opt)
      : problem(p),
        config(cfg),
        options(opt),
        normaliser{p.lower, p.upper},
        noisy(p, opt.noise_std, derive_seed(opt.seed, 3)),
        guard(static_cast<std::size_t>(p.d), derive_seed(opt.seed, 6)) {
    if (opt.budget < 1) throw InvalidArgument("run: budget must be >= 1");
    if (cfg.batch_size < 1) throw InvalidArgument("run: batch size must be >= 1");
    if (cfg.mc_samples < 1) throw InvalidArgument("run: mc_samples must be >= 1");
    record.problem = p.name;
    record.method = cfg.display_name();
    record.config = cfg;
    record.options = opt;
    record.reference_point = p.reference_point;
    data.reserve(opt.budget, p.d, p.m);
  }

  int initial_size() const {
    const int n0 = config.initial_points > 0 ? config.initial_points : 2 * (problem.d + 1);
    return std::min(n0, options.budget);
  }

  int remaining() const { return options.budget - static_cast<int>(data.n); }

  // Replaces candidates that coincide with an existing or earlier input.
  Point guarded(const Point& u, const std::vector<Point>& batch) {
    auto clash = [&](const Point& c) {
      for (Eigen::Index r = 0; r < data.n; ++r) {
        if ((data.unit.row(r).transpose() - c).norm() <= 1e-9) return true;
      }
      for (const auto& b : batch) {
        if ((b - c).norm() <= 1e-9) return true;
      }
      return false;
    };
    Point c = u.cwiseMax(0.0).cwiseMin(1.0);
    while (clash(c)) c = guard.next();
    return c;
  }

  void evaluate(const Point& u, int iteration, bool initial, const std::vector<std::pair<double, double>>& maps) {
    Eigen::VectorXd x = normaliser.from_unit(u);
    x = x.cwiseMax(problem.lower).cwiseMin(problem.upper);
    const Observation o = noisy.observe(x);
    data.push(x, u, o.observed);
    TrajectoryEntry e;
    e.index = static_cast<int>(record.entries.size());
    e.iteration = iteration;
    e.initial = initial;
    e.x = x;
    e.y = o.observed;
    e.y_true = o.truth;
    e.standardisers = maps;
    record.entries.push_back(std::move(e));
  }

  void initial_design() {
    SobolStream s(static_cast<std::size_t>(problem.d), derive_seed(options.seed, 1));
    const int n0 = initial_size();
    for (int i = 0; i < n0; ++i) evaluate(s.next(), 0, true, {});
  }

  RunRecord finish(const UtopianPoint& z) {
    record.utopian = z.z;
    record.summary = summarise(problem, record.entries, z.z, derive_seed(options.seed, 7));
    return std::move(record);
  }

  FitOptions fit_options(int iteration, bool infer_noise) const {
    FitOptions f;
    f.noise = infer_noise ? NoiseMode::inferred() : NoiseMode::fixed(config.fixed_noise);
    f.prior.kind = config.gp_prior;
    f.restarts = config.gp_restarts;
    f.max_iterations = config.gp_max_iterations;
    f.seed = derive_seed(options.seed, 4, static_cast<std::uint64_t>(iteration));
    return f;
  }

  const Problem& problem;
  const MethodConfig& config;
  const RunOptions& options;
  InputNormaliser normaliser;
  NoisyProblem noisy;
  SobolStream guard;
  Dataset data;
  RunRecord record;
};

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Fit with one retry under stronger regularisation before giving up.
template <class Fn>
auto fit_with_retry(Fn&& fn) -> decltype(fn(false)) {
  try {
    return fn(false);
  } catch (const Error&) {
    return fn(true);
  }
}

}  // namespace detail

/// Single-point multi-objective BO: initial Sobol design, then per
/// iteration fit m GPs, draw fresh base samples, maximise ESPI (NESPI when
/// noisy) and evaluate the chosen batch until the budget is spent.
inline RunRecord run_spmo(const Problem& problem, const MethodConfig& cfg, const RunOptions& opt) {
  detail::RunContext ctx(problem, cfg, opt);
  const UtopianPoint z = cfg.utopian.resolve(problem);
  cfg.metric.validate(problem.m);
  ctx.initial_design();
  std::vector<KernelParams> warm;
  const Eigen::Index m = problem.m;

  for (int it = 1; ctx.remaining() > 0; ++it) {
    const int q = std::min(cfg.batch_size, ctx.remaining());
    std::shared_ptr<const MultiSurrogate> surrogate;
    try {
      surrogate = detail::fit_with_retry([&](bool retry) {
        FitOptions f = ctx.fit_options(it, cfg.noisy);
        if (retry) {
          // Stronger regularisation: inferred noise floor or larger fixed noise.
          f.bounds.noise_min = 1e-6;
          if (!cfg.noisy) f.noise = NoiseMode::fixed(std::max(cfg.fixed_noise * 100.0, 1e-4));
          f.warm_start.reset();
        }
        return std::make_shared<const MultiSurrogate>(
            MultiSurrogate::fit(ctx.data.xs(), ctx.data.ys(), ctx.normaliser, f, retry ? std::vector<KernelParams>{} : warm));
      });
    } catch (const Error& e) {
      ctx.record.aborted = true;
      ctx.record.error = "iteration " + std::to_string(it) + ": model fit failed twice: " + e.what();
      return ctx.finish(z);
    }
    warm = surrogate->params();
    std::vector<std::pair<double, double>> maps;
    for (const auto& s : surrogate->standardisers()) maps.emplace_back(s.mean, s.scale);

    const Eigen::Index joint = q + (cfg.noisy ? ctx.data.n : 0);
    auto base = std::make_shared<const BaseSampleMatrix>(
        standard_normal_matrix(cfg.mc_samples, joint * m, derive_seed(opt.seed, 2, static_cast<std::uint64_t>(it))));

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Point> chosen;
    try {
      std::optional<SinglePointAcquisition> state;
      if (cfg.noisy) {
        state.emplace(SinglePointAcquisition::nespi(surrogate, z, base, {}, cfg.metric, cfg.smoothing));
      } else {
        double g_star = std::numeric_limits<double>::infinity();
        for (Eigen::Index r = 0; r < ctx.data.n; ++r) {
          g_star = std::min(g_star, cfg.metric.evaluate(ctx.data.y.row(r).transpose(), z.z));
        }
        state.emplace(SinglePointAcquisition::espi(surrogate, z, g_star, base, {}, cfg.metric, cfg.smoothing));
      }
      AcqOptimiser o = cfg.optimiser;
      o.seed = derive_seed(opt.seed, 5, static_cast<std::uint64_t>(it));
      if (q == 1) {
        chosen.push_back(maximise(state->surface(), problem.d, o).x);
      } else {
        chosen = select_batch(*state, q, o);
      }
    } catch (const Error& e) {
      ctx.record.aborted = true;
      ctx.record.error = "iteration " + std::to_string(it) + ": acquisition failed: " + e.what();
      return ctx.finish(z);
    }
    ctx.record.acquisition_seconds.push_back(detail::seconds_since(t0));

    std::vector<Point> batch;
    for (const auto& c : chosen) batch.push_back(ctx.guarded(c, batch));
    for (const auto& u : batch) ctx.evaluate(u, it, false, maps);
  }
  return ctx.finish(z);
}

/// All T points from one scrambled Sobol stream.
inline RunRecord run_sobol(const Problem& problem, const MethodConfig& cfg, const RunOptions& opt) {
  detail::RunContext ctx(problem, cfg, opt);
  const UtopianPoint z = cfg.utopian.resolve(problem);
  SobolStream s(static_cast<std::size_t>(problem.d), derive_seed(opt.seed, 1));
  const int n0 = ctx.initial_size();
  for (int i = 0; i < opt.budget; ++i) ctx.evaluate(s.next(), i < n0 ? 0 : i - n0 + 1, i < n0, {});
  return ctx.finish(z);
}

/// Uniform draw from the probability simplex.
inline Eigen::VectorXd simplex_weight(Eigen::Index m, Rng& rng) {
  Eigen::VectorXd w(m);
  for (Eigen::Index i = 0; i < m; ++i) w[i] = -std::log(rng.uniform_open());
  return w / w.sum();
}

/// Random augmented-Tchebycheff scalarisation with closed-form EI on one GP.
///
/// Observed objectives are rescaled to [0,1] by their observed range before
/// scalarising; batches use q independent weights optimised in turn.
inline RunRecord run_scalarized_ei(const Problem& problem, const MethodConfig& cfg, const RunOptions& opt) {
  detail::RunContext ctx(problem, cfg, opt);
  const UtopianPoint z = cfg.utopian.resolve(problem);
  ctx.initial_design();
  Rng weight_rng(derive_seed(opt.seed, 8));
  const Eigen::Index m = problem.m;
  std::optional<KernelParams> warm;

  for (int it = 1; ctx.remaining() > 0; ++it) {
    const int q = std::min(cfg.batch_size, ctx.remaining());
    const Eigen::MatrixXd y = ctx.data.ys();
    const Eigen::VectorXd lo = y.colwise().minCoeff();
    Eigen::VectorXd range = y.colwise().maxCoeff().transpose() - lo;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (!(range[i] > 0.0)) range[i] = 1.0;
    }
    const Eigen::MatrixXd unit = ctx.data.units();
    std::vector<Point> batch;
    std::vector<std::pair<double, double>> maps;
    const auto t0 = std::chrono::steady_clock::now();
    for (int slot = 0; slot < q; ++slot) {
      const Eigen::VectorXd w = m == 1 ? Eigen::VectorXd::Ones(1) : simplex_weight(m, weight_rng);
      const SinglePointMetric tch = SinglePointMetric::augmented_tchebycheff(w, cfg.alpha_aug);
      Eigen::VectorXd s(y.rows());
      for (Eigen::Index r = 0; r < y.rows(); ++r) {
        const Eigen::VectorXd yn = (y.row(r).transpose() - lo).cwiseQuotient(range);
        s[r] = tch.evaluate(yn, Eigen::VectorXd::Zero(m));
      }
      const OutputStandardiser st = OutputStandardiser::from_data(s);
      const Eigen::VectorXd f = (s.array() - st.mean) / st.scale;
      std::shared_ptr<const GaussianProcess> gp;
      try {
        gp = detail::fit_with_retry([&](bool retry) {
          FitOptions fo = ctx.fit_options(it * 1000 + slot, cfg.noisy);
          if (!retry && warm) fo.warm_start = warm;
          if (retry) {
            fo.bounds.noise_min = 1e-6;
            if (!cfg.noisy) fo.noise = NoiseMode::fixed(std::max(cfg.fixed_noise * 100.0, 1e-4));
          }
          return std::make_shared<const GaussianProcess>(GaussianProcess::fit(unit, f, fo));
        });
      } catch (const Error& e) {
        ctx.record.aborted = true;
        ctx.record.error = "iteration " + std::to_string(it) + ": model fit failed twice: " + e.what();
        return ctx.finish(z);
      }
      warm = gp->params();
      if (slot == 0) maps.emplace_back(st.mean, st.scale);
      double incumbent = f.minCoeff();
      if (cfg.noisy) incumbent = gp->posterior_mean(unit).minCoeff();
      const ScalarisedEI ei(gp, incumbent, true);
      AcqOptimiser o = cfg.optimiser;
      o.seed = derive_seed(opt.seed, 5, static_cast<std::uint64_t>(it), static_cast<std::uint64_t>(slot));
      try {
        batch.push_back(ctx.guarded(maximise(ei.surface(), problem.d, o).x, batch));
      } catch (const Error& e) {
        ctx.record.aborted = true;
        ctx.record.error = "iteration " + std::to_string(it) + ": acquisition failed: " + e.what();
        return ctx.finish(z);
      }
    }
    ctx.record.acquisition_seconds.push_back(detail::seconds_since(t0));
    for (const auto& u : batch) ctx.evaluate(u, it, false, maps);
  }
  return ctx.finish(z);
}

inline RunRecord run_method(const Problem& problem, const MethodConfig& cfg, const RunOptions& opt) {
  switch (cfg.method) {
    case Method::spmo:
      return run_spmo(problem, cfg, opt);
    case Method::sobol:
      return run_sobol(problem, cfg, opt);
    case Method::scalarized_ei:
      return run_scalarized_ei(problem, cfg, opt);
  }
  throw InvalidArgument("run: unknown method");
}

// ---------------------------------------------------------------------------
// Serialisation: one JSON object per line (header, one per evaluation,
// summary); keys sorted; -inf and NaN written as strings.

namespace json_io {

using nlohmann::json;

inline json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double to_double(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw InvalidData("record: bad number '" + s + "'");
  }
  return j.get<double>();
}

inline json vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

inline Eigen::VectorXd to_vec(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = to_double(j[i]);
  return v;
}

inline std::string metric_kind_name(SinglePointMetric::Kind k) {
  switch (k) {
    case SinglePointMetric::Kind::euclidean_distance:
      return "dist";
    case SinglePointMetric::Kind::weighted_sum:
      return "ws";
    case SinglePointMetric::Kind::augmented_tchebycheff:
      return "tch";
  }
  return "dist";
}

inline SinglePointMetric::Kind parse_metric_kind(const std::string& s) {
  if (s == "dist" || s == "euclidean_distance") return SinglePointMetric::Kind::euclidean_distance;
  if (s == "ws" || s == "weighted_sum") return SinglePointMetric::Kind::weighted_sum;
  if (s == "tch" || s == "augmented_tchebycheff") return SinglePointMetric::Kind::augmented_tchebycheff;
  throw InvalidArgument("unknown single-point metric '" + s + "'");
}

inline std::string prior_name(HyperPrior::Kind k) {
  switch (k) {
    case HyperPrior::Kind::none:
      return "none";
    case HyperPrior::Kind::gamma:
      return "gamma";
    case HyperPrior::Kind::dim_scaled_lognormal:
      return "lognormal";
  }
  return "none";
}

inline HyperPrior::Kind parse_prior(const std::string& s) {
  if (s == "none") return HyperPrior::Kind::none;
  if (s == "gamma") return HyperPrior::Kind::gamma;
  if (s == "lognormal") return HyperPrior::Kind::dim_scaled_lognormal;
  throw InvalidArgument("unknown GP prior '" + s + "'");
}

inline json method_to_json(const MethodConfig& c) {
  json j;
  j["method"] = method_name(c.method);
  j["label"] = c.display_name();
  j["metric"] = {{"kind", metric_kind_name(c.metric.kind)}, {"weights", vec(c.metric.weights)}, {"alpha_aug", c.metric.alpha_aug}};
  json u;
  switch (c.utopian.kind) {
    case UtopianSource::Kind::ideal:
      u["kind"] = "ideal";
      break;
    case UtopianSource::Kind::explicit_point:
      u["kind"] = "explicit";
      u["z"] = vec(c.utopian.z);
      break;
    case UtopianSource::Kind::ideal_minus:
      u["kind"] = "ideal_minus";
      u["delta"] = c.utopian.delta;
      break;
  }
  j["utopian"] = u;
  j["mc_samples"] = c.mc_samples;
  j["smoothing"] = {{"kind", c.smoothing.kind == Smoothing::Kind::hard ? "hard" : "log_smoothed"}, {"tau", c.smoothing.tau}};
  j["batch_size"] = c.batch_size;
  j["noisy"] = c.noisy;
  j["alpha_aug"] = c.alpha_aug;
  j["fixed_noise"] = c.fixed_noise;
  j["gp_prior"] = prior_name(c.gp_prior);
  j["gp_restarts"] = c.gp_restarts;
  j["gp_max_iterations"] = c.gp_max_iterations;
  j["initial_points"] = c.initial_points;
  j["optimiser"] = {{"num_restarts", c.optimiser.num_restarts},
                    {"raw_candidates", c.optimiser.raw_candidates},
                    {"max_iterations", c.optimiser.max_iterations}};
  return j;
}

/// Missing keys keep their defaults.
inline MethodConfig method_from_json(const json& j) {
  MethodConfig c;
  if (j.is_string()) {
    c.method = parse_method(j.get<std::string>());
    return c;
  }
  c.method = parse_method(j.at("method").get<std::string>());
  if (j.contains("label")) c.label = j["label"].get<std::string>();
  if (j.contains("metric")) {
    const json& mj = j["metric"];
    if (mj.is_string()) {
      c.metric.kind = parse_metric_kind(mj.get<std::string>());
    } else {
      c.metric.kind = parse_metric_kind(mj.value("kind", std::string("dist")));
      if (mj.contains("weights")) c.metric.weights = to_vec(mj["weights"]);
      c.metric.alpha_aug = mj.value("alpha_aug", 0.05);
    }
  }
  if (j.contains("utopian")) {
    const json& u = j["utopian"];
    const std::string kind = u.value("kind", std::string("ideal"));
    if (kind == "ideal") {
      c.utopian = UtopianSource::ideal();
    } else if (kind == "explicit") {
      c.utopian = UtopianSource::explicit_point(to_vec(u.at("z")));
    } else if (kind == "ideal_minus") {
      c.utopian = UtopianSource::ideal_minus(u.at("delta").get<double>());
    } else {
      throw InvalidArgument("unknown utopian kind '" + kind + "'");
    }
  }
  c.mc_samples = j.value("mc_samples", c.mc_samples);
  if (j.contains("smoothing")) {
    const json& s = j["smoothing"];
    const std::string kind = s.value("kind", std::string("log_smoothed"));
    if (kind == "hard") {
      c.smoothing = Smoothing::hard();
    } else if (kind == "log_smoothed") {
      c.smoothing = Smoothing::log_smoothed(s.value("tau", 1e-3));
    } else {
      throw InvalidArgument("unknown smoothing '" + kind + "'");
    }
  }
  c.batch_size = j.value("batch_size", c.batch_size);
  c.noisy = j.value("noisy", c.noisy);
  c.alpha_aug = j.value("alpha_aug", c.alpha_aug);
  c.fixed_noise = j.value("fixed_noise", c.fixed_noise);
  if (j.contains("gp_prior")) c.gp_prior = parse_prior(j["gp_prior"].get<std::string>());
  c.gp_restarts = j.value("gp_restarts", c.gp_restarts);
  c.gp_max_iterations = j.value("gp_max_iterations", c.gp_max_iterations);
  c.initial_points = j.value("initial_points", c.initial_points);
  if (j.contains("optimiser")) {
    const json& o = j["optimiser"];
    c.optimiser.num_restarts = o.value("num_restarts", c.optimiser.num_restarts);
    c.optimiser.raw_candidates = o.value("raw_candidates", c.optimiser.raw_candidates);
    c.optimiser.max_iterations = o.value("max_iterations", c.optimiser.max_iterations);
  }
  return c;
}

}  // namespace json_io

/// Serialises a record as JSON lines: a header, one object per evaluation,
/// then the summary.
inline std::string to_jsonl(const RunRecord& r) {
  using json_io::json;
  using json_io::number;
  using json_io::vec;
  std::ostringstream out;
  json h;
  h["type"] = "header";
  h["problem"] = r.problem;
  h["method"] = r.method;
  h["config"] = json_io::method_to_json(r.config);
  h["budget"] = r.options.budget;
  h["noise_std"] = r.options.noise_std;
  h["seed"] = r.options.seed;
  h["utopian"] = vec(r.utopian);
  h["reference_point"] = vec(r.reference_point);
  out << h.dump() << '\n';
  for (const auto& e : r.entries) {
    json j;
    j["type"] = "eval";
    j["index"] = e.index;
    j["iteration"] = e.iteration;
    j["initial"] = e.initial;
    j["x"] = vec(e.x);
    j["y"] = vec(e.y);
    j["y_true"] = vec(e.y_true);
    json maps = json::array();
    for (const auto& [mean, scale] : e.standardisers) maps.push_back({number(mean), number(scale)});
    j["standardisers"] = maps;
    out << j.dump() << '\n';
  }
  json s;
  s["type"] = "summary";
  s["status"] = r.aborted ? "aborted" : "ok";
  s["error"] = r.error;
  s["evaluations"] = r.entries.size();
  s["distance"] = number(r.summary.distance);
  s["log_distance"] = number(r.summary.log_distance);
  s["single_point_hv"] = number(r.summary.single_point_hv);
  s["set_hv"] = number(r.summary.set_hv);
  json traj = json::array();
  for (double d : r.summary.best_distance) traj.push_back(number(d));
  s["best_distance"] = traj;
  out << s.dump() << '\n';
  return out.str();
}

inline RunRecord from_jsonl(const std::string& text) {
  using json_io::json;
  using json_io::to_double;
  using json_io::to_vec;
  RunRecord r;
  std::istringstream in(text);
  std::string line;
  bool header = false, summary = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw InvalidData(std::string("record: malformed line: ") + e.what());
    }
    const std::string type = j.at("type").get<std::string>();
    if (type == "header") {
      header = true;
      r.problem = j.at("problem").get<std::string>();
      r.method = j.at("method").get<std::string>();
      r.config = json_io::method_from_json(j.at("config"));
      r.options.budget = j.at("budget").get<int>();
      r.options.noise_std = j.at("noise_std").get<double>();
      r.options.seed = j.at("seed").get<std::uint64_t>();
      r.utopian = to_vec(j.at("utopian"));
      r.reference_point = to_vec(j.at("reference_point"));
    } else if (type == "eval") {
      TrajectoryEntry e;
      e.index = j.at("index").get<int>();
      e.iteration = j.at("iteration").get<int>();
      e.initial = j.at("initial").get<bool>();
      e.x = to_vec(j.at("x"));
      e.y = to_vec(j.at("y"));
      e.y_true = to_vec(j.at("y_true"));
      for (const auto& mp : j.at("standardisers")) e.standardisers.emplace_back(to_double(mp[0]), to_double(mp[1]));
      r.entries.push_back(std::move(e));
    } else if (type == "summary") {
      summary = true;
      r.aborted = j.at("status").get<std::string>() == "aborted";
      r.error = j.at("error").get<std::string>();
      r.summary.distance = to_double(j.at("distance"));
      r.summary.log_distance = to_double(j.at("log_distance"));
      r.summary.single_point_hv = to_double(j.at("single_point_hv"));
      r.summary.set_hv = to_double(j.at("set_hv"));
      for (const auto& d : j.at("best_distance")) r.summary.best_distance.push_back(to_double(d));
    } else {
      throw InvalidData("record: unknown line type '" + type + "'");
    }
  }
  if (!header || !summary) throw InvalidData("record: missing header or summary line");
  return r;
}

}  // namespace spmo
