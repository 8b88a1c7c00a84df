#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "spmo/errors.hpp"
#include "spmo/rng.hpp"

namespace spmo {

/// A box-bounded m-objective minimisation problem.
struct Problem {
  std::string name;    // registry key, e.g. "dtlz2:m=5"
  std::string family;  // e.g. "dtlz2"
  int m = 0;
  int d = 0;
  Eigen::VectorXd lower, upper;
  std::optional<Eigen::VectorXd> ideal_point;
  /// Objective-space normalisation bounds for problems whose reference
  /// point lives in normalised space (supplied as configuration).
  std::optional<Eigen::VectorXd> nadir_point;
  /// Hypervolume reference point; in normalised objective space when
  /// `normalised_reference` is set.
  Eigen::VectorXd reference_point;
  bool normalised_reference = false;
  bool stochastic_inner = false;

  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> core;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, Rng&)> stochastic;

  void check_bounds(const Eigen::VectorXd& x) const {
    if (x.size() != d) throw DomainError(name + ": expected " + std::to_string(d) + " inputs");
    for (Eigen::Index i = 0; i < d; ++i) {
      if (!(x[i] >= lower[i] && x[i] <= upper[i])) {
        throw DomainError(name + ": input " + std::to_string(i) + " outside bounds");
      }
    }
  }

  /// Deterministic core (stochastic variables pinned to their means).
  Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const {
    check_bounds(x);
    return core(x);
  }

  /// Evaluation with fresh stochastic variables where the problem has them.
  Eigen::VectorXd evaluate(const Eigen::VectorXd& x, Rng& rng) const {
    check_bounds(x);
    return stochastic ? stochastic(x, rng) : core(x);
  }
};

namespace dtlz {

inline double g_rastrigin(const Eigen::VectorXd& x, int m) {
  const Eigen::Index k = x.size() - m + 1;
  double s = 0.0;
  for (Eigen::Index i = m - 1; i < x.size(); ++i) {
    const double t = x[i] - 0.5;
    s += t * t - std::cos(20.0 * std::numbers::pi * t);
  }
  return 100.0 * (static_cast<double>(k) + s);
}

inline double g_sphere(const Eigen::VectorXd& x, int m) {
  double s = 0.0;
  for (Eigen::Index i = m - 1; i < x.size(); ++i) s += (x[i] - 0.5) * (x[i] - 0.5);
  return s;
}

// Linear (simplex) front shape scaled by 0.5 (1 + g).
inline Eigen::VectorXd linear_front(const Eigen::VectorXd& x, int m, double g) {
  Eigen::VectorXd f(m);
  for (int i = 0; i < m; ++i) {
    double v = 0.5 * (1.0 + g);
    for (int j = 0; j < m - 1 - i; ++j) v *= x[j];
    if (i > 0) v *= 1.0 - x[m - 1 - i];
    f[i] = v;
  }
  return f;
}

// Spherical front shape from angles theta_j (in radians), scaled by (1 + g).
inline Eigen::VectorXd spherical_front(const Eigen::VectorXd& theta, int m, double g) {
  Eigen::VectorXd f(m);
  for (int i = 0; i < m; ++i) {
    double v = 1.0 + g;
    for (int j = 0; j < m - 1 - i; ++j) v *= std::cos(theta[j]);
    if (i > 0) v *= std::sin(theta[m - 1 - i]);
    f[i] = v;
  }
  return f;
}

inline Eigen::VectorXd angles(const Eigen::VectorXd& x, int m, double exponent = 1.0) {
  Eigen::VectorXd th(std::max(m - 1, 0));
  for (int j = 0; j < m - 1; ++j) th[j] = std::pow(x[j], exponent) * std::numbers::pi / 2.0;
  return th;
}

inline Eigen::VectorXd dtlz1(const Eigen::VectorXd& x, int m) { return linear_front(x, m, g_rastrigin(x, m)); }

inline Eigen::VectorXd dtlz2(const Eigen::VectorXd& x, int m) {
  return spherical_front(angles(x, m), m, g_sphere(x, m));
}

inline Eigen::VectorXd dtlz3(const Eigen::VectorXd& x, int m) {
  return spherical_front(angles(x, m), m, g_rastrigin(x, m));
}

inline Eigen::VectorXd dtlz4(const Eigen::VectorXd& x, int m, double alpha = 100.0) {
  return spherical_front(angles(x, m, alpha), m, g_sphere(x, m));
}

// DTLZ5/DTLZ6: degenerate fronts via g-dependent angles.
inline Eigen::VectorXd degenerate(const Eigen::VectorXd& x, int m, double g) {
  Eigen::VectorXd th(std::max(m - 1, 0));
  for (int j = 0; j < m - 1; ++j) {
    th[j] = j == 0 ? x[0] * std::numbers::pi / 2.0
                   : std::numbers::pi / (4.0 * (1.0 + g)) * (1.0 + 2.0 * g * x[j]);
  }
  return spherical_front(th, m, g);
}

inline Eigen::VectorXd dtlz5(const Eigen::VectorXd& x, int m) { return degenerate(x, m, g_sphere(x, m)); }

inline Eigen::VectorXd dtlz6(const Eigen::VectorXd& x, int m) {
  double g = 0.0;
  for (Eigen::Index i = m - 1; i < x.size(); ++i) g += std::pow(x[i], 0.1);
  return degenerate(x, m, g);
}

inline Eigen::VectorXd dtlz7(const Eigen::VectorXd& x, int m) {
  const Eigen::Index k = x.size() - m + 1;
  double s = 0.0;
  for (Eigen::Index i = m - 1; i < x.size(); ++i) s += x[i];
  const double g = 1.0 + 9.0 / static_cast<double>(k) * s;
  Eigen::VectorXd f(m);
  double h = static_cast<double>(m);
  for (int i = 0; i < m - 1; ++i) {
    f[i] = x[i];
    h -= f[i] / (1.0 + g) * (1.0 + std::sin(3.0 * std::numbers::pi * f[i]));
  }
  f[m - 1] = (1.0 + g) * h;
  return f;
}

inline Eigen::VectorXd inverted_dtlz1(const Eigen::VectorXd& x, int m) {
  const double g = g_rastrigin(x, m);
  return (0.5 * (1.0 + g) - linear_front(x, m, g).array()).matrix();
}

inline Eigen::VectorXd inverted_dtlz2(const Eigen::VectorXd& x, int m) {
  const double g = g_sphere(x, m);
  return (1.0 + g - dtlz2(x, m).array()).matrix();
}

inline Eigen::VectorXd convex_dtlz2(const Eigen::VectorXd& x, int m) {
  Eigen::VectorXd f = dtlz2(x, m);
  for (int i = 0; i < m - 1; ++i) f[i] = std::pow(f[i], 4);
  f[m - 1] = f[m - 1] * f[m - 1];
  return f;
}

inline Eigen::VectorXd scaled_dtlz2(const Eigen::VectorXd& x, int m) {
  Eigen::VectorXd f = dtlz2(x, m);
  for (int i = 0; i < m; ++i) f[i] *= std::ldexp(1.0, i);
  return f;
}

}  // namespace dtlz

namespace car {

// Physical bounds shared by both vehicle problems.
inline Eigen::VectorXd lower_bounds() {
  Eigen::VectorXd lo(7);
  lo << 0.5, 0.45, 0.5, 0.5, 0.875, 0.4, 0.4;
  return lo;
}
inline Eigen::VectorXd upper_bounds() {
  Eigen::VectorXd hi(7);
  hi << 1.5, 1.35, 1.5, 1.5, 2.625, 1.2, 1.2;
  return hi;
}

/// Side-impact design: weight, two safety responses and the folded
/// constraint aggregate f4 = -sum max(g_i, 0), coefficients as printed.
inline Eigen::VectorXd side_impact(const Eigen::VectorXd& v) {
  const double x1 = v[0], x2 = v[1], x3 = v[2], x4 = v[3], x5 = v[4], x6 = v[5], x7 = v[6];
  Eigen::VectorXd f(4);
  f[0] = 1.98 + 4.9 * x1 + 6.67 * x2 + 6.98 * x3 + 4.01 * x4 + 1.78 * x5 + 1e-5 * x6 + 2.73 * x7;
  f[1] = 4.72 - 0.5 * x4 - 0.19 * x2 * x3;
  const double v_mbp = 10.58 - 0.674 * x1 * x2 - 0.67275 * x2;
  const double v_fd = 16.45 - 0.489 * x3 * x7 - 0.8435 * x6 * x7;
  f[2] = 0.5 * (v_mbp + v_fd);
  const double g[10] = {
      1.0 - 1.16 + 0.3717 * x2 * x4 + 0.0092928 * x3,
      0.32 - 0.261 + 0.0159 * x1 * x2 + 0.06486 * x1 + 0.019 * x2 * x7 - 0.0144 * x3 * x5 - 0.0154464 * x6,
      0.32 - 0.214 - 0.00817 * x5 + 0.045195 * x1 + 0.0135168 * x1 - 0.03099 * x2 * x6 + 0.018 * x2 * x7 -
          0.007176 * x3 - 0.023223 * x3 + 0.00364 * x5 * x6 + 0.018 * x2 * x2,
      0.32 - 0.74 + 0.61 * x2 + 0.031296 * x3 + 0.031872 * x7 - 0.227 * x2 * x2,
      32.0 - 28.98 - 3.818 * x3 + 4.2 * x1 * x2 - 1.27296 * x6 + 2.68065 * x7,
      32.0 - 33.86 - 2.95 * x3 + 5.057 * x1 * x2 + 3.795 * x2 + 3.4431 * x7 - 1.45728,
      32.0 - 46.36 + 9.9 * x2 + 4.4505 * x1,
      4.0 - f[1],
      9.9 - v_mbp,
      15.7 - v_fd,
  };
  double s = 0.0;
  for (double gi : g) s += std::max(gi, 0.0);
  f[3] = -s;
  return f;
}

struct CabNoise {
  double x8, x9, x10, x11;
};

inline constexpr CabNoise kCabNoiseMean{0.345, 0.192, 0.0, 0.0};

/// Cab design with its four stochastic variables supplied explicitly.
inline Eigen::VectorXd cab(const Eigen::VectorXd& v, const CabNoise& s) {
  const double x1 = v[0], x2 = v[1], x3 = v[2], x4 = v[3], x5 = v[4], x6 = v[5], x7 = v[6];
  const double x8 = s.x8, x9 = s.x9, x10 = s.x10, x11 = s.x11;
  auto pos = [](double a) { return std::max(a, 0.0); };
  Eigen::VectorXd f(9);
  f[0] = 1.98 + 4.9 * x1 + 6.67 * x2 + 6.98 * x3 + 4.01 * x4 + 1.75 * x5 + 1e-5 * x6 + 2.73 * x7;
  f[1] = pos(1.16 - 0.3717 * x2 * x4 - 0.00931 * x2 * x10 - 0.484 * x3 * x9 + 0.01343 * x6 * x10);
  f[2] = pos((0.261 - 0.0159 * x1 * x2 - 0.188 * x1 * x8 - 0.019 * x2 * x7 + 0.0144 * x3 * x5 + 0.8757 * x5 * x10 +
              0.08045 * x6 * x9 + 0.00139 * x8 * x11 + 0.00001575 * x10 * x11) /
             0.32);
  f[3] = pos((0.214 + 0.00817 * x5 - 0.131 * x1 * x8 - 0.0704 * x1 * x9 + 0.03099 * x2 * x6 - 0.018 * x2 * x7 +
              0.0208 * x3 * x8 + 0.121 * x3 * x9 - 0.00364 * x5 * x6 + 0.0007715 * x5 * x10 - 0.0005354 * x6 * x10 +
              0.00121 * x8 * x11 + 0.00184 * x9 * x10 - 0.018 * x2 * x2) /
             0.32);
  f[4] = pos((0.74 - 0.61 * x2 - 0.163 * x3 * x8 + 0.001232 * x3 * x10 - 0.166 * x7 * x9 + 0.227 * x2 * x2) / 0.32);
  f[5] = pos((28.98 + 3.818 * x3 - 4.2 * x1 * x2 + 0.0207 * x5 * x10 + 6.63 * x6 * x9 - 7.77 * x7 * x8 +
              0.32 * x9 * x10 + 33.86 + 2.95 * x3 + 0.1792 * x10 - 5.057 * x1 * x2 - 11.0 * x2 * x8 -
              0.0215 * x5 * x10 - 9.98 * x7 * x8 + 22.0 * x8 * x9 + 46.36 - 9.9 * x2 - 12.9 * x1 * x8 +
              0.1107 * x3 * x10) /
             32.0 / 3.0);
  f[6] = pos((4.72 - 0.5 * x4 - 0.19 * x2 * x3 - 0.0122 * x4 * x10 + 0.009325 * x6 * x10 + 0.000191 * x11 * x11) / 4.0);
  f[7] = pos((10.58 - 0.674 * x1 * x2 - 1.95 * x2 * x8 + 0.02054 * x3 * x10 - 0.0198 * x4 * x10 + 0.028 * x6 * x10) /
             9.9);
  f[8] = pos((16.45 - 0.489 * x3 * x7 - 0.843 * x5 * x6 + 0.0432 * x9 * x10 - 0.0556 * x9 * x11 -
              0.000786 * x11 * x11) /
             15.7);
  return f;
}

inline CabNoise draw_cab_noise(Rng& rng) {
  CabNoise s;
  s.x8 = rng.normal(0.345, 0.006);
  s.x9 = rng.normal(0.192, 0.006);
  s.x10 = rng.normal(0.0, 10.0);
  s.x11 = rng.normal(0.0, 10.0);
  return s;
}

}  // namespace car

/// Objective count and dimension helpers for the DTLZ families.
inline int dtlz_dimension(const std::string& family, int m) {
  if (family == "dtlz1" || family == "inv_dtlz1") return m + 4;
  if (family == "dtlz7") return m + 19;
  return m + 9;
}

inline std::vector<std::string> problem_families() {
  return {"dtlz1", "dtlz2", "dtlz3", "dtlz4", "dtlz5", "dtlz6", "dtlz7", "inv_dtlz1", "inv_dtlz2",
          "convex_dtlz2", "scaled_dtlz2", "car_side_impact", "car_cab"};
}

/// Builds a problem from a registry name such as "dtlz2:m=5" or "car_cab".
inline Problem make_problem(const std::string& spec) {
  std::string family = spec;
  int m = 0;
  if (const auto colon = spec.find(':'); colon != std::string::npos) {
    family = spec.substr(0, colon);
    const std::string rest = spec.substr(colon + 1);
    if (rest.rfind("m=", 0) != 0) throw InvalidArgument("problem: expected ':m=<count>' in '" + spec + "'");
    try {
      m = std::stoi(rest.substr(2));
    } catch (const std::exception&) {
      throw InvalidArgument("problem: bad objective count in '" + spec + "'");
    }
  }

  Problem p;
  p.family = family;
  if (family == "car_side_impact" || family == "car_cab") {
    const bool cab = family == "car_cab";
    if (m != 0 && m != (cab ? 9 : 4)) throw InvalidArgument("problem: " + family + " has a fixed objective count");
    p.name = family;
    p.m = cab ? 9 : 4;
    p.d = 7;
    p.lower = car::lower_bounds();
    p.upper = car::upper_bounds();
    p.reference_point = Eigen::VectorXd::Constant(p.m, 1.1);
    p.normalised_reference = true;
    if (cab) {
      p.stochastic_inner = true;
      p.core = [](const Eigen::VectorXd& x) { return car::cab(x, car::kCabNoiseMean); };
      p.stochastic = [](const Eigen::VectorXd& x, Rng& rng) { return car::cab(x, car::draw_cab_noise(rng)); };
    } else {
      p.core = car::side_impact;
    }
    return p;
  }

  if (m < 2) throw InvalidArgument("problem: '" + spec + "' needs an objective count m >= 2 (e.g. dtlz2:m=3)");
  p.name = family + ":m=" + std::to_string(m);
  p.m = m;
  p.d = dtlz_dimension(family, m);
  p.lower = Eigen::VectorXd::Zero(p.d);
  p.upper = Eigen::VectorXd::Ones(p.d);
  const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(m);
  auto bind = [m](Eigen::VectorXd (*fn)(const Eigen::VectorXd&, int)) {
    return [fn, m](const Eigen::VectorXd& x) { return fn(x, m); };
  };
  if (family == "dtlz1") {
    p.core = bind(dtlz::dtlz1);
    p.ideal_point = zeros;
    p.reference_point = Eigen::VectorXd::Constant(m, 400.0);
  } else if (family == "dtlz2") {
    p.core = bind(dtlz::dtlz2);
    p.ideal_point = zeros;
    p.reference_point = Eigen::VectorXd::Constant(m, 1.1);
  } else if (family == "dtlz3") {
    p.core = bind(dtlz::dtlz3);
    p.ideal_point = zeros;
    p.reference_point = Eigen::VectorXd::Constant(m, 10000.0);
  } else if (family == "dtlz4") {
    p.core = [m](const Eigen::VectorXd& x) { return dtlz::dtlz4(x, m); };
    p.ideal_point = zeros;
    p.reference_point = Eigen::VectorXd::Constant(m, 1.1);
  } else if (family == "dtlz5") {
    p.core = bind(dtlz::dtlz5);
    p.ideal_point = zeros;
    p.reference_point = Eigen::VectorXd::Constant(m, 10.0);
  } else if (family == "dtlz6") {
    p.core = bind(dtlz::dtlz6);
    p.ideal_point = zeros;
    p.reference_point = Eigen::VectorXd::Constant(m, 10.0);
  } else if (family == "dtlz7") {
    p.core = bind(dtlz::dtlz7);
    p.reference_point = Eigen::VectorXd::Constant(m, 15.0);
  } else if (family == "inv_dtlz1") {
    p.core = bind(dtlz::inverted_dtlz1);
    p.reference_point = Eigen::VectorXd::Constant(m, 400.0);
  } else if (family == "inv_dtlz2") {
    p.core = bind(dtlz::inverted_dtlz2);
    p.reference_point = Eigen::VectorXd::Constant(m, 1.1);
  } else if (family == "convex_dtlz2") {
    p.core = bind(dtlz::convex_dtlz2);
    p.ideal_point = zeros;
    p.reference_point = Eigen::VectorXd::Constant(m, 1.1);
  } else if (family == "scaled_dtlz2") {
    p.core = bind(dtlz::scaled_dtlz2);
    p.ideal_point = zeros;
    p.reference_point.resize(m);
    for (int i = 0; i < m; ++i) p.reference_point[i] = 1.1 * std::ldexp(1.0, i);
  } else {
    throw InvalidArgument("problem: unknown family '" + family + "'");
  }
  return p;
}

/// Front-membership oracle for the DTLZ1 (simplex) and DTLZ2 (sphere)
/// families: true when the point lies on the analytic Pareto front.
inline bool pareto_membership(const Problem& problem, const Eigen::VectorXd& x, double tol = 1e-12) {
  const Eigen::VectorXd f = problem.evaluate(x);
  if (problem.family == "dtlz1") return std::abs(f.sum() - 0.5) <= tol;
  if (problem.family == "dtlz2" || problem.family == "dtlz3" || problem.family == "dtlz4") {
    return std::abs(f.squaredNorm() - 1.0) <= tol;
  }
  throw InvalidArgument("pareto_membership: only the DTLZ1 and DTLZ2 families are supported");
}

/// Observation y = f(x) + N(0, noise_std^2 I), with a private seeded stream.
struct Observation {
  Eigen::VectorXd observed;
  Eigen::VectorXd truth;  // noiseless (stochastic variables at their means)
};

class NoisyProblem {
 public:
  NoisyProblem(Problem inner, double noise_std, std::uint64_t seed)
      : inner_(std::move(inner)), noise_std_(noise_std), rng_(seed) {
    if (!(noise_std >= 0.0)) throw InvalidArgument("noisy problem: noise_std must be >= 0");
  }

  const Problem& inner() const { return inner_; }
  double noise_std() const { return noise_std_; }

  Observation observe(const Eigen::VectorXd& x) {
    Observation o;
    o.truth = inner_.evaluate(x);
    o.observed = inner_.stochastic_inner ? inner_.evaluate(x, rng_) : o.truth;
    if (noise_std_ > 0.0) {
      for (Eigen::Index i = 0; i < o.observed.size(); ++i) o.observed[i] += noise_std_ * rng_.normal();
    }
    return o;
  }

 private:
  Problem inner_;
  double noise_std_;
  Rng rng_;
};

}  // namespace spmo
