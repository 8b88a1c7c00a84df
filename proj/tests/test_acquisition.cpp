#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <cstring>
#include <memory>
#include <numbers>

#include "acq_fixtures.hpp"
#include "oracles/dense_gp.hpp"
#include "oracles/gauss_hermite.hpp"
#include "spmo/acquisition.hpp"

using namespace spmo;

namespace {

std::shared_ptr<const BaseSampleMatrix> base(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  return std::make_shared<const BaseSampleMatrix>(standard_normal_matrix(rows, cols, seed));
}

Point pt(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

double observed_gstar(const Eigen::MatrixXd& y, const UtopianPoint& z) {
  double g = std::numeric_limits<double>::infinity();
  for (Eigen::Index r = 0; r < y.rows(); ++r) g = std::min(g, (y.row(r).transpose() - z.z).norm());
  return g;
}

}  // namespace

TEST(Spi, Examples) {
  const UtopianPoint z{Eigen::Vector2d(0.0, 0.0)};
  EXPECT_DOUBLE_EQ(spi(Eigen::Vector2d(0.6, 0.8), 1.0, z), 0.0);
  EXPECT_DOUBLE_EQ(spi(Eigen::Vector2d(0.6, 0.8), 2.0, z), 1.0);
  EXPECT_DOUBLE_EQ(spi(Eigen::Vector2d(0.0, 0.0), 0.3, z), 0.3);
}

TEST(MetricValue, Examples) {
  const UtopianPoint z{Eigen::Vector2d(0.0, 0.0)};
  EXPECT_DOUBLE_EQ(metric_value(Eigen::Vector2d(3.0, 4.0), SinglePointMetric::euclidean(), z), 5.0);
  EXPECT_DOUBLE_EQ(metric_value(Eigen::Vector2d(1.0, 3.0), SinglePointMetric::weighted_sum(Eigen::Vector2d(0.5, 0.5)), z), 2.0);
  EXPECT_NEAR(metric_value(Eigen::Vector2d(1.0, 3.0), SinglePointMetric::augmented_tchebycheff(Eigen::Vector2d(0.5, 0.5), 0.05), z),
              1.6, 1e-15);
  EXPECT_THROW(SinglePointMetric::weighted_sum(Eigen::Vector2d(0.7, 0.7)).validate(2), InvalidArgument);
  // Default weights are uniform.
  EXPECT_DOUBLE_EQ(metric_value(Eigen::Vector2d(1.0, 3.0), SinglePointMetric::weighted_sum(), z), 2.0);
}

TEST(Smoothing, SoftplusPieces) {
  const double tau = 1e-3;
  EXPECT_NEAR(smoothed_improvement(0.0, tau), tau * std::numbers::ln2, 1e-18);
  for (double u : {20.0 * tau, 0.1, 3.0}) EXPECT_NEAR(smoothed_improvement(u, tau), u, 1e-6);
  const std::vector<double> u{0.5, -0.2, 0.1};
  const double hard = (0.5 + 0.0 + 0.1) / 3.0;
  double prev = -1e300;
  for (double t : {1e-1, 1e-2, 1e-3, 1e-5}) {
    const double v = log_smoothed_improvement(u, t);
    EXPECT_LT(std::abs(v - std::log(hard)), 0.2);
    (void)prev;
  }
  EXPECT_NEAR(log_smoothed_improvement(u, 1e-8), std::log(hard), 1e-6);
  // Very negative improvements stay finite in log space.
  const std::vector<double> tiny{-5.0, -6.0};
  EXPECT_TRUE(std::isfinite(log_smoothed_improvement(tiny, 1e-3)));
}

TEST(Espi, OneDimensionalClosedForm) {
  auto s = fixtures::prior_surrogate({0.0}, {1.0});
  const UtopianPoint z{Eigen::VectorXd::Constant(1, -10.0)};
  const auto acq = SinglePointAcquisition::espi(s, z, 10.5, base(100000, 1, 2024));
  const double v = acq.value(pt({0.75}));
  const double exact = 0.5 * normal_cdf(0.5) + normal_pdf(0.5);
  EXPECT_NEAR(exact, 0.6977965, 1e-7);
  EXPECT_NEAR(v, exact, 0.01);
}

TEST(Espi, TwoDimensionalRadialClosedForm) {
  // E[max(0, 1 - |eta|)] for eta ~ N(0, I_2): the radius is Rayleigh, giving
  // 1 - sqrt(2 pi) (Phi(1) - 1/2).
  auto s = fixtures::prior_surrogate({0.0, 0.0}, {1.0, 1.0});
  const UtopianPoint z{Eigen::Vector2d::Zero()};
  const auto acq = SinglePointAcquisition::espi(s, z, 1.0, base(100000, 2, 77));
  const double radial = 1.0 - std::sqrt(2.0 * std::numbers::pi) * (normal_cdf(1.0) - 0.5);
  EXPECT_NEAR(acq.value(pt({0.6})), radial, 0.01 * radial);
}

TEST(GaussHermiteOracle, KinkLimitsTensorRuleAccuracy) {
  // The integrand has a kink on the unit circle, so the tensor rule converges
  // slowly: 64 nodes per axis is about 2% low, 256 nodes is within 0.1%.
  auto tensor = [](int n) {
    const oracle::Quadrature q = oracle::gauss_hermite_normal(n);
    double v = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) v += q.weights[a] * q.weights[b] * std::max(0.0, 1.0 - std::hypot(q.nodes[a], q.nodes[b]));
    return v;
  };
  const double radial = 1.0 - std::sqrt(2.0 * std::numbers::pi) * (normal_cdf(1.0) - 0.5);
  const oracle::Quadrature q = oracle::gauss_hermite_normal(64);
  EXPECT_NEAR(q.weights.sum(), 1.0, 1e-12);
  EXPECT_NEAR(q.weights.dot(q.nodes.cwiseAbs2()), 1.0, 1e-12);
  EXPECT_NEAR(tensor(64), 0.14124259581744, 1e-10);  // same rule via an independent library
  EXPECT_NEAR(tensor(256), radial, 1e-3 * radial);
}

TEST(Espi, DegeneratePosteriorIsPlugIn) {
  // A vanishing output scale collapses every sample onto the mean.
  auto fitted = fixtures::random_state(5, 1, 2, 1e-4, 3).surrogate;
  std::vector<OutputStandardiser> stds{{0.7, 1e-300}, {1.3, 1e-300}};
  auto s = std::make_shared<const MultiSurrogate>(fitted->normaliser(), stds, fitted->models());
  const UtopianPoint z{Eigen::Vector2d(0.0, 0.0)};
  const double plug = spi(Eigen::Vector2d(0.7, 1.3), 2.0, z);
  for (Eigen::Index n : {1, 16, 128}) {
    const auto acq = SinglePointAcquisition::espi(s, z, 2.0, base(n, 2, 5));
    EXPECT_NEAR(acq.value(pt({0.3})), plug, 1e-12);
  }
}

TEST(Espi, DeterministicAndNonNegative) {
  const auto st = fixtures::random_state(8, 2, 3, 1e-6, 11);
  const UtopianPoint z{Eigen::Vector3d::Zero()};
  const double g = observed_gstar(st.y, z);
  const auto acq = SinglePointAcquisition::espi(st.surrogate, z, g, base(128, 3, 1));
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    const Point x = pt({rng.uniform(), rng.uniform()});
    const double a = acq.value(x), b = acq.value(x);
    EXPECT_EQ(std::memcmp(&a, &b, sizeof(double)), 0);
    EXPECT_GE(a, 0.0);
    Eigen::VectorXd g1, g2;
    const double s1 = acq.evaluate(x, &g1), s2 = acq.evaluate(x, &g2);
    EXPECT_EQ(s1, s2);
    EXPECT_TRUE(g1 == g2);
  }
}

TEST(Espi, MonotoneInIncumbent) {
  const auto st = fixtures::random_state(8, 2, 2, 1e-6, 12);
  const UtopianPoint z{Eigen::Vector2d::Zero()};
  const auto b = base(256, 2, 9);
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const Point x = pt({rng.uniform(), rng.uniform()});
    double prev = -1.0;
    for (double g : {0.0, 0.5, 1.0, 1.5, 2.0, 4.0}) {
      const double v = SinglePointAcquisition::espi(st.surrogate, z, g, b).value(x);
      EXPECT_GE(v, prev);
      prev = v;
    }
  }
}

TEST(Espi, MatchesJointPosteriorSampleAtOnePoint) {
  const auto st = fixtures::random_state(7, 2, 2, 1e-6, 13);
  const UtopianPoint z{Eigen::Vector2d(0.1, -0.2)};
  const auto b = base(64, 2, 3);
  const auto acq = SinglePointAcquisition::espi(st.surrogate, z, 1.7, b, {}, SinglePointMetric::euclidean(),
                                                Smoothing::hard());
  const Point x = pt({0.4, 0.9});
  const auto samples = joint_posterior_sample(*st.surrogate, x.transpose(), *b);
  double expected = 0.0;
  for (const auto& smp : samples) {
    const Eigen::VectorXd y = smp.row(0).transpose();
    expected += spi(y, 1.7, z) / 64.0;
    // The acquisition's internal distance is the Euclidean metric.
    EXPECT_EQ((y - z.z).norm(), metric_value(y, SinglePointMetric::euclidean(), z));
  }
  EXPECT_NEAR(acq.value(x), expected, 1e-12);
}

TEST(Espi, StandardErrorScaling) {
  auto s = fixtures::prior_surrogate({0.3, -0.1}, {1.0, 0.8});
  const UtopianPoint z{Eigen::Vector2d(-1.0, -1.0)};
  auto spread = [&](Eigen::Index n) {
    std::vector<double> v;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      v.push_back(SinglePointAcquisition::espi(s, z, 1.6, base(n, 2, 1000 + seed)).value(pt({0.7})));
    }
    double mean = 0.0;
    for (double x : v) mean += x / 50.0;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean) / 49.0;
    return std::sqrt(var);
  };
  const double ratio = spread(512) / spread(128);
  EXPECT_GE(ratio, 0.5 * 0.65);
  EXPECT_LE(ratio, 0.5 * 1.35);
}

namespace {

// Central differences of the smoothed acquisition versus its analytic gradient.
void check_gradient(const SinglePointAcquisition& acq, const Point& x) {
  Eigen::VectorXd g;
  acq.evaluate(x, &g);
  const double h = 1e-6;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Point xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    const double fd = (acq.evaluate(xp) - acq.evaluate(xm)) / (2.0 * h);
    EXPECT_LE(std::abs(fd - g[k]), 1e-3 * std::max(std::abs(fd), 1e-2)) << "k=" << k << " fd=" << fd << " g=" << g[k];
  }
}

}  // namespace

TEST(Espi, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto st = fixtures::random_state(9, 3, 2, 1e-6, 40 + seed);
    const UtopianPoint z{Eigen::Vector2d(0.0, 0.0)};
    const double g = observed_gstar(st.y, z);
    const auto b = base(64, 2 * 3, seed);
    const auto acq = SinglePointAcquisition::espi(st.surrogate, z, g, b, {}, {}, Smoothing::log_smoothed(0.05));
    const auto batch = acq.with_pending({pt({0.2, 0.5, 0.5}), pt({0.8, 0.1, 0.3})});
    Rng rng(seed);
    for (int i = 0; i < 5; ++i) {
      const Point x = pt({0.1 + 0.8 * rng.uniform(), 0.1 + 0.8 * rng.uniform(), 0.1 + 0.8 * rng.uniform()});
      check_gradient(acq, x);
      check_gradient(batch, x);
    }
  }
}

TEST(Espi, GradientOfAlternativeMetrics) {
  const auto st = fixtures::random_state(9, 2, 3, 1e-6, 50);
  const UtopianPoint z{Eigen::Vector3d::Zero()};
  for (const SinglePointMetric& metric :
       {SinglePointMetric::weighted_sum(), SinglePointMetric::augmented_tchebycheff(Eigen::Vector3d(0.2, 0.3, 0.5))}) {
    double g = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < st.y.rows(); ++r) g = std::min(g, metric.evaluate(st.y.row(r).transpose(), z.z));
    const auto acq = SinglePointAcquisition::espi(st.surrogate, z, g, base(64, 3, 2), {}, metric,
                                                  Smoothing::log_smoothed(0.05));
    check_gradient(acq, pt({0.35, 0.6}));
    check_gradient(acq, pt({0.8, 0.25}));
  }
}

TEST(Nespi, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto st = fixtures::random_state(6, 2, 2, 0.05, 60 + seed);
    const UtopianPoint z{Eigen::Vector2d(0.0, 0.0)};
    const auto b = base(64, 2 * (1 + 1 + 6), seed);
    const auto acq = SinglePointAcquisition::nespi(st.surrogate, z, b, {pt({0.5, 0.5})}, {}, Smoothing::log_smoothed(0.05));
    check_gradient(acq, pt({0.3, 0.7}));
    check_gradient(acq, pt({0.85, 0.15}));
  }
}

TEST(Nespi, EqualsEspiWithoutNoise) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto st = fixtures::random_state(6, 2, 2, 0.0, 100 + seed);
    const UtopianPoint z{Eigen::Vector2d(-0.1, 0.05)};
    const auto b = base(128, 2 * 7, seed);
    const auto espi = SinglePointAcquisition::espi(st.surrogate, z, observed_gstar(st.y, z), b);
    const auto nespi = SinglePointAcquisition::nespi(st.surrogate, z, b);
    Rng rng(seed);
    for (int i = 0; i < 5; ++i) {
      const Point x = pt({rng.uniform(), rng.uniform()});
      EXPECT_NEAR(espi.value(x), nespi.value(x), 1e-9);
      EXPECT_NEAR(espi.evaluate(x), nespi.evaluate(x), 1e-9);
    }
  }
}

TEST(Nespi, DegenerateCollapse) {
  // Observed point sampled at distance 2, candidate at distance 1.
  auto fitted = fixtures::random_state(4, 1, 2, 0.01, 7).surrogate;
  std::vector<OutputStandardiser> obs_std{{2.0, 1e-300}, {0.0, 1e-300}};
  auto s = std::make_shared<const MultiSurrogate>(fitted->normaliser(), obs_std, fitted->models());
  // Every sample is pinned to (2, 0); shift the candidate by moving z*.
  const UtopianPoint z{Eigen::Vector2d(1.0, 0.0)};
  Eigen::MatrixXd observed(1, 1);
  observed << 0.9;
  // Candidate and observed point share the same degenerate value (2,0), so
  // baseline = candidate distance = 1: improvement 0.
  const auto same = SinglePointAcquisition::nespi(s, z, base(32, 4, 1), {}, {}, Smoothing::log_smoothed(), observed);
  EXPECT_NEAR(same.value(pt({0.2})), 0.0, 1e-12);
  // With z* = (0,0) the observed baseline is 2; a candidate pinned at (1,0) improves by 1.
  std::vector<OutputStandardiser> cand_std{{1.0, 1e-300}, {0.0, 1e-300}};
  auto s2 = std::make_shared<const MultiSurrogate>(fitted->normaliser(), cand_std, fitted->models());
  const UtopianPoint origin{Eigen::Vector2d::Zero()};
  // Observed value must stay at distance 2: evaluate via a state whose
  // observed row is the same model but z* measured from (0,0) gives 1, so
  // use a pending-free ESPI analogue through the baseline directly.
  const auto acq = SinglePointAcquisition::nespi(s2, origin, base(32, 4, 1), {}, {}, Smoothing::log_smoothed(), observed);
  EXPECT_NEAR(acq.baselines().maxCoeff(), 1.0, 1e-12);
  EXPECT_NEAR(acq.value(pt({0.2})), 0.0, 1e-12);
}

TEST(Nespi, MatchesNestedLoopOracle) {
  const auto st = fixtures::random_state(3, 2, 2, 0.02, 77);
  const UtopianPoint z{Eigen::Vector2d(0.2, 0.1)};
  const Eigen::Index n_samples = 100000;
  const auto b = base(n_samples, 2 * 4, 5);
  const auto acq = SinglePointAcquisition::nespi(st.surrogate, z, b, {}, {}, Smoothing::hard());
  const Point x = pt({0.45, 0.8});

  // Joint rows: candidate first, then observed; an explicit dense posterior
  // covariance and its Cholesky factor per objective.
  Eigen::MatrixXd rows(4, 2);
  rows.row(0) = x.transpose();
  rows.bottomRows(3) = st.x;
  std::vector<Eigen::MatrixXd> f(2, Eigen::MatrixXd(n_samples, 4));
  for (std::size_t i = 0; i < 2; ++i) {
    const GaussianProcess& gp = st.surrogate->model(i);
    const oracle::DenseGp dense(gp.train_inputs(), gp.train_targets(), gp.params(), gp.mean_constant(), gp.jitter());
    Eigen::VectorXd mu(4);
    Eigen::MatrixXd cov(4, 4);
    for (int a = 0; a < 4; ++a) {
      mu[a] = dense.predict(rows.row(a).transpose()).first;
      for (int c = 0; c < 4; ++c) cov(a, c) = dense.covariance(rows.row(a).transpose(), rows.row(c).transpose());
    }
    const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(cov + 1e-12 * Eigen::MatrixXd::Identity(4, 4)).matrixL();
    const auto& st_i = st.surrogate->standardisers()[i];
    for (Eigen::Index t = 0; t < n_samples; ++t) {
      Eigen::VectorXd e(4);
      for (int a = 0; a < 4; ++a) e[a] = (*b)(t, a * 2 + static_cast<Eigen::Index>(i));
      const Eigen::VectorXd smp = mu + l * e;
      for (int a = 0; a < 4; ++a) f[i](t, a) = st_i.destandardise(smp[a]);
    }
  }
  double sum = 0.0, sum2 = 0.0;
  for (Eigen::Index t = 0; t < n_samples; ++t) {
    double best = std::numeric_limits<double>::infinity();
    for (int a = 1; a < 4; ++a) best = std::min(best, std::hypot(f[0](t, a) - z.z[0], f[1](t, a) - z.z[1]));
    const double cand = std::hypot(f[0](t, 0) - z.z[0], f[1](t, 0) - z.z[1]);
    const double imp = std::max(0.0, best - cand);
    sum += imp;
    sum2 += imp * imp;
  }
  const double mean = sum / n_samples;
  const double se = std::sqrt((sum2 / n_samples - mean * mean) / n_samples);
  EXPECT_GT(mean, 0.0);
  EXPECT_NEAR(acq.value(x), mean, 3.0 * se);
}

TEST(Nespi, Errors) {
  const auto st = fixtures::random_state(4, 2, 2, 0.01, 3);
  const UtopianPoint z{Eigen::Vector2d::Zero()};
  EXPECT_THROW(SinglePointAcquisition::nespi(st.surrogate, z, base(8, 20, 1), {}, {}, Smoothing::log_smoothed(),
                                             Eigen::MatrixXd(0, 2)),
               InvalidState);
  // Too few base columns for candidate + 4 observed points.
  EXPECT_THROW(SinglePointAcquisition::nespi(st.surrogate, z, base(8, 4, 1)), InvalidArgument);
  EXPECT_THROW(SinglePointAcquisition::espi(st.surrogate, z, 1.0, base(8, 1, 1)), InvalidArgument);
}

TEST(Smoothing, HardAndSmoothedArgmaxAgree) {
  const auto st = fixtures::random_state(6, 1, 1, 1e-6, 21);
  const UtopianPoint z{Eigen::VectorXd::Zero(1)};
  const auto acq = SinglePointAcquisition::espi(st.surrogate, z, observed_gstar(st.y, z), base(128, 1, 4));
  double best_hard = -1.0, best_smooth = -1e300, arg_hard = 0.0, arg_smooth = 0.0;
  for (int i = 0; i <= 20000; ++i) {
    const Point x = pt({i / 20000.0});
    const double h = acq.value(x);
    const double s = acq.evaluate(x);
    if (h > best_hard) best_hard = h, arg_hard = x[0];
    if (s > best_smooth) best_smooth = s, arg_smooth = x[0];
  }
  ASSERT_GT(best_hard, 0.0);
  EXPECT_NEAR(arg_hard, arg_smooth, 1e-3);
}

TEST(ScalarisedEi, ClosedForm) {
  EXPECT_NEAR(scalarized_ei(0.0, 1.0, 0.5), 0.6977965, 1e-7);
  EXPECT_DOUBLE_EQ(scalarized_ei(1.0, 0.0, 2.0), 1.0);
  EXPECT_LT(scalarized_ei(0.0, 1.0, -40.0), 1e-300);
  for (double inc : {-30.0, -5.0, -1.0, 0.0, 2.0}) {
    const double ei = scalarized_ei(0.3, 0.7, inc);
    if (ei > 1e-250) {
      EXPECT_NEAR(log_scalarized_ei(0.3, 0.7, inc), std::log(ei), 1e-6 * std::max(1.0, std::abs(std::log(ei))));
    }
  }
  EXPECT_TRUE(std::isfinite(log_scalarized_ei(0.0, 1.0, -60.0)));
}

TEST(ScalarisedEi, GradientMatchesFiniteDifferences) {
  const auto st = fixtures::random_state(8, 2, 1, 1e-6, 31);
  const double inc = st.surrogate->model(0).train_targets().minCoeff();
  for (bool log_version : {true, false}) {
    const ScalarisedEI ei(std::make_shared<const GaussianProcess>(st.surrogate->model(0)), inc, log_version);
    for (const Point& x : {pt({0.3, 0.4}), pt({0.7, 0.9})}) {
      Eigen::VectorXd g;
      ei.evaluate(x, &g);
      for (Eigen::Index k = 0; k < 2; ++k) {
        Point xp = x, xm = x;
        xp[k] += 1e-6;
        xm[k] -= 1e-6;
        const double fd = (ei.evaluate(xp, nullptr) - ei.evaluate(xm, nullptr)) / 2e-6;
        EXPECT_NEAR(g[k], fd, 1e-4 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}

TEST(SelectBatch, SingleSlotEqualsMaximise) {
  const auto st = fixtures::random_state(8, 2, 2, 1e-6, 90);
  const UtopianPoint z{Eigen::Vector2d::Zero()};
  const auto acq = SinglePointAcquisition::espi(st.surrogate, z, observed_gstar(st.y, z), base(64, 2 * 5, 3));
  AcqOptimiser opt;
  opt.raw_candidates = 128;
  opt.num_restarts = 4;
  opt.seed = 8;
  const auto one = select_batch(acq, 1, opt);
  AcqOptimiser o0 = opt;
  o0.seed = derive_seed(opt.seed, 0);
  const auto direct = maximise(acq.surface(), 2, o0);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_TRUE(one[0] == direct.x);

  const auto batch = select_batch(acq, 4, opt);
  const auto again = select_batch(acq, 4, opt);
  ASSERT_EQ(batch.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_TRUE(batch[i] == again[i]);
    for (std::size_t j = 0; j < i; ++j) EXPECT_GT((batch[i] - batch[j]).norm(), 1e-9);
  }
  EXPECT_THROW(select_batch(acq, 0, opt), InvalidArgument);
}

TEST(SelectBatch, PendingPointExcludesItsOwnImprovement) {
  // Near-deterministic posterior: once x is pending, choosing x again gains
  // nothing, so the second slot moves elsewhere.
  const auto st = fixtures::random_state(10, 1, 1, 1e-6, 91);
  const UtopianPoint z{Eigen::VectorXd::Constant(1, -1.0)};
  const auto acq = SinglePointAcquisition::espi(st.surrogate, z, observed_gstar(st.y, z), base(64, 3, 1), {}, {},
                                                Smoothing::log_smoothed());
  AcqOptimiser opt;
  opt.raw_candidates = 64;
  opt.num_restarts = 4;
  const auto batch = select_batch(acq, 2, opt);
  const auto second = acq.with_pending({batch[0]});
  EXPECT_NEAR(second.value(batch[0]), 0.0, 1e-6);
  EXPECT_GT((batch[1] - batch[0]).norm(), 1e-6);
}
