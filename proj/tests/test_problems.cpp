#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles/car_transcription.hpp"
#include "spmo/problems.hpp"

using namespace spmo;

namespace {

Eigen::VectorXd front_input(int d, int m, Rng& rng, double tail = 0.5) {
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) x[i] = i < m - 1 ? rng.uniform() : tail;
  return x;
}

// Textbook DTLZ2 written out independently.
Eigen::VectorXd dtlz2_reference(const Eigen::VectorXd& x, int m) {
  double g = 0.0;
  for (Eigen::Index i = m - 1; i < x.size(); ++i) g += (x[i] - 0.5) * (x[i] - 0.5);
  Eigen::VectorXd f(m);
  for (int i = 0; i < m; ++i) {
    double v = 1.0 + g;
    for (int j = 0; j < m - 1 - i; ++j) v *= std::cos(x[j] * std::numbers::pi / 2.0);
    if (i > 0) v *= std::sin(x[m - 1 - i] * std::numbers::pi / 2.0);
    f[i] = v;
  }
  return f;
}

Eigen::VectorXd dtlz1_reference(const Eigen::VectorXd& x, int m) {
  const double k = static_cast<double>(x.size() - m + 1);
  double s = 0.0;
  for (Eigen::Index i = m - 1; i < x.size(); ++i) {
    s += (x[i] - 0.5) * (x[i] - 0.5) - std::cos(20.0 * std::numbers::pi * (x[i] - 0.5));
  }
  const double g = 100.0 * (k + s);
  Eigen::VectorXd f(m);
  for (int i = 0; i < m; ++i) {
    double v = 0.5 * (1.0 + g);
    for (int j = 0; j < m - 1 - i; ++j) v *= x[j];
    if (i > 0) v *= 1.0 - x[m - 1 - i];
    f[i] = v;
  }
  return f;
}

}  // namespace

TEST(Dtlz, Dimensions) {
  for (int m : {2, 3, 5, 10}) {
    EXPECT_EQ(make_problem("dtlz1:m=" + std::to_string(m)).d, m + 4);
    EXPECT_EQ(make_problem("inv_dtlz1:m=" + std::to_string(m)).d, m + 4);
    for (const char* f : {"dtlz2", "dtlz3", "dtlz4", "dtlz5", "dtlz6", "inv_dtlz2", "convex_dtlz2", "scaled_dtlz2"}) {
      EXPECT_EQ(make_problem(std::string(f) + ":m=" + std::to_string(m)).d, m + 9) << f;
    }
    EXPECT_EQ(make_problem("dtlz7:m=" + std::to_string(m)).d, m + 19);
  }
  EXPECT_EQ(make_problem("car_side_impact").m, 4);
  EXPECT_EQ(make_problem("car_side_impact").d, 7);
  EXPECT_EQ(make_problem("car_cab").m, 9);
  EXPECT_EQ(make_problem("car_cab").d, 7);
  EXPECT_THROW(make_problem("dtlz9:m=3"), InvalidArgument);
  EXPECT_THROW(make_problem("dtlz2"), InvalidArgument);
  EXPECT_THROW(make_problem("car_cab:m=3"), InvalidArgument);
}

TEST(Dtlz, ReferencePoints) {
  EXPECT_TRUE(make_problem("dtlz1:m=3").reference_point.isApproxToConstant(400.0));
  EXPECT_TRUE(make_problem("inv_dtlz1:m=3").reference_point.isApproxToConstant(400.0));
  for (const char* f : {"dtlz2", "inv_dtlz2", "convex_dtlz2", "dtlz4"}) {
    EXPECT_TRUE(make_problem(std::string(f) + ":m=5").reference_point.isApproxToConstant(1.1)) << f;
  }
  EXPECT_TRUE(make_problem("dtlz3:m=3").reference_point.isApproxToConstant(10000.0));
  EXPECT_TRUE(make_problem("dtlz5:m=3").reference_point.isApproxToConstant(10.0));
  EXPECT_TRUE(make_problem("dtlz6:m=3").reference_point.isApproxToConstant(10.0));
  EXPECT_TRUE(make_problem("dtlz7:m=3").reference_point.isApproxToConstant(15.0));
  const Eigen::VectorXd r = make_problem("scaled_dtlz2:m=3").reference_point;
  EXPECT_DOUBLE_EQ(r[0], 1.1);
  EXPECT_DOUBLE_EQ(r[1], 2.2);
  EXPECT_DOUBLE_EQ(r[2], 4.4);
  EXPECT_TRUE(make_problem("car_cab").reference_point.isApproxToConstant(1.1));
  EXPECT_TRUE(make_problem("car_cab").normalised_reference);
}

TEST(Dtlz, Examples) {
  Eigen::VectorXd x = Eigen::VectorXd::Constant(6, 0.5);
  const Eigen::VectorXd f1 = make_problem("dtlz1:m=2").evaluate(x);
  EXPECT_NEAR(f1[0], 0.25, 1e-12);
  EXPECT_NEAR(f1[1], 0.25, 1e-12);
  const Eigen::VectorXd i1 = make_problem("inv_dtlz1:m=2").evaluate(x);
  EXPECT_NEAR(i1[0], 0.25, 1e-12);
  EXPECT_NEAR(i1[1], 0.25, 1e-12);

  Eigen::VectorXd y = Eigen::VectorXd::Constant(12, 0.5);
  y[0] = y[1] = 0.0;
  const Problem p2 = make_problem("dtlz2:m=3");
  EXPECT_TRUE(p2.evaluate(y).isApprox(Eigen::Vector3d(1.0, 0.0, 0.0)));
  const Eigen::VectorXd inv = make_problem("inv_dtlz2:m=3").evaluate(y);
  EXPECT_NEAR(inv[0], 0.0, 1e-15);
  EXPECT_NEAR(inv[1], 1.0, 1e-15);
  EXPECT_NEAR(inv[2], 1.0, 1e-15);
  EXPECT_TRUE(make_problem("scaled_dtlz2:m=3").evaluate(y).isApprox(Eigen::Vector3d(1.0, 0.0, 0.0)));

  const Eigen::VectorXd mid = Eigen::VectorXd::Constant(12, 0.5);
  const double c = std::cos(std::numbers::pi / 4.0), s = std::sin(std::numbers::pi / 4.0);
  const Eigen::VectorXd f2 = p2.evaluate(mid);
  EXPECT_NEAR(f2[0], c * c, 1e-15);
  EXPECT_NEAR(f2[1], c * s, 1e-15);
  EXPECT_NEAR(f2[2], s, 1e-15);
  EXPECT_NEAR(f2[0], 0.5, 1e-15);
  EXPECT_NEAR(f2[2], std::sqrt(2.0) / 2.0, 1e-15);
  const Eigen::VectorXd conv = make_problem("convex_dtlz2:m=3").evaluate(mid);
  EXPECT_NEAR(conv[0], 0.0625, 1e-15);
  EXPECT_NEAR(conv[1], 0.0625, 1e-15);
  EXPECT_NEAR(conv[2], 0.5, 1e-15);
  const Eigen::VectorXd sc = make_problem("scaled_dtlz2:m=3").evaluate(mid);
  EXPECT_NEAR(sc[0], 0.5, 1e-15);
  EXPECT_NEAR(sc[1], 1.0, 1e-15);
  EXPECT_NEAR(sc[2], 2.0 * std::sqrt(2.0), 1e-14);
}

TEST(Dtlz, MatchesIndependentFormulas) {
  Rng rng(5);
  for (int m : {2, 3, 5}) {
    const Problem p1 = make_problem("dtlz1:m=" + std::to_string(m));
    const Problem p2 = make_problem("dtlz2:m=" + std::to_string(m));
    const Problem inv1 = make_problem("inv_dtlz1:m=" + std::to_string(m));
    const Problem inv2 = make_problem("inv_dtlz2:m=" + std::to_string(m));
    const Problem p3 = make_problem("dtlz3:m=" + std::to_string(m));
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::VectorXd x1(p1.d), x2(p2.d);
      for (int i = 0; i < p1.d; ++i) x1[i] = rng.uniform();
      for (int i = 0; i < p2.d; ++i) x2[i] = rng.uniform();
      const Eigen::VectorXd r1 = dtlz1_reference(x1, m);
      const Eigen::VectorXd r2 = dtlz2_reference(x2, m);
      EXPECT_LT((p1.evaluate(x1) - r1).norm(), 1e-9 * r1.norm());
      EXPECT_LT((p2.evaluate(x2) - r2).norm(), 1e-12 * r2.norm());
      // 0.5 (1 + g) is the DTLZ1 objective sum.
      const double g1 = 2.0 * r1.sum() - 1.0;
      EXPECT_LT((inv1.evaluate(x1) - (Eigen::VectorXd::Constant(m, 0.5 * (1.0 + g1)) - r1)).norm(), 1e-9 * r1.norm());
      double g2 = 0.0;
      for (int i = m - 1; i < p2.d; ++i) g2 += (x2[i] - 0.5) * (x2[i] - 0.5);
      EXPECT_LT((inv2.evaluate(x2) - (Eigen::VectorXd::Constant(m, 1.0 + g2) - r2)).norm(), 1e-12);
      // DTLZ3: the DTLZ2 shape scaled by 1 + g with DTLZ1's multimodal g.
      double s3 = 0.0;
      for (int i = m - 1; i < p3.d; ++i) {
        s3 += (x2[i] - 0.5) * (x2[i] - 0.5) - std::cos(20.0 * std::numbers::pi * (x2[i] - 0.5));
      }
      const double g3 = 100.0 * (static_cast<double>(p3.d - m + 1) + s3);
      Eigen::VectorXd on_front = x2;
      on_front.tail(p3.d - m + 1).setConstant(0.5);
      const Eigen::VectorXd r3 = (1.0 + g3) * dtlz2_reference(on_front, m);
      EXPECT_LT((p3.evaluate(x2) - r3).norm(), 1e-9 * r3.norm());
    }
  }
}

TEST(Dtlz, FrontIdentities) {
  Rng rng(17);
  for (int m : {3, 5, 10}) {
    const Problem p1 = make_problem("dtlz1:m=" + std::to_string(m));
    const Problem p2 = make_problem("dtlz2:m=" + std::to_string(m));
    for (int trial = 0; trial < 1000; ++trial) {
      const Eigen::VectorXd x1 = front_input(p1.d, m, rng);
      const Eigen::VectorXd x2 = front_input(p2.d, m, rng);
      EXPECT_NEAR(p1.evaluate(x1).sum(), 0.5, 1e-12);
      EXPECT_NEAR(p2.evaluate(x2).squaredNorm(), 1.0, 1e-12);
      EXPECT_TRUE(pareto_membership(p1, x1));
      EXPECT_TRUE(pareto_membership(p2, x2));
    }
    const Eigen::VectorXd off = front_input(p2.d, m, rng, 0.9);
    EXPECT_FALSE(pareto_membership(p2, off));
    EXPECT_FALSE(pareto_membership(p1, front_input(p1.d, m, rng, 0.9)));
  }
  EXPECT_THROW(pareto_membership(make_problem("dtlz7:m=3"), Eigen::VectorXd::Constant(22, 0.5)), InvalidArgument);
}

TEST(Dtlz, OtherFamiliesOnTheirFronts) {
  Rng rng(2);
  const int m = 3;
  // DTLZ4 keeps the sphere; DTLZ5/6 fronts are degenerate curves on the sphere.
  for (const char* f : {"dtlz3", "dtlz4", "dtlz5"}) {
    const Problem p = make_problem(std::string(f) + ":m=3");
    for (int t = 0; t < 100; ++t) EXPECT_NEAR(p.evaluate(front_input(p.d, m, rng)).squaredNorm(), 1.0, 1e-12) << f;
  }
  const Problem p6 = make_problem("dtlz6:m=3");
  Eigen::VectorXd x6 = Eigen::VectorXd::Zero(p6.d);
  x6[0] = 0.3;
  x6[1] = 0.7;
  EXPECT_NEAR(p6.evaluate(x6).squaredNorm(), 1.0, 1e-12);
  // DTLZ7 with g = 1 (tail zeros): f_m = 2 (m - sum f_i/2 (1 + sin 3 pi f_i)).
  const Problem p7 = make_problem("dtlz7:m=3");
  Eigen::VectorXd x7 = Eigen::VectorXd::Zero(p7.d);
  x7[0] = 0.2;
  x7[1] = 0.6;
  const Eigen::VectorXd f7 = p7.evaluate(x7);
  double h = 3.0;
  for (int i = 0; i < 2; ++i) h -= f7[i] / 2.0 * (1.0 + std::sin(3.0 * std::numbers::pi * f7[i]));
  EXPECT_NEAR(f7[0], 0.2, 1e-15);
  EXPECT_NEAR(f7[1], 0.6, 1e-15);
  EXPECT_NEAR(f7[2], 2.0 * h, 1e-12);
}

TEST(Dtlz, DomainErrors) {
  const Problem p = make_problem("dtlz2:m=3");
  EXPECT_THROW(p.evaluate(Eigen::VectorXd::Constant(12, 1.5)), DomainError);
  EXPECT_THROW(p.evaluate(Eigen::VectorXd::Constant(11, 0.5)), DomainError);
  Eigen::VectorXd nan = Eigen::VectorXd::Constant(12, 0.5);
  nan[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(p.evaluate(nan), DomainError);
}

TEST(Dtlz, IdealPoints) {
  for (const char* f : {"dtlz1", "dtlz2", "dtlz3", "dtlz4", "dtlz5", "dtlz6", "convex_dtlz2", "scaled_dtlz2"}) {
    const Problem p = make_problem(std::string(f) + ":m=4");
    ASSERT_TRUE(p.ideal_point.has_value()) << f;
    EXPECT_TRUE(p.ideal_point->isZero()) << f;
  }
  for (const char* f : {"inv_dtlz1", "inv_dtlz2", "dtlz7"}) EXPECT_FALSE(make_problem(std::string(f) + ":m=4").ideal_point);
  EXPECT_FALSE(make_problem("car_cab").ideal_point);
}

TEST(Car, SideImpactLowerBound) {
  const Problem p = make_problem("car_side_impact");
  const Eigen::VectorXd f = p.evaluate(car::lower_bounds());
  // Printed coefficients at the lower bounds; summed term by term.
  const double expected = 1.98 + 4.9 * 0.5 + 6.67 * 0.45 + 6.98 * 0.5 + 4.01 * 0.5 + 1.78 * 0.875 + 1e-5 * 0.4 + 2.73 * 0.4;
  EXPECT_NEAR(expected, 15.576004, 1e-9);
  EXPECT_NEAR(f[0], expected, 1e-12);
  EXPECT_TRUE(p.evaluate(car::lower_bounds()) == f);
}

TEST(Car, SideImpactMatchesTranscription) {
  const Problem p = make_problem("car_side_impact");
  const Eigen::VectorXd mid = 0.5 * (car::lower_bounds() + car::upper_bounds());
  EXPECT_LT((p.evaluate(mid) - oracle::side_impact(mid)).cwiseAbs().maxCoeff(), 1e-12);
  Rng rng(9);
  for (int t = 0; t < 1000; ++t) {
    Eigen::VectorXd x(7);
    for (int i = 0; i < 7; ++i) x[i] = p.lower[i] + rng.uniform() * (p.upper[i] - p.lower[i]);
    const Eigen::VectorXd f = p.evaluate(x);
    EXPECT_LT((f - oracle::side_impact(x)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE(f[3], 0.0);
  }
  EXPECT_THROW(p.evaluate(car::upper_bounds() * 1.01), DomainError);
}

TEST(Car, CabPinnedMatchesTranscription) {
  const Problem p = make_problem("car_cab");
  Rng rng(10);
  for (int t = 0; t < 1000; ++t) {
    Eigen::VectorXd x(7);
    for (int i = 0; i < 7; ++i) x[i] = p.lower[i] + rng.uniform() * (p.upper[i] - p.lower[i]);
    EXPECT_LT((p.evaluate(x) - oracle::car_cab(x, 0.345, 0.192, 0.0, 0.0)).cwiseAbs().maxCoeff(), 1e-12);
    const car::CabNoise s = car::draw_cab_noise(rng);
    EXPECT_LT((car::cab(x, s) - oracle::car_cab(x, s.x8, s.x9, s.x10, s.x11)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Car, CabClampsAndSeeding) {
  const Problem p = make_problem("car_cab");
  Rng rng(11);
  for (int t = 0; t < 10000; ++t) {
    Eigen::VectorXd x(7);
    for (int i = 0; i < 7; ++i) x[i] = p.lower[i] + rng.uniform() * (p.upper[i] - p.lower[i]);
    const Eigen::VectorXd f = p.evaluate(x, rng);
    EXPECT_TRUE((f.tail(8).array() >= 0.0).all());
  }
  const Eigen::VectorXd x = 0.5 * (p.lower + p.upper);
  Rng a(3), b(3);
  EXPECT_TRUE(p.evaluate(x, a) == p.evaluate(x, b));
  EXPECT_FALSE(p.evaluate(x, a) == p.evaluate(x, a));
}

TEST(Car, CabNoiseMoments) {
  Rng rng(12);
  const int n = 20000;
  double m8 = 0, m10 = 0, v8 = 0, v10 = 0;
  for (int i = 0; i < n; ++i) {
    const car::CabNoise s = car::draw_cab_noise(rng);
    m8 += s.x8 / n;
    m10 += s.x10 / n;
    v8 += (s.x8 - 0.345) * (s.x8 - 0.345) / n;
    v10 += s.x10 * s.x10 / n;
  }
  EXPECT_NEAR(m8, 0.345, 5.0 * 0.006 / std::sqrt(n));
  EXPECT_NEAR(m10, 0.0, 5.0 * 10.0 / std::sqrt(n));
  EXPECT_NEAR(std::sqrt(v8), 0.006, 0.0003);
  EXPECT_NEAR(std::sqrt(v10), 10.0, 0.5);
}

TEST(NoisyProblem, MeanRecovery) {
  NoisyProblem noisy(make_problem("dtlz2:m=3"), 0.1, 42);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(12, 0.3);
  const Eigen::VectorXd truth = noisy.inner().evaluate(x);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  for (int i = 0; i < 10000; ++i) {
    const Observation o = noisy.observe(x);
    EXPECT_TRUE(o.truth == truth);
    mean += o.observed / 10000.0;
  }
  EXPECT_LT((mean - truth).cwiseAbs().maxCoeff(), 5.0 * 0.1 / 100.0);
  NoisyProblem a(make_problem("dtlz2:m=3"), 0.1, 1), b(make_problem("dtlz2:m=3"), 0.1, 1);
  EXPECT_TRUE(a.observe(x).observed == b.observe(x).observed);
  NoisyProblem zero(make_problem("dtlz2:m=3"), 0.0, 1);
  EXPECT_TRUE(zero.observe(x).observed == truth);
  EXPECT_THROW(NoisyProblem(make_problem("dtlz2:m=3"), -1.0, 1), InvalidArgument);
}
