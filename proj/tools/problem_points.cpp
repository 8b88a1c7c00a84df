// Estimates ideal and nadir points for problems without known values and
// prints them as a problem_points config block.
//
// Ideal: per-objective minimum from multi-start projected L-BFGS with
// central-difference gradients. Nadir: per-objective maximum over the
// nondominated subset of a scrambled Sobol sample plus the per-objective
// minimisers. Both are numerical estimates.

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "spmo/lbfgsb.hpp"
#include "spmo/metrics.hpp"
#include "spmo/problems.hpp"
#include "spmo/sampling.hpp"

namespace {

using namespace spmo;

Eigen::VectorXd minimise_objective(const Problem& p, int obj, int starts, std::uint64_t seed) {
  const Eigen::VectorXd span = p.upper - p.lower;
  GradientFunction f = [&](const Eigen::VectorXd& u, Eigen::VectorXd& g) {
    auto eval = [&](const Eigen::VectorXd& v) { return p.evaluate(p.lower + v.cwiseProduct(span))[obj]; };
    const double fx = eval(u);
    g.resize(u.size());
    const double h = 1e-7;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      Eigen::VectorXd a = u, b = u;
      a[i] = std::min(1.0, u[i] + h);
      b[i] = std::max(0.0, u[i] - h);
      g[i] = (eval(a) - eval(b)) / (a[i] - b[i]);
    }
    return fx;
  };
  const Eigen::MatrixXd s = sobol_points(static_cast<std::size_t>(p.d), static_cast<std::size_t>(starts), seed);
  const Eigen::VectorXd lo = Eigen::VectorXd::Zero(p.d), hi = Eigen::VectorXd::Ones(p.d);
  BoxMinimiserOptions bo;
  bo.max_iterations = 500;
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd arg;
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    const BoxMinimiserResult res = minimise_box(f, s.row(r).transpose(), lo, hi, bo);
    if (res.value < best) {
      best = res.value;
      arg = res.x;
    }
  }
  return p.lower + arg.cwiseProduct(span);
}

nlohmann::json vec(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Estimate ideal and nadir points"};
  std::vector<std::string> names{"car_side_impact", "car_cab"};
  int samples = 20000;
  int starts = 64;
  std::uint64_t seed = 1;
  app.add_option("problems", names, "Registry names");
  app.add_option("--samples", samples, "Sobol points for the nadir estimate");
  app.add_option("--starts", starts, "Optimiser starts per objective");
  app.add_option("--seed", seed, "Sobol scramble seed");
  CLI11_PARSE(app, argc, argv);

  nlohmann::json out;
  for (const auto& name : names) {
    const Problem p = make_problem(name);
    std::vector<Eigen::VectorXd> ys;
    Eigen::VectorXd ideal(p.m);
    for (int i = 0; i < p.m; ++i) {
      const Eigen::VectorXd x = minimise_objective(p, i, starts, derive_seed(seed, static_cast<std::uint64_t>(i)));
      const Eigen::VectorXd y = p.evaluate(x);
      ideal[i] = y[i];
      ys.push_back(y);
    }
    SobolStream s(static_cast<std::size_t>(p.d), seed);
    for (int k = 0; k < samples; ++k) {
      const Eigen::VectorXd u = s.next();
      const Eigen::VectorXd y = p.evaluate(p.lower + u.cwiseProduct(p.upper - p.lower));
      ideal = ideal.cwiseMin(y);
      ys.push_back(y);
    }
    const FrontSet front = nondominated_filter(ys);
    Eigen::VectorXd nadir = front.front();
    for (const auto& y : front) nadir = nadir.cwiseMax(y);
    out[p.name] = {{"ideal", vec(ideal)}, {"nadir", vec(nadir)}};
    std::cerr << p.name << ": " << front.size() << " nondominated of " << ys.size() << "\n";
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}
