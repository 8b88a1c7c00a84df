// spmo: run benchmark experiments, rebuild reports from stored records, list
// problems. Exit status is 1 when any run aborted, 2 on usage or config errors.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>

#include "spmo/harness.hpp"

namespace {

using namespace spmo;

constexpr const char* kOutEnv = "SPMO_OUT_DIR";

struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> repeats, budget, parallel, batch_size, mc_samples;
  std::optional<double> noise_std, utopian_offset;
  std::vector<std::string> problems, methods;
};

// --out beats the environment, which beats the config file.
std::string resolve_out(const std::string& flag, const std::string& fallback) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutEnv); env && *env) return env;
  return fallback;
}

ExperimentConfig build_config(const Overrides& o) {
  ExperimentConfig c;
  if (!o.config.empty()) {
    c = load_config(o.config);
  } else if (o.problems.empty()) {
    throw InvalidArgument("run: give --config or at least one --problem");
  }
  if (!o.problems.empty()) c.problems = o.problems;
  if (!o.methods.empty()) {
    // Keep configured settings for named methods; add defaults for new ones.
    std::vector<MethodConfig> picked;
    for (const auto& name : o.methods) {
      auto it = std::find_if(c.methods.begin(), c.methods.end(),
                             [&](const MethodConfig& m) { return m.display_name() == name; });
      if (it != c.methods.end()) {
        picked.push_back(*it);
      } else {
        picked.push_back(json_io::method_from_json(nlohmann::json(name)));
      }
    }
    c.methods = picked;
  }
  if (c.methods.empty()) {
    for (const char* name : {"spmo", "sobol"}) c.methods.push_back(json_io::method_from_json(nlohmann::json(name)));
  }
  if (o.seed) c.seed = *o.seed;
  if (o.repeats) c.repeats = *o.repeats;
  if (o.budget) c.budget = *o.budget;
  if (o.parallel) c.parallel = *o.parallel;
  if (o.noise_std) c.noise_std = *o.noise_std;
  for (auto& m : c.methods) {
    if (o.batch_size) m.batch_size = *o.batch_size;
    if (o.mc_samples) m.mc_samples = *o.mc_samples;
    if (o.utopian_offset) m.utopian = UtopianSource::ideal_minus(*o.utopian_offset);
    if (o.noise_std) m.noisy = *o.noise_std > 0.0;
  }
  c.out_dir = resolve_out(o.out, c.out_dir);
  return c;
}

void print_report(const ExperimentConfig& cfg, const ExperimentResult& res) {
  for (const auto& problem : cfg.problems) {
    std::cout << "\n" << problem << "\n" << comparison_table(res.report, problem);
  }
  for (const auto& w : res.report.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "\n" << res.runs.size() - static_cast<std::size_t>(res.aborted) << " of " << res.runs.size()
            << " runs completed; outputs in " << cfg.out_dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single point-based multi-objective Bayesian optimisation benchmarks"};
  app.require_subcommand(1);
  Overrides o;

  auto* run = app.add_subcommand("run", "Execute an experiment");
  run->add_option("--config", o.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
  run->add_option("--out", o.out, std::string("Output directory (overrides $") + kOutEnv + " and the config)");
  run->add_option("--seed", o.seed, "Master seed");
  run->add_option("--repeats", o.repeats, "Repeats per (problem, method)")->check(CLI::PositiveNumber);
  run->add_option("--budget", o.budget, "Evaluations per run")->check(CLI::PositiveNumber);
  run->add_option("--parallel", o.parallel, "Concurrent runs")->check(CLI::PositiveNumber);
  run->add_option("--problem", o.problems, "Registry name, repeatable (e.g. dtlz2:m=3)");
  run->add_option("--method", o.methods, "Method name or config label, repeatable (spmo, sobol, parego)");
  run->add_option("--noise-std", o.noise_std, "Observation noise std; > 0 switches methods to noisy mode")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--batch-size", o.batch_size, "Points per iteration")->check(CLI::PositiveNumber);
  run->add_option("--mc-samples", o.mc_samples, "Monte Carlo base samples")->check(CLI::PositiveNumber);
  run->add_option("--utopian-offset", o.utopian_offset, "Use ideal point minus this offset as utopian point");

  std::string report_out;
  auto* report = app.add_subcommand("report", "Recompute metrics and tables from stored records");
  report->add_option("--out", report_out, "Directory written by 'run'");

  auto* problems = app.add_subcommand("problems", "List registry problems");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const ExperimentConfig cfg = build_config(o);
      cfg.validate();
      const ExperimentResult res = run_experiment(cfg, {}, &std::cerr);
      print_report(cfg, res);
      return res.aborted > 0 ? 1 : 0;
    }
    if (report->parsed()) {
      const std::string out = resolve_out(report_out, "results");
      const ExperimentResult res = report_from_records(out);
      ExperimentConfig cfg = config_from_json(nlohmann::json::parse(detail::read_file(std::filesystem::path(out) / "experiment.json")));
      cfg.out_dir = out;
      print_report(cfg, res);
      return res.aborted > 0 ? 1 : 0;
    }
    if (problems->parsed()) {
      for (const auto& f : problem_families()) {
        if (f.rfind("car_", 0) == 0) {
          const Problem p = make_problem(f);
          std::cout << f << "  m=" << p.m << " d=" << p.d;
        } else {
          std::cout << f << ":m=<k>  d=k+" << dtlz_dimension(f, 0);
        }
        if (!make_problem(f.rfind("car_", 0) == 0 ? f : f + ":m=3").ideal_point) std::cout << "  (ideal point from config)";
        std::cout << "\n";
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
