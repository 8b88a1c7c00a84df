#pragma once

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "spmo/driver.hpp"

namespace spmo {

// ---------------------------------------------------------------------------
// Statistics

namespace detail {

// Midranks (1-based) of the pooled sample.
inline std::vector<double> midranks(const std::vector<double>& pooled) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return pooled[i] < pooled[j]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline void check_samples(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw InvalidArgument("rank-sum: each sample needs at least two values");
  for (double v : a) {
    if (std::isnan(v)) throw InvalidData("rank-sum: NaN in sample");
  }
  for (double v : b) {
    if (std::isnan(v)) throw InvalidData("rank-sum: NaN in sample");
  }
}

inline bool all_identical(const std::vector<double>& a, const std::vector<double>& b) {
  const double v = a.front();
  return std::all_of(a.begin(), a.end(), [v](double x) { return x == v; }) &&
         std::all_of(b.begin(), b.end(), [v](double x) { return x == v; });
}

}  // namespace detail

/// Two-sided exact p-value of the rank-sum statistic of `a` under the
/// permutation distribution of the pooled midranks. Counts subsets by
/// dynamic programming over doubled (hence integer) ranks.
inline double wilcoxon_exact(const std::vector<double>& a, const std::vector<double>& b) {
  detail::check_samples(a, b);
  if (detail::all_identical(a, b)) return 1.0;
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::vector<double> ranks = detail::midranks(pooled);
  const std::size_t n = pooled.size(), n1 = a.size();
  if (n > 60) throw InvalidArgument("rank-sum: exact test limited to 60 observations");
  std::vector<int> r2(n);
  int total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    r2[i] = static_cast<int>(std::lround(2.0 * ranks[i]));
    total += r2[i];
  }
  int observed = 0;
  for (std::size_t i = 0; i < n1; ++i) observed += r2[i];
  // ways[k][s]: subsets of size k with doubled rank sum s.
  std::vector<std::vector<double>> ways(n1 + 1, std::vector<double>(static_cast<std::size_t>(total) + 1, 0.0));
  ways[0][0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = std::min(i + 1, n1); k >= 1; --k) {
      for (int s = total; s >= r2[i]; --s) ways[k][static_cast<std::size_t>(s)] += ways[k - 1][static_cast<std::size_t>(s - r2[i])];
    }
  }
  // Compare |2W - 2E| on the doubled scale; 2E * 2 = n1 * (n + 1) * 2.
  const long long centre2 = static_cast<long long>(n1) * static_cast<long long>(n + 1);  // 2E
  const long long dev_obs = std::llabs(2LL * observed - 2LL * centre2);
  double extreme = 0.0, all = 0.0;
  for (int s = 0; s <= total; ++s) {
    const double w = ways[n1][static_cast<std::size_t>(s)];
    if (w == 0.0) continue;
    all += w;
    if (std::llabs(2LL * s - 2LL * centre2) >= dev_obs) extreme += w;
  }
  return std::min(1.0, extreme / all);
}

/// Normal approximation with tie-corrected variance and a continuity
/// correction of one half.
inline double wilcoxon_normal(const std::vector<double>& a, const std::vector<double>& b) {
  detail::check_samples(a, b);
  if (detail::all_identical(a, b)) return 1.0;
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::vector<double> ranks = detail::midranks(pooled);
  const double n1 = static_cast<double>(a.size()), n2 = static_cast<double>(b.size()), n = n1 + n2;
  double w = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) w += ranks[i];
  std::vector<double> sorted(pooled);
  std::sort(sorted.begin(), sorted.end());
  double ties = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    ties += t * t * t - t;
    i = j;
  }
  const double var = n1 * n2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
  if (!(var > 0.0)) return 1.0;
  const double z = std::max(0.0, std::abs(w - n1 * (n + 1.0) / 2.0) - 0.5) / std::sqrt(var);
  return std::min(1.0, std::erfc(z / std::numbers::sqrt2));
}

/// Two-sided rank-sum p-value: exact up to 12 pooled observations, normal
/// approximation beyond.
inline double wilcoxon_rank_sum(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() + b.size() <= 12 ? wilcoxon_exact(a, b) : wilcoxon_normal(a, b);
}

/// Step-down Holm procedure; flags are in input order.
inline std::vector<bool> holm_bonferroni(const std::vector<double>& p, double alpha = 0.05) {
  const std::size_t k = p.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return p[i] < p[j]; });
  std::vector<bool> reject(k, false);
  for (std::size_t i = 0; i < k; ++i) {
    if (!(p[order[i]] <= alpha / static_cast<double>(k - i))) break;
    reject[order[i]] = true;
  }
  return reject;
}

// ---------------------------------------------------------------------------
// Experiment configuration

enum class HolmScope { per_problem, global };

struct ExperimentConfig {
  std::vector<std::string> problems;
  std::vector<MethodConfig> methods;
  int repeats = 5;
  int budget = 200;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
  std::string out_dir = "results";
  int parallel = 1;
  std::string reference_method = "spmo";
  double alpha = 0.05;
  HolmScope holm_scope = HolmScope::per_problem;
  /// Per-problem "ideal"/"nadir" vectors (or scalars, broadcast), keyed by
  /// full registry name or family.
  nlohmann::json problem_points = nlohmann::json::object();

  void validate() const {
    if (problems.empty()) throw InvalidArgument("config: no problems");
    if (methods.empty()) throw InvalidArgument("config: no methods");
    if (repeats < 1) throw InvalidArgument("config: repeats must be >= 1");
    if (repeats < 2 && methods.size() > 1 && has_reference()) {
      throw InvalidArgument("config: statistical comparison needs repeats >= 2");
    }
    if (budget < 1) throw InvalidArgument("config: budget must be >= 1");
    if (parallel < 1) throw InvalidArgument("config: parallel must be >= 1");
    if (!(noise_std >= 0.0)) throw InvalidArgument("config: noise_std must be >= 0");
    std::vector<std::string> labels;
    for (const auto& m : methods) labels.push_back(m.display_name());
    std::sort(labels.begin(), labels.end());
    if (std::adjacent_find(labels.begin(), labels.end()) != labels.end()) {
      throw InvalidArgument("config: method labels must be unique");
    }
  }

  bool has_reference() const {
    return std::any_of(methods.begin(), methods.end(),
                       [&](const MethodConfig& m) { return m.display_name() == reference_method; });
  }
};

namespace detail {

inline Eigen::VectorXd point_from_json(const nlohmann::json& j, int m, const std::string& what) {
  if (j.is_number()) return Eigen::VectorXd::Constant(m, j.get<double>());
  const Eigen::VectorXd v = json_io::to_vec(j);
  if (v.size() != m) throw InvalidArgument(what + " has " + std::to_string(v.size()) + " entries, expected " + std::to_string(m));
  return v;
}

}  // namespace detail

/// Registry problem with configured ideal/nadir points applied.
inline Problem configure_problem(const std::string& name, const nlohmann::json& points) {
  Problem p = make_problem(name);
  const nlohmann::json* entry = nullptr;
  if (points.contains(p.name)) {
    entry = &points[p.name];
  } else if (points.contains(p.family)) {
    entry = &points[p.family];
  }
  if (entry) {
    if (entry->contains("ideal")) p.ideal_point = detail::point_from_json((*entry)["ideal"], p.m, p.name + " ideal point");
    if (entry->contains("nadir")) p.nadir_point = detail::point_from_json((*entry)["nadir"], p.m, p.name + " nadir point");
  }
  return p;
}

using ProblemFactory = std::function<Problem(const std::string&)>;

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["problems"] = c.problems;
  j["methods"] = nlohmann::json::array();
  for (const auto& m : c.methods) j["methods"].push_back(json_io::method_to_json(m));
  j["repeats"] = c.repeats;
  j["budget"] = c.budget;
  j["noise_std"] = c.noise_std;
  j["seed"] = c.seed;
  j["parallel"] = c.parallel;
  j["reference_method"] = c.reference_method;
  j["alpha"] = c.alpha;
  j["holm_scope"] = c.holm_scope == HolmScope::global ? "global" : "per_problem";
  j["problem_points"] = c.problem_points;
  return j;
}

/// Parses a config object. A string `problem_points` is a path to a JSON
/// file, resolved against `base_dir`.
inline ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  ExperimentConfig c;
  try {
    c.problems = j.at("problems").get<std::vector<std::string>>();
    for (const auto& m : j.at("methods")) c.methods.push_back(json_io::method_from_json(m));
    c.repeats = j.value("repeats", c.repeats);
    c.budget = j.value("budget", c.budget);
    c.noise_std = j.value("noise_std", c.noise_std);
    c.seed = j.value("seed", c.seed);
    c.out_dir = j.value("out", c.out_dir);
    c.parallel = j.value("parallel", c.parallel);
    c.reference_method = j.value("reference_method", c.reference_method);
    c.alpha = j.value("alpha", c.alpha);
    const std::string scope = j.value("holm_scope", std::string("per_problem"));
    if (scope == "global") {
      c.holm_scope = HolmScope::global;
    } else if (scope != "per_problem") {
      throw InvalidArgument("config: holm_scope must be per_problem or global");
    }
    if (j.contains("problem_points")) {
      const auto& pp = j["problem_points"];
      if (pp.is_string()) {
        std::filesystem::path path = pp.get<std::string>();
        if (path.is_relative()) path = base_dir / path;
        std::ifstream in(path);
        if (!in) throw InvalidArgument("config: cannot read problem points file " + path.string());
        c.problem_points = nlohmann::json::parse(in);
      } else {
        c.problem_points = pp;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("config: cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("config: " + path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

// ---------------------------------------------------------------------------
// Layout and formatting

inline std::string slug(const std::string& s) {
  std::string out;
  for (char ch : s) out += std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '.' ? ch : '_';
  return out;
}

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::uint64_t name_hash(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed of repeat r on a problem; shared by all methods so they start from
/// the same initial design.
inline std::uint64_t run_seed(const ExperimentConfig& c, const std::string& problem, int repeat) {
  return derive_seed(c.seed, name_hash(problem), static_cast<std::uint64_t>(repeat));
}

inline std::filesystem::path record_path(const std::filesystem::path& out, const std::string& problem,
                                         const std::string& method, int repeat) {
  return out / "records" / slug(problem) / slug(method) / ("run_" + std::to_string(repeat) + ".jsonl");
}

// ---------------------------------------------------------------------------
// Reports

enum class MetricKind { log_distance, distance, single_point_hv, set_hv };

inline const std::vector<MetricKind>& all_metrics() {
  static const std::vector<MetricKind> k{MetricKind::log_distance, MetricKind::distance, MetricKind::single_point_hv,
                                         MetricKind::set_hv};
  return k;
}

inline std::string metric_name(MetricKind k) {
  switch (k) {
    case MetricKind::log_distance:
      return "log_distance";
    case MetricKind::distance:
      return "distance";
    case MetricKind::single_point_hv:
      return "single_point_hv";
    case MetricKind::set_hv:
      return "set_hv";
  }
  return "";
}

inline bool lower_is_better(MetricKind k) { return k == MetricKind::log_distance || k == MetricKind::distance; }

inline double metric_of(const RunSummary& s, MetricKind k) {
  switch (k) {
    case MetricKind::log_distance:
      return s.log_distance;
    case MetricKind::distance:
      return s.distance;
    case MetricKind::single_point_hv:
      return s.single_point_hv;
    case MetricKind::set_hv:
      return s.set_hv;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

struct RunResult {
  std::string problem;
  std::string method;
  int repeat = 0;
  RunRecord record;
};

struct MethodStats {
  std::string method;
  int n = 0;
  double mean = 0.0;
  double stddev = 0.0;
  std::optional<double> p_value;  // against the reference method
  char mark = ' ';                // '+', '~', '-' for peers; blank for the reference
};

struct ComparisonRow {
  std::string problem;
  MetricKind metric;
  std::vector<MethodStats> methods;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

// Samples for statistics: -inf log distances (exact hits) rank below all
// finite values, which the rank test handles; only the mean is affected.
inline std::vector<double> metric_values(const std::vector<const RunResult*>& runs, MetricKind k) {
  std::vector<double> v;
  for (const auto* r : runs) v.push_back(metric_of(r->record.summary, k));
  return v;
}

}  // namespace detail

/// Mark of a peer against the reference: '+' peer significantly worse,
/// '-' significantly better, '~' no significant difference.
inline char comparison_mark(bool rejected, double peer_mean, double ref_mean, bool lower_better) {
  if (!rejected) return '~';
  const bool peer_worse = lower_better ? peer_mean > ref_mean : peer_mean < ref_mean;
  return peer_worse ? '+' : '-';
}

/// Aggregates completed runs into per-(problem, metric) statistics with
/// significance marks against the reference method. Aborted runs are
/// excluded and reported as warnings.
inline ComparisonReport build_report(const ExperimentConfig& cfg, const std::vector<RunResult>& runs) {
  ComparisonReport rep;
  std::map<std::pair<std::string, std::string>, std::vector<const RunResult*>> groups;
  for (const auto& r : runs) {
    if (r.record.aborted) {
      rep.warnings.push_back("excluded aborted run: problem=" + r.problem + " method=" + r.method +
                             " repeat=" + std::to_string(r.repeat) + ": " + r.record.error);
      continue;
    }
    groups[{r.problem, r.method}].push_back(&r);
  }
  const bool compare = cfg.has_reference();
  if (!compare) rep.warnings.push_back("reference method '" + cfg.reference_method + "' not in config; no marks");

  // Flat list of tests so Holm can run over the chosen family.
  struct Test {
    std::size_t row, col;
    double p;
  };
  std::vector<Test> tests;
  for (const auto& problem : cfg.problems) {
    const auto ref_it = groups.find({problem, cfg.reference_method});
    for (MetricKind k : all_metrics()) {
      ComparisonRow row{problem, k, {}};
      for (const auto& m : cfg.methods) {
        const std::string label = m.display_name();
        MethodStats st;
        st.method = label;
        const auto it = groups.find({problem, label});
        const std::vector<const RunResult*> rs = it == groups.end() ? std::vector<const RunResult*>{} : it->second;
        const std::vector<double> vals = detail::metric_values(rs, k);
        st.n = static_cast<int>(vals.size());
        std::tie(st.mean, st.stddev) = detail::mean_std(vals);
        if (compare && label != cfg.reference_method && ref_it != groups.end()) {
          const std::vector<double> ref = detail::metric_values(ref_it->second, k);
          const auto has_nan = [](const std::vector<double>& v) {
            return std::any_of(v.begin(), v.end(), [](double x) { return std::isnan(x); });
          };
          if (has_nan(vals) || has_nan(ref)) {
            rep.warnings.push_back("NaN metric values; no test for " + label + " on " + problem + " (" +
                                   metric_name(k) + ")");
          } else if (vals.size() >= 2 && ref.size() >= 2) {
            st.p_value = wilcoxon_rank_sum(vals, ref);
            tests.push_back({rep.rows.size(), row.methods.size(), *st.p_value});
          } else {
            rep.warnings.push_back("too few runs to test " + label + " on " + problem + " (" + metric_name(k) + ")");
          }
        }
        row.methods.push_back(st);
      }
      rep.rows.push_back(std::move(row));
    }
  }

  // Families: one per (problem, metric) row, or one per metric overall.
  std::map<std::string, std::vector<std::size_t>> families;
  for (std::size_t t = 0; t < tests.size(); ++t) {
    const ComparisonRow& row = rep.rows[tests[t].row];
    const std::string key =
        cfg.holm_scope == HolmScope::global ? metric_name(row.metric) : row.problem + "\n" + metric_name(row.metric);
    families[key].push_back(t);
  }
  for (const auto& [key, idx] : families) {
    std::vector<double> p;
    for (std::size_t t : idx) p.push_back(tests[t].p);
    const std::vector<bool> rej = holm_bonferroni(p, cfg.alpha);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const Test& t = tests[idx[i]];
      ComparisonRow& row = rep.rows[t.row];
      const MethodStats* ref = nullptr;
      for (const auto& s : row.methods) {
        if (s.method == cfg.reference_method) ref = &s;
      }
      MethodStats& st = row.methods[t.col];
      st.mark = comparison_mark(rej[i], st.mean, ref->mean, lower_is_better(row.metric));
    }
  }
  for (const auto& problem : cfg.problems) {
    for (const auto& m : cfg.methods) {
      const auto it = groups.find({problem, m.display_name()});
      const int n = it == groups.end() ? 0 : static_cast<int>(it->second.size());
      if (n < cfg.repeats) {
        rep.warnings.push_back("effective repeats for " + m.display_name() + " on " + problem + ": " + std::to_string(n) +
                               " of " + std::to_string(cfg.repeats));
      }
    }
  }
  return rep;
}

inline std::string summary_csv(const ComparisonReport& rep) {
  std::ostringstream out;
  out << "problem,metric,method,n,mean,std,p_value,mark\n";
  for (const auto& row : rep.rows) {
    for (const auto& s : row.methods) {
      out << row.problem << ',' << metric_name(row.metric) << ',' << s.method << ',' << s.n << ',' << fmt(s.mean) << ','
          << fmt(s.stddev) << ',' << (s.p_value ? fmt(*s.p_value) : "") << ',';
      if (s.mark != ' ') out << s.mark;
      out << '\n';
    }
  }
  return out.str();
}

/// Per-problem table in the +/~/- layout: one line per method, one column
/// per metric with "mean (std)" and the mark.
inline std::string comparison_table(const ComparisonReport& rep, const std::string& problem) {
  std::ostringstream out;
  std::vector<const ComparisonRow*> rows;
  for (const auto& r : rep.rows) {
    if (r.problem == problem) rows.push_back(&r);
  }
  if (rows.empty()) return {};
  out << "method";
  for (const auto* r : rows) out << ',' << metric_name(r->metric);
  out << '\n';
  for (std::size_t i = 0; i < rows.front()->methods.size(); ++i) {
    out << rows.front()->methods[i].method;
    for (const auto* r : rows) {
      const MethodStats& s = r->methods[i];
      char buf[96];
      std::snprintf(buf, sizeof buf, "%.2e (%.2e)", s.mean, s.stddev);
      out << ',' << buf;
      if (s.mark != ' ') out << s.mark;
    }
    out << '\n';
  }
  return out.str();
}

inline std::string metrics_per_run_csv(const std::vector<RunResult>& runs) {
  std::ostringstream out;
  out << "problem,method,repeat,seed,status,evaluations,distance,log_distance,single_point_hv,set_hv\n";
  for (const auto& r : runs) {
    const auto& s = r.record.summary;
    out << r.problem << ',' << r.method << ',' << r.repeat << ',' << r.record.options.seed << ','
        << (r.record.aborted ? "aborted" : "ok") << ',' << r.record.entries.size() << ',' << fmt(s.distance) << ','
        << fmt(s.log_distance) << ',' << fmt(s.single_point_hv) << ',' << fmt(s.set_hv) << '\n';
  }
  return out.str();
}

/// Mean and std across runs of the running-best distance, log distance and
/// single-point HV after each evaluation.
inline std::string trajectory_csv(const Problem& problem, const std::vector<const RunResult*>& runs) {
  std::ostringstream out;
  out << "evaluation,n,mean_best_distance,std_best_distance,mean_best_log_distance,std_best_log_distance,"
         "mean_best_single_point_hv,std_best_single_point_hv\n";
  std::size_t len = 0;
  for (const auto* r : runs) len = std::max(len, r->record.entries.size());
  std::vector<std::vector<double>> hv(runs.size());
  for (std::size_t i = 0; i < runs.size(); ++i) {
    double best = 0.0;
    for (const auto& e : runs[i]->record.entries) {
      const Eigen::VectorXd h = hv_space(problem, e.y_true);
      best = std::max(best, (problem.reference_point - h).cwiseMax(0.0).prod());
      hv[i].push_back(best);
    }
  }
  for (std::size_t t = 0; t < len; ++t) {
    std::vector<double> d, ld, h;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto& bd = runs[i]->record.summary.best_distance;
      if (t >= bd.size()) continue;
      d.push_back(bd[t]);
      ld.push_back(bd[t] > 0.0 ? std::log(bd[t]) : -std::numeric_limits<double>::infinity());
      h.push_back(hv[i][t]);
    }
    const auto [md, sd] = detail::mean_std(d);
    const auto [ml, sl] = detail::mean_std(ld);
    const auto [mh, sh] = detail::mean_std(h);
    out << t + 1 << ',' << d.size() << ',' << fmt(md) << ',' << fmt(sd) << ',' << fmt(ml) << ',' << fmt(sl) << ','
        << fmt(mh) << ',' << fmt(sh) << '\n';
  }
  return out.str();
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << text;
  if (!out) throw InvalidArgument("write failed for " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace detail

/// Writes every report artefact derived from the runs; returns the report.
inline ComparisonReport write_reports(const ExperimentConfig& cfg, const std::vector<RunResult>& runs,
                                      const std::filesystem::path& out, const ProblemFactory& factory) {
  ComparisonReport rep = build_report(cfg, runs);
  detail::write_file(out / "metrics_per_run.csv", metrics_per_run_csv(runs));
  detail::write_file(out / "summary.csv", summary_csv(rep));
  for (const auto& problem : cfg.problems) {
    detail::write_file(out / "tables" / (slug(problem) + ".csv"), comparison_table(rep, problem));
    const Problem p = factory(problem);
    for (const auto& m : cfg.methods) {
      std::vector<const RunResult*> rs;
      for (const auto& r : runs) {
        if (r.problem == problem && r.method == m.display_name() && !r.record.aborted) rs.push_back(&r);
      }
      detail::write_file(out / "trajectories" / slug(problem) / (slug(m.display_name()) + ".csv"), trajectory_csv(p, rs));
    }
  }
  std::string warn;
  for (const auto& w : rep.warnings) warn += w + "\n";
  detail::write_file(out / "warnings.txt", warn);
  return rep;
}

struct ExperimentResult {
  std::vector<RunResult> runs;
  ComparisonReport report;
  int aborted = 0;
};

/// Runs every (problem, method, repeat) in a bounded worker pool, persists
/// each record and the derived reports under `cfg.out_dir`.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, ProblemFactory factory = {},
                                       std::ostream* log = nullptr) {
  cfg.validate();
  if (!factory) {
    factory = [&cfg](const std::string& name) { return configure_problem(name, cfg.problem_points); };
  }
  const std::filesystem::path out = cfg.out_dir;

  struct Job {
    std::string problem;
    const MethodConfig* method;
    int repeat;
  };
  std::vector<Job> jobs;
  std::map<std::string, Problem> problems;
  for (const auto& name : cfg.problems) {
    Problem p = factory(name);
    for (const auto& m : cfg.methods) m.utopian.resolve(p);  // fail fast on missing utopian points
    problems.emplace(name, std::move(p));
    for (const auto& m : cfg.methods) {
      for (int r = 0; r < cfg.repeats; ++r) jobs.push_back({name, &m, r});
    }
  }

  ExperimentResult res;
  res.runs.resize(jobs.size());
  std::vector<std::string> timings(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& job = jobs[i];
      RunOptions opt;
      opt.budget = cfg.budget;
      opt.noise_std = cfg.noise_std;
      opt.seed = run_seed(cfg, job.problem, job.repeat);
      RunResult rr{job.problem, job.method->display_name(), job.repeat, {}};
      try {
        rr.record = run_method(problems.at(job.problem), *job.method, opt);
      } catch (const std::exception& e) {
        rr.record.problem = job.problem;
        rr.record.method = rr.method;
        rr.record.config = *job.method;
        rr.record.options = opt;
        rr.record.aborted = true;
        rr.record.error = e.what();
      }
      detail::write_file(record_path(out, job.problem, rr.method, job.repeat), to_jsonl(rr.record));
      std::string t = "iteration,seconds\n";
      for (std::size_t k = 0; k < rr.record.acquisition_seconds.size(); ++k) {
        t += std::to_string(k + 1) + ',' + fmt(rr.record.acquisition_seconds[k]) + '\n';
      }
      timings[i] = std::move(t);
      if (log) {
        std::lock_guard<std::mutex> lock(log_mutex);
        *log << (rr.record.aborted ? "ABORTED " : "done ") << job.problem << ' ' << rr.method << " repeat " << job.repeat;
        if (rr.record.aborted) {
          *log << ": " << rr.record.error;
        } else {
          *log << " distance " << rr.record.summary.distance;
        }
        *log << '\n';
      }
      res.runs[i] = std::move(rr);
    }
  };
  const int n_threads = std::min<int>(cfg.parallel, static_cast<int>(jobs.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Wall times vary between runs, so they live outside the deterministic outputs.
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    detail::write_file(out / "timing" / slug(jobs[i].problem) / slug(res.runs[i].method) /
                           ("run_" + std::to_string(jobs[i].repeat) + ".csv"),
                       timings[i]);
  }
  detail::write_file(out / "experiment.json", config_to_json(cfg).dump(2) + "\n");
  for (const auto& r : res.runs) res.aborted += r.record.aborted ? 1 : 0;
  res.report = write_reports(cfg, res.runs, out, [&](const std::string& n) { return problems.at(n); });
  return res;
}

/// Recomputes every metric and report from the records stored under `out`
/// (as written by run_experiment).
inline ExperimentResult report_from_records(const std::filesystem::path& out, ProblemFactory factory = {}) {
  ExperimentConfig cfg = config_from_json(nlohmann::json::parse(detail::read_file(out / "experiment.json")));
  cfg.out_dir = out.string();
  if (!factory) {
    factory = [&cfg](const std::string& name) { return configure_problem(name, cfg.problem_points); };
  }
  ExperimentResult res;
  std::map<std::string, Problem> problems;
  for (const auto& name : cfg.problems) {
    problems.emplace(name, factory(name));
    for (const auto& m : cfg.methods) {
      for (int r = 0; r < cfg.repeats; ++r) {
        const auto path = record_path(out, name, m.display_name(), r);
        if (!std::filesystem::exists(path)) {
          throw InvalidData("missing record " + path.string());
        }
        RunResult rr{name, m.display_name(), r, from_jsonl(detail::read_file(path))};
        if (!rr.record.aborted) {
          rr.record.summary = summarise(problems.at(name), rr.record.entries, rr.record.utopian,
                                        derive_seed(rr.record.options.seed, 7));
        }
        res.aborted += rr.record.aborted ? 1 : 0;
        res.runs.push_back(std::move(rr));
      }
    }
  }
  res.report = write_reports(cfg, res.runs, out, [&](const std::string& n) { return problems.at(n); });
  return res;
}

}  // namespace spmo
