#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "spmo/errors.hpp"
#include "spmo/rng.hpp"

namespace spmo {

/// Pareto dominance for minimisation: a is no worse everywhere and strictly
/// better somewhere.
inline bool dominates(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
  bool strict = false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strict = true;
  }
  return strict;
}

using FrontSet = std::vector<Eigen::VectorXd>;

/// Survivors in input order; of several identical points only the first is kept.
inline FrontSet nondominated_filter(const std::vector<Eigen::VectorXd>& points) {
  FrontSet out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool keep = true;
    for (std::size_t j = 0; j < points.size() && keep; ++j) {
      if (j == i) continue;
      if (dominates(points[j], points[i])) keep = false;
      if (j < i && points[j] == points[i]) keep = false;
    }
    if (keep) out.push_back(points[i]);
  }
  return out;
}

struct HvConfig {
  enum class Mode { exact, monte_carlo };
  Eigen::VectorXd reference_point;
  Mode mode = Mode::exact;
  std::size_t samples = 1000000;
  std::uint64_t seed = 0;

  static HvConfig exact(Eigen::VectorXd r) { return {std::move(r), Mode::exact, 0, 0}; }
  static HvConfig monte_carlo(Eigen::VectorXd r, std::size_t samples, std::uint64_t seed) {
    return {std::move(r), Mode::monte_carlo, samples, seed};
  }
  /// Exact up to six objectives, sampled (1e6 draws) beyond.
  static HvConfig automatic(Eigen::VectorXd r, std::uint64_t seed = 0) {
    const bool small = r.size() <= 6;
    return {std::move(r), small ? Mode::exact : Mode::monte_carlo, small ? 0 : std::size_t{1000000}, seed};
  }
};

namespace detail {

using Pts = std::vector<Eigen::VectorXd>;

inline double hv2d(Pts pts, const Eigen::VectorXd& ref) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]); });
  double vol = 0.0;
  double y_bound = ref[1];
  for (const auto& p : pts) {
    if (p[1] < y_bound) {
      vol += (ref[0] - p[0]) * (y_bound - p[1]);
      y_bound = p[1];
    }
  }
  return vol;
}

inline double box_volume(const Eigen::VectorXd& p, const Eigen::VectorXd& ref) {
  return (ref - p).prod();
}

inline Pts nondominated(const Pts& pts) {
  Pts out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool keep = true;
    for (std::size_t j = 0; j < pts.size() && keep; ++j) {
      if (j == i) continue;
      if (dominates(pts[j], pts[i]) || (j < i && pts[j] == pts[i])) keep = false;
    }
    if (keep) out.push_back(pts[i]);
  }
  return out;
}

// WFG: HV = sum of exclusive contributions, each computed as the point's box
// minus the HV of the limit set of the points after it.
inline double wfg(Pts pts, const Eigen::VectorXd& ref) {
  if (pts.empty()) return 0.0;
  const Eigen::Index m = ref.size();
  if (pts.size() == 1) return box_volume(pts[0], ref);
  if (m == 1) {
    double best = ref[0];
    for (const auto& p : pts) best = std::min(best, p[0]);
    return ref[0] - best;
  }
  if (m == 2) return hv2d(std::move(pts), ref);
  std::sort(pts.begin(), pts.end(), [m](const auto& a, const auto& b) { return a[m - 1] > b[m - 1]; });
  double total = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Pts limit;
    limit.reserve(pts.size() - i - 1);
    for (std::size_t j = i + 1; j < pts.size(); ++j) limit.push_back(pts[i].cwiseMax(pts[j]));
    total += box_volume(pts[i], ref) - wfg(nondominated(limit), ref);
  }
  return total;
}

}  // namespace detail

struct HvEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Monte-Carlo HV: uniform draws in [min corner, reference].
inline HvEstimate hypervolume_mc(const std::vector<Eigen::VectorXd>& front, const Eigen::VectorXd& ref,
                                 std::size_t samples, std::uint64_t seed) {
  std::vector<Eigen::VectorXd> pts;
  for (const auto& p : front) {
    if (p.size() != ref.size()) throw InvalidArgument("hypervolume: reference dimension mismatch");
    if ((p.array() < ref.array()).all()) pts.push_back(p);
  }
  if (pts.empty() || samples == 0) return {};
  pts = detail::nondominated(pts);
  const Eigen::Index m = ref.size();
  Eigen::VectorXd lo = pts.front();
  for (const auto& p : pts) lo = lo.cwiseMin(p);
  const double box = (ref - lo).prod();
  Rng rng(seed);
  std::size_t hits = 0;
  Eigen::VectorXd s(m);
  for (std::size_t k = 0; k < samples; ++k) {
    for (Eigen::Index i = 0; i < m; ++i) s[i] = lo[i] + rng.uniform() * (ref[i] - lo[i]);
    for (const auto& p : pts) {
      if ((p.array() <= s.array()).all()) {
        ++hits;
        break;
      }
    }
  }
  const double frac = static_cast<double>(hits) / static_cast<double>(samples);
  return {box * frac, box * std::sqrt(frac * (1.0 - frac) / static_cast<double>(samples))};
}

/// Lebesgue measure of the region dominated by `front` and bounded by the
/// reference point. Points not strictly below the reference contribute zero.
inline double hypervolume(const std::vector<Eigen::VectorXd>& front, const HvConfig& cfg) {
  const Eigen::VectorXd& ref = cfg.reference_point;
  if (ref.size() < 1) throw InvalidArgument("hypervolume: empty reference point");
  for (const auto& p : front) {
    if (p.size() != ref.size()) throw InvalidArgument("hypervolume: reference dimension mismatch");
  }
  if (cfg.mode == HvConfig::Mode::monte_carlo) return hypervolume_mc(front, ref, cfg.samples, cfg.seed).value;
  detail::Pts pts;
  for (const auto& p : front) {
    if ((p.array() < ref.array()).all()) pts.push_back(p);
  }
  return detail::wfg(detail::nondominated(pts), ref);
}

struct SinglePointHv {
  std::size_t index = 0;
  Eigen::VectorXd point;
  double hv = 0.0;
};

/// Best HV achieved by any one point alone; ties go to the first index.
inline SinglePointHv single_point_hv(const std::vector<Eigen::VectorXd>& points, const HvConfig& cfg) {
  if (points.empty()) throw InvalidArgument("single_point_hv: no points");
  SinglePointHv best;
  best.hv = -1.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != cfg.reference_point.size()) {
      throw InvalidArgument("single_point_hv: reference dimension mismatch");
    }
    const double v = (cfg.reference_point - points[i]).cwiseMax(0.0).prod();
    if (v > best.hv) best = {i, points[i], v};
  }
  return best;
}

struct UtopianDistance {
  std::size_t index = 0;
  Eigen::VectorXd point;
  double distance = 0.0;
  double log_distance = 0.0;  // -inf when the distance is exactly zero
};

inline UtopianDistance utopian_distance(const std::vector<Eigen::VectorXd>& points, const Eigen::VectorXd& z_star) {
  if (points.empty()) throw InvalidArgument("utopian_distance: no points");
  UtopianDistance best;
  best.distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double dist = (points[i] - z_star).norm();
    if (dist < best.distance) {
      best.index = i;
      best.point = points[i];
      best.distance = dist;
    }
  }
  best.log_distance = best.distance > 0.0 ? std::log(best.distance) : -std::numeric_limits<double>::infinity();
  return best;
}

}  // namespace spmo
