#pragma once

// Feature distance, attention-based score fusion, threshold calibration and
// the flexible (independent / fused) matching rule.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "zw3d/error.hpp"
#include "zw3d/feature.hpp"
#include "zw3d/registry.hpp"

namespace zw3d {

inline constexpr double kDefaultGamma = 0.1;
inline constexpr double kDefaultTargetPfp = 0.01;

struct Thresholds {
  double t_2d = 0.0;
  double t_depth = 0.0;
  double t_fusion = 0.0;
  double gamma = kDefaultGamma;

  void validate() const {
    require(t_2d >= 0.0 && t_depth >= 0.0 && t_fusion >= 0.0, ErrorKind::invalid_argument,
            "thresholds must be non-negative");
    require(gamma > -1.0, ErrorKind::invalid_argument, "gamma must exceed -1");
  }
};

enum class MatchMode { independent, fused };
enum class Decision { match_2d, match_depth, match_fused, no_match };

inline std::string_view to_string(MatchMode m) { return m == MatchMode::fused ? "fused" : "independent"; }

inline std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::match_2d: return "match-2d";
    case Decision::match_depth: return "match-depth";
    case Decision::match_fused: return "match-fused";
    case Decision::no_match: return "no-match";
  }
  return "?";
}

struct MatchResult {
  std::string id;
  double d_2d = 0.0;
  double d_depth = 0.0;
  double d_fused = 0.0;
  Decision decision = Decision::no_match;
  MatchMode mode = MatchMode::independent;
  // Independent mode flags each component on its own.
  bool matched_2d = false;
  bool matched_depth = false;

  double deciding_distance() const {
    switch (decision) {
      case Decision::match_2d: return d_2d;
      case Decision::match_depth: return d_depth;
      default: return mode == MatchMode::fused ? d_fused : std::min(d_2d, d_depth);
    }
  }
};

// Mean squared difference.
inline double feature_distance(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size() && !a.empty(), ErrorKind::shape, "feature length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

inline double feature_distance(const FeatureVector& a, const FeatureVector& b) {
  return feature_distance(a.values, b.values);
}

// Attention-based fusion of two non-negative scores (distances or BERs). The
// smaller score gets the larger weight; a zero score yields zero.
inline double fuse_scores(double s1, double s2, double gamma = kDefaultGamma) {
  require(s1 >= 0.0 && s2 >= 0.0, ErrorKind::invalid_argument, "fusion inputs must be non-negative");
  require(gamma > -1.0, ErrorKind::invalid_argument, "gamma must exceed -1");
  if (s1 == 0.0 || s2 == 0.0) return 0.0;
  const double inv1 = 1.0 / s1, inv2 = 1.0 / s2;
  const double x1 = inv1 + inv2;
  const double x2 = std::fabs(inv1 - inv2);
  return 1.0 / (0.5 * (x1 + x2 / (1.0 + gamma)));
}

inline double fused_ber(double ber_2d, double ber_depth, double gamma = kDefaultGamma) {
  return fuse_scores(ber_2d, ber_depth, gamma);
}

inline MatchResult score_record(const FeatureEntry& rec, const FeatureVector& q2d, const FeatureVector& qdepth,
                                const Thresholds& th, MatchMode mode) {
  MatchResult r;
  r.id = rec.id;
  r.mode = mode;
  r.d_2d = feature_distance(q2d, rec.fn_2d);
  r.d_depth = feature_distance(qdepth, rec.fn_depth);
  r.d_fused = fuse_scores(r.d_2d, r.d_depth, th.gamma);
  if (mode == MatchMode::independent) {
    r.matched_2d = r.d_2d < th.t_2d;
    r.matched_depth = r.d_depth < th.t_depth;
    if (r.matched_2d)
      r.decision = Decision::match_2d;
    else if (r.matched_depth)
      r.decision = Decision::match_depth;
  } else if (r.d_fused < th.t_fusion) {
    r.decision = Decision::match_fused;
  }
  return r;
}

// Scores every record; no filtering.
inline std::vector<MatchResult> score_all(const Registry& db, const FeatureVector& q2d, const FeatureVector& qdepth,
                                          const Thresholds& th, MatchMode mode) {
  require(db.is_open(), ErrorKind::closed, "registry is closed");
  th.validate();
  std::vector<MatchResult> out;
  db.for_each_feature([&](const FeatureEntry& e) { out.push_back(score_record(e, q2d, qdepth, th, mode)); });
  return out;
}

// Matching records, ascending by the distance that decided the match.
inline std::vector<MatchResult> match_query(const Registry& db, const FeatureVector& q2d,
                                            const FeatureVector& qdepth, const Thresholds& th, MatchMode mode) {
  std::vector<MatchResult> all = score_all(db, q2d, qdepth, th, mode);
  std::vector<MatchResult> hits;
  for (auto& r : all)
    if (r.decision != Decision::no_match) hits.push_back(std::move(r));
  std::stable_sort(hits.begin(), hits.end(), [](const MatchResult& a, const MatchResult& b) {
    return a.deciding_distance() < b.deciding_distance();
  });
  return hits;
}

// Threshold below which a fraction `target` of `distances` falls. Order
// statistics d_1 <= ... <= d_n are linearly interpolated at position
// target * n, anchored at d_0 = 0; target >= 1 returns a value just above
// the maximum.
inline double threshold_for_rate(std::vector<double> distances, double target) {
  require(!distances.empty(), ErrorKind::invalid_argument, "no distances to calibrate on");
  require(target >= 0.0 && target <= 1.0, ErrorKind::invalid_argument, "target rate must lie in [0,1]");
  std::sort(distances.begin(), distances.end());
  const double n = static_cast<double>(distances.size());
  const double pos = target * n;
  if (pos >= n) return std::nextafter(distances.back(), std::numeric_limits<double>::infinity());
  const auto k = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(k);
  const double lo = k == 0 ? 0.0 : distances[k - 1];
  const double hi = distances[k];
  return lo + frac * (hi - lo);
}

inline double realized_rate(std::span<const double> distances, double threshold) {
  std::size_t below = 0;
  for (double d : distances) below += d < threshold;
  return distances.empty() ? 0.0 : static_cast<double>(below) / static_cast<double>(distances.size());
}

struct FeaturePair {
  FeatureVector fn_2d;
  FeatureVector fn_depth;
};

// Distances between every pair of distinct clips, per channel.
struct ImpostorDistances {
  std::vector<double> d_2d, d_depth, d_fused;
};

inline ImpostorDistances impostor_distances(std::span<const FeaturePair> clips, double gamma = kDefaultGamma) {
  ImpostorDistances out;
  for (std::size_t a = 0; a < clips.size(); ++a)
    for (std::size_t b = a + 1; b < clips.size(); ++b) {
      const double d2 = feature_distance(clips[a].fn_2d, clips[b].fn_2d);
      const double dd = feature_distance(clips[a].fn_depth, clips[b].fn_depth);
      out.d_2d.push_back(d2);
      out.d_depth.push_back(dd);
      out.d_fused.push_back(fuse_scores(d2, dd, gamma));
    }
  return out;
}

struct CalibrationReport {
  Thresholds thresholds;
  double target_pfp = kDefaultTargetPfp;
  double realized_2d = 0.0, realized_depth = 0.0, realized_fusion = 0.0;
};

inline CalibrationReport calibrate_thresholds(std::span<const FeaturePair> clips, double target_pfp = kDefaultTargetPfp,
                                              double gamma = kDefaultGamma) {
  require(clips.size() >= 2, ErrorKind::invalid_argument, "calibration needs at least 2 records");
  const ImpostorDistances imp = impostor_distances(clips, gamma);
  CalibrationReport rep;
  rep.target_pfp = target_pfp;
  rep.thresholds.gamma = gamma;
  rep.thresholds.t_2d = threshold_for_rate(imp.d_2d, target_pfp);
  rep.thresholds.t_depth = threshold_for_rate(imp.d_depth, target_pfp);
  rep.thresholds.t_fusion = threshold_for_rate(imp.d_fused, target_pfp);
  rep.realized_2d = realized_rate(imp.d_2d, rep.thresholds.t_2d);
  rep.realized_depth = realized_rate(imp.d_depth, rep.thresholds.t_depth);
  rep.realized_fusion = realized_rate(imp.d_fused, rep.thresholds.t_fusion);
  return rep;
}

inline CalibrationReport calibrate_thresholds(const Registry& db, double target_pfp = kDefaultTargetPfp,
                                              double gamma = kDefaultGamma) {
  std::vector<FeaturePair> clips;
  db.for_each_feature([&](const FeatureEntry& e) { clips.push_back({e.fn_2d, e.fn_depth}); });
  return calibrate_thresholds(clips, target_pfp, gamma);
}

inline std::string calibration_csv(const CalibrationReport& rep) {
  auto line = [&](const char* name, double value, double realized) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g\n", name, value, rep.target_pfp, realized);
    return std::string(buf);
  };
  return "threshold,value,target_pfp,realized_pfp\n" + line("T_2d", rep.thresholds.t_2d, rep.realized_2d) +
         line("T_depth", rep.thresholds.t_depth, rep.realized_depth) +
         line("T_fusion", rep.thresholds.t_fusion, rep.realized_fusion);
}

}  // namespace zw3d
