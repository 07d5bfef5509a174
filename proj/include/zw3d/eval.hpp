#pragma once

// False-positive / false-negative estimators, DET sweeps and mean-BER tables.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "zw3d/error.hpp"
#include "zw3d/fusion.hpp"
#include "zw3d/pipeline.hpp"
#include "zw3d/registry.hpp"

namespace zw3d {

struct Rates {
  double pfp = 0.0;
  double pfn = 0.0;
};

// Genuine scores are original-vs-attacked distances, impostor scores are
// distances between distinct clips. A score below the threshold is a match.
inline Rates compute_rates(std::span<const double> genuine, std::span<const double> impostor, double threshold) {
  require(!genuine.empty() && !impostor.empty(), ErrorKind::invalid_argument, "score lists must be non-empty");
  std::size_t fp = 0, fn = 0;
  for (double s : impostor) fp += s < threshold;
  for (double s : genuine) fn += s >= threshold;
  return {static_cast<double>(fp) / static_cast<double>(impostor.size()),
          static_cast<double>(fn) / static_cast<double>(genuine.size())};
}

struct DetPoint {
  double threshold = 0.0;
  double pfp = 0.0;
  double pfn = 0.0;
};

// Sweeps the threshold over 0, every distinct score, and just above the
// maximum, so the curve runs from (0,1) to (1,0).
inline std::vector<DetPoint> det_curve(std::span<const double> genuine, std::span<const double> impostor) {
  require(!genuine.empty() && !impostor.empty(), ErrorKind::invalid_argument, "score lists must be non-empty");
  std::vector<double> g(genuine.begin(), genuine.end()), im(impostor.begin(), impostor.end());
  std::sort(g.begin(), g.end());
  std::sort(im.begin(), im.end());
  std::vector<double> th{0.0};
  th.insert(th.end(), g.begin(), g.end());
  th.insert(th.end(), im.begin(), im.end());
  std::sort(th.begin(), th.end());
  th.erase(std::unique(th.begin(), th.end()), th.end());
  th.push_back(std::nextafter(th.back(), std::numeric_limits<double>::infinity()));

  std::vector<DetPoint> out;
  out.reserve(th.size());
  for (double t : th) {
    const auto fp = std::lower_bound(im.begin(), im.end(), t) - im.begin();
    const auto below_g = std::lower_bound(g.begin(), g.end(), t) - g.begin();
    out.push_back({t, static_cast<double>(fp) / static_cast<double>(im.size()),
                   static_cast<double>(g.size() - below_g) / static_cast<double>(g.size())});
  }
  return out;
}

inline std::string det_csv(std::span<const DetPoint> curve) {
  std::string s = "threshold,pfp,pfn\n";
  char buf[128];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.threshold, p.pfp, p.pfn);
    s += buf;
  }
  return s;
}

// One attacked query of a registered clip.
struct AttackedQuery {
  std::string clip_id;
  std::string attack;
  FeaturePair features;
};

struct BerRow {
  std::string attack;
  std::string channel;  // 2d | depth | fused
  double mean_ber = 0.0;
  std::size_t n = 0;
};

struct ClipBer {
  std::string clip_id;
  std::string attack;
  double ber_2d = 0.0, ber_depth = 0.0, ber_fused = 0.0;
};

inline std::vector<ClipBer> per_clip_ber(const Registry& db, std::span<const AttackedQuery> queries,
                                         double gamma = kDefaultGamma) {
  std::vector<ClipBer> out;
  out.reserve(queries.size());
  for (const auto& q : queries) {
    const IdentifyResult r = identify(db.lookup_ownership(q.clip_id), q.features, gamma);
    out.push_back({q.clip_id, q.attack, r.ber_2d, r.ber_depth, r.ber_fused});
  }
  return out;
}

// Mean BER per attack and channel, attacks in order of first appearance. The
// fused channel averages per-clip fused BERs and is reported in fused mode.
inline std::vector<BerRow> ber_table(std::span<const ClipBer> clips, MatchMode mode) {
  std::vector<std::string> order;
  std::map<std::string, std::array<double, 3>> sums;
  std::map<std::string, std::size_t> counts;
  for (const auto& c : clips) {
    if (!counts.contains(c.attack)) order.push_back(c.attack);
    auto& s = sums[c.attack];
    s[0] += c.ber_2d;
    s[1] += c.ber_depth;
    s[2] += c.ber_fused;
    ++counts[c.attack];
  }
  std::vector<BerRow> rows;
  const char* names[3] = {"2d", "depth", "fused"};
  const int channels = mode == MatchMode::fused ? 3 : 2;
  for (const auto& a : order)
    for (int ch = 0; ch < channels; ++ch)
      rows.push_back({a, names[ch], sums[a][ch] / static_cast<double>(counts[a]), counts[a]});
  return rows;
}

inline std::vector<BerRow> ber_table(const Registry& db, std::span<const AttackedQuery> queries, MatchMode mode,
                                     double gamma = kDefaultGamma) {
  const auto clips = per_clip_ber(db, queries, gamma);
  return ber_table(clips, mode);
}

inline std::string ber_csv(std::span<const BerRow> rows) {
  std::string s = "attack,channel,mean_ber,n\n";
  char buf[192];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%.6f,%zu\n", r.attack.c_str(), r.channel.c_str(), r.mean_ber, r.n);
    s += buf;
  }
  return s;
}

}  // namespace zw3d
