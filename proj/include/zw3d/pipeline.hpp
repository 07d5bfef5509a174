#pragma once

// The three phases wired together: registration, retrieval, identification.

#include <string>
#include <utility>

#include "zw3d/feature.hpp"
#include "zw3d/frameio.hpp"
#include "zw3d/fusion.hpp"
#include "zw3d/registry.hpp"
#include "zw3d/vss.hpp"

namespace zw3d {

inline FeatureVector clip_feature(const FrameSequence& seq, Role role) {
  NormalizedClip clip = normalize_clip(seq);
  clip.role = role;
  return extract_feature(clip);
}

inline FeaturePair clip_features(const FrameSequence& seq2d, const FrameSequence& seqdepth) {
  return {clip_feature(seq2d, Role::two_d), clip_feature(seqdepth, Role::depth)};
}

inline RegistrationRecord make_record(std::string id, FeaturePair features, Watermark w_2d, Watermark w_depth) {
  RegistrationRecord rec;
  rec.id = std::move(id);
  rec.o_2d = build_ownership_share(master_share_from_feature(features.fn_2d), w_2d);
  rec.o_depth = build_ownership_share(master_share_from_feature(features.fn_depth), w_depth);
  rec.fn_2d = std::move(features.fn_2d);
  rec.fn_depth = std::move(features.fn_depth);
  rec.w_2d = std::move(w_2d);
  rec.w_depth = std::move(w_depth);
  return rec;
}

struct IdentifyResult {
  Watermark recovered_2d;
  Watermark recovered_depth;
  double ber_2d = 0.0;
  double ber_depth = 0.0;
  double ber_fused = 0.0;
};

// Master share for a query feature. A degenerate feature carries no bits; it
// is treated as all-zero so identification still yields a (poor) watermark.
inline Share query_master_share(const FeatureVector& fn) {
  try {
    return master_share_from_feature(fn);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::degenerate) throw;
    return build_master_share(BitMatrix(kWatermarkSide, kWatermarkSide));
  }
}

inline IdentifyResult identify(const OwnershipEntry& owned, const FeaturePair& query, double gamma = kDefaultGamma) {
  IdentifyResult r;
  r.recovered_2d = recover_watermark(stack_shares(query_master_share(query.fn_2d), owned.o_2d));
  r.recovered_depth = recover_watermark(stack_shares(query_master_share(query.fn_depth), owned.o_depth));
  r.ber_2d = ber(owned.w_2d, r.recovered_2d);
  r.ber_depth = ber(owned.w_depth, r.recovered_depth);
  r.ber_fused = fused_ber(r.ber_2d, r.ber_depth, gamma);
  return r;
}

}  // namespace zw3d
