// Registers two synthetic clips, attacks one, and identifies it again.

#include <cstdio>
#include <filesystem>

#include "zw3d/zw3d.hpp"

int main() {
  using namespace zw3d;
  CorpusOptions opt;
  opt.clips = 2;
  opt.frames = 32;
  const auto corpus = generate_corpus(opt);

  const auto db_path = std::filesystem::temp_directory_path() / "zw3d_roundtrip.zw3d";
  std::filesystem::remove(db_path);
  Registry db = Registry::open(db_path);
  for (const auto& c : corpus) db.register_record(make_record(c.id, clip_features(c.two_d, c.depth), c.w_2d, c.w_depth));

  const SyntheticClip& clip = corpus[0];
  const AttackSpec blur = parse_attack("gb", "9x9");
  const FeaturePair q = clip_features(apply_attack(clip.two_d, blur), apply_attack(clip.depth, blur));

  Thresholds th;
  th.t_fusion = 0.5;
  for (const auto& m : match_query(db, q.fn_2d, q.fn_depth, th, MatchMode::fused))
    std::printf("match %s d_fused=%.4f\n", m.id.c_str(), m.d_fused);

  const IdentifyResult r = identify(db.lookup_ownership(clip.id), q);
  std::printf("BER 2d=%.4f depth=%.4f fused=%.4f\n", r.ber_2d, r.ber_depth, r.ber_fused);
  std::filesystem::remove(db_path);
}
