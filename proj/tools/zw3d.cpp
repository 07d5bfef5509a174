// zw3d: command-line front end for registration, retrieval, identification
// and the evaluation tooling around them.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "zw3d/zw3d.hpp"

namespace fs = std::filesystem;
using namespace zw3d;

namespace {

struct Globals {
  std::string db = "registry.zw3d";
  double gamma = kDefaultGamma;
  double target_pfp = kDefaultTargetPfp;
  std::uint64_t seed = 1;
  std::optional<double> t_2d, t_depth, t_fusion;
  std::string thresholds_file;
};

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::duplicate_id: return 2;
    case ErrorKind::io:
    case ErrorKind::corrupt:
    case ErrorKind::closed: return 3;
    case ErrorKind::shape:
    case ErrorKind::invalid_argument:
    case ErrorKind::degenerate: return 4;
    case ErrorKind::unknown_id: return 5;
  }
  return 3;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::io, "cannot create " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorKind::io, "write failed for " + path.string());
}

Thresholds read_thresholds_csv(const fs::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open " + path.string());
  Thresholds th;
  std::string line;
  int seen = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string name, value;
    std::getline(ss, name, ',');
    std::getline(ss, value, ',');
    try {
      if (name == "T_2d") th.t_2d = std::stod(value), ++seen;
      else if (name == "T_depth") th.t_depth = std::stod(value), ++seen;
      else if (name == "T_fusion") th.t_fusion = std::stod(value), ++seen;
    } catch (const std::exception&) {
      fail(ErrorKind::io, "malformed thresholds file " + path.string());
    }
  }
  require(seen == 3, ErrorKind::io, "thresholds file " + path.string() + " lacks T_2d/T_depth/T_fusion");
  return th;
}

Thresholds resolve_thresholds(const Globals& g, const Registry& db) {
  Thresholds th;
  const bool all_overridden = g.t_2d && g.t_depth && g.t_fusion;
  if (!g.thresholds_file.empty())
    th = read_thresholds_csv(g.thresholds_file);
  else if (!all_overridden)
    th = calibrate_thresholds(db, g.target_pfp, g.gamma).thresholds;
  if (g.t_2d) th.t_2d = *g.t_2d;
  if (g.t_depth) th.t_depth = *g.t_depth;
  if (g.t_fusion) th.t_fusion = *g.t_fusion;
  th.gamma = g.gamma;
  th.validate();
  return th;
}

MatchMode parse_mode(const std::string& s) {
  if (s == "independent") return MatchMode::independent;
  if (s == "fused") return MatchMode::fused;
  fail(ErrorKind::invalid_argument, "mode must be independent or fused");
}

FeaturePair query_features(const std::string& clip2d, const std::string& depth) {
  return clip_features(load_clip(clip2d, Role::two_d), load_clip(depth, Role::depth));
}

std::string fmt_double(double v, const char* f = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void print_matches(const std::vector<MatchResult>& hits) {
  std::cout << "id,d_2d,d_depth,d_fused,decision,mode\n";
  for (const auto& m : hits)
    std::cout << m.id << ',' << fmt_double(m.d_2d, "%.9g") << ',' << fmt_double(m.d_depth, "%.9g") << ','
              << fmt_double(m.d_fused, "%.9g") << ',' << to_string(m.decision) << ',' << to_string(m.mode) << '\n';
}

// Genuine (attacked vs. registered) feature pairs for every registered corpus clip.
std::vector<AttackedQuery> attacked_queries(const Registry& db, const fs::path& corpus_dir,
                                            const std::vector<AttackSpec>& attacks) {
  std::vector<AttackedQuery> out;
  for (const auto& dir : corpus_clip_dirs(corpus_dir)) {
    const std::string id = dir.filename().string();
    require(db.contains(id), ErrorKind::unknown_id, "corpus clip '" + id + "' is not registered");
    const FrameSequence s2d = load_clip(dir / "2d", Role::two_d);
    const FrameSequence sdepth = load_clip(dir / "depth", Role::depth);
    for (const auto& spec : attacks) {
      out.push_back({id, attack_label(spec), clip_features(apply_attack(s2d, spec), apply_attack(sdepth, spec))});
      std::cerr << "\r" << out.size() << " attacked queries" << std::flush;
    }
  }
  std::cerr << '\n';
  return out;
}

std::vector<AttackSpec> select_attacks(const std::vector<std::string>& labels, std::uint64_t seed) {
  std::vector<AttackSpec> all = attack_catalog(seed);
  if (labels.empty()) return all;
  std::vector<AttackSpec> picked;
  for (const auto& label : labels) {
    auto it = std::find_if(all.begin(), all.end(), [&](const AttackSpec& s) { return attack_label(s) == label; });
    require(it != all.end(), ErrorKind::invalid_argument, "unknown attack label '" + label + "'");
    picked.push_back(*it);
  }
  return picked;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-watermark registration and identification for DIBR 3D video"};
  app.set_config("--config", "", "Flat key=value configuration file; flags override it");
  app.require_subcommand(0, 1);
  app.fallthrough();

  Globals g;
  app.add_option("--db", g.db, "Registry file")->capture_default_str();
  app.add_option("--gamma", g.gamma, "Fusion constant")->capture_default_str();
  app.add_option("--target-pfp", g.target_pfp, "False-positive rate for calibration")->capture_default_str();
  app.add_option("--seed", g.seed, "Seed for every stochastic step")->capture_default_str();
  app.add_option("--t2d", g.t_2d, "Override the 2D distance threshold");
  app.add_option("--tdepth", g.t_depth, "Override the depth distance threshold");
  app.add_option("--tfusion", g.t_fusion, "Override the fused distance threshold");
  app.add_option("--thresholds", g.thresholds_file, "Thresholds CSV written by calibrate");
  bool show_params = false;
  app.add_flag("--show-params", show_params, "Print the fixed feature constants and exit");

  // register
  auto* reg = app.add_subcommand("register", "Extract features, build ownership shares, append a record");
  std::string reg_id, reg_2d, reg_depth, reg_wm2d, reg_wmdepth, reg_dump;
  reg->add_option("--id", reg_id, "Record id")->required();
  reg->add_option("--clip2d", reg_2d, "2D frame directory")->required();
  reg->add_option("--depth", reg_depth, "Depth map directory")->required();
  reg->add_option("--wm2d", reg_wm2d, "40x40 PBM watermark for the 2D frames")->required();
  reg->add_option("--wmdepth", reg_wmdepth, "40x40 PBM watermark for the depth maps")->required();
  reg->add_option("--dump-dir", reg_dump, "Write TIRI and intermediate features as raw float64 files");

  // query
  auto* qry = app.add_subcommand("query", "Similarity-based retrieval against the registry");
  std::string q_2d, q_depth, q_mode = "fused";
  qry->add_option("--clip2d", q_2d, "Query 2D (or synthesized) frame directory")->required();
  qry->add_option("--depth", q_depth, "Query depth map directory")->required();
  qry->add_option("--mode", q_mode, "independent | fused")->capture_default_str();

  // identify
  auto* idf = app.add_subcommand("identify", "Recover watermarks by stacking master and ownership shares");
  std::string i_2d, i_depth, i_id, i_out = ".", i_mode = "fused";
  bool i_auto = false;
  idf->add_option("--clip2d", i_2d, "Query 2D frame directory")->required();
  idf->add_option("--depth", i_depth, "Query depth map directory")->required();
  auto* id_opt = idf->add_option("--id", i_id, "Matched record id");
  idf->add_flag("--auto", i_auto, "Run retrieval first and use the best match")->excludes(id_opt);
  idf->add_option("--mode", i_mode, "Retrieval mode for --auto")->capture_default_str();
  idf->add_option("--out-dir", i_out, "Directory for recovered watermarks and shares")->capture_default_str();

  // attack
  auto* atk = app.add_subcommand("attack", "Apply one attack to a clip");
  std::string a_in, a_out, a_family, a_param;
  atk->add_option("--in", a_in, "Input clip directory")->required();
  atk->add_option("--out", a_out, "Output clip directory")->required();
  atk->add_option("--family", a_family, "gb af mf cc cb gt gn li rs cr rt fl fr fd")->required();
  atk->add_option("--param", a_param, "Family parameter, e.g. 9, -30, 0.005, 1/2, 45, horizontal");

  // dibr
  auto* dib = app.add_subcommand("dibr", "Synthesize left/right views");
  std::string d_2d, d_depth, d_out;
  std::vector<double> d_baselines{0.05, 0.07};
  double d_conv = 0.5;
  dib->add_option("--clip2d", d_2d, "2D frame directory")->required();
  dib->add_option("--depth", d_depth, "Depth map directory")->required();
  dib->add_option("--out", d_out, "Output directory")->required();
  dib->add_option("--baseline", d_baselines, "Baseline as a fraction of frame width (repeatable)")->capture_default_str();
  dib->add_option("--convergence", d_conv, "Depth value with zero disparity")->capture_default_str();

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Derive thresholds from distinct-pair distances");
  std::string c_out = "thresholds.csv";
  cal->add_option("--out", c_out, "Thresholds CSV")->capture_default_str();

  // eval-det
  auto* edet = app.add_subcommand("eval-det", "DET curve over a registered corpus and the attack catalog");
  std::string e_corpus, e_out = "det.csv", e_channel = "fused", e_gnuplot;
  std::vector<std::string> e_attacks;
  edet->add_option("--corpus", e_corpus, "Corpus directory (gen-corpus layout)")->required();
  edet->add_option("--out", e_out, "DET CSV")->capture_default_str();
  edet->add_option("--channel", e_channel, "2d | depth | fused")->capture_default_str();
  edet->add_option("--attack", e_attacks, "Restrict to attack labels, e.g. \"GN 0.005\"");
  edet->add_option("--gnuplot", e_gnuplot, "Also write 'pfp pfn' columns for gnuplot");

  // eval-ber
  auto* eber = app.add_subcommand("eval-ber", "Mean BER per attack and channel");
  std::string b_corpus, b_out = "ber_table.csv", b_mode = "fused";
  std::vector<std::string> b_attacks;
  eber->add_option("--corpus", b_corpus, "Corpus directory (gen-corpus layout)")->required();
  eber->add_option("--out", b_out, "BER table CSV")->capture_default_str();
  eber->add_option("--mode", b_mode, "independent | fused")->capture_default_str();
  eber->add_option("--attack", b_attacks, "Restrict to attack labels");

  // gen-corpus
  auto* gen = app.add_subcommand("gen-corpus", "Write a synthetic DIBR corpus");
  std::string g_out;
  CorpusOptions g_opt;
  gen->add_option("--out", g_out, "Output directory")->required();
  gen->add_option("--clips", g_opt.clips, "Number of clips")->capture_default_str();
  gen->add_option("--frames", g_opt.frames, "Frames per clip")->capture_default_str();
  gen->add_option("--width", g_opt.width, "Frame width")->capture_default_str();
  gen->add_option("--height", g_opt.height, "Frame height")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (show_params) {
      const FeatureGeometry geo;
      std::cout << "size=" << geo.size << "\nframes=" << geo.frames << "\nrings=" << geo.rings
                << "\nring_width=" << geo.ring_width << "\ntiri_stride=" << geo.tiri_stride
                << "\ntiri_decay=" << geo.tiri_decay << "\ngamma=" << g.gamma << "\ntarget_pfp=" << g.target_pfp
                << '\n';
      return 0;
    }

    if (reg->parsed()) {
      Registry db = Registry::open(g.db);
      const Watermark w2 = read_watermark(reg_wm2d);
      const Watermark wd = read_watermark(reg_wmdepth);
      const FrameSequence s2d = load_clip(reg_2d, Role::two_d);
      const FrameSequence sdep = load_clip(reg_depth, Role::depth);
      if (!reg_dump.empty()) {
        fs::create_directories(reg_dump);
        for (const auto& [seq, tag] : {std::pair{&s2d, "2d"}, std::pair{&sdep, "depth"}}) {
          NormalizedClip clip = normalize_clip(*seq);
          const TiriImage tiri = compute_tiri(clip);
          const auto f = ring_centroids(normalize_deviation(tiri_deviation(clip, tiri), tiri), tiri);
          write_f64(fs::path(reg_dump) / (std::string("tiri_") + tag + ".f64"), tiri.pixels);
          write_f64(fs::path(reg_dump) / (std::string("f_") + tag + ".f64"), f);
        }
      }
      const std::size_t count = db.register_record(make_record(reg_id, clip_features(s2d, sdep), w2, wd));
      std::cout << count << '\n';
      return 0;
    }

    if (qry->parsed()) {
      Registry db = Registry::open(g.db);
      const MatchMode mode = parse_mode(q_mode);
      const Thresholds th = db.size() == 0 ? Thresholds{} : resolve_thresholds(g, db);
      const FeaturePair q = query_features(q_2d, q_depth);
      const auto hits = match_query(db, q.fn_2d, q.fn_depth, th, mode);
      print_matches(hits);
      return hits.empty() ? 1 : 0;
    }

    if (idf->parsed()) {
      Registry db = Registry::open(g.db);
      const FeaturePair q = query_features(i_2d, i_depth);
      std::string id = i_id;
      if (i_auto) {
        const auto hits = match_query(db, q.fn_2d, q.fn_depth, resolve_thresholds(g, db), parse_mode(i_mode));
        if (hits.empty()) {
          std::cerr << "no registered clip matches the query\n";
          return 1;
        }
        id = hits.front().id;
      }
      require(!id.empty(), ErrorKind::invalid_argument, "identify needs --id or --auto");
      const OwnershipEntry owned = db.lookup_ownership(id);
      const IdentifyResult r = identify(owned, q, g.gamma);
      const fs::path out(i_out);
      fs::create_directories(out);
      write_pbm(out / "recovered_2d.pbm", r.recovered_2d.bits);
      write_pbm(out / "recovered_depth.pbm", r.recovered_depth.bits);
      write_pbm(out / "master_2d.pbm", query_master_share(q.fn_2d).bits);
      write_pbm(out / "master_depth.pbm", query_master_share(q.fn_depth).bits);
      write_pbm(out / "ownership_2d.pbm", owned.o_2d.bits);
      write_pbm(out / "ownership_depth.pbm", owned.o_depth.bits);
      std::cout << "id,ber_2d,ber_depth,ber_fused\n"
                << id << ',' << fmt_double(r.ber_2d, "%.4f") << ',' << fmt_double(r.ber_depth, "%.4f") << ','
                << fmt_double(r.ber_fused, "%.4f") << '\n';
      return 0;
    }

    if (atk->parsed()) {
      const AttackSpec spec = parse_attack(a_family, a_param, g.seed);
      save_clip(a_out, apply_attack(load_clip(a_in, Role::two_d), spec));
      std::cout << attack_label(spec) << '\n';
      return 0;
    }

    if (dib->parsed()) {
      const FrameSequence s2d = load_clip(d_2d, Role::two_d);
      const FrameSequence sdep = load_clip(d_depth, Role::depth);
      for (double b : d_baselines) {
        auto [left, right] = synthesize_clip(s2d, sdep, BaselineConfig{b, d_conv});
        const fs::path base = fs::path(d_out) / ("baseline_" + fmt_double(b, "%.2f"));
        save_clip(base / "left", left);
        save_clip(base / "right", right);
        std::cout << (base / "left").string() << '\n' << (base / "right").string() << '\n';
      }
      return 0;
    }

    if (cal->parsed()) {
      const Registry db = Registry::open(g.db);
      const std::string csv = calibration_csv(calibrate_thresholds(db, g.target_pfp, g.gamma));
      write_text(c_out, csv);
      std::cout << csv;
      return 0;
    }

    if (edet->parsed()) {
      const Registry db = Registry::open(g.db);
      require(e_channel == "2d" || e_channel == "depth" || e_channel == "fused", ErrorKind::invalid_argument,
              "channel must be 2d, depth or fused");
      const auto queries = attacked_queries(db, e_corpus, select_attacks(e_attacks, g.seed));
      auto pick = [&](double d2, double dd) {
        return e_channel == "2d" ? d2 : e_channel == "depth" ? dd : fuse_scores(d2, dd, g.gamma);
      };
      std::vector<double> genuine, impostor;
      for (const auto& q : queries) {
        const auto& rec = db.record(q.clip_id);
        genuine.push_back(pick(feature_distance(q.features.fn_2d, rec.fn_2d),
                               feature_distance(q.features.fn_depth, rec.fn_depth)));
      }
      std::vector<FeaturePair> registered;
      db.for_each_feature([&](const FeatureEntry& e) { registered.push_back({e.fn_2d, e.fn_depth}); });
      const ImpostorDistances imp = impostor_distances(registered, g.gamma);
      impostor = e_channel == "2d" ? imp.d_2d : e_channel == "depth" ? imp.d_depth : imp.d_fused;
      const auto curve = det_curve(genuine, impostor);
      write_text(e_out, det_csv(curve));
      if (!e_gnuplot.empty()) {
        std::string dump = "# pfp pfn\n";
        for (const auto& p : curve) dump += fmt_double(p.pfp, "%.9g") + ' ' + fmt_double(p.pfn, "%.9g") + '\n';
        write_text(e_gnuplot, dump);
      }
      std::cout << e_out << '\n';
      return 0;
    }

    if (eber->parsed()) {
      const Registry db = Registry::open(g.db);
      const auto queries = attacked_queries(db, b_corpus, select_attacks(b_attacks, g.seed));
      const std::string csv = ber_csv(ber_table(db, queries, parse_mode(b_mode), g.gamma));
      write_text(b_out, csv);
      std::cout << csv;
      return 0;
    }

    if (gen->parsed()) {
      g_opt.seed = g.seed;
      for (int i = 0; i < g_opt.clips; ++i) write_clip(g_out, generate_clip(i, g_opt));
      std::cout << g_opt.clips << '\n';
      return 0;
    }

    std::cout << app.help();
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
