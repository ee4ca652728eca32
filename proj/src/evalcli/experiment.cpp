#include "polyscale/evalcli/experiment.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "polyscale/error.hpp"
#include "polyscale/evalcli/ches.hpp"
#include "polyscale/hiermodel/trainer.hpp"
#include "polyscale/util/hash.hpp"
#include "polyscale/util/parallel.hpp"

namespace polyscale::evalcli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kSentenceVariants = {"Joint_sent", "Joint", "Joint_struc"};
const std::vector<std::string> kDocumentVariants = {"Joint_doc", "Joint", "Joint_struc"};

std::string fmt(std::optional<double> v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

std::optional<double> mean(const std::vector<double>& xs) {
  if (xs.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

void write_text(const fs::path& path, const std::string& text, std::vector<fs::path>& files) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
  if (!out) throw StageError("write failed: " + path.string());
  files.push_back(path);
}

RepeatScores run_repeat(const Assets& a, const ExperimentConfig& cfg, std::size_t repeat) {
  const auto split = make_split(a.corpus, cfg.random, repeat);
  auto train_idx = split.train;
  train_idx.insert(train_idx.end(), split.dev.begin(), split.dev.end());
  const auto train = a.corpus.subset(train_idx);
  const auto test = a.corpus.subset(split.test);
  const auto* pre = a.pretrained ? &*a.pretrained : nullptr;

  auto base = cfg.model;
  base.seed = cfg.model.seed + repeat;
  const std::vector<std::pair<std::string, hiermodel::ModelConfig>> variants = {
      {"Joint_sent", hiermodel::joint_sent(base)},
      {"Joint_doc", hiermodel::joint_doc(base)},
      {"Joint", hiermodel::joint(base)},
      {"Joint_struc", hiermodel::joint_struc(base)},
  };
  std::vector<std::optional<double>> gold;
  for (const auto& m : test.manifestos()) gold.push_back(m.rile_gold);
  const bool annotated = test.annotated_count() > 0;

  RepeatScores out;
  for (const auto& [name, mc] : variants) {
    const auto model = hiermodel::train(train, mc, pre).model;
    const auto preds = hiermodel::predict(model, test);
    if (name != "Joint_doc" && annotated) {
      out.sentence[name] = score_sentences(test, preds, model.codes(), train, cfg.excluded_codes);
    }
    if (name != "Joint_sent") {
      std::vector<double> r;
      for (const auto& p : preds) r.push_back(p.r_hat);
      out.document[name] = correlate(r, gold);
    }
  }
  return out;
}

std::string sentence_table(const std::vector<RepeatScores>& reps) {
  std::set<std::string> langs;
  for (const auto& r : reps) {
    for (const auto& [_, s] : r.sentence) {
      for (const auto& [l, f] : s.per_language) langs.insert(l);
    }
  }
  std::ostringstream o;
  o << "language";
  for (const auto& v : kSentenceVariants) o << "," << v;
  o << "\n";
  std::map<std::string, std::vector<double>> lang_means;
  for (const auto& l : langs) {
    o << l;
    for (const auto& v : kSentenceVariants) {
      std::vector<double> xs;
      for (const auto& r : reps) {
        auto s = r.sentence.find(v);
        if (s == r.sentence.end()) continue;
        auto f = s->second.per_language.find(l);
        if (f != s->second.per_language.end()) xs.push_back(f->second);
      }
      const auto m = mean(xs);
      if (m) lang_means[v].push_back(*m);
      o << "," << fmt(m);
    }
    o << "\n";
  }
  o << "Avg.";
  for (const auto& v : kSentenceVariants) o << "," << fmt(mean(lang_means[v]));
  o << "\n";
  return o.str();
}

std::string document_table(const std::vector<RepeatScores>& reps) {
  std::ostringstream o;
  o << "approach,r,rho\n";
  for (const auto& v : kDocumentVariants) {
    std::vector<double> r, rho;
    for (const auto& rep : reps) {
      auto d = rep.document.find(v);
      if (d == rep.document.end() || !d->second) continue;
      r.push_back(d->second->r);
      rho.push_back(d->second->rho);
    }
    o << v << "," << fmt(mean(r)) << "," << fmt(mean(rho)) << "\n";
  }
  return o.str();
}

std::string repeats_csv(const std::vector<RepeatScores>& reps) {
  std::ostringstream o;
  o << "repeat,approach,measure,language,value\n";
  for (std::size_t i = 0; i < reps.size(); ++i) {
    for (const auto& [v, s] : reps[i].sentence) {
      o << i << "," << v << ",micro_f,all," << fmt(s.micro_f) << "\n";
      for (const auto& [l, f] : s.per_language) o << i << "," << v << ",micro_f," << l << "," << fmt(f) << "\n";
    }
    for (const auto& [v, c] : reps[i].document) {
      o << i << "," << v << ",r,all," << fmt(c ? std::optional(c->r) : std::nullopt) << "\n";
      o << i << "," << v << ",rho,all," << fmt(c ? std::optional(c->rho) : std::nullopt) << "\n";
    }
  }
  return o.str();
}

std::string temporal_sentence_table(const TwoStageResult& t) {
  std::ostringstream o;
  o << "approach,micro_f\n";
  o << "Majority," << fmt(t.sentences.majority_f) << "\n";
  o << "Joint_struc," << fmt(t.sentences.micro_f) << "\n";
  return o.str();
}

std::string ablation_table(const TwoStageResult& t) {
  std::ostringstream o;
  o << "approach,rile_r,rile_rho,ches_r,ches_rho,ground_rules\n";
  for (const auto& row : t.ablation) {
    auto part = [](const std::optional<Correlation>& c, bool rho) {
      return fmt(c ? std::optional(rho ? c->rho : c->r) : std::nullopt);
    };
    o << row.name << "," << part(row.rile, false) << "," << part(row.rile, true) << ","
      << part(row.ches, false) << "," << part(row.ches, true) << "," << row.ground_rules << "\n";
  }
  return o.str();
}

std::string positions_csv(const Assets& a, const TwoStageResult& t) {
  std::ostringstream o;
  o << "id,party_id,country,election_date,r_hat,r_cal,rile_gold,ches_gold\n";
  for (std::size_t i = 0; i < t.test.size(); ++i) {
    const auto& m = a.corpus[t.test[i]];
    o << m.id << "," << m.party_id << "," << m.country << ","
      << util::format_iso_date(m.election_date) << "," << fmt(t.test_predictions[i].r_hat) << ","
      << fmt(t.calibrated.at(i)) << "," << fmt(m.rile_gold) << "," << fmt(m.ches_gold) << "\n";
  }
  return o.str();
}

const char* kSentenceGp = R"(set datafile separator ','
set style data histograms
set style histogram clustered gap 1
set style fill solid 0.8 border -1
set key top left
set ylabel 'micro F'
set yrange [0:1]
set terminal pngcairo size 900,500
set output 'sentence_f.png'
plot 'sentence_f.csv' using 2:xtic(1) title columnhead, '' using 3 title columnhead, '' using 4 title columnhead
)";

const char* kAblationGp = R"(set datafile separator ','
set style data histograms
set style histogram clustered gap 1
set style fill solid 0.8 border -1
set xtics rotate by -30
set key top left
set ylabel 'correlation'
set terminal pngcairo size 900,500
set output 'calibration_ablation.png'
plot 'calibration_ablation.csv' using 2:xtic(1) title columnhead, '' using 3 title columnhead, '' using 4 title columnhead, '' using 5 title columnhead
)";

const char* kPositionsGp = R"(set datafile separator ','
set key off
set xlabel 'uncalibrated r_hat'
set ylabel 'calibrated r_cal'
set xrange [-1:1]
set yrange [-1:1]
set terminal pngcairo size 600,600
set output 'temporal_positions.png'
plot 'temporal_positions.csv' every ::1 using 5:6 with points pt 7
)";

void write_gnuplot(const fs::path& dir, std::vector<fs::path>& files) {
  if (fs::exists(dir / "sentence_f.csv")) write_text(dir / "sentence_f.gp", kSentenceGp, files);
  if (fs::exists(dir / "calibration_ablation.csv")) write_text(dir / "calibration_ablation.gp", kAblationGp, files);
  if (fs::exists(dir / "temporal_positions.csv")) write_text(dir / "temporal_positions.gp", kPositionsGp, files);
}

json input_entry(const fs::path& p) { return {{"path", p.string()}, {"blob", util::git_blob_hash_file(p)}}; }

}  // namespace

fs::path default_program_path() {
  if (const char* dir = std::getenv("POLYSCALE_DATA")) return fs::path(dir) / "manifesto_calibration.psl";
  return fs::path(POLYSCALE_DATA_DIR) / "manifesto_calibration.psl";
}

void run_stage(const std::string& name, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    throw ValidationError(name + ": " + e.what());
  } catch (const std::exception& e) {
    throw StageError(name + ": " + e.what());
  }
}

Assets load_assets(const DataPaths& paths) {
  if (paths.corpus.empty()) throw ValidationError("no corpus given");
  const auto scheme =
      paths.scheme ? corpus::LabelScheme::load(*paths.scheme) : corpus::LabelScheme::cmp_default();
  auto c = corpus::load_corpus(paths.corpus, scheme);
  if (paths.ches) c = attach_ches(c, ChesTable::load(*paths.ches));
  Assets a{std::move(c), {}, {}, std::nullopt};
  if (paths.party_graph) a.graph = calibration::PartyGraph::load(*paths.party_graph);
  a.program = pslengine::load_program(paths.program ? *paths.program : default_program_path());
  if (!paths.embeddings.empty()) {
    std::vector<embedalign::EmbeddingTable> tables;
    for (const auto& [lang, p] : paths.embeddings) tables.push_back(embedalign::load_embeddings(p, lang));
    std::map<std::string, embedalign::BilingualLexicon> lex;
    for (const auto& [lang, p] : paths.lexicons) lex.emplace(lang, embedalign::load_lexicon(p));
    a.pretrained = build_pretrained(tables, lex, paths.pivot);
  }
  return a;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  std::optional<Assets> loaded;
  run_stage("load", [&] { loaded.emplace(load_assets(cfg.data)); });
  const Assets& a = *loaded;

  ExperimentReport rep;
  if (cfg.run_random) {
    run_stage("random", [&] {
      rep.repeats.resize(cfg.random.repeats);
      util::parallel_for(cfg.random.repeats, [&](std::size_t r) {
        rep.repeats[r] = run_repeat(a, cfg, r);
        spdlog::info("random split {} of {} done", r + 1, cfg.random.repeats);
      });
    });
    run_stage("report", [&] {
      write_text(out_dir / "sentence_f.csv", sentence_table(rep.repeats), rep.files);
      write_text(out_dir / "document_scores.csv", document_table(rep.repeats), rep.files);
      write_text(out_dir / "random_repeats.csv", repeats_csv(rep.repeats), rep.files);
    });
  }
  if (cfg.run_temporal) {
    run_stage("temporal", [&] {
      const auto split = make_split(a.corpus, cfg.temporal, 0);
      TwoStageOptions opts;
      opts.model = cfg.model;
      opts.calibration = cfg.calibration;
      opts.folds = cfg.folds;
      opts.seed = cfg.seed;
      opts.fix_training_pos = cfg.fix_training_pos;
      opts.excluded_codes = cfg.excluded_codes;
      rep.temporal = run_two_stage(a.corpus, split, a.graph, a.program, opts,
                                   a.pretrained ? &*a.pretrained : nullptr);
      for (auto i : rep.temporal->test) rep.temporal_test_ids.push_back(a.corpus[i].id);
    });
    run_stage("report", [&] {
      write_text(out_dir / "temporal_sentence_f.csv", temporal_sentence_table(*rep.temporal), rep.files);
      write_text(out_dir / "calibration_ablation.csv", ablation_table(*rep.temporal), rep.files);
      write_text(out_dir / "temporal_positions.csv", positions_csv(a, *rep.temporal), rep.files);
    });
  }
  run_stage("report", [&] {
    if (cfg.gnuplot) write_gnuplot(out_dir, rep.files);
    json m;
    m["seed"] = cfg.seed;
    m["model_seed"] = cfg.model.seed;
    m["random_split_seed"] = cfg.random.seed;
    m["temporal_split_seed"] = cfg.temporal.seed;
    m["repeats"] = cfg.run_random ? cfg.random.repeats : 0;
    m["config_sha1"] = util::sha1_hex(canonical_config(cfg));
    json inputs = json::object();
    const auto& d = cfg.data;
    inputs["corpus"] = input_entry(d.corpus);
    if (d.scheme) inputs["scheme"] = input_entry(*d.scheme);
    if (d.party_graph) inputs["party_graph"] = input_entry(*d.party_graph);
    inputs["program"] = input_entry(d.program ? *d.program : default_program_path());
    if (d.ches) inputs["ches"] = input_entry(*d.ches);
    for (const auto& [l, p] : d.embeddings) inputs["embeddings." + l] = input_entry(p);
    for (const auto& [l, p] : d.lexicons) inputs["lexicon." + l] = input_entry(p);
    m["inputs"] = inputs;
    json outputs = json::object();
    for (const auto& f : rep.files) outputs[f.filename().string()] = util::git_blob_hash_file(f);
    m["outputs"] = outputs;
    std::vector<fs::path> ignored;
    write_text(out_dir / "manifest.json", m.dump(2) + "\n", ignored);
    rep.files.push_back(out_dir / "manifest.json");
  });
  return rep;
}

std::string summarize_run(const fs::path& dir, bool gnuplot) {
  const auto manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) throw ValidationError("no manifest.json in " + dir.string());
  json m;
  try {
    m = json::parse(util::read_file(manifest_path));
  } catch (const json::exception& e) {
    throw ValidationError("malformed manifest.json: " + std::string(e.what()));
  }
  std::ostringstream o;
  o << "config " << m.value("config_sha1", std::string("?")) << ", seed " << m.value("seed", 0) << "\n";
  for (const auto& [name, blob] : m.at("outputs").items()) {
    const auto p = dir / name;
    if (!fs::exists(p)) throw ValidationError("missing output " + name);
    if (util::git_blob_hash_file(p) != blob.get<std::string>()) {
      throw ValidationError("output changed since the run: " + name);
    }
  }
  for (const char* table : {"sentence_f.csv", "document_scores.csv",
                            "temporal_sentence_f.csv", "calibration_ablation.csv"}) {
    const auto p = dir / table;
    if (!fs::exists(p)) continue;
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(util::read_file(p));
    std::string line;
    std::vector<std::size_t> width;
    while (std::getline(in, line)) {
      std::vector<std::string> cells;
      std::stringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) cells.push_back(cell.empty() ? "-" : cell);
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (width.size() <= i) width.push_back(0);
        width[i] = std::max(width[i], cells[i].size());
      }
      rows.push_back(std::move(cells));
    }
    o << "\n" << table << "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        o << r[i] << std::string(width[i] - r[i].size() + 2, ' ');
      }
      o << "\n";
    }
  }
  if (gnuplot) {
    std::vector<fs::path> ignored;
    write_gnuplot(dir, ignored);
  }
  return o.str();
}

}  // namespace polyscale::evalcli
