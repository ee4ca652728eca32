// polyscale command-line front end.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>
#include <yaml-cpp/yaml.h>

#include "polyscale/calibration/calibration.hpp"
#include "polyscale/embedalign/align.hpp"
#include "polyscale/error.hpp"
#include "polyscale/evalcli/config.hpp"
#include "polyscale/evalcli/experiment.hpp"
#include "polyscale/evalcli/synthetic.hpp"
#include "polyscale/evalcli/tuning.hpp"
#include "polyscale/hiermodel/checkpoint.hpp"
#include "polyscale/hiermodel/trainer.hpp"
#include "polyscale/pslengine/ground.hpp"
#include "polyscale/pslengine/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace polyscale;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t stack_folds = 0;
  bool gnuplot = false;
};

// Per-subcommand sections allowed next to the experiment keys.
const std::set<std::string> kToolSections = {"align",     "predict", "ground", "infer",
                                             "calibrate", "report",  "synth",  "tune"};

class Context {
 public:
  explicit Context(const Options& o) : opts_(o) {
    if (!o.config.empty()) {
      root_ = evalcli::load_config_file(o.config);
      base_ = fs::absolute(o.config).parent_path();
      if (!root_.IsMap()) throw ValidationError("config must be a mapping");
      static const std::set<std::string> experiment = {"seed",  "data",     "model",   "calibration",
                                                       "split", "temporal", "evaluate"};
      for (const auto& kv : root_) {
        const auto key = kv.first.as<std::string>();
        if (!experiment.count(key) && !kToolSections.count(key)) {
          throw ValidationError("unknown top-level config key '" + key + "'");
        }
      }
    } else {
      root_ = YAML::Node(YAML::NodeType::Map);
      base_ = fs::current_path();
    }
  }

  YAML::Node section(const char* name) const { return root_[name]; }

  evalcli::ExperimentConfig experiment() const {
    auto cfg = evalcli::read_experiment_config(root_, base_, kToolSections);
    if (opts_.seed) cfg.reseed(*opts_.seed);
    return cfg;
  }

  fs::path out() const {
    if (opts_.out.empty()) throw ValidationError("--out is required");
    fs::create_directories(opts_.out);
    return opts_.out;
  }

  fs::path resolve(const std::string& p) const {
    const fs::path path(p);
    return path.is_absolute() ? path : base_ / path;
  }

  std::optional<fs::path> path_in(const YAML::Node& sec, const char* key) const {
    if (!sec || !sec[key]) return std::nullopt;
    return resolve(sec[key].as<std::string>());
  }

  fs::path required_path(const YAML::Node& sec, const char* key, const std::string& where) const {
    auto p = path_in(sec, key);
    if (!p) throw ValidationError("config needs " + where + "." + key);
    return *p;
  }

  const Options& opts() const { return opts_; }

 private:
  Options opts_;
  YAML::Node root_;
  fs::path base_;
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw StageError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

corpus::LabelScheme scheme_of(const evalcli::DataPaths& d) {
  return d.scheme ? corpus::LabelScheme::load(*d.scheme) : corpus::LabelScheme::cmp_default();
}

std::vector<std::string> code_names(const corpus::LabelScheme& s) {
  std::vector<std::string> out;
  for (const auto& c : s.codes()) out.push_back(c.code);
  return out;
}

int cmd_align(const Context& ctx) {
  auto cfg = ctx.experiment();
  auto sec = ctx.section("align");
  auto embeddings = cfg.data.embeddings;
  auto lexicons = cfg.data.lexicons;
  std::string pivot = cfg.data.pivot;
  embedalign::AlignOptions ao;
  if (sec) {
    if (sec["embeddings"]) {
      embeddings.clear();
      for (const auto& kv : sec["embeddings"]) embeddings[kv.first.as<std::string>()] = ctx.resolve(kv.second.as<std::string>());
    }
    if (sec["lexicons"]) {
      lexicons.clear();
      for (const auto& kv : sec["lexicons"]) lexicons[kv.first.as<std::string>()] = ctx.resolve(kv.second.as<std::string>());
    }
    if (sec["pivot"]) pivot = sec["pivot"].as<std::string>();
    if (sec["center"]) ao.center = sec["center"].as<bool>();
    if (sec["normalize"]) ao.normalize = sec["normalize"].as<bool>();
  }
  if (!embeddings.count(pivot)) throw ValidationError("no embeddings for pivot language " + pivot);
  const auto out = ctx.out();

  std::vector<embedalign::EmbeddingTable> tables;
  for (const auto& [lang, p] : embeddings) tables.push_back(embedalign::load_embeddings(p, lang));
  const embedalign::EmbeddingTable* pivot_table = nullptr;
  for (const auto& t : tables) {
    if (t.language() == pivot) pivot_table = &t;
  }
  std::map<std::string, embedalign::ProjectionMatrix> projections;
  json report = json::object();
  for (const auto& t : tables) {
    if (t.language() == pivot) continue;
    auto lex = lexicons.find(t.language());
    if (lex == lexicons.end()) throw ValidationError("no lexicon for language " + t.language());
    auto r = embedalign::align(t, *pivot_table, embedalign::load_lexicon(lex->second), ao);
    report[t.language()] = {{"used_pairs", r.used_pairs},
                            {"dropped_pairs", r.dropped_pairs},
                            {"orthogonality_error", r.projection.orthogonality_error()}};
    spdlog::info("{}: {} pairs used, {} dropped", t.language(), r.used_pairs, r.dropped_pairs);
    projections[t.language()] = std::move(r.projection);
  }
  embedalign::save_embeddings(embedalign::build_multilingual(tables, projections, pivot),
                              out / "multilingual.vec");
  write_json(out / "alignment.json", report);
  return 0;
}

int cmd_train(const Context& ctx) {
  const auto cfg = ctx.experiment();
  cfg.model.validate();
  const auto out = ctx.out();
  std::optional<evalcli::Assets> a;
  evalcli::run_stage("load", [&] { a.emplace(evalcli::load_assets(cfg.data)); });
  std::optional<hiermodel::TrainingResult> res;
  evalcli::run_stage("train", [&] {
    res.emplace(hiermodel::train(a->corpus, cfg.model, a->pretrained ? &*a->pretrained : nullptr));
  });
  hiermodel::save_checkpoint(res->model, out / "model.ckpt");
  std::ofstream trace(out / "trace.csv");
  trace << "epoch,mean_loss,documents\n";
  for (const auto& e : res->trace) trace << e.epoch << "," << e.mean_loss << "," << e.documents << "\n";
  return 0;
}

int cmd_predict(const Context& ctx) {
  const auto cfg = ctx.experiment();
  auto sec = ctx.section("predict");
  std::size_t folds = ctx.opts().stack_folds;
  if (!folds && sec && sec["stack_folds"]) folds = sec["stack_folds"].as<std::size_t>();
  const auto scheme = scheme_of(cfg.data);
  const auto corpus_path = ctx.path_in(sec, "corpus").value_or(cfg.data.corpus);
  if (corpus_path.empty()) throw ValidationError("config needs predict.corpus or data.corpus");
  const auto docs = corpus::load_corpus(corpus_path, scheme);
  const auto out = ctx.out();

  if (folds > 0) {
    std::optional<embedalign::EmbeddingTable> pre;
    if (!cfg.data.embeddings.empty()) {
      auto d = cfg.data;
      d.corpus = corpus_path;
      pre = evalcli::load_assets(d).pretrained;
    }
    std::optional<calibration::StackedEstimates> st;
    evalcli::run_stage("stack", [&] {
      st.emplace(calibration::stacked_estimates(docs, cfg.model, folds, cfg.seed, pre ? &*pre : nullptr));
    });
    hiermodel::save_predictions(st->predictions, code_names(scheme), out / "predictions.jsonl");
    std::ofstream f(out / "folds.csv");
    f << "id,fold\n";
    for (std::size_t i = 0; i < docs.size(); ++i) f << docs[i].id << "," << st->fold[i] << "\n";
    return 0;
  }
  const auto model = hiermodel::load_checkpoint(ctx.required_path(sec, "checkpoint", "predict"));
  std::vector<hiermodel::Prediction> preds;
  evalcli::run_stage("predict", [&] { preds = hiermodel::predict(model, docs); });
  hiermodel::save_predictions(preds, model, out / "predictions.jsonl");
  return 0;
}

std::string atom_text(const pslengine::GroundNetwork& net, const pslengine::AtomRef& r) {
  const auto& a = net.atoms().at(r.atom);
  std::string s = r.negated ? "!" : "";
  s += a.predicate + "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) s += (i ? "," : "") + a.args[i];
  return s + ")";
}

pslengine::Program program_from(const Context& ctx, const YAML::Node& sec) {
  return pslengine::load_program(ctx.path_in(sec, "program").value_or(evalcli::default_program_path()));
}

int cmd_ground(const Context& ctx) {
  auto sec = ctx.section("ground");
  const auto program = program_from(ctx, sec);
  const auto db = pslengine::RelationalDatabase::load(ctx.required_path(sec, "database", "ground"));
  const auto out = ctx.out();
  std::optional<pslengine::GroundNetwork> net;
  evalcli::run_stage("ground", [&] { net.emplace(pslengine::ground(program, db)); });
  std::ofstream f(out / "ground_rules.tsv");
  f << "rule\tweight\texponent\tbody\thead\n";
  for (const auto& r : net->rules()) {
    std::string body;
    for (std::size_t i = 0; i < r.body.size(); ++i) body += (i ? " & " : "") + atom_text(*net, r.body[i]);
    f << r.rule << "\t" << r.weight << "\t" << r.exponent << "\t" << body << "\t" << atom_text(*net, r.head) << "\n";
  }
  const json summary = {{"atoms", net->atoms().size()},
                        {"free_atoms", net->free_count()},
                        {"ground_rules", net->rules().size()}};
  write_json(out / "ground.json", summary);
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_infer(const Context& ctx) {
  auto sec = ctx.section("infer");
  const auto program = program_from(ctx, sec);
  const auto db = pslengine::RelationalDatabase::load(ctx.required_path(sec, "database", "infer"));
  auto cal = ctx.experiment().calibration;
  const auto out = ctx.out();
  std::optional<pslengine::GroundNetwork> net;
  pslengine::MapResult res;
  evalcli::run_stage("ground", [&] { net.emplace(pslengine::ground(program, db)); });
  evalcli::run_stage("infer", [&] { res = pslengine::map_inference(*net, cal.solver); });
  std::ofstream f(out / "map.tsv");
  for (std::size_t v = 0; v < net->free_count(); ++v) {
    const auto& a = net->atoms()[net->free_atoms()[v]];
    f << "target\t" << a.predicate << "\t" << res.y[v];
    for (const auto& arg : a.args) f << "\t" << arg;
    f << "\n";
  }
  const json summary = {{"energy", res.energy},
                        {"iterations", res.iterations},
                        {"converged", res.converged},
                        {"free_atoms", net->free_count()},
                        {"ground_rules", net->rules().size()}};
  write_json(out / "inference.json", summary);
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_calibrate(const Context& ctx) {
  const auto cfg = ctx.experiment();
  auto sec = ctx.section("calibrate");
  const auto scheme = scheme_of(cfg.data);
  const auto corpus_path = ctx.path_in(sec, "corpus").value_or(cfg.data.corpus);
  if (corpus_path.empty()) throw ValidationError("config needs calibrate.corpus or data.corpus");
  const auto docs = corpus::load_corpus(corpus_path, scheme);
  const auto graph_path = ctx.path_in(sec, "party_graph")
                              .value_or(cfg.data.party_graph.value_or(fs::path{}));
  const auto graph = graph_path.empty() ? calibration::PartyGraph{} : calibration::PartyGraph::load(graph_path);
  const auto program = pslengine::load_program(
      ctx.path_in(sec, "program").value_or(cfg.data.program.value_or(evalcli::default_program_path())));
  const auto loaded = hiermodel::load_predictions(ctx.required_path(sec, "predictions", "calibrate"),
                                                  code_names(scheme));
  std::map<std::string, const hiermodel::Prediction*> by_id;
  for (const auto& p : loaded) by_id[p.manifesto_id] = &p;
  std::vector<hiermodel::Prediction> preds;
  for (const auto& m : docs.manifestos()) {
    auto it = by_id.find(m.id);
    if (it == by_id.end()) throw ValidationError("no prediction for manifesto " + m.id);
    preds.push_back(*it->second);
  }
  std::set<calibration::RuleGroup> groups = {calibration::RuleGroup::Coalition, calibration::RuleGroup::Similarity,
                                             calibration::RuleGroup::Ratio, calibration::RuleGroup::Temporal};
  if (sec && sec["groups"]) {
    groups.clear();
    for (const auto& g : sec["groups"]) {
      const auto name = g.as<std::string>();
      bool found = false;
      for (auto rg : {calibration::RuleGroup::Coalition, calibration::RuleGroup::Similarity,
                      calibration::RuleGroup::Ratio, calibration::RuleGroup::Temporal}) {
        if (calibration::to_string(rg) == name) {
          groups.insert(rg);
          found = true;
        }
      }
      if (!found) throw ValidationError("unknown rule group '" + name + "' (coal, esim, ploc, temp)");
    }
  }
  const auto out = ctx.out();
  std::optional<pslengine::RelationalDatabase> db;
  evalcli::run_stage("database", [&] { db.emplace(calibration::build_database(docs, preds, graph, cfg.calibration)); });
  db->save(out / "database.tsv");
  std::optional<calibration::CalibrationResult> res;
  evalcli::run_stage("calibrate", [&] {
    res.emplace(calibration::calibrate(*db, calibration::select_rules(program, groups), cfg.calibration));
  });
  std::ofstream f(out / "calibrated.csv");
  f << "id,r_hat,pos,r_cal\n";
  f.precision(10);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto& id = docs[i].id;
    f << id << "," << preds[i].r_hat << "," << res->pos.at(id) << "," << res->r_cal.at(id) << "\n";
  }
  const json summary = {{"ground_rules", res->ground_rules},
                        {"energy", res->solver.energy},
                        {"iterations", res->solver.iterations},
                        {"converged", res->solver.converged}};
  write_json(out / "calibration.json", summary);
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_evaluate(const Context& ctx) {
  auto cfg = ctx.experiment();
  if (ctx.opts().gnuplot) cfg.gnuplot = true;
  const auto rep = evalcli::run_experiment(cfg, ctx.out());
  for (const auto& f : rep.files) std::cout << f.string() << "\n";
  return 0;
}

int cmd_report(const Context& ctx) {
  auto sec = ctx.section("report");
  fs::path run = ctx.path_in(sec, "run").value_or(fs::path{});
  if (run.empty()) run = ctx.out();
  const auto text = evalcli::summarize_run(run, ctx.opts().gnuplot);
  std::cout << text;
  if (!ctx.opts().out.empty()) {
    std::ofstream(ctx.out() / "report.txt") << text;
  }
  return 0;
}

int cmd_synth(const Context& ctx) {
  auto sec = ctx.section("synth");
  evalcli::SyntheticConfig sc;
  if (sec) {
    if (sec["documents"]) sc.documents = sec["documents"].as<std::size_t>();
    if (sec["languages"]) sc.languages = sec["languages"].as<std::vector<std::string>>();
    if (sec["parties_per_country"]) sc.parties_per_country = sec["parties_per_country"].as<std::size_t>();
    if (sec["annotated_fraction"]) sc.annotated_fraction = sec["annotated_fraction"].as<double>();
    if (sec["embedding_dim"]) sc.embedding_dim = sec["embedding_dim"].as<std::size_t>();
    if (sec["seed"]) sc.seed = sec["seed"].as<std::uint64_t>();
  }
  if (ctx.opts().seed) sc.seed = *ctx.opts().seed;
  const auto out = ctx.out();
  std::optional<evalcli::SyntheticData> data;
  evalcli::run_stage("synth", [&] {
    data.emplace(evalcli::generate_synthetic(corpus::LabelScheme::cmp_default(), sc));
  });
  evalcli::write_synthetic(*data, out);

  // A ready-to-run config next to the generated files.
  YAML::Emitter y;
  y << YAML::BeginMap << YAML::Key << "seed" << YAML::Value << sc.seed;
  y << YAML::Key << "data" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "corpus" << YAML::Value << "corpus.jsonl";
  y << YAML::Key << "party_graph" << YAML::Value << "party_graph.tsv";
  y << YAML::Key << "ches" << YAML::Value << "ches.tsv";
  y << YAML::Key << "pivot" << YAML::Value << sc.languages.front();
  y << YAML::Key << "embeddings" << YAML::Value << YAML::BeginMap;
  for (const auto& l : sc.languages) y << YAML::Key << l << YAML::Value << ("emb_" + l + ".vec");
  y << YAML::EndMap << YAML::Key << "lexicons" << YAML::Value << YAML::BeginMap;
  for (std::size_t i = 1; i < sc.languages.size(); ++i) {
    const auto& l = sc.languages[i];
    y << YAML::Key << l << YAML::Value << ("lex_" + l + "_" + sc.languages.front() + ".tsv");
  }
  y << YAML::EndMap << YAML::EndMap;
  y << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "word_hidden" << YAML::Value << 16 << YAML::Key << "sentence_hidden" << YAML::Value << 16;
  y << YAML::Key << "epochs" << YAML::Value << 10 << YAML::EndMap;
  y << YAML::Key << "split" << YAML::Value << YAML::BeginMap << YAML::Key << "repeats" << YAML::Value << 3 << YAML::EndMap;
  y << YAML::EndMap;
  std::ofstream(out / "config.yaml") << y.c_str() << "\n";
  std::cout << (out / "config.yaml").string() << "\n";
  return 0;
}

void write_sweep(const fs::path& path, const std::vector<evalcli::TunePoint>& pts) {
  std::ofstream f(path);
  f << "alpha,beta,gamma,dev_f,dev_r,score\n";
  auto cell = [](const std::optional<double>& v) { return v ? std::to_string(*v) : std::string(); };
  for (const auto& p : pts) {
    f << p.alpha << "," << p.beta << "," << p.gamma << "," << cell(p.dev_f) << "," << cell(p.dev_r) << ","
      << p.score << "\n";
  }
}

int cmd_tune(const Context& ctx) {
  const auto cfg = ctx.experiment();
  auto sec = ctx.section("tune");
  evalcli::TuneGrid grid;
  if (sec) {
    if (sec["alphas"]) grid.alphas = sec["alphas"].as<std::vector<double>>();
    if (sec["gammas"]) grid.gammas = sec["gammas"].as<std::vector<double>>();
    if (sec["betas"]) grid.betas = sec["betas"].as<std::vector<double>>();
    if (sec["beta_during_gamma"]) grid.beta_during_gamma = sec["beta_during_gamma"].as<double>();
  }
  const auto out = ctx.out();
  std::optional<evalcli::Assets> a;
  evalcli::run_stage("load", [&] { a.emplace(evalcli::load_assets(cfg.data)); });
  std::optional<evalcli::TuneResult> res;
  evalcli::run_stage("tune", [&] {
    const auto split = evalcli::make_split(a->corpus, cfg.random, 0);
    res.emplace(evalcli::tune(a->corpus.subset(split.train), a->corpus.subset(split.dev), cfg.model, grid,
                              a->pretrained ? &*a->pretrained : nullptr));
  });
  write_sweep(out / "tune_alpha.csv", res->alpha_sweep);
  write_sweep(out / "tune_gamma.csv", res->gamma_sweep);
  write_sweep(out / "tune_beta.csv", res->beta_sweep);
  YAML::Emitter y;
  y.SetDoublePrecision(6);
  y << YAML::BeginMap << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "alpha" << YAML::Value << res->best.alpha;
  y << YAML::Key << "beta" << YAML::Value << res->best.beta;
  y << YAML::Key << "gamma" << YAML::Value << res->best.gamma;
  y << YAML::EndMap << YAML::EndMap;
  std::ofstream(out / "best.yaml") << y.c_str() << "\n";
  std::cout << y.c_str() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("polyscale"));
  spdlog::set_pattern("%H:%M:%S %^%l%$ %v");

  CLI::App app{"polyscale: multilingual manifesto position scaling"};
  app.require_subcommand(1);
  Options opts;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"align", "align per-language embeddings to the pivot language"},
      {"train", "train the hierarchical model"},
      {"predict", "predict sentence codes and document positions"},
      {"ground", "ground a rule program on a database"},
      {"infer", "MAP inference for a rule program on a database"},
      {"calibrate", "calibrate document positions with the rule program"},
      {"evaluate", "run the random-split and temporal experiments"},
      {"report", "verify a run directory and print its tables"},
      {"synth", "write a synthetic corpus with planted positions"},
      {"tune", "grid-search the loss weights on a dev split"},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    auto* s = app.add_subcommand(name, help);
    s->add_option("--config", opts.config, "YAML config file")->check(CLI::ExistingFile);
    s->add_option("--seed", opts.seed, "master seed");
    s->add_option("--out", opts.out, "output directory");
    subs[name] = s;
  }
  subs["predict"]->add_option("--stack-folds", opts.stack_folds, "out-of-fold predictions with k folds");
  subs["evaluate"]->add_flag("--gnuplot", opts.gnuplot, "also write gnuplot scripts");
  subs["report"]->add_flag("--gnuplot", opts.gnuplot, "also write gnuplot scripts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::map<std::string, int (*)(const Context&)> handlers = {
      {"align", cmd_align},       {"train", cmd_train},       {"predict", cmd_predict},
      {"ground", cmd_ground},     {"infer", cmd_infer},       {"calibrate", cmd_calibrate},
      {"evaluate", cmd_evaluate}, {"report", cmd_report},     {"synth", cmd_synth},
      {"tune", cmd_tune},
  };
  try {
    const Context ctx(opts);
    for (const auto& [name, sub] : subs) {
      if (sub->parsed()) return handlers.at(name)(ctx);
    }
  } catch (const ValidationError& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const YAML::Exception& e) {
    spdlog::error("config: {}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 3;
  }
  return 2;
}
