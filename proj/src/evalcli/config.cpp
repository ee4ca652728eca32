#include "polyscale/evalcli/config.hpp"

#include <sstream>

#include "polyscale/error.hpp"

namespace polyscale::evalcli {

namespace fs = std::filesystem;

namespace {

void check_keys(const YAML::Node& node, const std::set<std::string>& allowed,
                const std::string& section) {
  if (!node) return;
  if (!node.IsMap()) throw ValidationError("config section '" + section + "' must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      throw ValidationError("unknown key '" + key + "' in config section '" + section + "'");
    }
  }
}

template <class T>
void read(const YAML::Node& node, const char* key, T& out) {
  if (!node || !node[key]) return;
  try {
    out = node[key].as<T>();
  } catch (const YAML::Exception&) {
    throw ValidationError(std::string("config key '") + key + "' has the wrong type");
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

void ExperimentConfig::reseed(std::uint64_t s) {
  seed = s;
  model.seed = s;
  random.seed = s;
  temporal.seed = s;
}

void ExperimentConfig::validate() const {
  if (data.corpus.empty()) throw ValidationError("config needs data.corpus");
  model.validate();
  calibration.validate();
  random.validate();
  temporal.validate();
  if (folds < 2) throw ValidationError("folds must be at least 2");
  if (!run_random && !run_temporal) throw ValidationError("nothing to run: random and temporal both off");
  for (const auto& [lang, _] : data.lexicons) {
    if (!data.embeddings.count(lang)) throw ValidationError("lexicon for " + lang + " without embeddings");
  }
}

hiermodel::ModelConfig read_model_config(const YAML::Node& node, hiermodel::ModelConfig c) {
  check_keys(node,
             {"word_hidden", "sentence_hidden", "embedding_dim", "vocab_cap", "alpha", "beta",
              "gamma", "learning_rate", "clip_norm", "epochs", "seed", "trainable_embeddings"},
             "model");
  read(node, "word_hidden", c.word_hidden);
  read(node, "sentence_hidden", c.sentence_hidden);
  read(node, "embedding_dim", c.embedding_dim);
  read(node, "vocab_cap", c.vocab_cap);
  read(node, "alpha", c.alpha);
  read(node, "beta", c.beta);
  read(node, "gamma", c.gamma);
  read(node, "learning_rate", c.learning_rate);
  read(node, "clip_norm", c.clip_norm);
  read(node, "epochs", c.epochs);
  read(node, "seed", c.seed);
  read(node, "trainable_embeddings", c.trainable_embeddings);
  return c;
}

calibration::CalibrationConfig read_calibration_config(const YAML::Node& node,
                                                       calibration::CalibrationConfig c) {
  check_keys(node,
             {"recency_window_years", "similarity_clamp", "prior_weight", "max_iterations",
              "tolerance", "window", "decay", "folds", "fix_training_pos"},
             "calibration");
  read(node, "recency_window_years", c.recency_window_years);
  read(node, "similarity_clamp", c.similarity_clamp);
  read(node, "prior_weight", c.prior_weight);
  read(node, "max_iterations", c.solver.max_iterations);
  read(node, "tolerance", c.solver.tolerance);
  read(node, "window", c.solver.window);
  read(node, "decay", c.solver.decay);
  return c;
}

SplitSpec read_split_spec(const YAML::Node& node, SplitSpec s) {
  check_keys(node, {"kind", "test_fraction", "cutoff", "repeats", "seed", "dev_fraction"}, "split");
  if (node && node["kind"]) {
    std::string k;
    read(node, "kind", k);
    s.kind = parse_split_kind(k);
  }
  read(node, "test_fraction", s.test_fraction);
  if (node && node["cutoff"]) {
    std::string d;
    read(node, "cutoff", d);
    s.cutoff = util::parse_iso_date(d);
  }
  read(node, "repeats", s.repeats);
  read(node, "seed", s.seed);
  read(node, "dev_fraction", s.dev_fraction);
  return s;
}

DataPaths read_data_paths(const YAML::Node& node, const fs::path& base) {
  check_keys(node,
             {"corpus", "scheme", "party_graph", "program", "ches", "pivot", "embeddings",
              "lexicons"},
             "data");
  DataPaths d;
  if (!node) return d;
  auto opt = [&](const char* key) -> std::optional<fs::path> {
    std::string v;
    read(node, key, v);
    if (v.empty()) return std::nullopt;
    return resolve(base, v);
  };
  if (auto c = opt("corpus")) d.corpus = *c;
  d.scheme = opt("scheme");
  d.party_graph = opt("party_graph");
  d.program = opt("program");
  d.ches = opt("ches");
  read(node, "pivot", d.pivot);
  std::map<std::string, std::string> m;
  read(node, "embeddings", m);
  for (const auto& [k, v] : m) d.embeddings[k] = resolve(base, v);
  m.clear();
  read(node, "lexicons", m);
  for (const auto& [k, v] : m) d.lexicons[k] = resolve(base, v);
  return d;
}

ExperimentConfig read_experiment_config(const YAML::Node& root, const fs::path& base,
                                        const std::set<std::string>& other_sections) {
  if (!root.IsMap()) throw ValidationError("config must be a mapping");
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    static const std::set<std::string> known = {"seed",  "data",     "model",   "calibration",
                                                "split", "temporal", "evaluate"};
    if (!known.count(key) && !other_sections.count(key)) {
      throw ValidationError("unknown top-level config key '" + key + "'");
    }
  }
  ExperimentConfig cfg;
  std::uint64_t seed = cfg.seed;
  read(root, "seed", seed);
  cfg.reseed(seed);
  cfg.data = read_data_paths(root["data"], base);
  cfg.model = read_model_config(root["model"], cfg.model);
  cfg.calibration = read_calibration_config(root["calibration"], cfg.calibration);
  read(root["calibration"], "folds", cfg.folds);
  read(root["calibration"], "fix_training_pos", cfg.fix_training_pos);
  cfg.random = read_split_spec(root["split"], cfg.random);
  cfg.random.kind = SplitKind::RandomStratified;
  cfg.temporal = read_split_spec(root["temporal"], cfg.temporal);
  cfg.temporal.kind = SplitKind::Temporal;
  const auto ev = root["evaluate"];
  check_keys(ev, {"excluded_codes", "gnuplot", "random", "temporal"}, "evaluate");
  std::vector<std::string> excluded;
  read(ev, "excluded_codes", excluded);
  cfg.excluded_codes.insert(excluded.begin(), excluded.end());
  read(ev, "gnuplot", cfg.gnuplot);
  read(ev, "random", cfg.run_random);
  read(ev, "temporal", cfg.run_temporal);
  return cfg;
}

YAML::Node load_config_file(const fs::path& path) {
  try {
    return YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw ValidationError("cannot read config " + path.string());
  } catch (const YAML::ParserException& e) {
    throw ValidationError(path.string() + ":" + std::to_string(e.mark.line + 1) + ":" +
                          std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
}

std::string canonical_config(const ExperimentConfig& c) {
  std::ostringstream o;
  o.precision(17);
  o << "seed=" << c.seed << "\n";
  o << "pivot=" << c.data.pivot << "\n";
  const auto& m = c.model;
  o << "model=" << m.word_hidden << "," << m.sentence_hidden << "," << m.embedding_dim << ","
    << m.vocab_cap << "," << m.alpha << "," << m.beta << "," << m.gamma << "," << m.learning_rate
    << "," << m.clip_norm << "," << m.epochs << "," << m.seed << "," << m.trainable_embeddings
    << "\n";
  const auto& k = c.calibration;
  o << "calibration=" << k.recency_window_years << "," << k.similarity_clamp << ","
    << k.prior_weight << "," << k.solver.max_iterations << "," << k.solver.tolerance << ","
    << k.solver.window << "," << k.solver.decay << "\n";
  for (const auto* s : {&c.random, &c.temporal}) {
    o << "split=" << to_string(s->kind) << "," << s->test_fraction << ","
      << util::format_iso_date(s->cutoff) << "," << s->repeats << "," << s->seed << ","
      << s->dev_fraction << "\n";
  }
  o << "folds=" << c.folds << "\nfix_training_pos=" << c.fix_training_pos << "\n";
  o << "excluded=";
  for (const auto& e : c.excluded_codes) o << e << ";";
  o << "\nrandom=" << c.run_random << "\ntemporal=" << c.run_temporal << "\n";
  return o.str();
}

}  // namespace polyscale::evalcli
