#include "polyscale/hiermodel/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "polyscale/error.hpp"

namespace polyscale::hiermodel {

using nlohmann::json;

namespace {

constexpr std::string_view kMagic = "PSCL1\n";

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

json config_json(const ModelConfig& c) {
  return {{"word_hidden", c.word_hidden},   {"sentence_hidden", c.sentence_hidden},
          {"embedding_dim", c.embedding_dim}, {"vocab_cap", c.vocab_cap},
          {"alpha", c.alpha},               {"beta", c.beta},
          {"gamma", c.gamma},               {"learning_rate", c.learning_rate},
          {"clip_norm", c.clip_norm},       {"epochs", c.epochs},
          {"seed", c.seed},                 {"trainable_embeddings", c.trainable_embeddings}};
}

ModelConfig config_from(const json& j) {
  ModelConfig c;
  c.word_hidden = j.at("word_hidden");
  c.sentence_hidden = j.at("sentence_hidden");
  c.embedding_dim = j.at("embedding_dim");
  c.vocab_cap = j.at("vocab_cap");
  c.alpha = j.at("alpha");
  c.beta = j.at("beta");
  c.gamma = j.at("gamma");
  c.learning_rate = j.at("learning_rate");
  c.clip_norm = j.at("clip_norm");
  c.epochs = j.at("epochs");
  c.seed = j.at("seed");
  c.trainable_embeddings = j.at("trainable_embeddings");
  return c;
}

}  // namespace

void write_checkpoint(const HierModel& model, std::ostream& out) {
  json tensors = json::array();
  for (const auto& p : model.params()) {
    tensors.push_back({{"name", p.name},
                       {"shape", {p.value.rows(), p.value.cols()}},
                       {"dtype", "float64"},
                       {"trainable", p.trainable}});
  }
  const json manifest = {{"config", config_json(model.config())},
                         {"seed", model.config().seed},
                         {"codes", model.codes()},
                         {"vocabulary", model.vocabulary().keys()},
                         {"tensors", tensors}};
  out.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
  out << manifest.dump() << '\n';
  for (const auto& p : model.params()) {
    for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.value.cols(); ++c) {
        const double v = p.value(r, c);
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
      }
    }
  }
  if (!out) throw StageError("failed writing checkpoint");
}

void save_checkpoint(const HierModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StageError("cannot open " + path.string() + " for writing");
  write_checkpoint(model, out);
}

HierModel read_checkpoint(std::istream& in) {
  std::string magic(kMagic.size(), '\0');
  in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
  if (!in || magic != kMagic) throw ValidationError("not a polyscale checkpoint (bad magic)");
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("checkpoint manifest missing");
  json manifest;
  try {
    manifest = json::parse(line);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("checkpoint manifest is malformed: ") + e.what());
  }

  try {
    diffcore::ParameterStore store;
    for (const auto& t : manifest.at("tensors")) {
      if (t.at("dtype") != "float64") throw ValidationError("unsupported checkpoint dtype");
      const auto rows = t.at("shape").at(0).get<Eigen::Index>();
      const auto cols = t.at("shape").at(1).get<Eigen::Index>();
      diffcore::Tensor value(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
          double v = 0.0;
          in.read(reinterpret_cast<char*>(&v), sizeof v);
          value(r, c) = v;
        }
      }
      if (!in) throw ValidationError("checkpoint truncated in tensor " + t.at("name").get<std::string>());
      store.add(t.at("name").get<std::string>(), std::move(value), t.at("trainable").get<bool>());
    }
    if (in.peek() != std::char_traits<char>::eof()) {
      throw ValidationError("checkpoint has trailing bytes");
    }
    return HierModel(config_from(manifest.at("config")),
                     Vocabulary(manifest.at("vocabulary").get<std::vector<std::string>>()),
                     manifest.at("codes").get<std::vector<std::string>>(), std::move(store));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("checkpoint manifest is malformed: ") + e.what());
  }
}

HierModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

void save_predictions(const std::vector<Prediction>& preds, const HierModel& model,
                      const std::filesystem::path& path) {
  save_predictions(preds, model.codes(), path);
}

void save_predictions(const std::vector<Prediction>& preds, const std::vector<std::string>& codes,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw StageError("cannot open " + path.string() + " for writing");
  for (const auto& p : preds) {
    json sentences = json::array();
    for (std::size_t i = 0; i < p.sentences.size(); ++i) {
      const auto& s = p.sentences[i];
      sentences.push_back({{"code", codes.at(p.predicted_class(i))},
                           {"p", std::vector<double>(s.p.data(), s.p.data() + s.p.size())}});
    }
    const json rec = {
        {"id", p.manifesto_id},
        {"r_hat", p.r_hat},
        {"doc_vector",
         std::vector<double>(p.doc_vector.data(), p.doc_vector.data() + p.doc_vector.size())},
        {"sentences", sentences}};
    out << rec.dump() << '\n';
  }
  if (!out) throw StageError("failed writing " + path.string());
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path,
                                         const std::vector<std::string>& codes) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open predictions " + path.string());
  std::unordered_map<std::string, Eigen::Index> code_index;
  for (std::size_t i = 0; i < codes.size(); ++i) code_index[codes[i]] = static_cast<Eigen::Index>(i);

  std::vector<Prediction> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path.string() + ":" + std::to_string(lineno) + ": ";
    try {
      const auto j = json::parse(line);
      Prediction p;
      p.manifesto_id = j.at("id");
      p.r_hat = j.at("r_hat");
      const auto v = j.at("doc_vector").get<std::vector<double>>();
      p.doc_vector = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
      for (const auto& s : j.at("sentences")) {
        SentencePrediction sp;
        const auto code = s.at("code").get<std::string>();
        auto it = code_index.find(code);
        if (it == code_index.end()) throw ValidationError(where + "unknown code " + code);
        sp.y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(codes.size()));
        sp.y(it->second) = 1.0;
        const auto pv = s.at("p").get<std::vector<double>>();
        sp.p = Eigen::Map<const Eigen::VectorXd>(pv.data(), static_cast<Eigen::Index>(pv.size()));
        p.sentences.push_back(std::move(sp));
      }
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw ValidationError(where + e.what());
    }
  }
  return out;
}

}  // namespace polyscale::hiermodel
