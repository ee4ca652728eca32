#include "polyscale/corpus/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include <json.hpp>

#include "polyscale/corpus/rile.hpp"
#include "polyscale/corpus/segment.hpp"
#include "polyscale/error.hpp"

namespace polyscale::corpus {

using nlohmann::json;

bool Manifesto::sentence_annotated() const {
  return !sentences.empty() &&
         std::all_of(sentences.begin(), sentences.end(),
                     [](const Sentence& s) { return s.gold_code.has_value(); });
}

Corpus::Corpus(std::vector<Manifesto> manifestos, LabelScheme scheme)
    : manifestos_(std::move(manifestos)), scheme_(std::move(scheme)) {}

std::vector<std::size_t> Corpus::annotated_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < manifestos_.size(); ++i) {
    if (manifestos_[i].sentence_annotated()) out.push_back(i);
  }
  return out;
}

std::optional<std::size_t> Corpus::find(const std::string& id) const {
  for (std::size_t i = 0; i < manifestos_.size(); ++i) {
    if (manifestos_[i].id == id) return i;
  }
  return std::nullopt;
}

Corpus Corpus::subset(const std::vector<std::size_t>& indices) const {
  std::vector<Manifesto> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(manifestos_.at(i));
  return Corpus(std::move(out), scheme_);
}

Corpus Corpus::subset_by_id(const std::vector<std::string>& ids) const {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < manifestos_.size(); ++i) index.emplace(manifestos_[i].id, i);
  std::vector<std::size_t> picked;
  for (const auto& id : ids) {
    auto it = index.find(id);
    if (it == index.end()) throw ValidationError("unknown manifesto id " + id);
    picked.push_back(it->second);
  }
  return subset(picked);
}

std::set<std::string> Corpus::languages() const {
  std::set<std::string> out;
  for (const auto& m : manifestos_) out.insert(m.language);
  return out;
}

const std::set<std::string>& default_languages() {
  static const std::set<std::string> kLanguages = {"da", "nl", "en", "fi", "fr",
                                                   "de", "it", "pt", "es", "sv"};
  return kLanguages;
}

namespace {

std::string required_string(const json& record, const char* field) {
  auto it = record.find(field);
  if (it == record.end() || !it->is_string()) {
    throw ValidationError(std::string("missing or non-string field '") + field + "'");
  }
  return it->get<std::string>();
}

Manifesto parse_record(const json& record, const LabelScheme& scheme,
                       const LoadOptions& options) {
  if (!record.is_object()) throw ValidationError("record is not an object");
  Manifesto m;
  m.id = required_string(record, "id");
  m.party_id = required_string(record, "party_id");
  m.country = required_string(record, "country");
  m.language = required_string(record, "language");
  if (options.languages.count(m.language) == 0) {
    throw ValidationError("unknown language tag " + m.language);
  }
  m.election_date = util::parse_iso_date(required_string(record, "election_date"));

  if (auto it = record.find("rile"); it != record.end() && !it->is_null()) {
    if (!it->is_number()) throw ValidationError("field 'rile' must be a number");
    const double raw = it->get<double>();
    if (!(raw >= -100.0 && raw <= 100.0)) {
      throw ValidationError("rile " + std::to_string(raw) + " outside [-100, 100]");
    }
    m.rile_gold = rile_from_raw(raw);
  }
  if (auto it = record.find("ches"); it != record.end() && !it->is_null()) {
    if (!it->is_number()) throw ValidationError("field 'ches' must be a number");
    m.ches_gold = it->get<double>();
  }

  if (auto it = record.find("sentences"); it != record.end()) {
    if (!it->is_array()) throw ValidationError("field 'sentences' must be an array");
    int position = 0;
    for (const auto& s : *it) {
      Sentence sentence;
      sentence.text = required_string(s, "text");
      sentence.tokens = tokenize(sentence.text);
      if (sentence.tokens.empty()) {
        throw ValidationError("sentence " + std::to_string(position + 1) + " has no tokens");
      }
      if (auto c = s.find("code"); c != s.end() && !c->is_null()) {
        if (!c->is_string()) throw ValidationError("sentence code must be a string");
        std::string code = c->get<std::string>();
        scheme.index_of(code);  // throws "unknown code <code>"
        sentence.gold_code = std::move(code);
      }
      sentence.position = ++position;
      m.sentences.push_back(std::move(sentence));
    }
  } else if (auto t = record.find("text"); t != record.end() && t->is_string()) {
    m.sentences = options.segmenter ? segment(t->get<std::string>(), m.language, *options.segmenter)
                                    : segment(t->get<std::string>(), m.language);
  } else {
    throw ValidationError("record needs 'sentences' or 'text'");
  }
  return m;
}

}  // namespace

Corpus parse_corpus(std::istream& in, const LabelScheme& scheme, const LoadOptions& options,
                    const std::string& source) {
  std::vector<Manifesto> manifestos;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(where + "malformed record: " + e.what());
    }
    try {
      auto m = parse_record(record, scheme, options);
      if (!seen.emplace(m.id, line_no).second) {
        throw ValidationError("duplicate manifesto id " + m.id);
      }
      manifestos.push_back(std::move(m));
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
  }
  return Corpus(std::move(manifestos), scheme);
}

Corpus load_corpus(const std::filesystem::path& path, const LabelScheme& scheme,
                   const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open corpus file " + path.string());
  return parse_corpus(in, scheme, options, path.string());
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& m : corpus.manifestos()) {
    json record = {{"id", m.id},
                   {"party_id", m.party_id},
                   {"country", m.country},
                   {"language", m.language},
                   {"election_date", util::format_iso_date(m.election_date)}};
    if (m.rile_gold) record["rile"] = rile_to_raw(*m.rile_gold);
    if (m.ches_gold) record["ches"] = *m.ches_gold;
    json sentences = json::array();
    for (const auto& s : m.sentences) {
      json js = {{"text", s.text}};
      if (s.gold_code) js["code"] = *s.gold_code;
      sentences.push_back(std::move(js));
    }
    record["sentences"] = std::move(sentences);
    out << record.dump() << '\n';
  }
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write corpus file " + path.string());
  write_corpus(corpus, out);
}

}  // namespace polyscale::corpus
