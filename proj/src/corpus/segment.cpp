#include "polyscale/corpus/segment.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_map>
#include <unordered_set>

#include "polyscale/corpus/corpus.hpp"
#include "polyscale/error.hpp"

namespace polyscale::corpus {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) != 0;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

const std::unordered_set<std::string>& abbreviations() {
  static const std::unordered_set<std::string> kAbbrev = {
      "mr.", "mrs.", "ms.", "dr.", "prof.", "st.", "e.g.", "i.e.", "etc.", "vs.", "no.",
      "nr.", "z.b.", "bzw.", "usw.", "ca.", "p.ex.", "art.", "cf.", "approx."};
  return kAbbrev;
}

const std::unordered_map<std::string, std::unordered_set<std::string>>& verb_lists() {
  static const std::unordered_map<std::string, std::unordered_set<std::string>> kVerbs = {
      {"en", {"is", "are", "was", "were", "be", "been", "being", "am", "will", "would",
              "shall", "should", "can", "could", "must", "may", "might", "have", "has",
              "had", "do", "does", "did", "need", "want", "make", "ensure", "support",
              "believe", "give", "take", "keep"}},
      {"de", {"ist", "sind", "war", "waren", "wird", "werden", "wurde", "haben", "hat",
              "hatte", "muss", "müssen", "soll", "sollen", "kann", "können", "will",
              "wollen", "sein", "setzen", "fordern"}},
      {"fr", {"est", "sont", "était", "sera", "seront", "doit", "doivent", "peut",
              "peuvent", "a", "ont", "avons", "va", "vont", "faut", "être", "sommes",
              "voulons"}},
      {"es", {"es", "son", "era", "será", "serán", "debe", "deben", "puede", "pueden",
              "ha", "han", "hemos", "va", "van", "hay", "está", "están", "queremos"}},
      {"it", {"è", "sono", "era", "sarà", "deve", "devono", "può", "possono", "ha",
              "hanno", "abbiamo", "va", "vogliamo"}},
      {"pt", {"é", "são", "era", "será", "deve", "devem", "pode", "podem", "tem", "têm",
              "temos", "vai", "vão", "há", "está", "queremos"}},
      {"nl", {"is", "zijn", "was", "waren", "wordt", "worden", "heeft", "hebben",
              "moet", "moeten", "kan", "kunnen", "zal", "zullen", "wil", "willen"}},
      {"da", {"er", "var", "blive", "bliver", "har", "havde", "skal", "kan", "vil",
              "må", "bør"}},
      {"sv", {"är", "var", "blir", "bli", "har", "hade", "ska", "skall", "kan", "vill",
              "måste", "bör"}},
      {"fi", {"on", "ovat", "oli", "olivat", "olla", "voi", "voivat", "pitää", "täytyy",
              "tulee", "haluamme"}},
  };
  return kVerbs;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() > suffix.size() + 1 && s.substr(s.size() - suffix.size()) == suffix;
}

bool has_verb(std::string_view clause, std::string_view language) {
  for (const auto& tok : tokenize(clause)) {
    if (RuleSegmenter::is_verb_like(tok, language)) return true;
  }
  return false;
}

// Sentence-final split: returns trimmed, nonempty pieces.
std::vector<std::string> split_terminal(std::string_view text) {
  std::vector<std::string> pieces;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '.' || c == '!' || c == '?') {
      std::size_t end = i + 1;
      while (end < text.size() &&
             (text[end] == '.' || text[end] == '!' || text[end] == '?' || text[end] == '"' ||
              text[end] == '\'' || text[end] == ')' || text[end] == ']')) {
        ++end;
      }
      const bool boundary = end == text.size() || is_space(text[end]);
      bool abbreviation = false;
      if (boundary && c == '.') {
        std::size_t ws = i;
        while (ws > start && !is_space(text[ws - 1])) --ws;
        abbreviation = abbreviations().count(lower(text.substr(ws, i + 1 - ws))) > 0;
      }
      if (boundary && !abbreviation) {
        auto piece = trim(text.substr(start, end - start));
        if (!piece.empty()) pieces.push_back(std::move(piece));
        start = end;
      }
      i = end;
    } else {
      ++i;
    }
  }
  auto tail = trim(text.substr(start));
  if (!tail.empty()) pieces.push_back(std::move(tail));
  return pieces;
}

}  // namespace

bool RuleSegmenter::is_verb_like(std::string_view token, std::string_view language) {
  const auto& lists = verb_lists();
  if (auto it = lists.find(std::string(language)); it != lists.end()) {
    if (it->second.count(std::string(token)) > 0) return true;
  }
  if (language == "en") {
    return ends_with(token, "ed") || ends_with(token, "ing") || ends_with(token, "ise") ||
           ends_with(token, "ize");
  }
  return false;
}

std::vector<std::string> RuleSegmenter::split(std::string_view text,
                                              std::string_view language) const {
  std::vector<std::string> out;
  for (const auto& piece : split_terminal(text)) {
    std::string_view rest = piece;
    while (true) {
      bool split_done = false;
      for (std::size_t pos = rest.find(';'); pos != std::string_view::npos;
           pos = rest.find(';', pos + 1)) {
        const auto left = rest.substr(0, pos + 1);
        const auto right = rest.substr(pos + 1);
        if (has_verb(left, language) && has_verb(right, language)) {
          out.push_back(trim(left));
          rest = right;
          split_done = true;
          break;
        }
      }
      if (!split_done) break;
    }
    auto tail = trim(rest);
    if (!tail.empty()) out.push_back(std::move(tail));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (is_word_byte(c)) {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<Sentence> segment(std::string_view text, std::string_view language,
                              const Segmenter& segmenter) {
  if (trim(text).empty()) throw ValidationError("cannot segment empty text");
  std::vector<Sentence> sentences;
  for (auto& piece : segmenter.split(text, language)) {
    auto tokens = tokenize(piece);
    if (tokens.empty()) continue;
    Sentence s;
    s.text = std::move(piece);
    s.tokens = std::move(tokens);
    s.position = static_cast<int>(sentences.size()) + 1;
    sentences.push_back(std::move(s));
  }
  if (sentences.empty()) throw ValidationError("text contains no tokens");
  return sentences;
}

std::vector<Sentence> segment(std::string_view text, std::string_view language) {
  static const RuleSegmenter kDefault;
  return segment(text, language, kDefault);
}

}  // namespace polyscale::corpus
