#include "polyscale/hiermodel/vocabulary.hpp"

#include <algorithm>
#include <map>

#include "polyscale/embedalign/embeddings.hpp"
#include "polyscale/error.hpp"

namespace polyscale::hiermodel {

Vocabulary::Vocabulary(std::vector<std::string> keys) : keys_(std::move(keys)) {
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    if (!index_.emplace(keys_[i], i).second) {
      throw ValidationError("duplicate vocabulary entry " + keys_[i]);
    }
  }
  if (!index_.count(std::string(kUnknown))) {
    index_.emplace(std::string(kUnknown), keys_.size());
    keys_.emplace_back(kUnknown);
  }
}

Vocabulary Vocabulary::build(const corpus::Corpus& corpus, std::size_t cap_per_language,
                             const embedalign::EmbeddingTable* pretrained) {
  std::map<std::string, std::map<std::string, std::size_t>> counts;
  for (const auto& m : corpus.manifestos()) {
    auto& c = counts[m.language];
    for (const auto& s : m.sentences) {
      for (const auto& t : s.tokens) ++c[t];
    }
  }

  std::map<std::string, std::vector<std::string>> per_language;
  for (auto& [lang, c] : counts) {
    std::vector<std::pair<std::string, std::size_t>> ranked(c.begin(), c.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    auto& words = per_language[lang];
    for (const auto& [w, n] : ranked) {
      if (words.size() >= cap_per_language) break;
      words.push_back(w);
    }
  }

  std::vector<std::string> keys;
  std::unordered_map<std::string, bool> seen;
  auto push = [&](std::string key) {
    if (seen.emplace(key, true).second) keys.push_back(std::move(key));
  };
  for (const auto& [lang, words] : per_language) {
    push(embedalign::namespaced(lang, kUnknown));
    for (const auto& w : words) push(embedalign::namespaced(lang, w));
  }

  if (pretrained) {
    std::map<std::string, std::size_t> added;
    for (const auto& key : pretrained->words()) {
      const auto colon = key.find(':');
      if (colon == std::string::npos) continue;
      const auto lang = key.substr(0, colon);
      auto& n = added[lang];
      if (n >= cap_per_language) continue;
      ++n;
      if (!seen.count(embedalign::namespaced(lang, kUnknown))) {
        push(embedalign::namespaced(lang, kUnknown));
      }
      push(key);
    }
  }
  return Vocabulary(std::move(keys));
}

std::size_t Vocabulary::lookup(std::string_view language, std::string_view token) const {
  const auto key = embedalign::namespaced(language, token);
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  if (auto it = index_.find(embedalign::namespaced(language, kUnknown)); it != index_.end()) {
    return it->second;
  }
  return index_.at(std::string(kUnknown));
}

}  // namespace polyscale::hiermodel
