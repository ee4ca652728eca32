#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "polyscale/corpus/corpus.hpp"

namespace polyscale::embedalign {
class EmbeddingTable;
}

namespace polyscale::hiermodel {

/// Maps "lang:token" keys to embedding rows. Every language seen at build
/// time gets its own "lang:<unk>" row; "<unk>" catches unseen languages.
class Vocabulary {
 public:
  static constexpr std::string_view kUnknown = "<unk>";

  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> keys);

  /// Training-document tokens, capped per language by frequency (ties broken
  /// lexicographically). When `pretrained` is given its namespaced words are
  /// added too, in table order, under the same per-language cap.
  static Vocabulary build(const corpus::Corpus& corpus, std::size_t cap_per_language,
                          const embedalign::EmbeddingTable* pretrained = nullptr);

  std::size_t size() const { return keys_.size(); }
  const std::vector<std::string>& keys() const { return keys_; }
  std::size_t lookup(std::string_view language, std::string_view token) const;
  bool contains(std::string_view key) const { return index_.count(std::string(key)) > 0; }

 private:
  std::vector<std::string> keys_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace polyscale::hiermodel
