#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "polyscale/corpus/label_scheme.hpp"
#include "polyscale/util/date.hpp"

namespace polyscale::corpus {

class Segmenter;

struct Sentence {
  std::string text;
  std::vector<std::string> tokens;
  std::optional<std::string> gold_code;
  int position = 1;  // 1-based location within the document
};

struct Manifesto {
  std::string id;
  std::string party_id;
  std::string country;
  std::string language;
  util::Date election_date{};
  std::vector<Sentence> sentences;
  std::optional<double> rile_gold;  // scaled to [-1, 1]
  std::optional<double> ches_gold;

  /// True when the document has sentences and every one carries a gold code.
  bool sentence_annotated() const;
};

class Corpus {
 public:
  Corpus(std::vector<Manifesto> manifestos, LabelScheme scheme);

  const std::vector<Manifesto>& manifestos() const { return manifestos_; }
  const Manifesto& operator[](std::size_t i) const { return manifestos_[i]; }
  std::size_t size() const { return manifestos_.size(); }
  bool empty() const { return manifestos_.empty(); }
  const LabelScheme& scheme() const { return scheme_; }

  /// Indices of the sentence-annotated subset.
  std::vector<std::size_t> annotated_indices() const;
  std::size_t annotated_count() const { return annotated_indices().size(); }

  std::optional<std::size_t> find(const std::string& id) const;
  Corpus subset(const std::vector<std::size_t>& indices) const;
  /// Documents in order of `ids`; throws ValidationError on unknown ids.
  Corpus subset_by_id(const std::vector<std::string>& ids) const;
  std::set<std::string> languages() const;

 private:
  std::vector<Manifesto> manifestos_;
  LabelScheme scheme_;
};

/// ISO 639-1 tags of the ten manifesto languages (da nl en fi fr de it pt es sv).
const std::set<std::string>& default_languages();

struct LoadOptions {
  std::set<std::string> languages = default_languages();
  /// Used for records that carry a raw "text" field instead of "sentences".
  /// nullptr selects the built-in RuleSegmenter.
  const Segmenter* segmenter = nullptr;
};

/// Line-delimited JSON: one manifesto per line with fields id, party_id,
/// country, language, election_date, optional rile (raw [-100, 100]),
/// optional ches, and either "sentences": [{text, code?}] (pre-segmented) or
/// "text" (run through the segmenter). Blank lines are skipped.
Corpus parse_corpus(std::istream& in, const LabelScheme& scheme, const LoadOptions& options = {},
                    const std::string& source = "<corpus>");
Corpus load_corpus(const std::filesystem::path& path, const LabelScheme& scheme,
                   const LoadOptions& options = {});

void write_corpus(const Corpus& corpus, std::ostream& out);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

}  // namespace polyscale::corpus
