#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace polyscale::corpus {

struct Sentence;

/// Splits running text into sentence (or quasi-sentence) strings.
class Segmenter {
 public:
  virtual ~Segmenter() = default;
  virtual std::vector<std::string> split(std::string_view text,
                                         std::string_view language) const = 0;
};

/// Default rule-based splitter.
///
/// 1. Break after '.', '!' or '?' (runs of them, plus closing quotes or
///    brackets) when followed by whitespace or end of text, unless the word
///    ending there is a known abbreviation ("e.g.", "Mr.", ...).
/// 2. Break each piece after ';' when both the left and the right clause
///    contain a verb-like token: an auxiliary/modal from the language's list
///    or, for English, a word ending in "-ed", "-ing", "-ise" or "-ize".
class RuleSegmenter final : public Segmenter {
 public:
  std::vector<std::string> split(std::string_view text,
                                 std::string_view language) const override;

  static bool is_verb_like(std::string_view lowercase_token, std::string_view language);
};

/// Lowercases ASCII letters and splits on whitespace and ASCII punctuation.
/// Bytes >= 0x80 are kept inside words so UTF-8 text survives intact.
std::vector<std::string> tokenize(std::string_view text);

/// Segments `text` and tokenizes each piece. Positions are 1-based and
/// contiguous. Throws ValidationError on empty text or when no piece has a token.
std::vector<Sentence> segment(std::string_view text, std::string_view language,
                              const Segmenter& segmenter);
std::vector<Sentence> segment(std::string_view text, std::string_view language);

}  // namespace polyscale::corpus
