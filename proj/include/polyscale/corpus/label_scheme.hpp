#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace polyscale::corpus {

/// Left/right/neutral partition used by RILE. The numeric values are the
/// class indices of the three-way polarity head.
enum class Polarity { Left = 0, Right = 1, Neutral = 2 };

inline constexpr std::size_t kNumPolarities = 3;

std::string_view to_string(Polarity p);
Polarity parse_polarity(std::string_view text);

struct CodeInfo {
  std::string code;
  std::string category;
  Polarity polarity = Polarity::Neutral;
  std::string name;
};

/// The 57 policy codes, their major categories and the 13/13/31 polarity
/// partition. Construction validates the cardinalities, so a LabelScheme
/// that exists is always well-formed.
class LabelScheme {
 public:
  static constexpr std::size_t kNumCodes = 57;
  static constexpr std::size_t kNumLeft = 13;
  static constexpr std::size_t kNumRight = 13;

  explicit LabelScheme(std::vector<CodeInfo> codes);

  /// Built-in coding scheme (CMP v4/v5 codes with the standard RILE partition).
  static LabelScheme cmp_default();

  /// Tab-separated: code, category, polarity (LEFT/RIGHT/NEUTRAL), optional name.
  /// '#' starts a comment line.
  static LabelScheme parse(std::istream& in, std::string_view source = "<scheme>");
  static LabelScheme load(const std::filesystem::path& path);
  void save(std::ostream& out) const;

  std::size_t size() const { return codes_.size(); }
  const CodeInfo& at(std::size_t index) const { return codes_.at(index); }
  const std::vector<CodeInfo>& codes() const { return codes_; }

  std::optional<std::size_t> find(std::string_view code) const;
  /// Throws ValidationError("unknown code <code>").
  std::size_t index_of(std::string_view code) const;
  Polarity polarity_of(std::string_view code) const;
  Polarity polarity_at(std::size_t index) const { return codes_.at(index).polarity; }

  /// Major categories in first-appearance order.
  std::vector<std::string> categories() const;

  /// Same codes with LEFT and RIGHT exchanged.
  LabelScheme with_swapped_polarity() const;

  friend bool operator==(const LabelScheme& a, const LabelScheme& b);

 private:
  std::vector<CodeInfo> codes_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace polyscale::corpus
