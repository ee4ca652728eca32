#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace polyscale::embedalign {

/// Word vectors for one language (or a namespaced multilingual union).
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::string language, std::size_t dim);
  EmbeddingTable(std::string language, std::vector<std::string> words, Eigen::MatrixXd matrix);

  const std::string& language() const { return language_; }
  std::size_t dim() const { return static_cast<std::size_t>(matrix_.cols()); }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }

  std::optional<std::size_t> find(std::string_view word) const;
  Eigen::RowVectorXd row(std::size_t i) const { return matrix_.row(static_cast<Eigen::Index>(i)); }

  /// Appends a word; returns false (and leaves the table unchanged) on duplicates.
  bool add(std::string word, const Eigen::RowVectorXd& vector);

 private:
  std::string language_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
  Eigen::MatrixXd matrix_;
};

/// Text format: optional "count dim" header, then "word v1 ... vd" per line.
/// Duplicate words keep the first occurrence (a warning is logged).
/// Throws ValidationError naming the line on inconsistent dimensions.
EmbeddingTable load_embeddings(const std::filesystem::path& path, std::string language = {});
void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);

/// Pairs (source word, English word).
struct BilingualLexicon {
  std::vector<std::pair<std::string, std::string>> pairs;
};

/// Two-column tab-separated UTF-8 file.
BilingualLexicon load_lexicon(const std::filesystem::path& path);

/// "lang:word", the key used by multilingual tables and model vocabularies.
std::string namespaced(std::string_view language, std::string_view word);

}  // namespace polyscale::embedalign
