#include "polyscale/embedalign/embeddings.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "polyscale/error.hpp"

namespace polyscale::embedalign {

EmbeddingTable::EmbeddingTable(std::string language, std::size_t dim)
    : language_(std::move(language)), matrix_(0, static_cast<Eigen::Index>(dim)) {}

EmbeddingTable::EmbeddingTable(std::string language, std::vector<std::string> words,
                               Eigen::MatrixXd matrix)
    : language_(std::move(language)), words_(std::move(words)), matrix_(std::move(matrix)) {
  if (static_cast<std::size_t>(matrix_.rows()) != words_.size()) {
    throw ValidationError("embedding table: word count does not match matrix rows");
  }
  if (!matrix_.allFinite()) throw ValidationError("embedding table has non-finite values");
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], i).second) {
      throw ValidationError("embedding table: duplicate word " + words_[i]);
    }
  }
}

std::optional<std::size_t> EmbeddingTable::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool EmbeddingTable::add(std::string word, const Eigen::RowVectorXd& vector) {
  if (vector.size() != matrix_.cols()) {
    throw ValidationError("embedding dimension mismatch for word " + word);
  }
  if (!vector.allFinite()) throw ValidationError("non-finite vector for word " + word);
  if (index_.count(word) > 0) return false;
  index_.emplace(word, words_.size());
  words_.push_back(std::move(word));
  matrix_.conservativeResize(matrix_.rows() + 1, Eigen::NoChange);
  matrix_.row(matrix_.rows() - 1) = vector;
  return true;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, std::string language) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open embedding file " + path.string());
  std::vector<std::string> words;
  std::vector<std::vector<double>> rows;
  std::unordered_map<std::string, std::size_t> seen;
  long dim = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::istringstream fields(line);
    std::string word;
    fields >> word;
    std::vector<double> values;
    std::string tok;
    while (fields >> tok) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end != tok.c_str() + tok.size() || !std::isfinite(v)) {
        throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                              ": invalid number '" + tok + "'");
      }
      values.push_back(v);
    }
    if (line_no == 1 && rows.empty() && values.size() == 1 &&
        word.find_first_not_of("0123456789") == std::string::npos) {
      // "count dim" header
      const double d = values[0];
      if (d >= 1 && d == std::floor(d)) {
        dim = static_cast<long>(d);
        continue;
      }
    }
    if (dim < 0) dim = static_cast<long>(values.size());
    if (static_cast<long>(values.size()) != dim || dim == 0) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(dim) + " values, got " +
                            std::to_string(values.size()));
    }
    if (seen.count(word) > 0) {
      spdlog::warn("{}:{}: duplicate word '{}' ignored (first occurrence kept)", path.string(),
                   line_no, word);
      continue;
    }
    seen.emplace(word, rows.size());
    words.push_back(std::move(word));
    rows.push_back(std::move(values));
  }
  if (dim <= 0) throw ValidationError("embedding file " + path.string() + " is empty");
  Eigen::MatrixXd matrix(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (long j = 0; j < dim; ++j) matrix(static_cast<Eigen::Index>(i), j) = rows[i][j];
  }
  return EmbeddingTable(std::move(language), std::move(words), std::move(matrix));
}

void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw ValidationError("cannot write embedding file " + path.string());
  std::fprintf(f, "%zu %zu\n", table.size(), table.dim());
  const auto& m = table.matrix();
  for (std::size_t i = 0; i < table.size(); ++i) {
    std::fputs(table.words()[i].c_str(), f);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::fprintf(f, " %.17g", m(static_cast<Eigen::Index>(i), j));
    }
    std::fputc('\n', f);
  }
  std::fclose(f);
}

BilingualLexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open lexicon file " + path.string());
  BilingualLexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": expected two tab-separated columns");
    }
    lex.pairs.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return lex;
}

std::string namespaced(std::string_view language, std::string_view word) {
  std::string out;
  out.reserve(language.size() + word.size() + 1);
  out.append(language);
  out.push_back(':');
  out.append(word);
  return out;
}

}  // namespace polyscale::embedalign
