#include "polyscale/embedalign/align.hpp"

#include <unordered_set>

#include <spdlog/spdlog.h>

#include "polyscale/error.hpp"

namespace polyscale::embedalign {

double ProjectionMatrix::orthogonality_error() const {
  const Eigen::MatrixXd gram = w.transpose() * w;
  return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

AlignResult align(const EmbeddingTable& other, const EmbeddingTable& english,
                  const BilingualLexicon& lexicon, const AlignOptions& options) {
  if (other.dim() != english.dim()) {
    throw ValidationError("cannot align tables of dimension " + std::to_string(other.dim()) +
                          " and " + std::to_string(english.dim()));
  }
  const auto d = static_cast<Eigen::Index>(english.dim());
  std::vector<std::pair<std::size_t, std::size_t>> rows;
  std::size_t dropped = 0;
  for (const auto& [src, tgt] : lexicon.pairs) {
    auto i = other.find(src);
    auto j = english.find(tgt);
    if (i && j) {
      rows.emplace_back(*i, *j);
    } else {
      ++dropped;
    }
  }
  if (dropped > 0) {
    spdlog::info("alignment {}->{}: dropped {} of {} lexicon pairs with OOV words",
                 other.language(), english.language(), dropped, lexicon.pairs.size());
  }
  if (rows.size() < 2) {
    throw ValidationError("alignment needs at least 2 usable lexicon pairs, got " +
                          std::to_string(rows.size()));
  }

  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), d);
  Eigen::MatrixXd y(static_cast<Eigen::Index>(rows.size()), d);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    x.row(static_cast<Eigen::Index>(k)) = other.matrix().row(static_cast<Eigen::Index>(rows[k].first));
    y.row(static_cast<Eigen::Index>(k)) = english.matrix().row(static_cast<Eigen::Index>(rows[k].second));
  }
  if (!x.allFinite() || !y.allFinite()) throw ValidationError("non-finite embedding values");
  if (options.center) {
    x.rowwise() -= x.colwise().mean();
    y.rowwise() -= y.colwise().mean();
  }
  if (options.normalize) {
    for (Eigen::Index k = 0; k < x.rows(); ++k) {
      if (const double n = x.row(k).norm(); n > 0) x.row(k) /= n;
      if (const double n = y.row(k).norm(); n > 0) y.row(k) /= n;
    }
  }

  const Eigen::MatrixXd cross = x.transpose() * y;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || !(sv(0) > 0.0) || sv(sv.size() - 1) <= 1e-12 * sv(0)) {
    throw ValidationError("rank-deficient cross-covariance; cannot determine a unique rotation");
  }
  Eigen::MatrixXd u = svd.matrixU();
  Eigen::MatrixXd v = svd.matrixV();
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    Eigen::Index arg = 0;
    u.col(c).cwiseAbs().maxCoeff(&arg);
    if (u(arg, c) < 0) {
      u.col(c) = -u.col(c);
      v.col(c) = -v.col(c);
    }
  }
  AlignResult result;
  result.projection.w = u * v.transpose();
  result.used_pairs = rows.size();
  result.dropped_pairs = dropped;
  return result;
}

EmbeddingTable build_multilingual(const std::vector<EmbeddingTable>& tables,
                                  const std::map<std::string, ProjectionMatrix>& projections,
                                  const std::string& pivot_language) {
  if (tables.empty()) throw ValidationError("no embedding tables to combine");
  const std::size_t dim = tables.front().dim();
  const auto d = static_cast<Eigen::Index>(dim);
  std::vector<std::string> words;
  std::vector<Eigen::MatrixXd> blocks;
  std::vector<std::vector<Eigen::Index>> kept_rows;
  std::unordered_set<std::string> seen;
  for (const auto& table : tables) {
    if (table.dim() != dim) throw ValidationError("embedding tables differ in dimension");
    auto it = projections.find(table.language());
    if (table.language() == pivot_language) {
      if (it != projections.end() &&
          !it->second.w.isApprox(Eigen::MatrixXd::Identity(d, d), 1e-12)) {
        throw ValidationError("projection for pivot language must be the identity");
      }
      blocks.push_back(table.matrix());
    } else {
      if (it == projections.end()) {
        throw ValidationError("missing projection for language " + table.language());
      }
      if (it->second.w.rows() != d || it->second.w.cols() != d) {
        throw ValidationError("projection for " + table.language() + " has wrong shape");
      }
      blocks.push_back(table.matrix() * it->second.w);
    }
    auto& kept = kept_rows.emplace_back();
    for (std::size_t i = 0; i < table.size(); ++i) {
      auto key = namespaced(table.language(), table.words()[i]);
      if (seen.insert(key).second) {
        words.push_back(std::move(key));
        kept.push_back(static_cast<Eigen::Index>(i));
      }
    }
  }
  Eigen::MatrixXd matrix(static_cast<Eigen::Index>(words.size()), d);
  Eigen::Index r = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (auto i : kept_rows[b]) matrix.row(r++) = blocks[b].row(i);
  }
  EmbeddingTable out("multi", std::move(words), std::move(matrix));
  return out;
}

}  // namespace polyscale::embedalign
