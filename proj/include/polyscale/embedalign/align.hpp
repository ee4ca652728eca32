#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polyscale/embedalign/embeddings.hpp"

namespace polyscale::embedalign {

struct ProjectionMatrix {
  Eigen::MatrixXd w;  // d x d, orthogonal

  /// max |W^T W - I|
  double orthogonality_error() const;
};

struct AlignOptions {
  /// Subtract the per-dimension mean of the paired rows before the SVD.
  bool center = false;
  /// Scale each paired row to unit length before the SVD.
  bool normalize = false;
};

struct AlignResult {
  ProjectionMatrix projection;
  std::size_t used_pairs = 0;
  std::size_t dropped_pairs = 0;  // lexicon entries with an OOV side
};

/// Orthogonal Procrustes: stacks the lexicon pairs as rows of X (other) and
/// Y (English), takes the SVD X^T Y = U S V^T and returns W = U V^T, so that
/// X W approximates Y. Each left singular vector is sign-normalised so its
/// largest-magnitude entry is positive.
///
/// Throws ValidationError with fewer than two usable pairs, mismatched
/// dimensions, non-finite inputs or a rank-deficient cross-covariance.
AlignResult align(const EmbeddingTable& other, const EmbeddingTable& english,
                  const BilingualLexicon& lexicon, const AlignOptions& options = {});

/// Union table with words namespaced by language; every non-pivot table is
/// right-multiplied by its projection. A projection given for the pivot
/// language must be the identity.
EmbeddingTable build_multilingual(const std::vector<EmbeddingTable>& tables,
                                  const std::map<std::string, ProjectionMatrix>& projections,
                                  const std::string& pivot_language = "en");

}  // namespace polyscale::embedalign
