#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "polyscale/calibration/party_graph.hpp"
#include "polyscale/corpus/corpus.hpp"
#include "polyscale/hiermodel/config.hpp"
#include "polyscale/hiermodel/model.hpp"
#include "polyscale/pslengine/database.hpp"
#include "polyscale/pslengine/program.hpp"
#include "polyscale/pslengine/solver.hpp"

namespace polyscale::embedalign {
class EmbeddingTable;
}

namespace polyscale::calibration {

struct CalibrationConfig {
  double recency_window_years = 4.0;
  bool similarity_clamp = true;
  /// Weight of the optional pair Prior(x) -> pos(x), !Prior(x) -> !pos(x),
  /// with Prior(x) = initial pos. 0 leaves the program as given.
  double prior_weight = 0.0;
  pslengine::SolverConfig solver;

  void validate() const;
};

/// f(v) = 2 / (1 + e^-v) - 1. Throws ValidationError when v < 0.
double squash(double v);

/// Location-weighted right share: W_C = sum over sentences s of class C of
/// log(l_s + 1) with l_s the 1-based index, result R / (R + L + N).
/// Throws ValidationError on an empty list.
double lw_right_left_ratio(std::span<const corpus::Polarity> polarities);
/// Polarity of each sentence = argmax of its p_i.
double lw_right_left_ratio(const hiermodel::Prediction& pred);
/// Gold polarity of each sentence; throws if any sentence is uncoded.
double lw_right_left_ratio(const corpus::Manifesto& manifesto, const corpus::LabelScheme& scheme);

/// Cosine of two vectors, optionally clamped to [0, 1]. 0 when either is zero.
double similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b, bool clamp = true);

/// Most recent manifesto of every other party released no later than x and
/// within the window, across all countries. Date ties go to the smaller id.
/// Result: pairs (x index, y index) in corpus order of x.
std::vector<std::pair<std::size_t, std::size_t>> recent_pairs(const corpus::Corpus& corpus,
                                                              double window_years);

/// Closed atoms for the calibration program and one open pos/1 atom per
/// manifesto, initialised to (r_hat + 1) / 2. Manifestos listed in
/// `observed_pos` get pos observed at the given [0, 1] value instead.
/// `predictions` must align with `corpus`. Throws ValidationError on a
/// missing or mismatched prediction.
pslengine::RelationalDatabase build_database(
    const corpus::Corpus& corpus, const std::vector<hiermodel::Prediction>& predictions,
    const PartyGraph& graph, const CalibrationConfig& config,
    const std::map<std::string, double>& observed_pos = {});

enum class RuleGroup { Coalition, Similarity, Ratio, Temporal };

std::string_view to_string(RuleGroup g);

/// Rule groups by the predicates a rule mentions: RegCoalition/EUCoalition,
/// Similarity, LwRightLeftRatio, PreviousManifesto. Rules outside every
/// group are always kept.
pslengine::Program select_rules(const pslengine::Program& program, const std::set<RuleGroup>& groups);

struct CalibrationResult {
  std::map<std::string, double> pos;      // [0, 1]
  std::map<std::string, double> r_cal;    // 2 pos - 1
  std::map<std::string, double> initial;  // warm start, [0, 1]
  std::size_t ground_rules = 0;
  pslengine::MapResult solver;
};

/// Grounds `program` (plus the prior pair when configured) on `db`, runs MAP
/// inference warm-started at the initial pos values and reads pos back.
CalibrationResult calibrate(const pslengine::RelationalDatabase& db,
                            const pslengine::Program& program, const CalibrationConfig& config);

/// Out-of-fold first-stage outputs for a training corpus.
struct StackedEstimates {
  std::vector<hiermodel::Prediction> predictions;  // aligned with the corpus
  std::vector<std::size_t> fold;                   // fold of each document
  /// Ids the model for fold f was trained on.
  std::vector<std::set<std::string>> trained_on;
};

/// k-fold stacking: each document's prediction comes from a model trained on
/// the other folds. Fold assignment is a seeded shuffle. Throws
/// ValidationError when k < 2, k exceeds the corpus size, or a fold has no
/// supervised documents.
StackedEstimates stacked_estimates(const corpus::Corpus& train, const hiermodel::ModelConfig& config,
                                   std::size_t k, std::uint64_t seed,
                                   const embedalign::EmbeddingTable* pretrained = nullptr);

}  // namespace polyscale::calibration
