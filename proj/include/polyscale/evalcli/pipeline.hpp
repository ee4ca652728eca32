#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "polyscale/calibration/calibration.hpp"
#include "polyscale/corpus/corpus.hpp"
#include "polyscale/embedalign/align.hpp"
#include "polyscale/evalcli/split.hpp"
#include "polyscale/hiermodel/model.hpp"
#include "polyscale/pslengine/program.hpp"

namespace polyscale::evalcli {

/// Aligns every non-pivot table to the pivot with its lexicon and returns
/// the namespaced union. Throws ValidationError when a lexicon is missing.
embedalign::EmbeddingTable build_pretrained(
    const std::vector<embedalign::EmbeddingTable>& tables,
    const std::map<std::string, embedalign::BilingualLexicon>& lexicons,
    const std::string& pivot = "en");

/// Sentence-level scores of predictions against gold codes over the
/// annotated documents only.
struct SentenceScores {
  double micro_f = 0.0;
  double majority_f = 0.0;  // most frequent training code predicted everywhere
  std::size_t sentences = 0;
  std::map<std::string, double> per_language;
};

/// `predictions` align with `test`. `train` supplies the majority code.
/// Throws ValidationError when no test sentence is annotated.
SentenceScores score_sentences(const corpus::Corpus& test,
                               const std::vector<hiermodel::Prediction>& predictions,
                               const std::vector<std::string>& codes, const corpus::Corpus& train,
                               const std::set<std::string>& excluded = {});

struct Correlation {
  double r = 0.0;
  double rho = 0.0;
  std::size_t n = 0;
};

/// Correlation of `scores` with gold values; documents without gold are
/// skipped. nullopt when fewer than 2 pairs remain or a side is constant.
std::optional<Correlation> correlate(const std::vector<double>& scores,
                                     const std::vector<std::optional<double>>& gold);

struct AblationRow {
  std::string name;
  std::optional<Correlation> rile;
  std::optional<Correlation> ches;
  std::size_t ground_rules = 0;
};

struct TwoStageOptions {
  hiermodel::ModelConfig model;
  calibration::CalibrationConfig calibration;
  std::size_t folds = 5;
  std::uint64_t seed = 1;
  /// Fix pos of training manifestos at their gold RILE instead of leaving
  /// them free with stacked estimates.
  bool fix_training_pos = false;
  std::set<std::string> excluded_codes;
};

struct TwoStageResult {
  std::vector<std::size_t> train, test;  // corpus indices
  std::vector<hiermodel::Prediction> test_predictions;
  std::vector<hiermodel::Prediction> train_estimates;  // out-of-fold
  SentenceScores sentences;
  std::optional<Correlation> uncalibrated_rile;
  std::optional<Correlation> uncalibrated_ches;
  /// Joint_struc row followed by the incremental coal, +esim, +ploc, +temp rows.
  std::vector<AblationRow> ablation;
  std::vector<double> calibrated;  // r_cal of the test documents, full program
};

/// Trains Joint_struc on the split's train part, stacks out-of-fold
/// estimates for it, calibrates train and test positions jointly and scores
/// the test part. The dev part is folded back into training.
TwoStageResult run_two_stage(const corpus::Corpus& corpus, const Split& split,
                             const calibration::PartyGraph& graph,
                             const pslengine::Program& program, const TwoStageOptions& options,
                             const embedalign::EmbeddingTable* pretrained = nullptr);

}  // namespace polyscale::evalcli
