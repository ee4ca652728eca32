#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "polyscale/calibration/party_graph.hpp"
#include "polyscale/corpus/corpus.hpp"
#include "polyscale/embedalign/embeddings.hpp"
#include "polyscale/evalcli/config.hpp"
#include "polyscale/evalcli/pipeline.hpp"
#include "polyscale/pslengine/program.hpp"

namespace polyscale::evalcli {

/// Everything a run reads from disk, loaded once.
struct Assets {
  corpus::Corpus corpus;  // ches_gold attached when a CHES file is given
  calibration::PartyGraph graph;
  pslengine::Program program;
  std::optional<embedalign::EmbeddingTable> pretrained;  // aligned multilingual table
};

/// Throws ValidationError on a missing or malformed file.
Assets load_assets(const DataPaths& paths);

/// Default location of the shipped calibration program.
std::filesystem::path default_program_path();

/// Runs `fn`, prefixing any failure with the stage name. ValidationError
/// stays a ValidationError; anything else becomes a StageError.
void run_stage(const std::string& name, const std::function<void()>& fn);

/// Per-variant scores of one random split.
struct RepeatScores {
  std::map<std::string, SentenceScores> sentence;           // Joint_sent, Joint, Joint_struc
  std::map<std::string, std::optional<Correlation>> document;  // Joint_doc, Joint, Joint_struc
};

struct ExperimentReport {
  std::vector<RepeatScores> repeats;
  std::optional<TwoStageResult> temporal;
  std::vector<std::string> temporal_test_ids;
  std::vector<std::filesystem::path> files;  // everything written, in order
};

/// Random-split repeats (four model variants each, repeats in parallel)
/// followed by the temporal two-stage run. Writes
///   sentence_f.csv              language rows and Avg., mean over repeats
///   document_scores.csv         r and rho per document-level variant
///   random_repeats.csv          the per-repeat numbers behind both
///   temporal_sentence_f.csv
///   calibration_ablation.csv    Joint_struc then the four PSL rows
///   temporal_positions.csv      per test manifesto r_hat, r_cal and gold
///   manifest.json               seeds, config hash, input and output blob ids
/// plus *.gp scripts when cfg.gnuplot is set.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Checks every output listed in a run's manifest.json against its blob id
/// and renders the table CSVs as aligned text. Writes the gnuplot scripts
/// into `run_dir` when asked. Throws ValidationError on a missing manifest
/// or a changed file.
std::string summarize_run(const std::filesystem::path& run_dir, bool gnuplot = false);

}  // namespace polyscale::evalcli
