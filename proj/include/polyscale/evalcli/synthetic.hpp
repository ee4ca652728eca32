#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "polyscale/calibration/party_graph.hpp"
#include "polyscale/corpus/corpus.hpp"
#include "polyscale/embedalign/embeddings.hpp"

namespace polyscale::evalcli {

/// Planted corpus: one country per pseudo-language, parties in left / centre
/// / right blocks with a latent position that drifts between elections.
/// Each sentence draws a polarity from the position, then a code from the
/// party's own preferences, and is written with signature words of that
/// code plus filler words.
struct SyntheticConfig {
  std::size_t documents = 200;
  std::vector<std::string> languages = {"en", "de", "fr"};
  std::size_t parties_per_country = 12;
  std::vector<int> election_years = {1995, 1999, 2003, 2007, 2011, 2015};
  std::size_t min_sentences = 12;
  std::size_t max_sentences = 18;
  double annotated_fraction = 0.5;
  double neutral_share = 0.55;
  double drift = 0.05;
  double party_spread = 0.2;
  std::size_t embedding_dim = 24;
  std::size_t signature_words = 3;  // per code and language
  std::size_t filler_words = 60;    // per language
  double signature_noise = 0.35;
  std::uint64_t seed = 7;
};

struct SyntheticData {
  corpus::Corpus corpus;  // ches_gold holds the planted position
  calibration::PartyGraph graph;
  std::vector<embedalign::EmbeddingTable> embeddings;  // first language is the pivot
  std::map<std::string, embedalign::BilingualLexicon> lexicons;  // non-pivot language -> pivot
  std::map<std::string, double> planted;                          // manifesto id -> position
};

/// Throws ValidationError when more documents are requested than there are
/// (party, election) slots, or on an empty language list.
SyntheticData generate_synthetic(const corpus::LabelScheme& scheme, const SyntheticConfig& config);

/// Writes corpus.jsonl, party_graph.tsv, ches.tsv (party, year, planted
/// position), emb_<lang>.vec and lex_<lang>_<pivot>.tsv into `dir`.
void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir);

}  // namespace polyscale::evalcli
