#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "polyscale/corpus/corpus.hpp"

namespace polyscale::evalcli {

/// Expert survey scores per party and survey year.
class ChesTable {
 public:
  void add(const std::string& party, int year, double score);
  /// Score from the survey year closest to the election year; ties go to the
  /// earlier survey. nullopt when the party has no scores.
  std::optional<double> lookup(const std::string& party, const util::Date& election) const;
  bool empty() const { return scores_.empty(); }

  /// Tab-separated: party_id, survey_year, lr_score; '#' comments.
  static ChesTable parse(std::istream& in, const std::string& source = "<ches>");
  static ChesTable load(const std::filesystem::path& path);

 private:
  std::map<std::string, std::map<int, double>> scores_;
};

/// Copy of `corpus` with ches_gold filled from the table where available.
corpus::Corpus attach_ches(const corpus::Corpus& corpus, const ChesTable& table);

}  // namespace polyscale::evalcli
