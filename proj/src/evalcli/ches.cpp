#include "polyscale/evalcli/ches.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "polyscale/error.hpp"

namespace polyscale::evalcli {

void ChesTable::add(const std::string& party, int year, double score) {
  if (!std::isfinite(score)) throw ValidationError("CHES score must be finite");
  scores_[party][year] = score;
}

std::optional<double> ChesTable::lookup(const std::string& party, const util::Date& election) const {
  auto it = scores_.find(party);
  if (it == scores_.end()) return std::nullopt;
  const int year = static_cast<int>(election.year());
  std::optional<double> best;
  int best_gap = 0;
  for (const auto& [y, s] : it->second) {  // ascending, so ties keep the earlier year
    const int gap = std::abs(y - year);
    if (!best || gap < best_gap) {
      best = s;
      best_gap = gap;
    }
  }
  return best;
}

ChesTable ChesTable::parse(std::istream& in, const std::string& source) {
  ChesTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto where = source + ":" + std::to_string(lineno) + ": ";
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) f.push_back(field);
    if (f.size() != 3) throw ValidationError(where + "expected party, year and score");
    int year = 0;
    double score = 0.0;
    auto [p1, e1] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), year);
    auto [p2, e2] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), score);
    if (e1 != std::errc() || p1 != f[1].data() + f[1].size() || e2 != std::errc() ||
        p2 != f[2].data() + f[2].size()) {
      throw ValidationError(where + "malformed year or score");
    }
    t.add(f[0], year, score);
  }
  return t;
}

ChesTable ChesTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open CHES file " + path.string());
  return parse(in, path.string());
}

corpus::Corpus attach_ches(const corpus::Corpus& corpus, const ChesTable& table) {
  auto docs = corpus.manifestos();
  for (auto& m : docs) {
    if (auto s = table.lookup(m.party_id, m.election_date)) m.ches_gold = *s;
  }
  return corpus::Corpus(std::move(docs), corpus.scheme());
}

}  // namespace polyscale::evalcli
