#include "polyscale/evalcli/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "polyscale/error.hpp"

namespace polyscale::evalcli {

std::string_view to_string(SplitKind k) {
  return k == SplitKind::Temporal ? "temporal" : "random_stratified";
}

SplitKind parse_split_kind(std::string_view text) {
  if (text == "random_stratified" || text == "RANDOM_STRATIFIED") return SplitKind::RandomStratified;
  if (text == "temporal" || text == "TEMPORAL") return SplitKind::Temporal;
  throw ValidationError("unknown split kind '" + std::string(text) + "'");
}

void SplitSpec::validate() const {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ValidationError("test_fraction must lie in (0, 1)");
  }
  if (!(dev_fraction >= 0.0 && dev_fraction < 1.0)) {
    throw ValidationError("dev_fraction must lie in [0, 1)");
  }
  if (repeats < 1) throw ValidationError("repeats must be >= 1");
}

Split make_split(const corpus::Corpus& corpus, const SplitSpec& spec, std::size_t repeat) {
  spec.validate();
  std::mt19937_64 rng(spec.seed * 1000003ULL + repeat);
  Split s;
  std::vector<std::size_t> train;
  if (spec.kind == SplitKind::Temporal) {
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      (corpus[i].election_date < spec.cutoff ? train : s.test).push_back(i);
    }
  } else {
    std::map<std::string, std::vector<std::size_t>> by_country;
    for (std::size_t i = 0; i < corpus.size(); ++i) by_country[corpus[i].country].push_back(i);
    for (auto& [country, docs] : by_country) {
      std::shuffle(docs.begin(), docs.end(), rng);
      const auto n_test = static_cast<std::size_t>(
          std::llround(static_cast<double>(docs.size()) * spec.test_fraction));
      s.test.insert(s.test.end(), docs.begin(), docs.begin() + static_cast<long>(n_test));
      train.insert(train.end(), docs.begin() + static_cast<long>(n_test), docs.end());
    }
  }
  if (train.empty()) throw ValidationError("split leaves the training partition empty");
  if (s.test.empty()) throw ValidationError("split leaves the test partition empty");

  std::sort(train.begin(), train.end());
  std::shuffle(train.begin(), train.end(), rng);
  std::size_t n_dev = 0;
  if (spec.dev_fraction > 0.0 && train.size() >= 2) {
    n_dev = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(static_cast<double>(train.size()) * spec.dev_fraction)));
    n_dev = std::min(n_dev, train.size() - 1);
  }
  s.dev.assign(train.begin(), train.begin() + static_cast<long>(n_dev));
  s.train.assign(train.begin() + static_cast<long>(n_dev), train.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.dev.begin(), s.dev.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

}  // namespace polyscale::evalcli
