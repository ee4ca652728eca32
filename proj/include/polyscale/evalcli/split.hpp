#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "polyscale/corpus/corpus.hpp"
#include "polyscale/util/date.hpp"

namespace polyscale::evalcli {

enum class SplitKind { RandomStratified, Temporal };

std::string_view to_string(SplitKind k);
SplitKind parse_split_kind(std::string_view text);

struct SplitSpec {
  SplitKind kind = SplitKind::RandomStratified;
  double test_fraction = 0.2;
  util::Date cutoff = util::parse_iso_date("2009-01-01");
  std::size_t repeats = 10;
  std::uint64_t seed = 1;
  double dev_fraction = 0.1;

  void validate() const;
};

struct Split {
  std::vector<std::size_t> train, dev, test;  // corpus indices, ascending
};

/// RandomStratified: per country, round(n_c * test_fraction) documents go to
/// test (seed and repeat select the shuffle). Temporal: elections strictly
/// before the cutoff train, the rest test. In both cases dev is a seeded
/// dev_fraction of train (at least one document when dev_fraction > 0 and
/// train has two or more). Throws ValidationError when train or test is empty.
Split make_split(const corpus::Corpus& corpus, const SplitSpec& spec, std::size_t repeat = 0);

}  // namespace polyscale::evalcli
