#include "polyscale/corpus/rile.hpp"

#include "polyscale/error.hpp"

namespace polyscale::corpus {

double compute_rile_polarities(std::span<const Polarity> polarities) {
  if (polarities.empty()) throw ValidationError("cannot compute RILE of an empty label list");
  long balance = 0;
  for (Polarity p : polarities) {
    if (p == Polarity::Right) ++balance;
    if (p == Polarity::Left) --balance;
  }
  return static_cast<double>(balance) / static_cast<double>(polarities.size());
}

double compute_rile_indices(std::span<const std::size_t> label_indices,
                            const LabelScheme& scheme) {
  if (label_indices.empty()) {
    throw ValidationError("cannot compute RILE of an empty label list");
  }
  long balance = 0;
  for (std::size_t idx : label_indices) {
    if (idx >= scheme.size()) throw ValidationError("label index out of range");
    const Polarity p = scheme.polarity_at(idx);
    if (p == Polarity::Right) ++balance;
    if (p == Polarity::Left) --balance;
  }
  return static_cast<double>(balance) / static_cast<double>(label_indices.size());
}

double compute_rile(std::span<const std::string> labels, const LabelScheme& scheme) {
  if (labels.empty()) throw ValidationError("cannot compute RILE of an empty label list");
  long balance = 0;
  for (const auto& code : labels) {
    const Polarity p = scheme.polarity_of(code);
    if (p == Polarity::Right) ++balance;
    if (p == Polarity::Left) --balance;
  }
  return static_cast<double>(balance) / static_cast<double>(labels.size());
}

}  // namespace polyscale::corpus
