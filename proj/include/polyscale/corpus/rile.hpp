#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "polyscale/corpus/label_scheme.hpp"

namespace polyscale::corpus {

/// (#RIGHT - #LEFT) / #labels, i.e. the RILE index scaled to [-1, 1].
/// Throws ValidationError on an empty list or an unknown code.
double compute_rile(std::span<const std::string> labels, const LabelScheme& scheme);
double compute_rile_indices(std::span<const std::size_t> label_indices,
                            const LabelScheme& scheme);
double compute_rile_polarities(std::span<const Polarity> polarities);

inline double rile_from_raw(double raw) { return raw / 100.0; }
inline double rile_to_raw(double scaled) { return scaled * 100.0; }

}  // namespace polyscale::corpus
