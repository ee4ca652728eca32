#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "polyscale/hiermodel/model.hpp"

namespace polyscale::hiermodel {

/// Layout: the bytes "PSCL1\n", one line of JSON manifest (config, seed,
/// vocabulary, codes and a list of {name, shape, dtype, trainable}), then
/// each parameter as little-endian float64 in manifest order, row-major.
void write_checkpoint(const HierModel& model, std::ostream& out);
void save_checkpoint(const HierModel& model, const std::filesystem::path& path);
HierModel read_checkpoint(std::istream& in);
HierModel load_checkpoint(const std::filesystem::path& path);

/// JSON-lines prediction file: one {id, r_hat, doc_vector, sentences:[{code, p}]}
/// record per document.
void save_predictions(const std::vector<Prediction>& preds, const HierModel& model,
                      const std::filesystem::path& path);
void save_predictions(const std::vector<Prediction>& preds, const std::vector<std::string>& codes,
                      const std::filesystem::path& path);

/// Reads what save_predictions wrote. Sentence y is restored as a one-hot of
/// the stored code over `codes`; h is left empty.
std::vector<Prediction> load_predictions(const std::filesystem::path& path,
                                         const std::vector<std::string>& codes);

}  // namespace polyscale::hiermodel
