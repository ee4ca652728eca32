#pragma once

#include <optional>
#include <span>
#include <vector>

#include "polyscale/corpus/label_scheme.hpp"
#include "polyscale/hiermodel/config.hpp"
#include "polyscale/hiermodel/model.hpp"

namespace polyscale::hiermodel {

/// Mean over sentences of -log y_i[gold]. Throws ValidationError when any
/// sentence lacks a gold class or the lengths differ.
double loss_sentence(const Prediction& pred, std::span<const std::optional<std::size_t>> gold);
/// Mean over sentences of -log p_i[gold polarity].
double loss_polarity(const Prediction& pred,
                     std::span<const std::optional<corpus::Polarity>> gold);
/// Mean squared error over a batch of documents.
double loss_document(std::span<const double> r_hat, std::span<const std::optional<double>> r_gold);
/// Mean over documents of (mean_i(p_right - p_left) - r)^2.
double loss_structured(std::span<const Prediction> preds,
                       std::span<const std::optional<double>> r_gold);

struct LossComponents {
  double sentence = 0.0;    // L_S
  double document = 0.0;    // L_D
  double polarity = 0.0;    // L_SP
  double structured = 0.0;  // L_struc
};

struct LossTotals {
  double joint = 0.0;  // L_J
  double total = 0.0;  // L_T
};

/// L_J = alpha L_S + (1 - alpha) L_D and L_T = L_J + beta L_SP + gamma L_struc.
LossTotals loss_total(const LossComponents& c, const ModelConfig& config);

}  // namespace polyscale::hiermodel
