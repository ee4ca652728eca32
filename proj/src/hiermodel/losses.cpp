#include "polyscale/hiermodel/losses.hpp"

#include <cmath>

#include "polyscale/error.hpp"

namespace polyscale::hiermodel {

namespace {

void require_sentences(const Prediction& pred, std::size_t gold) {
  if (pred.sentences.empty()) throw ValidationError("prediction has no sentences");
  if (pred.sentences.size() != gold) {
    throw ValidationError("gold labels do not match the number of sentences");
  }
}

}  // namespace

double loss_sentence(const Prediction& pred, std::span<const std::optional<std::size_t>> gold) {
  require_sentences(pred, gold.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (!gold[i]) throw ValidationError("sentence " + std::to_string(i + 1) + " has no gold class");
    const auto& y = pred.sentences[i].y;
    if (*gold[i] >= static_cast<std::size_t>(y.size())) throw ValidationError("gold class out of range");
    acc -= std::log(y(static_cast<Eigen::Index>(*gold[i])));
  }
  return acc / static_cast<double>(gold.size());
}

double loss_polarity(const Prediction& pred,
                     std::span<const std::optional<corpus::Polarity>> gold) {
  require_sentences(pred, gold.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (!gold[i]) throw ValidationError("sentence " + std::to_string(i + 1) + " has no gold polarity");
    acc -= std::log(pred.sentences[i].p(static_cast<Eigen::Index>(*gold[i])));
  }
  return acc / static_cast<double>(gold.size());
}

double loss_document(std::span<const double> r_hat, std::span<const std::optional<double>> r_gold) {
  if (r_hat.empty() || r_hat.size() != r_gold.size()) {
    throw ValidationError("document loss needs one gold score per prediction");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < r_hat.size(); ++i) {
    if (!r_gold[i]) throw ValidationError("document " + std::to_string(i) + " has no gold score");
    const double e = r_hat[i] - *r_gold[i];
    acc += e * e;
  }
  return acc / static_cast<double>(r_hat.size());
}

double loss_structured(std::span<const Prediction> preds,
                       std::span<const std::optional<double>> r_gold) {
  if (preds.empty() || preds.size() != r_gold.size()) {
    throw ValidationError("structured loss needs one gold score per prediction");
  }
  double acc = 0.0;
  for (std::size_t d = 0; d < preds.size(); ++d) {
    if (!r_gold[d]) throw ValidationError("document " + std::to_string(d) + " has no gold score");
    const auto& s = preds[d].sentences;
    if (s.empty()) throw ValidationError("prediction has no sentences");
    double m = 0.0;
    for (const auto& x : s) {
      m += x.p(static_cast<Eigen::Index>(corpus::Polarity::Right)) -
           x.p(static_cast<Eigen::Index>(corpus::Polarity::Left));
    }
    m /= static_cast<double>(s.size());
    acc += (m - *r_gold[d]) * (m - *r_gold[d]);
  }
  return acc / static_cast<double>(preds.size());
}

LossTotals loss_total(const LossComponents& c, const ModelConfig& config) {
  LossTotals t;
  t.joint = config.alpha * c.sentence + (1.0 - config.alpha) * c.document;
  t.total = t.joint + config.beta * c.polarity + config.gamma * c.structured;
  return t;
}

}  // namespace polyscale::hiermodel
