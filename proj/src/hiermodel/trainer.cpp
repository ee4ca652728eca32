#include "polyscale/hiermodel/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "polyscale/diffcore/adam.hpp"
#include "polyscale/error.hpp"
#include "polyscale/util/parallel.hpp"

namespace polyscale::hiermodel {

namespace {

std::vector<std::size_t> supervised_indices(const corpus::Corpus& corpus) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& m = corpus[i];
    if (m.rile_gold || m.sentence_annotated()) out.push_back(i);
  }
  return out;
}

}  // namespace

TrainingResult train(const corpus::Corpus& corpus, const ModelConfig& config,
                     const embedalign::EmbeddingTable* pretrained) {
  config.validate();
  const auto idx = supervised_indices(corpus);
  if (idx.empty()) throw ValidationError("training corpus has no labelled documents");
  const auto train_set = corpus.subset(idx);

  std::vector<DocumentTargets> targets;
  targets.reserve(train_set.size());
  for (const auto& m : train_set.manifestos()) targets.push_back(targets_for(m, train_set.scheme()));

  TrainingResult result{
      HierModel(config, Vocabulary::build(train_set, config.vocab_cap, pretrained),
                train_set.scheme(), pretrained),
      {}};
  auto& model = result.model;
  auto& store = model.params();
  diffcore::Adam adam(store, {.learning_rate = config.learning_rate, .clip_norm = config.clip_norm});

  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double acc = 0.0;
    for (const auto d : order) {
      diffcore::Tape tape;
      const auto g = model.build(tape, train_set[d]);
      const auto loss = model.build_loss(tape, g, targets[d]);
      acc += tape.scalar(loss.total);
      store.zero_grad();
      tape.backward(loss.total);
      adam.step(store);
    }
    const double mean = acc / static_cast<double>(order.size());
    if (!std::isfinite(mean)) throw StageError("training diverged at epoch " + std::to_string(epoch));
    result.trace.push_back({epoch, mean, order.size()});
    spdlog::debug("epoch {} mean loss {:.6f}", epoch, mean);
  }
  return result;
}

double corpus_loss(const HierModel& model, const corpus::Corpus& corpus) {
  const auto idx = supervised_indices(corpus);
  if (idx.empty()) throw ValidationError("corpus has no labelled documents");
  std::vector<double> losses(idx.size());
  util::parallel_for(idx.size(), [&](std::size_t i) {
    const auto& m = corpus[idx[i]];
    auto& self = const_cast<HierModel&>(model);
    diffcore::Tape tape;
    const auto g = self.build(tape, m);
    losses[i] = tape.scalar(model.build_loss(tape, g, targets_for(m, corpus.scheme())).total);
  });
  return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
}

std::vector<Prediction> predict(const HierModel& model, const corpus::Corpus& corpus) {
  std::vector<Prediction> out(corpus.size());
  util::parallel_for(corpus.size(), [&](std::size_t i) { out[i] = model.encode(corpus[i]); });
  return out;
}

}  // namespace polyscale::hiermodel
