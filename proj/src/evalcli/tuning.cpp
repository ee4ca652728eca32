#include "polyscale/evalcli/tuning.hpp"

#include "polyscale/error.hpp"
#include "polyscale/evalcli/pipeline.hpp"
#include "polyscale/hiermodel/trainer.hpp"
#include "polyscale/util/parallel.hpp"

namespace polyscale::evalcli {

namespace {

TunePoint evaluate(const corpus::Corpus& train, const corpus::Corpus& dev,
                   const hiermodel::ModelConfig& cfg, const embedalign::EmbeddingTable* pretrained) {
  TunePoint p{cfg.alpha, cfg.beta, cfg.gamma, {}, {}, 0.0};
  const auto model = hiermodel::train(train, cfg, pretrained).model;
  const auto preds = hiermodel::predict(model, dev);
  if (dev.annotated_count() > 0) {
    p.dev_f = score_sentences(dev, preds, model.codes(), train).micro_f;
  }
  std::vector<double> r_hat;
  std::vector<std::optional<double>> gold;
  for (std::size_t i = 0; i < dev.size(); ++i) {
    r_hat.push_back(preds[i].r_hat);
    gold.push_back(dev[i].rile_gold);
  }
  if (auto c = correlate(r_hat, gold)) p.dev_r = c->r;
  p.score = p.dev_f.value_or(0.0) + p.dev_r.value_or(0.0);
  return p;
}

std::vector<TunePoint> sweep(const corpus::Corpus& train, const corpus::Corpus& dev,
                             const std::vector<hiermodel::ModelConfig>& configs,
                             const embedalign::EmbeddingTable* pretrained) {
  std::vector<TunePoint> out(configs.size());
  util::parallel_for(configs.size(),
                     [&](std::size_t i) { out[i] = evaluate(train, dev, configs[i], pretrained); });
  return out;
}

const TunePoint& best_of(const std::vector<TunePoint>& pts) {
  if (pts.empty()) throw ValidationError("empty tuning grid");
  std::size_t b = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].score > pts[b].score) b = i;
  }
  return pts[b];
}

}  // namespace

TuneResult tune(const corpus::Corpus& train, const corpus::Corpus& dev,
                const hiermodel::ModelConfig& base, const TuneGrid& grid,
                const embedalign::EmbeddingTable* pretrained) {
  bool has_rile = false;
  for (const auto& m : dev.manifestos()) has_rile = has_rile || m.rile_gold.has_value();
  if (dev.annotated_count() == 0 && !has_rile) {
    throw ValidationError("development set has no labels to tune against");
  }

  TuneResult out;
  auto cfg = base;
  std::vector<hiermodel::ModelConfig> configs;
  for (double a : grid.alphas) {
    auto c = base;
    c.alpha = a;
    c.beta = 0.0;
    c.gamma = 0.0;
    configs.push_back(c);
  }
  out.alpha_sweep = sweep(train, dev, configs, pretrained);
  cfg.alpha = best_of(out.alpha_sweep).alpha;

  configs.clear();
  for (double g : grid.gammas) {
    auto c = cfg;
    c.beta = grid.beta_during_gamma;
    c.gamma = g;
    configs.push_back(c);
  }
  out.gamma_sweep = sweep(train, dev, configs, pretrained);
  cfg.gamma = best_of(out.gamma_sweep).gamma;

  configs.clear();
  for (double b : grid.betas) {
    auto c = cfg;
    c.beta = b;
    configs.push_back(c);
  }
  out.beta_sweep = sweep(train, dev, configs, pretrained);
  cfg.beta = best_of(out.beta_sweep).beta;
  out.best = cfg;
  return out;
}

}  // namespace polyscale::evalcli
