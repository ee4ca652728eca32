#include "polyscale/evalcli/pipeline.hpp"

#include <algorithm>

#include "polyscale/error.hpp"
#include "polyscale/evalcli/metrics.hpp"
#include "polyscale/hiermodel/trainer.hpp"

namespace polyscale::evalcli {

embedalign::EmbeddingTable build_pretrained(
    const std::vector<embedalign::EmbeddingTable>& tables,
    const std::map<std::string, embedalign::BilingualLexicon>& lexicons, const std::string& pivot) {
  const embedalign::EmbeddingTable* pivot_table = nullptr;
  for (const auto& t : tables) {
    if (t.language() == pivot) pivot_table = &t;
  }
  if (!pivot_table) throw ValidationError("no embeddings for pivot language " + pivot);
  std::map<std::string, embedalign::ProjectionMatrix> projections;
  for (const auto& t : tables) {
    if (t.language() == pivot) continue;
    auto lex = lexicons.find(t.language());
    if (lex == lexicons.end()) throw ValidationError("no lexicon for language " + t.language());
    projections[t.language()] = embedalign::align(t, *pivot_table, lex->second).projection;
  }
  return embedalign::build_multilingual(tables, projections, pivot);
}

SentenceScores score_sentences(const corpus::Corpus& test,
                               const std::vector<hiermodel::Prediction>& predictions,
                               const std::vector<std::string>& codes, const corpus::Corpus& train,
                               const std::set<std::string>& excluded) {
  if (predictions.size() != test.size()) throw ValidationError("one prediction per test document");
  std::map<std::string, std::size_t> freq;
  for (const auto& m : train.manifestos()) {
    for (const auto& s : m.sentences) {
      if (s.gold_code && !excluded.count(*s.gold_code)) ++freq[*s.gold_code];
    }
  }
  std::string majority;
  std::size_t best = 0;
  for (const auto& [c, n] : freq) {
    if (n > best) {
      best = n;
      majority = c;
    }
  }

  std::vector<std::string> pred, gold;
  std::map<std::string, std::pair<std::vector<std::string>, std::vector<std::string>>> by_lang;
  for (std::size_t d = 0; d < test.size(); ++d) {
    const auto& m = test[d];
    if (!m.sentence_annotated()) continue;
    for (std::size_t i = 0; i < m.sentences.size(); ++i) {
      const auto p = codes.at(predictions[d].predicted_class(i));
      pred.push_back(p);
      gold.push_back(*m.sentences[i].gold_code);
      by_lang[m.language].first.push_back(p);
      by_lang[m.language].second.push_back(*m.sentences[i].gold_code);
    }
  }
  if (gold.empty()) throw ValidationError("no annotated test sentences to score");
  SentenceScores s;
  s.sentences = gold.size();
  s.micro_f = micro_f(pred, gold, excluded);
  const std::vector<std::string> constant(gold.size(), majority.empty() ? codes.front() : majority);
  s.majority_f = micro_f(constant, gold, excluded);
  for (const auto& [lang, pg] : by_lang) s.per_language[lang] = micro_f(pg.first, pg.second, excluded);
  return s;
}

std::optional<Correlation> correlate(const std::vector<double>& scores,
                                     const std::vector<std::optional<double>>& gold) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < scores.size() && i < gold.size(); ++i) {
    if (!gold[i]) continue;
    x.push_back(scores[i]);
    y.push_back(*gold[i]);
  }
  if (x.size() < 2) return std::nullopt;
  try {
    return Correlation{pearson(x, y), spearman(x, y), x.size()};
  } catch (const ValidationError&) {
    return std::nullopt;
  }
}

TwoStageResult run_two_stage(const corpus::Corpus& corpus, const Split& split,
                             const calibration::PartyGraph& graph,
                             const pslengine::Program& program, const TwoStageOptions& options,
                             const embedalign::EmbeddingTable* pretrained) {
  TwoStageResult out;
  out.train = split.train;
  out.train.insert(out.train.end(), split.dev.begin(), split.dev.end());
  std::sort(out.train.begin(), out.train.end());
  out.test = split.test;
  const auto train = corpus.subset(out.train);
  const auto test = corpus.subset(out.test);

  auto model_cfg = options.model;
  const auto full = hiermodel::train(train, model_cfg, pretrained);
  out.test_predictions = hiermodel::predict(full.model, test);
  out.sentences = score_sentences(test, out.test_predictions, full.model.codes(), train,
                                  options.excluded_codes);

  const auto stacked = calibration::stacked_estimates(train, model_cfg, options.folds, options.seed,
                                                      pretrained);
  out.train_estimates = stacked.predictions;

  // Calibration runs over train and test manifestos together.
  std::vector<corpus::Manifesto> all_docs;
  std::vector<hiermodel::Prediction> all_preds;
  std::map<std::string, double> observed;
  for (std::size_t i = 0; i < train.size(); ++i) {
    all_docs.push_back(train[i]);
    all_preds.push_back(stacked.predictions[i]);
    if (options.fix_training_pos && train[i].rile_gold) {
      observed[train[i].id] = std::clamp((*train[i].rile_gold + 1.0) / 2.0, 0.0, 1.0);
    }
  }
  for (std::size_t i = 0; i < test.size(); ++i) {
    all_docs.push_back(test[i]);
    all_preds.push_back(out.test_predictions[i]);
  }
  const corpus::Corpus joint(std::move(all_docs), corpus.scheme());
  const auto db = calibration::build_database(joint, all_preds, graph, options.calibration, observed);

  std::vector<double> r_hat;
  std::vector<std::optional<double>> rile_gold, ches_gold;
  for (std::size_t i = 0; i < test.size(); ++i) {
    r_hat.push_back(out.test_predictions[i].r_hat);
    rile_gold.push_back(test[i].rile_gold);
    ches_gold.push_back(test[i].ches_gold);
  }
  out.uncalibrated_rile = correlate(r_hat, rile_gold);
  out.uncalibrated_ches = correlate(r_hat, ches_gold);
  out.ablation.push_back({"Joint_struc", out.uncalibrated_rile, out.uncalibrated_ches, 0});

  using calibration::RuleGroup;
  const std::vector<std::pair<std::string, std::set<RuleGroup>>> steps = {
      {"PSL_coal", {RuleGroup::Coalition}},
      {"PSL_coal+esim", {RuleGroup::Coalition, RuleGroup::Similarity}},
      {"PSL_coal+esim+ploc", {RuleGroup::Coalition, RuleGroup::Similarity, RuleGroup::Ratio}},
      {"PSL_coal+esim+ploc+temp",
       {RuleGroup::Coalition, RuleGroup::Similarity, RuleGroup::Ratio, RuleGroup::Temporal}},
  };
  for (const auto& [name, groups] : steps) {
    const auto result =
        calibration::calibrate(db, calibration::select_rules(program, groups), options.calibration);
    std::vector<double> cal;
    for (std::size_t i = 0; i < test.size(); ++i) cal.push_back(result.r_cal.at(test[i].id));
    out.ablation.push_back({name, correlate(cal, rile_gold), correlate(cal, ches_gold),
                            result.ground_rules});
    out.calibrated = cal;
  }
  return out;
}

}  // namespace polyscale::evalcli
