#include "polyscale/calibration/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "polyscale/error.hpp"
#include "polyscale/hiermodel/trainer.hpp"
#include "polyscale/pslengine/ground.hpp"
#include "polyscale/util/parallel.hpp"

namespace polyscale::calibration {

using corpus::Polarity;

void CalibrationConfig::validate() const {
  if (!(recency_window_years > 0.0)) throw ValidationError("recency window must be positive");
  if (!(prior_weight >= 0.0)) throw ValidationError("prior weight must be >= 0");
}

double squash(double v) {
  if (!(v >= 0.0)) throw ValidationError("squash expects a nonnegative value");
  return 2.0 / (1.0 + std::exp(-v)) - 1.0;
}

double lw_right_left_ratio(std::span<const Polarity> polarities) {
  if (polarities.empty()) throw ValidationError("cannot compute a ratio for an empty document");
  double w[3] = {0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < polarities.size(); ++i) {
    w[static_cast<int>(polarities[i])] += std::log(static_cast<double>(i + 1) + 1.0);
  }
  const double right = w[static_cast<int>(Polarity::Right)];
  return right / (w[0] + w[1] + w[2]);
}

double lw_right_left_ratio(const hiermodel::Prediction& pred) {
  std::vector<Polarity> p;
  for (std::size_t i = 0; i < pred.sentences.size(); ++i) p.push_back(pred.predicted_polarity(i));
  return lw_right_left_ratio(p);
}

double lw_right_left_ratio(const corpus::Manifesto& m, const corpus::LabelScheme& scheme) {
  std::vector<Polarity> p;
  for (const auto& s : m.sentences) {
    if (!s.gold_code) throw ValidationError("manifesto " + m.id + " has an uncoded sentence");
    p.push_back(scheme.polarity_of(*s.gold_code));
  }
  return lw_right_left_ratio(p);
}

double similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b, bool clamp) {
  if (a.size() != b.size()) throw ValidationError("similarity of vectors with different sizes");
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  const double c = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
  return clamp ? std::max(c, 0.0) : c;
}

std::vector<std::pair<std::size_t, std::size_t>> recent_pairs(const corpus::Corpus& corpus,
                                                              double window_years) {
  std::map<std::string, std::vector<std::size_t>> by_party;
  for (std::size_t i = 0; i < corpus.size(); ++i) by_party[corpus[i].party_id].push_back(i);

  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t x = 0; x < corpus.size(); ++x) {
    const auto& mx = corpus[x];
    for (const auto& [party, docs] : by_party) {
      if (party == mx.party_id) continue;
      std::optional<std::size_t> best;
      for (const auto y : docs) {
        const auto& my = corpus[y];
        if (my.election_date > mx.election_date) continue;
        if (util::years_between(my.election_date, mx.election_date) > window_years) continue;
        if (!best || my.election_date > corpus[*best].election_date ||
            (my.election_date == corpus[*best].election_date && my.id < corpus[*best].id)) {
          best = y;
        }
      }
      if (best) out.emplace_back(x, *best);
    }
  }
  return out;
}

pslengine::RelationalDatabase build_database(const corpus::Corpus& corpus,
                                             const std::vector<hiermodel::Prediction>& predictions,
                                             const PartyGraph& graph,
                                             const CalibrationConfig& config,
                                             const std::map<std::string, double>& observed_pos) {
  config.validate();
  if (predictions.size() != corpus.size()) {
    throw ValidationError("every manifesto needs a prediction");
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (predictions[i].manifesto_id != corpus[i].id) {
      throw ValidationError("manifesto " + corpus[i].id + " has no prediction");
    }
  }

  pslengine::RelationalDatabase db;
  std::set<std::string> warned;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& m = corpus[i];
    db.observe("Manifesto", {m.id}, 1.0);
    db.observe("Party", {m.id, m.party_id}, 1.0);
    db.observe("LwRightLeftRatio", {m.id}, squash(lw_right_left_ratio(predictions[i])));
    const double init = std::clamp((predictions[i].r_hat + 1.0) / 2.0, 0.0, 1.0);
    if (auto it = observed_pos.find(m.id); it != observed_pos.end()) {
      db.observe("pos", {m.id}, it->second);
    } else {
      db.target("pos", {m.id}, init);
    }
    if (config.prior_weight > 0.0) db.observe("Prior", {m.id}, init);
    if (!graph.has_party(m.party_id) && warned.insert(m.party_id).second) {
      spdlog::warn("party {} is not in the party graph; its coalition atoms are omitted", m.party_id);
    }
  }

  for (std::size_t x = 0; x < corpus.size(); ++x) {
    for (std::size_t y = 0; y < corpus.size(); ++y) {
      if (x == y) continue;
      const auto& mx = corpus[x];
      const auto& my = corpus[y];
      if (mx.country == my.country && mx.election_date == my.election_date) {
        db.observe("SameElec", {mx.id, my.id}, 1.0);
      }
    }
  }

  for (const auto& [x, y] : recent_pairs(corpus, config.recency_window_years)) {
    const auto& mx = corpus[x];
    const auto& my = corpus[y];
    db.observe("Recent", {mx.id, my.id}, 1.0);
    const double s =
        similarity(predictions[x].doc_vector, predictions[y].doc_vector, config.similarity_clamp);
    const double v = std::clamp(s, 0.0, 1.0);
    db.observe("Similarity", {mx.id, my.id}, v);
    db.observe("Similarity", {my.id, mx.id}, v);
  }

  std::set<std::string> parties;
  for (const auto& m : corpus.manifestos()) parties.insert(m.party_id);
  for (const auto& e : graph.edges()) {
    if (e.count == 0 || !parties.count(e.party_a) || !parties.count(e.party_b)) continue;
    const auto name = e.kind == CoalitionKind::Regional ? "RegCoalition" : "EUCoalition";
    const double v = squash(static_cast<double>(e.count));
    db.observe(name, {e.party_a, e.party_b}, v);
    db.observe(name, {e.party_b, e.party_a}, v);
  }

  // Immediately preceding manifesto of the same party.
  std::map<std::string, std::vector<std::size_t>> by_party;
  for (std::size_t i = 0; i < corpus.size(); ++i) by_party[corpus[i].party_id].push_back(i);
  for (auto& [party, docs] : by_party) {
    std::sort(docs.begin(), docs.end(), [&](std::size_t a, std::size_t b) {
      const auto& ma = corpus[a];
      const auto& mb = corpus[b];
      return ma.election_date != mb.election_date ? ma.election_date < mb.election_date
                                                  : ma.id < mb.id;
    });
    for (std::size_t k = 1; k < docs.size(); ++k) {
      const auto& cur = corpus[docs[k]];
      // Walk back to the latest strictly earlier election.
      for (std::size_t j = k; j-- > 0;) {
        const auto& prev = corpus[docs[j]];
        if (prev.election_date < cur.election_date) {
          db.observe("PreviousManifesto", {cur.id, party, prev.id}, 1.0);
          break;
        }
      }
    }
  }
  return db;
}

std::string_view to_string(RuleGroup g) {
  switch (g) {
    case RuleGroup::Coalition: return "coal";
    case RuleGroup::Similarity: return "esim";
    case RuleGroup::Ratio: return "ploc";
    case RuleGroup::Temporal: return "temp";
  }
  return "?";
}

pslengine::Program select_rules(const pslengine::Program& program, const std::set<RuleGroup>& groups) {
  return program.filtered([&](const pslengine::Rule& r) {
    const bool coal = program.uses(r, "RegCoalition") || program.uses(r, "EUCoalition");
    const bool esim = program.uses(r, "Similarity");
    const bool ploc = program.uses(r, "LwRightLeftRatio");
    const bool temp = program.uses(r, "PreviousManifesto");
    if (!coal && !esim && !ploc && !temp) return true;
    return (coal && groups.count(RuleGroup::Coalition)) || (esim && groups.count(RuleGroup::Similarity)) ||
           (ploc && groups.count(RuleGroup::Ratio)) || (temp && groups.count(RuleGroup::Temporal));
  });
}

CalibrationResult calibrate(const pslengine::RelationalDatabase& db,
                            const pslengine::Program& program, const CalibrationConfig& config) {
  config.validate();
  pslengine::Program full = program;
  if (config.prior_weight > 0.0) {
    full.declare("Prior", 1, pslengine::PredicateKind::Closed);
    using pslengine::Literal;
    full.add_rule({config.prior_weight, {Literal{"Prior", {"x"}, false}}, Literal{"pos", {"x"}, false}, 2});
    full.add_rule({config.prior_weight, {Literal{"Prior", {"x"}, true}}, Literal{"pos", {"x"}, true}, 2});
  }
  full.declare("pos", 1, pslengine::PredicateKind::Open);

  const auto net = pslengine::ground(full, db);
  CalibrationResult out;
  out.ground_rules = net.rules().size();
  out.solver = pslengine::map_inference(net, config.solver);
  if (!out.solver.converged) {
    spdlog::warn("calibration stopped after {} iterations without meeting the tolerance",
                 out.solver.iterations);
  }
  for (std::size_t j = 0; j < net.free_count(); ++j) {
    const auto& atom = net.atoms()[net.free_atoms()[j]];
    if (atom.predicate != "pos") continue;
    const auto& id = atom.args.at(0);
    out.initial[id] = atom.value;
    out.pos[id] = out.solver.y[j];
    out.r_cal[id] = 2.0 * out.solver.y[j] - 1.0;
  }
  return out;
}

StackedEstimates stacked_estimates(const corpus::Corpus& train, const hiermodel::ModelConfig& config,
                                   std::size_t k, std::uint64_t seed,
                                   const embedalign::EmbeddingTable* pretrained) {
  if (k < 2) throw ValidationError("stacking needs at least 2 folds");
  if (k > train.size()) throw ValidationError("more folds than training documents");

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  StackedEstimates out;
  out.fold.assign(train.size(), 0);
  for (std::size_t i = 0; i < order.size(); ++i) out.fold[order[i]] = i % k;

  std::vector<std::vector<std::size_t>> held(k), kept(k);
  for (std::size_t d = 0; d < train.size(); ++d) {
    for (std::size_t f = 0; f < k; ++f) (out.fold[d] == f ? held[f] : kept[f]).push_back(d);
  }
  for (std::size_t f = 0; f < k; ++f) {
    const bool supervised = std::any_of(held[f].begin(), held[f].end(), [&](std::size_t d) {
      return train[d].rile_gold || train[d].sentence_annotated();
    });
    if (!supervised) throw ValidationError("fold " + std::to_string(f) + " has no supervised documents");
  }

  out.predictions.resize(train.size());
  out.trained_on.resize(k);
  util::parallel_for(k, [&](std::size_t f) {
    const auto part = train.subset(kept[f]);
    for (const auto& m : part.manifestos()) out.trained_on[f].insert(m.id);
    const auto result = hiermodel::train(part, config, pretrained);
    for (const auto d : held[f]) out.predictions[d] = result.model.encode(train[d]);
  });
  return out;
}

}  // namespace polyscale::calibration
