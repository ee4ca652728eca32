#include "polyscale/hiermodel/model.hpp"

#include <random>

#include "polyscale/embedalign/embeddings.hpp"
#include "polyscale/error.hpp"

namespace polyscale::hiermodel {

using diffcore::Tape;
using diffcore::Tensor;
using diffcore::Var;

namespace {

constexpr double kInitScale = 0.08;

Tensor uniform(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-kInitScale, kInitScale);
  Tensor t(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) t(r, c) = dist(rng);
  }
  return t;
}

std::size_t require(const diffcore::ParameterStore& store, const std::string& name) {
  auto i = store.find(name);
  if (!i) throw ValidationError("model is missing parameter " + name);
  return *i;
}

}  // namespace

std::size_t Prediction::predicted_class(std::size_t sentence) const {
  Eigen::Index best = 0;
  sentences.at(sentence).y.maxCoeff(&best);
  return static_cast<std::size_t>(best);
}

corpus::Polarity Prediction::predicted_polarity(std::size_t sentence) const {
  Eigen::Index best = 0;
  sentences.at(sentence).p.maxCoeff(&best);
  return static_cast<corpus::Polarity>(best);
}

DocumentTargets targets_for(const corpus::Manifesto& manifesto, const corpus::LabelScheme& scheme) {
  DocumentTargets t;
  t.rile = manifesto.rile_gold;
  if (manifesto.sentence_annotated()) {
    for (const auto& s : manifesto.sentences) {
      const auto idx = scheme.index_of(*s.gold_code);
      t.codes.push_back(idx);
      t.polarities.push_back(scheme.polarity_at(idx));
    }
  }
  return t;
}

HierModel::HierModel(ModelConfig config, Vocabulary vocabulary, const corpus::LabelScheme& scheme,
                     const embedalign::EmbeddingTable* pretrained)
    : config_(config), vocab_(std::move(vocabulary)) {
  config_.validate();
  for (const auto& c : scheme.codes()) codes_.push_back(c.code);
  if (pretrained) config_.embedding_dim = pretrained->dim();

  std::mt19937_64 rng(config_.seed);
  const auto d = static_cast<Eigen::Index>(config_.embedding_dim);
  const auto v = static_cast<Eigen::Index>(vocab_.size());
  Tensor emb = uniform(v, d, rng);
  if (pretrained) {
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
      if (auto j = pretrained->find(vocab_.keys()[i])) {
        emb.row(static_cast<Eigen::Index>(i)) = pretrained->row(*j);
      }
    }
  }
  params_.add("embedding", std::move(emb), config_.trainable_embeddings);

  const auto hw = config_.word_hidden;
  const auto hs = config_.sentence_hidden;
  diffcore::add_lstm(params_, "word.fwd", config_.embedding_dim, hw, rng, kInitScale);
  diffcore::add_lstm(params_, "word.bwd", config_.embedding_dim, hw, rng, kInitScale);
  diffcore::add_lstm(params_, "sent.fwd", 2 * hw, hs, rng, kInitScale);
  diffcore::add_lstm(params_, "sent.bwd", 2 * hw, hs, rng, kInitScale);

  const auto k = static_cast<Eigen::Index>(codes_.size());
  const auto h2 = static_cast<Eigen::Index>(2 * hs);
  params_.add("class.W", uniform(k, h2, rng));
  params_.add("class.b", uniform(k, 1, rng));
  params_.add("polarity.W", uniform(corpus::kNumPolarities, h2, rng));
  params_.add("polarity.b", uniform(corpus::kNumPolarities, 1, rng));
  params_.add("doc.W", uniform(1, k + h2, rng));
  params_.add("doc.b", uniform(1, 1, rng));
  bind_layout();
}

HierModel::HierModel(ModelConfig config, Vocabulary vocabulary, std::vector<std::string> codes,
                     diffcore::ParameterStore params)
    : config_(config), vocab_(std::move(vocabulary)), codes_(std::move(codes)),
      params_(std::move(params)) {
  config_.validate();
  bind_layout();
  if (params_[embedding_].value.rows() != static_cast<Eigen::Index>(vocab_.size())) {
    throw ValidationError("embedding rows do not match the vocabulary");
  }
  if (params_[class_w_].value.rows() != static_cast<Eigen::Index>(codes_.size())) {
    throw ValidationError("class head does not match the code list");
  }
}

void HierModel::bind_layout() {
  embedding_ = require(params_, "embedding");
  word_fwd_ = diffcore::find_lstm(params_, "word.fwd");
  word_bwd_ = diffcore::find_lstm(params_, "word.bwd");
  sent_fwd_ = diffcore::find_lstm(params_, "sent.fwd");
  sent_bwd_ = diffcore::find_lstm(params_, "sent.bwd");
  class_w_ = require(params_, "class.W");
  class_b_ = require(params_, "class.b");
  polarity_w_ = require(params_, "polarity.W");
  polarity_b_ = require(params_, "polarity.b");
  doc_w_ = require(params_, "doc.W");
  doc_b_ = require(params_, "doc.b");
  config_.embedding_dim = static_cast<std::size_t>(params_[embedding_].value.cols());
  config_.word_hidden = word_fwd_.hidden_dim;
  config_.sentence_hidden = sent_fwd_.hidden_dim;
}

DocumentGraph HierModel::build(Tape& tape, const corpus::Manifesto& manifesto) {
  if (manifesto.sentences.empty()) {
    throw ValidationError("manifesto " + manifesto.id + " has no sentences");
  }
  std::vector<Var> sentence_inputs;
  sentence_inputs.reserve(manifesto.sentences.size());
  for (const auto& s : manifesto.sentences) {
    if (s.tokens.empty()) {
      throw ValidationError("manifesto " + manifesto.id + " has a sentence without tokens");
    }
    std::vector<Var> words;
    words.reserve(s.tokens.size());
    for (const auto& t : s.tokens) {
      const auto r = vocab_.lookup(manifesto.language, t);
      words.push_back(tape.row(params_, embedding_, static_cast<Eigen::Index>(r)));
    }
    sentence_inputs.push_back(
        diffcore::bilstm_encode(tape, params_, words, word_fwd_, word_bwd_).final);
  }
  const auto sent = diffcore::bilstm_encode(tape, params_, sentence_inputs, sent_fwd_, sent_bwd_);

  DocumentGraph g;
  const Var cw = tape.param(params_, class_w_), cb = tape.param(params_, class_b_);
  const Var pw = tape.param(params_, polarity_w_), pb = tape.param(params_, polarity_b_);
  std::vector<Var> pooled;
  for (const Var h : sent.steps) {
    const Var logits = tape.add(tape.matmul(cw, h), cb);
    const Var y = tape.softmax(logits);
    const Var plogits = tape.add(tape.matmul(pw, h), pb);
    g.class_logits.push_back(logits);
    g.y.push_back(y);
    g.polarity_logits.push_back(plogits);
    g.p.push_back(tape.softmax(plogits));
    g.h.push_back(h);
    const Var yh[] = {y, h};
    pooled.push_back(tape.concat(yh));
  }
  g.doc_vector = tape.mean(pooled);
  g.r_hat = tape.tanh(tape.add(tape.matmul(tape.param(params_, doc_w_), g.doc_vector),
                               tape.param(params_, doc_b_)));
  return g;
}

LossNodes HierModel::build_loss(Tape& tape, const DocumentGraph& g,
                                const DocumentTargets& targets) const {
  if (targets.empty()) throw ValidationError("document carries no supervision");
  const std::size_t n = g.y.size();
  LossNodes out;
  std::vector<std::pair<double, Var>> terms;

  if (targets.has_sentence_labels()) {
    if (targets.codes.size() != n) throw ValidationError("gold codes do not match sentences");
    std::vector<Var> ce, pe;
    for (std::size_t i = 0; i < n; ++i) {
      ce.push_back(tape.cross_entropy(g.class_logits[i], static_cast<Eigen::Index>(targets.codes[i])));
      pe.push_back(tape.cross_entropy(g.polarity_logits[i],
                                      static_cast<Eigen::Index>(targets.polarities[i])));
    }
    out.sentence = tape.mean(ce);
    out.polarity = tape.mean(pe);
    terms.emplace_back(config_.alpha, *out.sentence);
    terms.emplace_back(config_.beta, *out.polarity);
  }
  if (targets.rile) {
    const Var r = tape.constant(Tensor::Constant(1, 1, *targets.rile));
    out.document = tape.square(tape.sub(g.r_hat, r));
    std::vector<Var> diffs;
    for (const Var p : g.p) {
      diffs.push_back(tape.sub(tape.pick(p, static_cast<Eigen::Index>(corpus::Polarity::Right)),
                               tape.pick(p, static_cast<Eigen::Index>(corpus::Polarity::Left))));
    }
    out.structured = tape.square(tape.sub(tape.mean(diffs), r));
    terms.emplace_back(1.0 - config_.alpha, *out.document);
    terms.emplace_back(config_.gamma, *out.structured);
  }

  Var total = tape.scale(terms.front().second, terms.front().first);
  for (std::size_t i = 1; i < terms.size(); ++i) {
    total = tape.add(total, tape.scale(terms[i].second, terms[i].first));
  }
  out.total = total;
  return out;
}

Prediction HierModel::encode(const corpus::Manifesto& manifesto) const {
  // The tape only reads parameter values here; nothing is written back
  // because backward() is never called.
  auto& self = const_cast<HierModel&>(*this);
  Tape tape;
  const auto g = self.build(tape, manifesto);
  Prediction pred;
  pred.manifesto_id = manifesto.id;
  pred.sentences.reserve(g.y.size());
  for (std::size_t i = 0; i < g.y.size(); ++i) {
    pred.sentences.push_back({tape.value(g.y[i]), tape.value(g.p[i]), tape.value(g.h[i])});
  }
  pred.doc_vector = tape.value(g.doc_vector);
  pred.r_hat = tape.scalar(g.r_hat);
  return pred;
}

Prediction encode_document(const corpus::Manifesto& manifesto, const HierModel& model) {
  return model.encode(manifesto);
}

Eigen::VectorXd pool_document(const std::vector<SentencePrediction>& sentences) {
  if (sentences.empty()) throw ValidationError("cannot pool an empty document");
  const auto k = sentences.front().y.size();
  const auto h = sentences.front().h.size();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(k + h);
  for (const auto& s : sentences) {
    if (s.y.size() != k || s.h.size() != h) throw ValidationError("ragged sentence vectors");
    acc.head(k) += s.y;
    acc.tail(h) += s.h;
  }
  return acc / static_cast<double>(sentences.size());
}

}  // namespace polyscale::hiermodel
