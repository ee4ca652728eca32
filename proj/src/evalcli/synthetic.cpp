#include "polyscale/evalcli/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "polyscale/corpus/rile.hpp"
#include "polyscale/corpus/segment.hpp"
#include "polyscale/error.hpp"

namespace polyscale::evalcli {

namespace {

const char* const kSyllables[][8] = {
    {"ba", "de", "fi", "go", "hu", "ka", "le", "mo"},
    {"zu", "ri", "sa", "to", "ne", "vi", "po", "la"},
    {"qe", "mi", "no", "ra", "su", "te", "wo", "xi"},
    {"ja", "ko", "lu", "me", "ni", "or", "pe", "ya"},
};

std::string pseudo_word(std::size_t language, std::size_t concept_id) {
  const auto& syl = kSyllables[language % 4];
  std::string w;
  std::size_t k = concept_id;
  for (int i = 0; i < 3 || k > 0; ++i) {
    w += syl[k % 8];
    k /= 8;
  }
  return w;
}

Eigen::MatrixXd random_rotation(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    for (Eigen::Index r = 0; r < a.rows(); ++r) a(r, c) = n(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  return qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
}

std::string format_date(int year, unsigned month, unsigned day) {
  return util::format_iso_date(util::Date{std::chrono::year{year}, std::chrono::month{month},
                                          std::chrono::day{day}});
}

}  // namespace

SyntheticData generate_synthetic(const corpus::LabelScheme& scheme, const SyntheticConfig& cfg) {
  if (cfg.languages.empty()) throw ValidationError("synthetic corpus needs at least one language");
  if (cfg.parties_per_country < 3) throw ValidationError("need at least 3 parties per country");
  if (cfg.min_sentences == 0 || cfg.max_sentences < cfg.min_sentences) {
    throw ValidationError("bad sentence range");
  }
  const std::size_t slots =
      cfg.languages.size() * cfg.parties_per_country * cfg.election_years.size();
  if (cfg.documents > slots) throw ValidationError("more documents requested than party-election slots");

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t k = scheme.size();
  const std::size_t d = cfg.embedding_dim;

  // Concepts: signature_words per code, then fillers.
  const std::size_t n_concepts = k * cfg.signature_words + cfg.filler_words;
  std::vector<Eigen::RowVectorXd> concept_vec(n_concepts);
  for (std::size_t c = 0; c < k; ++c) {
    Eigen::RowVectorXd proto(d);
    for (auto& v : proto) v = gauss(rng);
    for (std::size_t s = 0; s < cfg.signature_words; ++s) {
      Eigen::RowVectorXd noise(d);
      for (auto& v : noise) v = gauss(rng);
      concept_vec[c * cfg.signature_words + s] = proto + cfg.signature_noise * noise;
    }
  }
  for (std::size_t f = 0; f < cfg.filler_words; ++f) {
    Eigen::RowVectorXd v(d);
    for (auto& x : v) x = gauss(rng);
    concept_vec[k * cfg.signature_words + f] = v;
  }

  SyntheticData out{corpus::Corpus({}, scheme), {}, {}, {}, {}};
  for (std::size_t li = 0; li < cfg.languages.size(); ++li) {
    const Eigen::MatrixXd rot = li == 0 ? Eigen::MatrixXd::Identity(d, d) : random_rotation(d, rng);
    std::vector<std::string> words;
    Eigen::MatrixXd m(n_concepts, d);
    for (std::size_t c = 0; c < n_concepts; ++c) {
      words.push_back(pseudo_word(li, c));
      m.row(static_cast<Eigen::Index>(c)) = concept_vec[c] * rot;
    }
    out.embeddings.emplace_back(cfg.languages[li], std::move(words), std::move(m));
    if (li > 0) {
      auto& lex = out.lexicons[cfg.languages[li]];
      for (std::size_t c = 0; c < n_concepts; ++c) {
        lex.pairs.emplace_back(pseudo_word(li, c), pseudo_word(0, c));
      }
    }
  }

  // Parties.
  struct PartyInfo {
    std::string id;
    std::size_t country;
    int block;  // -1, 0, 1
    double base;
    std::vector<double> code_weight;
  };
  std::vector<PartyInfo> parties;
  std::gamma_distribution<double> gamma(1.0, 1.0);
  for (std::size_t ci = 0; ci < cfg.languages.size(); ++ci) {
    for (std::size_t p = 0; p < cfg.parties_per_country; ++p) {
      PartyInfo info;
      char buf[32];
      std::snprintf(buf, sizeof buf, "%s-p%02zu", cfg.languages[ci].c_str(), p + 1);
      info.id = buf;
      info.country = ci;
      info.block = static_cast<int>(p * 3 / cfg.parties_per_country) - 1;
      info.base = 0.6 * info.block + cfg.party_spread * (2.0 * unit(rng) - 1.0);
      for (std::size_t c = 0; c < k; ++c) info.code_weight.push_back(gamma(rng) + 0.05);
      parties.push_back(std::move(info));
      out.graph.add_party(parties.back().id);
    }
  }

  // Coalition histories.
  std::uniform_int_distribution<int> strong(1, 5), weak(1, 3);
  for (std::size_t a = 0; a < parties.size(); ++a) {
    for (std::size_t b = a + 1; b < parties.size(); ++b) {
      const auto& pa = parties[a];
      const auto& pb = parties[b];
      if (pa.country == pb.country) {
        if (pa.block == pb.block) {
          out.graph.add({pa.id, pb.id, strong(rng), calibration::CoalitionKind::Regional});
        } else if (std::abs(pa.block - pb.block) == 1 && unit(rng) < 0.2) {
          out.graph.add({pa.id, pb.id, 1, calibration::CoalitionKind::Regional});
        }
      } else if (pa.block == pb.block && unit(rng) < 0.5) {
        out.graph.add({pa.id, pb.id, weak(rng), calibration::CoalitionKind::EU});
      }
    }
  }

  // Which (party, election) slots produce a manifesto.
  std::vector<std::size_t> slot_ids(slots);
  std::iota(slot_ids.begin(), slot_ids.end(), 0);
  std::shuffle(slot_ids.begin(), slot_ids.end(), rng);
  std::vector<bool> active(slots, false);
  for (std::size_t i = 0; i < cfg.documents; ++i) active[slot_ids[i]] = true;

  std::vector<std::size_t> left, right, neutral;
  for (std::size_t c = 0; c < k; ++c) {
    switch (scheme.polarity_at(c)) {
      case corpus::Polarity::Left: left.push_back(c); break;
      case corpus::Polarity::Right: right.push_back(c); break;
      case corpus::Polarity::Neutral: neutral.push_back(c); break;
    }
  }

  std::vector<corpus::Manifesto> docs;
  const std::size_t n_elections = cfg.election_years.size();
  std::uniform_int_distribution<std::size_t> n_sent(cfg.min_sentences, cfg.max_sentences);
  std::uniform_int_distribution<std::size_t> n_fill(2, 4);
  std::uniform_int_distribution<std::size_t> pick_sig(0, cfg.signature_words - 1);
  std::uniform_int_distribution<std::size_t> pick_fill(0, cfg.filler_words - 1);
  for (std::size_t pi = 0; pi < parties.size(); ++pi) {
    const auto& party = parties[pi];
    double z = party.base;
    const auto& lang = cfg.languages[party.country];
    const unsigned month = 3 + static_cast<unsigned>(party.country) * 2;
    for (std::size_t e = 0; e < n_elections; ++e) {
      z = std::clamp(z + cfg.drift * gauss(rng), -0.95, 0.95);
      const std::size_t slot = pi * n_elections + e;
      if (!active[slot]) continue;
      const int year = cfg.election_years[e] + static_cast<int>(party.country);

      corpus::Manifesto m;
      m.id = party.id + "-" + std::to_string(year);
      m.party_id = party.id;
      m.country = lang;
      m.language = lang;
      m.election_date = util::parse_iso_date(format_date(year, month, 10));
      const bool annotated = unit(rng) < cfg.annotated_fraction;

      const double p_right = (1.0 - cfg.neutral_share) * (1.0 + z) / 2.0;
      const double p_left = (1.0 - cfg.neutral_share) * (1.0 - z) / 2.0;
      const std::size_t len = n_sent(rng);
      std::vector<std::size_t> codes;
      for (std::size_t s = 0; s < len; ++s) {
        const double u = unit(rng);
        const auto& pool = u < p_right ? right : (u < p_right + p_left ? left : neutral);
        std::vector<double> w;
        for (auto c : pool) w.push_back(party.code_weight[c]);
        std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
        const std::size_t code = pool[pick(rng)];
        codes.push_back(code);

        std::vector<std::string> words;
        for (int r = 0; r < 2; ++r) {
          words.push_back(pseudo_word(party.country, code * cfg.signature_words + pick_sig(rng)));
        }
        const auto fills = n_fill(rng);
        for (std::size_t f = 0; f < fills; ++f) {
          words.push_back(pseudo_word(party.country, k * cfg.signature_words + pick_fill(rng)));
        }
        std::shuffle(words.begin(), words.end(), rng);
        corpus::Sentence sent;
        for (const auto& w2 : words) sent.text += (sent.text.empty() ? "" : " ") + w2;
        sent.text += ".";
        sent.tokens = corpus::tokenize(sent.text);
        sent.position = static_cast<int>(s + 1);
        if (annotated) sent.gold_code = scheme.at(code).code;
        m.sentences.push_back(std::move(sent));
      }
      m.rile_gold = corpus::compute_rile_indices(codes, scheme);
      m.ches_gold = z;
      out.planted[m.id] = z;
      docs.push_back(std::move(m));
    }
  }
  out.corpus = corpus::Corpus(std::move(docs), scheme);
  return out;
}

void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  corpus::save_corpus(data.corpus, dir / "corpus.jsonl");
  data.graph.save(dir / "party_graph.tsv");
  {
    std::ofstream ches(dir / "ches.tsv");
    if (!ches) throw StageError("cannot write " + (dir / "ches.tsv").string());
    for (const auto& m : data.corpus.manifestos()) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", data.planted.at(m.id));
      ches << m.party_id << '\t' << static_cast<int>(m.election_date.year()) << '\t' << buf << '\n';
    }
  }
  const auto& pivot = data.embeddings.front().language();
  for (const auto& t : data.embeddings) {
    embedalign::save_embeddings(t, dir / ("emb_" + t.language() + ".vec"));
  }
  for (const auto& [lang, lex] : data.lexicons) {
    std::ofstream out(dir / ("lex_" + lang + "_" + pivot + ".tsv"));
    if (!out) throw StageError("cannot write lexicon for " + lang);
    for (const auto& [a, b] : lex.pairs) out << a << '\t' << b << '\n';
  }
}

}  // namespace polyscale::evalcli
