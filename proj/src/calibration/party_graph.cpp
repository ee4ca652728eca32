#include "polyscale/calibration/party_graph.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "polyscale/error.hpp"

namespace polyscale::calibration {

std::string_view to_string(CoalitionKind k) { return k == CoalitionKind::EU ? "EU" : "REGIONAL"; }

CoalitionKind parse_coalition_kind(std::string_view text) {
  if (text == "REGIONAL") return CoalitionKind::Regional;
  if (text == "EU") return CoalitionKind::EU;
  throw ValidationError("unknown coalition kind '" + std::string(text) + "'");
}

void PartyGraph::add(CoalitionEdge e) {
  if (e.count < 0) throw ValidationError("negative coalition count");
  if (e.party_a == e.party_b) throw ValidationError("coalition edge from " + e.party_a + " to itself");
  if (e.party_b < e.party_a) std::swap(e.party_a, e.party_b);
  parties_.insert(e.party_a);
  parties_.insert(e.party_b);
  counts_[{e.party_a, e.party_b, e.kind}] = e.count;
}

void PartyGraph::add_party(const std::string& party) { parties_.insert(party); }

std::optional<int> PartyGraph::count(const std::string& a, const std::string& b,
                                     CoalitionKind kind) const {
  auto it = counts_.find(a < b ? std::tuple{a, b, kind} : std::tuple{b, a, kind});
  if (it == counts_.end()) return std::nullopt;
  return it->second;
}

std::vector<CoalitionEdge> PartyGraph::edges() const {
  std::vector<CoalitionEdge> out;
  for (const auto& [key, n] : counts_) {
    out.push_back({std::get<0>(key), std::get<1>(key), n, std::get<2>(key)});
  }
  return out;
}

PartyGraph PartyGraph::parse(std::istream& in, const std::string& source) {
  PartyGraph g;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto where = source + ":" + std::to_string(lineno) + ": ";
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) f.push_back(field);
    if (f.size() != 4) throw ValidationError(where + "expected 4 tab-separated fields");
    int n = 0;
    auto [ptr, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), n);
    if (ec != std::errc() || ptr != f[2].data() + f[2].size()) {
      throw ValidationError(where + "malformed count '" + f[2] + "'");
    }
    try {
      g.add({f[0], f[1], n, parse_coalition_kind(f[3])});
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
  }
  return g;
}

PartyGraph PartyGraph::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open party graph " + path.string());
  return parse(in, path.string());
}

void PartyGraph::write(std::ostream& out) const {
  for (const auto& e : edges()) {
    out << e.party_a << '\t' << e.party_b << '\t' << e.count << '\t' << to_string(e.kind) << '\n';
  }
}

void PartyGraph::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw StageError("cannot open " + path.string() + " for writing");
  write(out);
}

}  // namespace polyscale::calibration
