#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace polyscale::calibration {

enum class CoalitionKind { Regional, EU };

std::string_view to_string(CoalitionKind k);
CoalitionKind parse_coalition_kind(std::string_view text);

struct CoalitionEdge {
  std::string party_a;
  std::string party_b;
  int count = 0;
  CoalitionKind kind = CoalitionKind::Regional;
};

/// Undirected coalition counts between parties.
class PartyGraph {
 public:
  /// Throws ValidationError on a negative count or a self loop. Adding an
  /// existing edge replaces its count.
  void add(CoalitionEdge edge);
  /// Registers a party that has no coalition partners.
  void add_party(const std::string& party);

  std::optional<int> count(const std::string& a, const std::string& b, CoalitionKind kind) const;
  bool has_party(const std::string& party) const { return parties_.count(party) > 0; }
  const std::set<std::string>& parties() const { return parties_; }
  /// Each undirected edge once, with party_a < party_b.
  std::vector<CoalitionEdge> edges() const;

  /// Tab-separated: party_a, party_b, count, kind (REGIONAL or EU); '#' comments.
  static PartyGraph parse(std::istream& in, const std::string& source = "<party graph>");
  static PartyGraph load(const std::filesystem::path& path);
  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;

 private:
  std::map<std::tuple<std::string, std::string, CoalitionKind>, int> counts_;
  std::set<std::string> parties_;
};

}  // namespace polyscale::calibration
