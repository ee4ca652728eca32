#include "polyscale/corpus/label_scheme.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "polyscale/error.hpp"

namespace polyscale::corpus {

namespace {

// CMP coding scheme (v4/v5 top-level codes plus the uncoded 000 category).
// RILE right: 104 201 203 305 401 402 407 414 505 601 603 605 606
// RILE left:  103 105 106 107 202 403 404 406 412 413 504 506 701
constexpr std::string_view kDefaultScheme = R"(# code	category	polarity	name
000	uncoded	NEUTRAL	No meaningful category applies
101	external_relations	NEUTRAL	Foreign Special Relationships: Positive
102	external_relations	NEUTRAL	Foreign Special Relationships: Negative
103	external_relations	LEFT	Anti-Imperialism
104	external_relations	RIGHT	Military: Positive
105	external_relations	LEFT	Military: Negative
106	external_relations	LEFT	Peace
107	external_relations	LEFT	Internationalism: Positive
108	external_relations	NEUTRAL	European Community/Union: Positive
109	external_relations	NEUTRAL	Internationalism: Negative
110	external_relations	NEUTRAL	European Community/Union: Negative
201	freedom_democracy	RIGHT	Freedom and Human Rights
202	freedom_democracy	LEFT	Democracy
203	freedom_democracy	RIGHT	Constitutionalism: Positive
204	freedom_democracy	NEUTRAL	Constitutionalism: Negative
301	political_system	NEUTRAL	Decentralisation
302	political_system	NEUTRAL	Centralisation
303	political_system	NEUTRAL	Governmental and Administrative Efficiency
304	political_system	NEUTRAL	Political Corruption
305	political_system	RIGHT	Political Authority
401	economy	RIGHT	Free Market Economy
402	economy	RIGHT	Incentives
403	economy	LEFT	Market Regulation
404	economy	LEFT	Economic Planning
405	economy	NEUTRAL	Corporatism/Mixed Economy
406	economy	LEFT	Protectionism: Positive
407	economy	RIGHT	Protectionism: Negative
408	economy	NEUTRAL	Economic Goals
409	economy	NEUTRAL	Keynesian Demand Management
410	economy	NEUTRAL	Economic Growth: Positive
411	economy	NEUTRAL	Technology and Infrastructure
412	economy	LEFT	Controlled Economy
413	economy	LEFT	Nationalisation
414	economy	RIGHT	Economic Orthodoxy
415	economy	NEUTRAL	Marxist Analysis
416	economy	NEUTRAL	Anti-Growth Economy
501	welfare_quality_of_life	NEUTRAL	Environmental Protection
502	welfare_quality_of_life	NEUTRAL	Culture
503	welfare_quality_of_life	NEUTRAL	Equality: Positive
504	welfare_quality_of_life	LEFT	Welfare State Expansion
505	welfare_quality_of_life	RIGHT	Welfare State Limitation
506	welfare_quality_of_life	LEFT	Education Expansion
507	welfare_quality_of_life	NEUTRAL	Education Limitation
601	fabric_of_society	RIGHT	National Way of Life: Positive
602	fabric_of_society	NEUTRAL	National Way of Life: Negative
603	fabric_of_society	RIGHT	Traditional Morality: Positive
604	fabric_of_society	NEUTRAL	Traditional Morality: Negative
605	fabric_of_society	RIGHT	Law and Order: Positive
606	fabric_of_society	RIGHT	Civic Mindedness: Positive
607	fabric_of_society	NEUTRAL	Multiculturalism: Positive
608	fabric_of_society	NEUTRAL	Multiculturalism: Negative
701	social_groups	LEFT	Labour Groups: Positive
702	social_groups	NEUTRAL	Labour Groups: Negative
703	social_groups	NEUTRAL	Agriculture and Farmers
704	social_groups	NEUTRAL	Middle Class and Professional Groups
705	social_groups	NEUTRAL	Underprivileged Minority Groups
706	social_groups	NEUTRAL	Non-economic Demographic Groups
)";

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string_view to_string(Polarity p) {
  switch (p) {
    case Polarity::Left: return "LEFT";
    case Polarity::Right: return "RIGHT";
    case Polarity::Neutral: return "NEUTRAL";
  }
  return "NEUTRAL";
}

Polarity parse_polarity(std::string_view text) {
  if (text == "LEFT") return Polarity::Left;
  if (text == "RIGHT") return Polarity::Right;
  if (text == "NEUTRAL") return Polarity::Neutral;
  throw ValidationError("unknown polarity '" + std::string(text) + "'");
}

LabelScheme::LabelScheme(std::vector<CodeInfo> codes) : codes_(std::move(codes)) {
  if (codes_.size() != kNumCodes) {
    throw ValidationError("label scheme must list exactly 57 codes, got " +
                          std::to_string(codes_.size()));
  }
  std::size_t left = 0, right = 0;
  for (std::size_t i = 0; i < codes_.size(); ++i) {
    if (!index_.emplace(codes_[i].code, i).second) {
      throw ValidationError("duplicate code " + codes_[i].code + " in label scheme");
    }
    left += codes_[i].polarity == Polarity::Left;
    right += codes_[i].polarity == Polarity::Right;
  }
  if (left != kNumLeft || right != kNumRight) {
    throw ValidationError("label scheme must have 13 LEFT and 13 RIGHT codes, got " +
                          std::to_string(left) + " LEFT and " + std::to_string(right) +
                          " RIGHT");
  }
}

LabelScheme LabelScheme::cmp_default() {
  std::istringstream in{std::string(kDefaultScheme)};
  return parse(in, "<builtin>");
}

LabelScheme LabelScheme::parse(std::istream& in, std::string_view source) {
  std::vector<CodeInfo> codes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.push_back(trim(std::string_view(line).substr(start, tab - start)));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() < 3) {
      throw ValidationError(std::string(source) + ":" + std::to_string(line_no) +
                            ": expected code<TAB>category<TAB>polarity");
    }
    try {
      codes.push_back({fields[0], fields[1], parse_polarity(fields[2]),
                       fields.size() > 3 ? fields[3] : std::string{}});
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(source) + ":" + std::to_string(line_no) + ": " +
                            e.what());
    }
  }
  return LabelScheme(std::move(codes));
}

LabelScheme LabelScheme::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scheme file " + path.string());
  return parse(in, path.string());
}

void LabelScheme::save(std::ostream& out) const {
  out << "# code\tcategory\tpolarity\tname\n";
  for (const auto& c : codes_) {
    out << c.code << '\t' << c.category << '\t' << to_string(c.polarity) << '\t' << c.name
        << '\n';
  }
}

std::optional<std::size_t> LabelScheme::find(std::string_view code) const {
  const auto it = index_.find(std::string(code));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t LabelScheme::index_of(std::string_view code) const {
  if (auto idx = find(code)) return *idx;
  throw ValidationError("unknown code " + std::string(code));
}

Polarity LabelScheme::polarity_of(std::string_view code) const {
  return codes_[index_of(code)].polarity;
}

std::vector<std::string> LabelScheme::categories() const {
  std::vector<std::string> out;
  for (const auto& c : codes_) {
    if (std::find(out.begin(), out.end(), c.category) == out.end()) out.push_back(c.category);
  }
  return out;
}

LabelScheme LabelScheme::with_swapped_polarity() const {
  auto codes = codes_;
  for (auto& c : codes) {
    if (c.polarity == Polarity::Left) {
      c.polarity = Polarity::Right;
    } else if (c.polarity == Polarity::Right) {
      c.polarity = Polarity::Left;
    }
  }
  return LabelScheme(std::move(codes));
}

bool operator==(const LabelScheme& a, const LabelScheme& b) {
  if (a.codes_.size() != b.codes_.size()) return false;
  for (std::size_t i = 0; i < a.codes_.size(); ++i) {
    const auto& x = a.codes_[i];
    const auto& y = b.codes_[i];
    if (x.code != y.code || x.category != y.category || x.polarity != y.polarity ||
        x.name != y.name) {
      return false;
    }
  }
  return true;
}

}  // namespace polyscale::corpus
