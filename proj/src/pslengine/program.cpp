#include "polyscale/pslengine/program.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "polyscale/error.hpp"

namespace polyscale::pslengine {

const Predicate* Program::find_predicate(std::string_view name) const {
  for (const auto& p : predicates_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

void Program::declare(const std::string& name, std::size_t arity, PredicateKind kind) {
  if (arity == 0) throw ValidationError("predicate " + name + " must have arity >= 1");
  for (auto& p : predicates_) {
    if (p.name != name) continue;
    if (p.arity != arity) {
      throw ValidationError("arity conflict for " + name + ": " + std::to_string(p.arity) +
                            " vs " + std::to_string(arity));
    }
    if (kind == PredicateKind::Inferred) return;
    if (p.kind != PredicateKind::Inferred && p.kind != kind) {
      throw ValidationError("predicate " + name + " declared both open and closed");
    }
    p.kind = kind;
    return;
  }
  predicates_.push_back({name, arity, kind});
}

void Program::add_rule(Rule rule) {
  if (!(rule.weight >= 0.0) || !std::isfinite(rule.weight)) {
    throw ValidationError("rule weight must be a finite value >= 0");
  }
  if (rule.exponent != 1 && rule.exponent != 2) throw ValidationError("rule exponent must be 1 or 2");
  if (rule.body.empty()) throw ValidationError("rule body is empty");
  std::set<std::string> bound;
  for (const auto& l : rule.body) bound.insert(l.args.begin(), l.args.end());
  for (const auto& v : rule.head.args) {
    if (!bound.count(v)) throw ValidationError("head variable " + v + " does not appear in the body");
  }
  for (const auto& l : rule.body) declare(l.predicate, l.args.size(), PredicateKind::Inferred);
  declare(rule.head.predicate, rule.head.args.size(), PredicateKind::Inferred);
  rules_.push_back(std::move(rule));
}

bool operator==(const Program& a, const Program& b) {
  if (a.rules_ != b.rules_ || a.predicates_.size() != b.predicates_.size()) return false;
  auto by_name = [](std::vector<Predicate> v) {
    std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) { return x.name < y.name; });
    return v;
  };
  return by_name(a.predicates_) == by_name(b.predicates_);
}

bool Program::uses(const Rule& rule, std::string_view predicate) const {
  if (rule.head.predicate == predicate) return true;
  return std::any_of(rule.body.begin(), rule.body.end(),
                     [&](const Literal& l) { return l.predicate == predicate; });
}

bool Program::uses(std::string_view predicate) const {
  return std::any_of(rules_.begin(), rules_.end(),
                     [&](const Rule& r) { return uses(r, predicate); });
}

namespace {

class Parser {
 public:
  Parser(std::string_view line, std::string_view source, std::size_t lineno)
      : s_(line), source_(source), lineno_(lineno) {}

  [[noreturn]] void fail(const std::string& msg) const { fail_at(pos_, msg); }
  [[noreturn]] void fail_at(std::size_t pos, const std::string& msg) const {
    throw ValidationError(std::string(source_) + ":" + std::to_string(lineno_) + ":" +
                          std::to_string(pos + 1) + ": " + msg);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= s_.size();
  }
  bool accept(std::string_view tok) {
    skip_ws();
    if (s_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }
  void expect(std::string_view tok) {
    if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
  }

  std::string identifier() {
    skip_ws();
    const auto start = pos_;
    if (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
      ++pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
        ++pos_;
      }
    }
    if (start == pos_) fail("expected identifier");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::optional<double> leading_weight() {
    skip_ws();
    const auto save = pos_;
    if (pos_ >= s_.size() || !(std::isdigit(static_cast<unsigned char>(s_[pos_])) ||
                               s_[pos_] == '.' || s_[pos_] == '-' || s_[pos_] == '+')) {
      return std::nullopt;
    }
    std::size_t end = pos_;
    while (end < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[end])) ||
                               s_[end] == '.' || s_[end] == '-' || s_[end] == '+' ||
                               s_[end] == 'e' || s_[end] == 'E')) {
      ++end;
    }
    double w = 0.0;
    const auto* first = s_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, s_.data() + end, w);
    if (ec != std::errc() || ptr != s_.data() + end) fail("malformed weight");
    pos_ = end;
    if (!accept(":")) {
      pos_ = save;
      fail("expected ':' after weight");
    }
    if (w < 0.0) fail_at(save, "negative weight");
    return w;
  }

  Literal literal() {
    Literal l;
    l.negated = accept("!") || accept("~");
    l.predicate = identifier();
    expect("(");
    l.args.push_back(identifier());
    while (accept(",")) l.args.push_back(identifier());
    expect(")");
    return l;
  }

  std::size_t position() const { return pos_; }
  std::size_t number() {
    skip_ws();
    std::size_t n = 0;
    auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), n);
    if (ec != std::errc()) fail("expected a number");
    pos_ = static_cast<std::size_t>(ptr - s_.data());
    return n;
  }

 private:
  std::string_view s_;
  std::string_view source_;
  std::size_t lineno_;
  std::size_t pos_ = 0;
};

std::string format_weight(double w) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", w);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string print_literal(const Literal& l) {
  std::string s = l.negated ? "!" : "";
  s += l.predicate + "(";
  for (std::size_t i = 0; i < l.args.size(); ++i) {
    if (i) s += ", ";
    s += l.args[i];
  }
  return s + ")";
}

}  // namespace

Program parse_program(std::string_view text, std::string_view source) {
  Program program;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    Parser p(line, source, lineno);
    if (p.at_end()) {
      if (end == text.size()) break;
      continue;
    }
    const auto keyword_pos = p.position();
    if (p.accept("open ") || p.accept("closed ")) {
      const bool open = line.substr(line.find_first_not_of(" \t"), 4) == "open";
      const auto name = p.identifier();
      p.expect("/");
      const auto arity = p.number();
      if (!p.at_end()) p.fail("unexpected text after declaration");
      try {
        program.declare(name, arity, open ? PredicateKind::Open : PredicateKind::Closed);
      } catch (const ValidationError& e) {
        p.fail_at(keyword_pos, e.what());
      }
    } else {
      Rule rule;
      if (auto w = p.leading_weight()) rule.weight = *w;
      rule.body.push_back(p.literal());
      while (p.accept("&")) rule.body.push_back(p.literal());
      p.expect("->");
      rule.head = p.literal();
      if (p.accept("^")) {
        const auto e = p.number();
        if (e != 1 && e != 2) p.fail("exponent must be 1 or 2");
        rule.exponent = static_cast<int>(e);
      }
      if (!p.at_end()) p.fail("unexpected text after rule");
      try {
        program.add_rule(std::move(rule));
      } catch (const ValidationError& e) {
        p.fail_at(keyword_pos, e.what());
      }
    }
    if (end == text.size()) break;
  }
  return program;
}

Program load_program(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open program " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_program(ss.str(), path.string());
}

std::string print_rule(const Rule& rule) {
  std::string s = format_weight(rule.weight) + ": ";
  for (std::size_t i = 0; i < rule.body.size(); ++i) {
    if (i) s += " & ";
    s += print_literal(rule.body[i]);
  }
  s += " -> " + print_literal(rule.head) + " ^" + std::to_string(rule.exponent);
  return s;
}

std::string print_program(const Program& program) {
  std::string out;
  for (const auto& p : program.predicates()) {
    if (p.kind == PredicateKind::Inferred) continue;
    out += (p.kind == PredicateKind::Open ? "open " : "closed ") + p.name + "/" +
           std::to_string(p.arity) + "\n";
  }
  for (const auto& r : program.rules()) out += print_rule(r) + "\n";
  return out;
}

}  // namespace polyscale::pslengine
