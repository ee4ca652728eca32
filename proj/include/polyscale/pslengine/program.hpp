#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace polyscale::pslengine {

/// Inferred predicates were never declared; grounding treats them as open
/// when the database has target atoms for them and as closed otherwise.
enum class PredicateKind { Closed, Open, Inferred };

struct Predicate {
  std::string name;
  std::size_t arity = 0;
  PredicateKind kind = PredicateKind::Inferred;

  friend bool operator==(const Predicate&, const Predicate&) = default;
};

struct Literal {
  std::string predicate;
  std::vector<std::string> args;  // variable names
  bool negated = false;

  friend bool operator==(const Literal&, const Literal&) = default;
};

struct Rule {
  double weight = 1.0;
  std::vector<Literal> body;
  Literal head;
  int exponent = 2;  // 1 = linear hinge, 2 = squared hinge

  friend bool operator==(const Rule&, const Rule&) = default;
};

class Program {
 public:
  const std::vector<Predicate>& predicates() const { return predicates_; }
  const std::vector<Rule>& rules() const { return rules_; }
  const Predicate* find_predicate(std::string_view name) const;

  /// Declares or checks a predicate. Throws ValidationError on an arity
  /// conflict or on re-declaring with a different open/closed kind.
  void declare(const std::string& name, std::size_t arity, PredicateKind kind);
  /// Validates and appends; undeclared predicates are declared as Inferred.
  void add_rule(Rule rule);
  /// Keeps only the rules for which keep(rule) is true.
  template <class Pred>
  Program filtered(Pred keep) const {
    Program p;
    p.predicates_ = predicates_;
    for (const auto& r : rules_) {
      if (keep(r)) p.rules_.push_back(r);
    }
    return p;
  }
  bool uses(std::string_view predicate) const;
  bool uses(const Rule& rule, std::string_view predicate) const;

  /// Same rules in the same order and the same predicate set.
  friend bool operator==(const Program& a, const Program& b);

 private:
  std::vector<Predicate> predicates_;
  std::vector<Rule> rules_;
};

/// Rule language, one statement per line, '#' to end of line is a comment:
///   open Name/arity | closed Name/arity
///   [weight :] [!]P(x, ...) & ... -> [!]Q(x, ...) [^1|^2]
/// Errors are ValidationError("<source>:<line>:<col>: <message>").
Program parse_program(std::string_view text, std::string_view source = "<program>");
Program load_program(const std::filesystem::path& path);

/// Inverse of parse_program: declarations first, then one rule per line.
std::string print_program(const Program& program);
std::string print_rule(const Rule& rule);

}  // namespace polyscale::pslengine
