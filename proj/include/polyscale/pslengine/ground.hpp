#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "polyscale/pslengine/database.hpp"
#include "polyscale/pslengine/program.hpp"

namespace polyscale::pslengine {

struct GroundAtom {
  std::string predicate;
  Args args;
  bool free = false;
  double value = 0.0;  // observed value, or the warm-start value of a free atom
};

struct AtomRef {
  std::size_t atom = 0;
  bool negated = false;
};

struct GroundRule {
  std::size_t rule = 0;  // index into Program::rules()
  double weight = 1.0;
  std::vector<AtomRef> body;
  AtomRef head;
  int exponent = 2;
};

/// l(Y) = constant + sum coef * Y[var]; the hinge is max(l, 0).
struct LinearHinge {
  double constant = 0.0;
  std::vector<std::pair<std::size_t, double>> terms;
};

class GroundNetwork {
 public:
  const std::vector<GroundAtom>& atoms() const { return atoms_; }
  const std::vector<GroundRule>& rules() const { return rules_; }
  const std::vector<LinearHinge>& hinges() const { return hinges_; }
  /// Atom index of each free variable, in variable order.
  const std::vector<std::size_t>& free_atoms() const { return free_atoms_; }
  std::size_t free_count() const { return free_atoms_.size(); }
  std::optional<std::size_t> variable_of(std::size_t atom) const;
  std::optional<std::size_t> find_atom(const std::string& predicate, const Args& args) const;

  /// Warm-start values of the free atoms.
  std::vector<double> initial_assignment() const;
  /// Values of every atom with free ones taken from `y`. Throws
  /// ValidationError on a size mismatch or a value outside [0, 1].
  std::vector<double> atom_values(std::span<const double> y) const;

  std::size_t add_atom(GroundAtom atom);
  /// Appends a rule and its linear form. Throws ValidationError on a bad
  /// atom reference or exponent.
  void add_rule(GroundRule rule);

 private:
  std::vector<GroundAtom> atoms_;
  std::vector<GroundRule> rules_;
  std::vector<LinearHinge> hinges_;
  std::vector<std::size_t> free_atoms_;
  std::vector<std::optional<std::size_t>> variable_;  // per atom
  std::map<std::pair<std::string, Args>, std::size_t> index_;
};

/// Instantiates every rule over the database. Closed atoms missing from the
/// database are 0. A substitution is dropped only when its hinge is 0 for
/// every assignment of the free atoms. Every target atom becomes a free
/// variable, whether or not a rule touches it.
/// Throws ValidationError when an open atom is neither a target nor observed,
/// or when a variable is bound only by negated closed literals.
GroundNetwork ground(const Program& program, const RelationalDatabase& db);

/// Lukasiewicz relaxation: body truth B = max(sum b_i - (n - 1), 0), result
/// max(B - h, 0), negated atoms read as 1 - v. Throws ValidationError if a
/// referenced value lies outside [0, 1].
double distance_to_satisfaction(const GroundRule& rule, std::span<const double> atom_values);

/// sum over ground rules of weight * distance^exponent.
double energy(const GroundNetwork& network, std::span<const double> y);

}  // namespace polyscale::pslengine
