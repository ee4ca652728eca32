#include "polyscale/pslengine/ground.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <tuple>
#include <unordered_map>

#include "polyscale/error.hpp"

namespace polyscale::pslengine {

std::optional<std::size_t> GroundNetwork::variable_of(std::size_t atom) const {
  return atom < variable_.size() ? variable_[atom] : std::nullopt;
}

std::optional<std::size_t> GroundNetwork::find_atom(const std::string& predicate,
                                                    const Args& args) const {
  auto it = index_.find({predicate, args});
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<double> GroundNetwork::initial_assignment() const {
  std::vector<double> y;
  y.reserve(free_atoms_.size());
  for (auto a : free_atoms_) y.push_back(atoms_[a].value);
  return y;
}

std::vector<double> GroundNetwork::atom_values(std::span<const double> y) const {
  if (y.size() != free_atoms_.size()) throw ValidationError("assignment has the wrong size");
  std::vector<double> v;
  v.reserve(atoms_.size());
  for (const auto& a : atoms_) v.push_back(a.value);
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (!(y[j] >= 0.0 && y[j] <= 1.0)) throw ValidationError("assignment value outside [0, 1]");
    v[free_atoms_[j]] = y[j];
  }
  return v;
}

std::size_t GroundNetwork::add_atom(GroundAtom atom) {
  auto key = std::make_pair(atom.predicate, atom.args);
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  if (!(atom.value >= 0.0 && atom.value <= 1.0)) {
    throw ValidationError("atom " + atom.predicate + " has value outside [0, 1]");
  }
  const auto id = atoms_.size();
  index_.emplace(std::move(key), id);
  if (atom.free) {
    variable_.push_back(free_atoms_.size());
    free_atoms_.push_back(id);
  } else {
    variable_.push_back(std::nullopt);
  }
  atoms_.push_back(std::move(atom));
  return id;
}

void GroundNetwork::add_rule(GroundRule rule) {
  if (rule.exponent != 1 && rule.exponent != 2) throw ValidationError("exponent must be 1 or 2");
  if (!(rule.weight >= 0.0)) throw ValidationError("ground rule weight must be >= 0");
  LinearHinge h;
  h.constant = -static_cast<double>(rule.body.size()) + 1.0;
  std::vector<std::pair<std::size_t, double>> raw;
  auto term = [&](const AtomRef& r, double sign) {
    if (r.atom >= atoms_.size()) throw ValidationError("ground rule references an unknown atom");
    // sign * (negated ? 1 - v : v)
    if (r.negated) {
      h.constant += sign;
      sign = -sign;
    }
    if (auto var = variable_[r.atom]) {
      raw.emplace_back(*var, sign);
    } else {
      h.constant += sign * atoms_[r.atom].value;
    }
  };
  for (const auto& b : rule.body) term(b, 1.0);
  term(rule.head, -1.0);
  std::sort(raw.begin(), raw.end());
  for (const auto& [var, c] : raw) {
    if (!h.terms.empty() && h.terms.back().first == var) {
      h.terms.back().second += c;
    } else {
      h.terms.emplace_back(var, c);
    }
  }
  std::erase_if(h.terms, [](const auto& t) { return t.second == 0.0; });
  rules_.push_back(std::move(rule));
  hinges_.push_back(std::move(h));
}

double distance_to_satisfaction(const GroundRule& rule, std::span<const double> v) {
  auto read = [&](const AtomRef& r) {
    if (r.atom >= v.size()) throw ValidationError("atom reference out of range");
    const double x = v[r.atom];
    if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("truth value outside [0, 1]");
    return r.negated ? 1.0 - x : x;
  };
  double sum = 0.0;
  for (const auto& b : rule.body) sum += read(b);
  // The body clamp max(., 0) never binds once the head is subtracted.
  return std::max(sum - read(rule.head) - static_cast<double>(rule.body.size() - 1), 0.0);
}

double energy(const GroundNetwork& network, std::span<const double> y) {
  const auto values = network.atom_values(y);
  double e = 0.0;
  for (const auto& r : network.rules()) {
    const double d = distance_to_satisfaction(r, values);
    e += r.weight * (r.exponent == 2 ? d * d : d);
  }
  return e;
}

namespace {

using Symbol = std::uint32_t;
using Tuple = std::vector<Symbol>;

struct TupleHash {
  std::size_t operator()(const Tuple& t) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (auto s : t) h = (h ^ s) * 1099511628211ULL;
    return h;
  }
};

class Symbols {
 public:
  Symbol intern(const std::string& s) {
    auto [it, inserted] = ids_.emplace(s, static_cast<Symbol>(names_.size()));
    if (inserted) names_.push_back(s);
    return it->second;
  }
  std::optional<Symbol> find(const std::string& s) const {
    auto it = ids_.find(s);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }
  const std::string& name(Symbol s) const { return names_[s]; }

 private:
  std::unordered_map<std::string, Symbol> ids_;
  std::vector<std::string> names_;
};

/// Atoms of one predicate as seen by the grounder.
struct Relation {
  std::string name;
  bool open = false;
  std::size_t arity = 0;
  std::vector<Tuple> rows;  // enumeration order
  std::vector<double> values;
  std::vector<bool> free;
  std::unordered_map<Tuple, std::size_t, TupleHash> lookup;
  std::vector<std::unordered_map<Symbol, std::vector<std::uint32_t>>> by_position;

  void add(Tuple t, double value, bool is_free) {
    if (lookup.count(t)) return;
    const auto row = static_cast<std::uint32_t>(rows.size());
    for (std::size_t p = 0; p < t.size(); ++p) by_position[p][t[p]].push_back(row);
    lookup.emplace(t, row);
    rows.push_back(std::move(t));
    values.push_back(value);
    free.push_back(is_free);
  }
};

struct PlannedLiteral {
  std::size_t relation = 0;
  bool negated = false;
  std::vector<std::size_t> vars;  // variable slot per argument
};

constexpr double kDefaultInitial = 0.5;

}  // namespace

GroundNetwork ground(const Program& program, const RelationalDatabase& db) {
  Symbols symbols;
  std::vector<Relation> relations;
  std::unordered_map<std::string, std::size_t> relation_of;

  auto relation_for = [&](const Predicate& p) -> std::size_t {
    if (auto it = relation_of.find(p.name); it != relation_of.end()) return it->second;
    Relation r;
    r.name = p.name;
    r.arity = p.arity;
    r.open = p.kind == PredicateKind::Open ||
             (p.kind == PredicateKind::Inferred && db.has_targets(p.name));
    r.by_position.resize(p.arity);
    auto intern = [&](const Args& args) {
      if (args.size() != p.arity) {
        throw ValidationError("database atom of " + p.name + " has arity " +
                              std::to_string(args.size()) + ", expected " + std::to_string(p.arity));
      }
      Tuple t;
      for (const auto& a : args) t.push_back(symbols.intern(a));
      return t;
    };
    if (r.open) {
      for (const auto& t : db.targets(p.name)) {
        r.add(intern(t.args), t.initial.value_or(kDefaultInitial), true);
      }
    } else if (db.has_targets(p.name)) {
      throw ValidationError("closed predicate " + p.name + " has target atoms in the database");
    }
    for (const auto& e : db.observations(p.name)) {
      // Positive closed literals never match a zero atom, so leave those out.
      if (!r.open && e.value == 0.0) continue;
      r.add(intern(e.args), e.value, false);
    }
    relations.push_back(std::move(r));
    relation_of.emplace(p.name, relations.size() - 1);
    return relations.size() - 1;
  };

  GroundNetwork net;
  // Every target is a free variable, in database order.
  for (const auto& p : program.predicates()) {
    const auto& rel = relations[relation_for(p)];
    if (!rel.open) continue;
    for (std::size_t i = 0; i < rel.rows.size(); ++i) {
      if (!rel.free[i]) continue;
      Args args;
      for (auto s : rel.rows[i]) args.push_back(symbols.name(s));
      net.add_atom({rel.name, std::move(args), true, rel.values[i]});
    }
  }

  for (std::size_t ri = 0; ri < program.rules().size(); ++ri) {
    const auto& rule = program.rules()[ri];
    std::unordered_map<std::string, std::size_t> slot_of;
    auto plan_literal = [&](const Literal& l) {
      PlannedLiteral pl;
      pl.relation = relation_for(*program.find_predicate(l.predicate));
      pl.negated = l.negated;
      for (const auto& v : l.args) {
        auto [it, inserted] = slot_of.emplace(v, slot_of.size());
        pl.vars.push_back(it->second);
      }
      return pl;
    };
    std::vector<PlannedLiteral> body;
    for (const auto& l : rule.body) body.push_back(plan_literal(l));
    const PlannedLiteral head = plan_literal(rule.head);
    const std::size_t nvars = slot_of.size();

    // Greedy static join order.
    std::vector<std::size_t> order;
    std::vector<bool> bound(nvars, false), used(body.size(), false);
    for (std::size_t step = 0; step < body.size(); ++step) {
      std::size_t best = body.size();
      std::tuple<int, int, std::size_t> best_key{};
      for (std::size_t i = 0; i < body.size(); ++i) {
        if (used[i]) continue;
        const auto& l = body[i];
        const auto& rel = relations[l.relation];
        std::size_t nbound = 0;
        for (auto v : l.vars) nbound += bound[v];
        const bool all = nbound == l.vars.size();
        int cls = 0;
        if (all) cls = 0;
        else if (!rel.open && !l.negated) cls = 1;
        else if (rel.open) cls = 2;
        else cls = 3;
        const std::tuple<int, int, std::size_t> key{cls, -static_cast<int>(nbound), rel.rows.size()};
        if (best == body.size() || key < best_key) {
          best = i;
          best_key = key;
        }
      }
      if (std::get<0>(best_key) == 3) {
        throw ValidationError("rule " + std::to_string(ri + 1) +
                              ": a variable is bound only by negated closed literals");
      }
      used[best] = true;
      order.push_back(best);
      for (auto v : body[best].vars) bound[v] = true;
    }

    std::vector<Symbol> binding(nvars, 0);
    std::vector<bool> is_bound(nvars, false);
    struct Resolved {
      std::size_t relation;
      Tuple tuple;
      double value;
      bool free;
      bool negated;
    };
    std::vector<Resolved> resolved(body.size());

    auto tuple_of = [&](const PlannedLiteral& l) {
      Tuple t;
      t.reserve(l.vars.size());
      for (auto v : l.vars) t.push_back(binding[v]);
      return t;
    };

    // Looks up a fully bound literal; false means the body is 0 for sure.
    auto resolve_bound = [&](const PlannedLiteral& l, Resolved& out) -> bool {
      const auto& rel = relations[l.relation];
      out = {l.relation, tuple_of(l), 0.0, false, l.negated};
      auto it = rel.lookup.find(out.tuple);
      if (it == rel.lookup.end()) {
        if (rel.open) {
          std::string atom = rel.name + "(";
          for (std::size_t i = 0; i < out.tuple.size(); ++i) {
            atom += (i ? "," : "") + symbols.name(out.tuple[i]);
          }
          throw ValidationError("open atom " + atom + ") is neither a target nor observed");
        }
        return l.negated;  // closed-world 0
      }
      out.value = rel.values[it->second];
      out.free = rel.free[it->second];
      if (!out.free && !l.negated && out.value == 0.0) return false;
      if (!out.free && l.negated && out.value == 1.0) return false;
      return true;
    };

    auto emit = [&]() {
      Resolved h;
      const auto& hrel = relations[head.relation];
      h = {head.relation, tuple_of(head), 0.0, false, head.negated};
      if (auto it = hrel.lookup.find(h.tuple); it != hrel.lookup.end()) {
        h.value = hrel.values[it->second];
        h.free = hrel.free[it->second];
      } else if (hrel.open) {
        resolve_bound(head, h);  // throws
      }

      // Exact pruning: skip when the hinge cannot be positive anywhere in the box.
      double constant = 1.0 - static_cast<double>(body.size());
      std::vector<std::pair<const Resolved*, double>> free_terms;
      auto acc = [&](const Resolved& r, double sign) {
        if (r.negated) {
          constant += sign;
          sign = -sign;
        }
        if (r.free) free_terms.emplace_back(&r, sign);
        else constant += sign * r.value;
      };
      for (const auto& r : resolved) acc(r, 1.0);
      acc(h, -1.0);
      std::map<std::pair<std::size_t, Tuple>, double> coef;
      for (const auto& [r, c] : free_terms) coef[{r->relation, r->tuple}] += c;
      double upper = constant;
      for (const auto& [k, c] : coef) upper += std::max(c, 0.0);
      if (upper <= 0.0) return;

      auto atom_of = [&](const Resolved& r) {
        const auto& rel = relations[r.relation];
        Args args;
        for (auto s : r.tuple) args.push_back(symbols.name(s));
        return net.add_atom({rel.name, std::move(args), r.free, r.value});
      };
      GroundRule g;
      g.rule = ri;
      g.weight = rule.weight;
      g.exponent = rule.exponent;
      for (const auto& r : resolved) g.body.push_back({atom_of(r), r.negated});
      g.head = {atom_of(h), h.negated};
      net.add_rule(std::move(g));
    };

    std::function<void(std::size_t)> search = [&](std::size_t k) {
      if (k == order.size()) {
        emit();
        return;
      }
      const auto li = order[k];
      const auto& l = body[li];
      const auto& rel = relations[l.relation];
      bool all = true;
      for (auto v : l.vars) all = all && is_bound[v];
      if (all) {
        if (resolve_bound(l, resolved[li])) search(k + 1);
        return;
      }

      const std::vector<std::uint32_t>* candidates = nullptr;
      for (std::size_t p = 0; p < l.vars.size(); ++p) {
        if (!is_bound[l.vars[p]]) continue;
        auto it = rel.by_position[p].find(binding[l.vars[p]]);
        if (it == rel.by_position[p].end()) return;
        if (!candidates || it->second.size() < candidates->size()) candidates = &it->second;
      }
      const std::size_t count = candidates ? candidates->size() : rel.rows.size();
      std::vector<std::size_t> newly;
      for (std::size_t c = 0; c < count; ++c) {
        const std::size_t row = candidates ? (*candidates)[c] : c;
        const auto& t = rel.rows[row];
        newly.clear();
        bool ok = true;
        for (std::size_t p = 0; p < l.vars.size() && ok; ++p) {
          const auto v = l.vars[p];
          if (is_bound[v]) {
            ok = binding[v] == t[p];
          } else {
            binding[v] = t[p];
            is_bound[v] = true;
            newly.push_back(v);
          }
        }
        if (ok) {
          resolved[li] = {l.relation, t, rel.values[row], rel.free[row], l.negated};
          const bool zero = !rel.free[row] && (l.negated ? rel.values[row] == 1.0 : rel.values[row] == 0.0);
          if (!zero) search(k + 1);
        }
        for (auto v : newly) is_bound[v] = false;
      }
    };
    search(0);
  }
  return net;
}

}  // namespace polyscale::pslengine
