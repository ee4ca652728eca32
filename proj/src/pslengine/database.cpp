#include "polyscale/pslengine/database.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "polyscale/error.hpp"

namespace polyscale::pslengine {

namespace {

void require_unit(double v, const std::string& what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ValidationError(what + " has value " + std::to_string(v) + " outside [0, 1]");
  }
}

std::string atom_text(const std::string& predicate, const Args& args) {
  std::string s = predicate + "(";
  for (std::size_t i = 0; i < args.size(); ++i) s += (i ? "," : "") + args[i];
  return s + ")";
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_value(const std::string& text, const std::string& where) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ValidationError(where + "malformed value '" + text + "'");
  }
  return v;
}

}  // namespace

void RelationalDatabase::observe(const std::string& predicate, Args args, double value) {
  require_unit(value, atom_text(predicate, args));
  auto& t = tables_[predicate];
  if (t.target_index.count(args)) {
    throw ValidationError(atom_text(predicate, args) + " is already a target");
  }
  if (auto it = t.observed_index.find(args); it != t.observed_index.end()) {
    t.observed[it->second].value = value;
    return;
  }
  t.observed_index.emplace(args, t.observed.size());
  t.observed.push_back({std::move(args), value});
}

void RelationalDatabase::target(const std::string& predicate, Args args,
                                std::optional<double> initial) {
  if (initial) require_unit(*initial, atom_text(predicate, args));
  auto& t = tables_[predicate];
  if (t.observed_index.count(args)) {
    throw ValidationError(atom_text(predicate, args) + " is already observed");
  }
  if (auto it = t.target_index.find(args); it != t.target_index.end()) {
    t.targets[it->second].initial = initial;
    return;
  }
  t.target_index.emplace(args, t.targets.size());
  t.targets.push_back({std::move(args), initial});
}

std::optional<double> RelationalDatabase::observed(const std::string& predicate,
                                                   const Args& args) const {
  auto t = tables_.find(predicate);
  if (t == tables_.end()) return std::nullopt;
  auto it = t->second.observed_index.find(args);
  if (it == t->second.observed_index.end()) return std::nullopt;
  return t->second.observed[it->second].value;
}

bool RelationalDatabase::is_target(const std::string& predicate, const Args& args) const {
  auto t = tables_.find(predicate);
  return t != tables_.end() && t->second.target_index.count(args) > 0;
}

const std::vector<RelationalDatabase::Entry>& RelationalDatabase::observations(
    const std::string& predicate) const {
  static const std::vector<Entry> empty;
  auto t = tables_.find(predicate);
  return t == tables_.end() ? empty : t->second.observed;
}

const std::vector<RelationalDatabase::Target>& RelationalDatabase::targets(
    const std::string& predicate) const {
  static const std::vector<Target> empty;
  auto t = tables_.find(predicate);
  return t == tables_.end() ? empty : t->second.targets;
}

bool RelationalDatabase::has_targets(const std::string& predicate) const {
  return !targets(predicate).empty();
}

std::vector<std::string> RelationalDatabase::predicates() const {
  std::vector<std::string> out;
  for (const auto& [name, t] : tables_) out.push_back(name);
  return out;
}

std::size_t RelationalDatabase::observation_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : tables_) n += t.observed.size();
  return n;
}

std::size_t RelationalDatabase::target_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : tables_) n += t.targets.size();
  return n;
}

RelationalDatabase RelationalDatabase::parse(std::istream& in, const std::string& source) {
  RelationalDatabase db;
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
    if (f.size() < 4) throw ValidationError(where + "expected kind, predicate, value and arguments");
    Args args(f.begin() + 3, f.end());
    try {
      if (f[0] == "observed") {
        db.observe(f[1], std::move(args), parse_value(f[2], where));
      } else if (f[0] == "target") {
        std::optional<double> init;
        if (f[2] != "-") init = parse_value(f[2], where);
        db.target(f[1], std::move(args), init);
      } else {
        throw ValidationError("unknown record kind '" + f[0] + "'");
      }
    } catch (const ValidationError& e) {
      const std::string msg = e.what();
      if (msg.rfind(where, 0) == 0) throw;
      throw ValidationError(where + msg);
    }
  }
  return db;
}

RelationalDatabase RelationalDatabase::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open database " + path.string());
  return parse(in, path.string());
}

void RelationalDatabase::write(std::ostream& out) const {
  for (const auto& [name, t] : tables_) {
    for (const auto& e : t.observed) {
      out << "observed\t" << name << '\t' << format_value(e.value);
      for (const auto& a : e.args) out << '\t' << a;
      out << '\n';
    }
    for (const auto& e : t.targets) {
      out << "target\t" << name << '\t' << (e.initial ? format_value(*e.initial) : "-");
      for (const auto& a : e.args) out << '\t' << a;
      out << '\n';
    }
  }
}

void RelationalDatabase::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw StageError("cannot open " + path.string() + " for writing");
  write(out);
}

}  // namespace polyscale::pslengine
