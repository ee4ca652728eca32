#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace polyscale::pslengine {

using Args = std::vector<std::string>;

/// Observed truth values for closed (and optionally open) atoms plus the set
/// of open target atoms, each with an optional warm-start value. Atoms are
/// kept per predicate in insertion order, so grounding is deterministic.
class RelationalDatabase {
 public:
  struct Entry {
    Args args;
    double value = 0.0;
  };
  struct Target {
    Args args;
    std::optional<double> initial;
  };

  /// Throws ValidationError when value is outside [0, 1]. Re-observing an
  /// atom overwrites its value.
  void observe(const std::string& predicate, Args args, double value);
  /// Declares a free atom. Throws ValidationError on an initial value
  /// outside [0, 1] or when the atom is already observed.
  void target(const std::string& predicate, Args args, std::optional<double> initial = {});

  std::optional<double> observed(const std::string& predicate, const Args& args) const;
  bool is_target(const std::string& predicate, const Args& args) const;

  const std::vector<Entry>& observations(const std::string& predicate) const;
  const std::vector<Target>& targets(const std::string& predicate) const;
  bool has_targets(const std::string& predicate) const;
  std::vector<std::string> predicates() const;
  std::size_t observation_count() const;
  std::size_t target_count() const;

  /// Tab-separated lines: "observed<TAB>Pred<TAB>value<TAB>arg..." or
  /// "target<TAB>Pred<TAB>initial|-<TAB>arg...". '#' starts a comment line.
  static RelationalDatabase parse(std::istream& in, const std::string& source = "<database>");
  static RelationalDatabase load(const std::filesystem::path& path);
  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;

 private:
  struct Table {
    std::vector<Entry> observed;
    std::map<Args, std::size_t> observed_index;
    std::vector<Target> targets;
    std::map<Args, std::size_t> target_index;
  };
  std::map<std::string, Table> tables_;
};

}  // namespace polyscale::pslengine
