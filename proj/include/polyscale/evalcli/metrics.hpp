#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

namespace polyscale::evalcli {

/// Micro-averaged F from pooled TP/FP/FN. Classes in `excluded` contribute
/// neither true positives, false positives nor false negatives. Without
/// exclusions this equals accuracy. Throws ValidationError on empty or
/// unequal lists.
double micro_f(std::span<const std::string> predicted, std::span<const std::string> gold,
               const std::set<std::string>& excluded = {});

/// Throws ValidationError on fewer than 2 points, unequal lengths or zero variance.
double pearson(std::span<const double> x, std::span<const double> y);
/// Pearson on average ranks (ties share the mean of their positions).
double spearman(std::span<const double> x, std::span<const double> y);
/// 1-based average ranks.
std::vector<double> average_ranks(std::span<const double> x);

}  // namespace polyscale::evalcli
