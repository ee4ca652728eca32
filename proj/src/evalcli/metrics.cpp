#include "polyscale/evalcli/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "polyscale/error.hpp"

namespace polyscale::evalcli {

double micro_f(std::span<const std::string> predicted, std::span<const std::string> gold,
               const std::set<std::string>& excluded) {
  if (predicted.size() != gold.size()) throw ValidationError("micro_f: length mismatch");
  if (predicted.empty()) throw ValidationError("micro_f: empty input");
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool pred_in = !excluded.count(predicted[i]);
    const bool gold_in = !excluded.count(gold[i]);
    if (predicted[i] == gold[i]) {
      if (gold_in) tp += 1;
      continue;
    }
    if (pred_in) fp += 1;
    if (gold_in) fn += 1;
  }
  if (tp == 0) return 0.0;
  const double p = tp / (tp + fp);
  const double r = tp / (tp + fn);
  return 2.0 * p * r / (p + r);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("pearson: length mismatch");
  if (x.size() < 2) throw ValidationError("pearson: need at least 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw ValidationError("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("spearman: length mismatch");
  if (x.size() < 2) throw ValidationError("spearman: need at least 2 points");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

}  // namespace polyscale::evalcli
