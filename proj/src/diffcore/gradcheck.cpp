#include "polyscale/diffcore/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "polyscale/error.hpp"

namespace polyscale::diffcore {

namespace {

constexpr double kRefineAbove = 1e-6;
constexpr double kRiddersStep = 0.05;

// Ridders' extrapolation of central differences with a shrinking step; picks
// the tableau entry with the smallest estimated error.
double ridders(const std::function<double(double)>& f, double h) {
  constexpr int kTable = 10;
  constexpr double kShrink = 1.4, kShrink2 = kShrink * kShrink, kSafe = 2.0;
  double a[kTable][kTable];
  double err = std::numeric_limits<double>::max();
  double best = 0.0;
  a[0][0] = (f(h) - f(-h)) / (2.0 * h);
  best = a[0][0];
  for (int i = 1; i < kTable; ++i) {
    h /= kShrink;
    a[0][i] = (f(h) - f(-h)) / (2.0 * h);
    double fac = kShrink2;
    for (int j = 1; j <= i; ++j) {
      a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
      fac *= kShrink2;
      const double e = std::max(std::abs(a[j][i] - a[j - 1][i]), std::abs(a[j][i] - a[j - 1][i - 1]));
      if (e <= err) {
        err = e;
        best = a[j][i];
      }
    }
    if (std::abs(a[i][i] - a[i - 1][i - 1]) >= kSafe * err) break;
  }
  return best;
}

}  // namespace

GradCheckReport check_gradients(const LossBuilder& loss, ParameterStore& store, double epsilon) {
  if (!(epsilon > 0.0)) throw ValidationError("gradient check epsilon must be positive");
  store.zero_grad();
  {
    Tape tape;
    tape.backward(loss(tape));
  }
  std::vector<Tensor> analytic;
  analytic.reserve(store.size());
  for (const auto& p : store) analytic.push_back(p.grad);

  auto evaluate = [&] {
    Tape tape;
    return tape.scalar(loss(tape));
  };

  GradCheckReport report;
  for (std::size_t k = 0; k < store.size(); ++k) {
    auto& p = store[k];
    if (!p.trainable) continue;
    for (Eigen::Index c = 0; c < p.value.cols(); ++c) {
      for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
        const double original = p.value(r, c);
        p.value(r, c) = original + epsilon;
        const double up = evaluate();
        p.value(r, c) = original - epsilon;
        const double down = evaluate();
        p.value(r, c) = original;
        double numeric = (up - down) / (2.0 * epsilon);
        const double ga = analytic[k](r, c);
        auto relative = [&] { return std::abs(ga - numeric) / std::max(1e-8, std::abs(ga) + std::abs(numeric)); };
        if (relative() > kRefineAbove) {
          numeric = ridders(
              [&](double h) {
                p.value(r, c) = original + h;
                const double v = evaluate();
                p.value(r, c) = original;
                return v;
              },
              kRiddersStep);
          ++report.refined;
        }
        const double rel = relative();
        ++report.coordinates;
        if (rel > report.max_relative_error) {
          report.max_relative_error = rel;
          report.worst_parameter = p.name;
          report.worst_row = r;
          report.worst_col = c;
          report.worst_analytic = ga;
          report.worst_numeric = numeric;
        }
      }
    }
  }
  return report;
}

}  // namespace polyscale::diffcore
