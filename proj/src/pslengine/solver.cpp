#include "polyscale/pslengine/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polyscale/error.hpp"

namespace polyscale::pslengine {

namespace {

struct Objective {
  const GroundNetwork& net;

  double value(const std::vector<double>& y) const {
    double e = 0.0;
    const auto& rules = net.rules();
    const auto& hinges = net.hinges();
    for (std::size_t r = 0; r < hinges.size(); ++r) {
      double l = hinges[r].constant;
      for (const auto& [j, c] : hinges[r].terms) l += c * y[j];
      if (l <= 0.0) continue;
      e += rules[r].weight * (rules[r].exponent == 2 ? l * l : l);
    }
    return e;
  }

  // Linear hinges replaced by their Huber smoothing with width mu (mu = 0
  // gives the plain subgradient).
  void gradient(const std::vector<double>& y, std::vector<double>& g, double mu = 0.0) const {
    std::fill(g.begin(), g.end(), 0.0);
    const auto& rules = net.rules();
    const auto& hinges = net.hinges();
    for (std::size_t r = 0; r < hinges.size(); ++r) {
      double l = hinges[r].constant;
      for (const auto& [j, c] : hinges[r].terms) l += c * y[j];
      if (l <= 0.0) continue;
      const double slope = rules[r].exponent == 2 ? 2.0 * l : (l < mu ? l / mu : 1.0);
      const double s = rules[r].weight * slope;
      for (const auto& [j, c] : hinges[r].terms) g[j] += s * c;
    }
  }
};

void project(std::vector<double>& y) {
  for (auto& v : y) v = std::clamp(v, 0.0, 1.0);
}

// Accelerated projected gradient with adaptive restart on the objective with
// linear hinges smoothed at width mu; keeps the best true-energy iterate.
// True when it stopped on the tolerance rather than the iteration budget.
bool accelerated(const Objective& f, double step, double mu, std::size_t iterations, double tolerance,
                 std::size_t window, MapResult& out) {
  const std::size_t n = out.y.size();
  std::vector<double> y = out.y, z = y, next(n), g(n);
  double t = 1.0;
  double window_start = out.energy;
  for (std::size_t k = 0; k < iterations; ++k) {
    ++out.iterations;
    f.gradient(z, g, mu);
    for (std::size_t j = 0; j < n; ++j) next[j] = z[j] - step * g[j];
    project(next);
    // restart when the step moves against the momentum
    double dir = 0.0;
    for (std::size_t j = 0; j < n; ++j) dir += (z[j] - next[j]) * (next[j] - y[j]);
    if (dir > 0.0) {
      z = y;
      t = 1.0;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t j = 0; j < n; ++j) z[j] = next[j] + ((t - 1.0) / t_next) * (next[j] - y[j]);
    project(z);
    t = t_next;
    y.swap(next);
    const double e = f.value(y);
    if (e < out.energy) {
      out.energy = e;
      out.y = y;
    }
    if (out.energy == 0.0) return true;
    if ((k + 1) % window == 0) {
      if (window_start - out.energy < tolerance) return true;
      window_start = out.energy;
    }
  }
  return false;
}

}  // namespace

MapResult ProjectedGradientSolver::solve(const GroundNetwork& network, const SolverConfig& config,
                                         std::optional<std::span<const double>> warm) const {
  if (config.max_iterations == 0) throw ValidationError("max_iterations must be positive");
  const std::size_t n = network.free_count();
  std::vector<double> y = network.initial_assignment();
  if (warm) {
    if (warm->size() != n) throw ValidationError("warm start has the wrong size");
    y.assign(warm->begin(), warm->end());
  }
  project(y);

  const Objective f{network};
  MapResult out;
  out.y = y;
  out.energy = f.value(y);
  if (n == 0 || network.rules().empty()) {
    out.converged = true;
    return out;
  }

  // Per-variable curvature and slope bounds.
  std::vector<double> curvature(n, 0.0), slope(n, 0.0);
  bool linear = false;
  for (std::size_t r = 0; r < network.hinges().size(); ++r) {
    const auto& h = network.hinges()[r];
    const auto& rule = network.rules()[r];
    double l1 = 0.0;
    for (const auto& [j, c] : h.terms) l1 += std::abs(c);
    for (const auto& [j, c] : h.terms) {
      if (rule.exponent == 2) {
        curvature[j] += 2.0 * rule.weight * std::abs(c) * l1;
      } else {
        slope[j] += rule.weight * std::abs(c);
        linear = true;
      }
    }
  }
  const double lmax = *std::max_element(curvature.begin(), curvature.end());
  const double gmax = *std::max_element(slope.begin(), slope.end());
  const double scale = std::max(lmax, 2.0 * gmax);
  if (scale <= 0.0) {
    out.converged = true;
    return out;
  }
  const double eta0 = 1.0 / scale;

  std::vector<double> curvature_linear(n, 0.0);
  for (std::size_t r = 0; r < network.hinges().size(); ++r) {
    if (network.rules()[r].exponent != 1) continue;
    const auto& h = network.hinges()[r];
    double l1 = 0.0;
    for (const auto& [j, c] : h.terms) l1 += std::abs(c);
    for (const auto& [j, c] : h.terms) curvature_linear[j] += network.rules()[r].weight * std::abs(c) * l1;
  }
  const double lin = *std::max_element(curvature_linear.begin(), curvature_linear.end());

  std::vector<double> g(n), next(n), momentum_point = y;
  double current = out.energy;
  double window_start = out.energy;
  double t = 1.0;
  for (std::size_t k = 0; k < config.max_iterations; ++k) {
    out.iterations = k + 1;
    if (linear) {
      const double eta = eta0 / std::pow(1.0 + static_cast<double>(k), config.decay);
      f.gradient(y, g);
      for (std::size_t j = 0; j < n; ++j) y[j] -= eta * g[j];
      project(y);
      current = f.value(y);
    } else {
      f.gradient(momentum_point, g);
      for (std::size_t j = 0; j < n; ++j) next[j] = momentum_point[j] - eta0 * g[j];
      project(next);
      const double e = f.value(next);
      if (e > current) {
        // Restart momentum from the last accepted point.
        momentum_point = y;
        t = 1.0;
      } else {
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        for (std::size_t j = 0; j < n; ++j) {
          momentum_point[j] = next[j] + ((t - 1.0) / t_next) * (next[j] - y[j]);
        }
        project(momentum_point);
        t = t_next;
        y.swap(next);
        current = e;
      }
    }
    if (current < out.energy) {
      out.energy = current;
      out.y = y;
    }
    if (out.energy == 0.0) {
      out.converged = true;
      break;
    }
    if ((k + 1) % config.window == 0) {
      if (window_start - out.energy < config.tolerance) {
        out.converged = true;
        break;
      }
      window_start = out.energy;
    }
  }
  if (linear && out.energy > 0.0) {
    // Polish: shrink the smoothing width; each stage is smooth with a known
    // gradient Lipschitz bound lmax + lin / mu.
    const std::size_t budget = std::max<std::size_t>(config.max_iterations / 10, 1);
    bool settled = false;
    for (double mu = 1e-3; mu >= 1e-10; mu *= 0.1) {
      settled = accelerated(f, 1.0 / (lmax + lin / mu), mu, budget, config.tolerance * 1e-3, config.window, out);
      if (out.energy == 0.0) break;
    }
    out.converged = out.converged || settled;
  }
  return out;
}

MapResult map_inference(const GroundNetwork& network, const SolverConfig& config,
                        std::optional<std::span<const double>> warm) {
  return ProjectedGradientSolver{}.solve(network, config, warm);
}

}  // namespace polyscale::pslengine
