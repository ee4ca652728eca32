#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "polyscale/pslengine/ground.hpp"

namespace polyscale::pslengine {

struct SolverConfig {
  std::size_t max_iterations = 50000;
  double tolerance = 1e-9;  // on the best-energy improvement over `window` iterations
  std::size_t window = 100;
  /// Step-size decay exponent p in eta_k = eta_0 / (1 + k)^p, used when the
  /// network has linear (exponent 1) hinges.
  double decay = 0.75;
};

struct MapResult {
  std::vector<double> y;  // one value per free variable, in [0, 1]
  double energy = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

class MapSolver {
 public:
  virtual ~MapSolver() = default;
  /// `warm` overrides the network's initial assignment when given.
  virtual MapResult solve(const GroundNetwork& network, const SolverConfig& config,
                          std::optional<std::span<const double>> warm = std::nullopt) const = 0;
};

/// Projected (sub)gradient descent on the box [0, 1]^n. The base step is the
/// inverse of a Gershgorin bound on the curvature of the squared hinges (or
/// of the linear-hinge gradient bound). Networks with only squared hinges
/// are smooth and take that step with Nesterov momentum and restarts; any
/// linear hinge switches to a diminishing step with best-iterate tracking,
/// followed by accelerated passes on Huber-smoothed linear hinges with a
/// shrinking width (1e-3 down to 1e-10). The best true energy seen wins.
class ProjectedGradientSolver final : public MapSolver {
 public:
  MapResult solve(const GroundNetwork& network, const SolverConfig& config,
                  std::optional<std::span<const double>> warm = std::nullopt) const override;
};

/// Convenience wrapper around ProjectedGradientSolver.
MapResult map_inference(const GroundNetwork& network, const SolverConfig& config = {},
                        std::optional<std::span<const double>> warm = std::nullopt);

}  // namespace polyscale::pslengine
