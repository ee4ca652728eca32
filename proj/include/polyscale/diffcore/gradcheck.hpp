#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "polyscale/diffcore/params.hpp"
#include "polyscale/diffcore/tape.hpp"

namespace polyscale::diffcore {

/// Builds a scalar loss on a fresh tape from the current parameter values.
using LossBuilder = std::function<Var(Tape&)>;

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  Eigen::Index worst_row = 0;
  Eigen::Index worst_col = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates = 0;
  std::size_t refined = 0;  // coordinates re-estimated by extrapolation
};

/// Compares backward() against central differences for every coordinate of
/// every trainable parameter. Relative error per coordinate is
/// |g_a - g_n| / max(1e-8, |g_a| + |g_n|). Where the plain difference at
/// `epsilon` disagrees by more than 1e-6, g_n is re-estimated by Ridders'
/// extrapolation of central differences, whose roundoff is far lower on
/// tiny gradients. Parameter values are restored.
GradCheckReport check_gradients(const LossBuilder& loss, ParameterStore& store, double epsilon);

}  // namespace polyscale::diffcore
