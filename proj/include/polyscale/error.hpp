#pragma once

#include <stdexcept>
#include <string>

namespace polyscale {

/// Input that breaks a documented contract: malformed files, unknown codes,
/// out-of-range arguments. The CLI maps it to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A pipeline stage failed on otherwise valid input. The CLI maps it to exit code 3.
class StageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace polyscale
