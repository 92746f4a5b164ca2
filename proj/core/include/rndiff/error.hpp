#pragma once

#include <stdexcept>
#include <string>

namespace rndiff {

/// Violated precondition on caller-supplied data (bad shapes, non-positive
/// parameters, empty samples, invalid brackets).
class InputError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Linear-algebra failure or non-finite result.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace rndiff
