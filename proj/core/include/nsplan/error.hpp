#pragma once

#include <stdexcept>
#include <string>

namespace nsplan {

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation would exceed a configured size limit (enumeration, search).
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A STRIPS action was applied in a state that does not satisfy its preconditions.
class InapplicableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A curve or rate fit could not be computed from the supplied samples.
class FitFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nsplan
