#pragma once
#include <stdexcept>
#include <string>

namespace fueterlab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// point outside a chart's domain predicate
struct DomainError : Error {
  using Error::Error;
};

struct UnsupportedError : Error {
  using Error::Error;
};

struct PreconditionError : Error {
  using Error::Error;
};

// ODE failures, line-search failures, etc.
struct NumericalError : Error {
  using Error::Error;
};

}  // namespace fueterlab
