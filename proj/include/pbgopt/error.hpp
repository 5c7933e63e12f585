#pragma once

#include <stdexcept>
#include <string>

namespace pbg {

class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Factorization failures, non-convergence, indefinite mass matrices.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InternalError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

// Homogenized SDP returned theta at or below its floor, so x = w / theta is meaningless.
class DegenerateSolution : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace pbg
