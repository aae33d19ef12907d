#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tci {

struct InvalidFieldError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ResolutionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InfeasibleError : std::domain_error {
  using std::domain_error::domain_error;
};

struct SchemaError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A trajectory produced a non-finite coefficient.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t step, const std::string& what)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

}  // namespace tci
