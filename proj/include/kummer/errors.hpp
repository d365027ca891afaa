#pragma once
#include <stdexcept>
#include <string>
#include <vector>

namespace kummer {

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DefinitenessError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Iterative failure; carries whatever history the solver had.
struct ConvergenceError : std::runtime_error {
  std::vector<double> history;
  ConvergenceError(const std::string& what, std::vector<double> h = {})
      : std::runtime_error(what), history(std::move(h)) {}
};

}  // namespace kummer
