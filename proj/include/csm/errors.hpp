#pragma once

#include <stdexcept>
#include <string>

namespace csm {

// Invalid user or caller configuration (bad basis size, angle outside the
// convergent sector, dimension over the guard, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Scaling angle outside [0, pi/4): the complex-rotated integrals diverge.
class DomainError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// A numerical procedure failed or produced a diagnostic that cannot be trusted.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoResonanceFound : public std::runtime_error {
 public:
  NoResonanceFound() : std::runtime_error("no resonance found") {}
  explicit NoResonanceFound(const std::string& what)
      : std::runtime_error("no resonance found: " + what) {}
};

}  // namespace csm
