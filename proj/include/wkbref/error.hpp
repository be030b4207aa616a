#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace wkbref {

/// Raised when inputs violate an operation's preconditions (bad parameters,
/// energy outside the bound range, malformed configuration).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure fails on valid input. Carries the module
/// name and, when meaningful, the energy at which it failed.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string module, const std::string& what, double energy = kNoEnergy)
      : std::runtime_error(compose(module, what, energy)), module_(std::move(module)), detail_(what), energy_(energy) {}

  const std::string& module() const noexcept { return module_; }
  const std::string& detail() const noexcept { return detail_; }
  double energy() const noexcept { return energy_; }

  static constexpr double kNoEnergy = -1.0;

 private:
  static std::string compose(const std::string& module, const std::string& what, double energy) {
    std::string msg = module + ": " + what;
    if (energy != kNoEnergy) {
      char buf[48];
      std::snprintf(buf, sizeof buf, " (eps=%.12g)", energy);
      msg += buf;
    }
    return msg;
  }

  std::string module_;
  std::string detail_;
  double energy_;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw PreconditionError(message);
}

}  // namespace wkbref
