#pragma once

#include <stdexcept>
#include <string>

namespace kglab {

struct error : std::runtime_error {
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid parameters, malformed configs, mismatched grids.  CLI exit code 2.
struct config_error : error {
  explicit config_error(const std::string& msg) : error(msg) {}
};

// Tripped numerical guards: blow-up, energy drift, unremoved resonance,
// non-convergent iterations.  CLI exit code 3.
struct numerical_guard_error : error {
  explicit numerical_guard_error(const std::string& msg) : error(msg) {}
};

}  // namespace kglab
