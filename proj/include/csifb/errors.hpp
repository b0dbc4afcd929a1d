#pragma once

#include <stdexcept>
#include <string>

namespace csifb {

/// A request exceeds a configured resource cap (e.g. RVQ codebook size).
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace csifb
