#pragma once

#include <string>
#include <vector>

namespace csifb {

struct SelftestResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Invariant checks on small problem sizes; takes a few seconds.
std::vector<SelftestResult> run_selftest();

}  // namespace csifb
