#pragma once

#include <string>
#include <vector>

namespace dgc {

// Residuals of one family of equilibrium conditions, reduced to the numbers a
// verdict needs. All residuals are nonnegative; pass <=> max <= tolerance.
struct ResidualFamily {
  std::string name;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  // Optional localization of the worst entry.
  int worst_stage = -1;
  int worst_player = -1;

  void absorb(double r, int stage, int player) {
    if (r > max_residual) {
      max_residual = r;
      worst_stage = stage;
      worst_player = player;
    }
    if (max_residual > tolerance) pass = false;
  }
};

struct ResidualReport {
  std::vector<ResidualFamily> families;
  std::vector<std::string> skipped_probes;

  ResidualFamily* find(const std::string& name);
  const ResidualFamily* find(const std::string& name) const;
  bool all_pass() const;
  std::vector<std::string> failing_families() const;
};

} // namespace dgc
