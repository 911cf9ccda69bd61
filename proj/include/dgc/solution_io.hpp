#pragma once

#include "dgc/pipeline.hpp"

#include <string>

namespace dgc {

// Solution archive layout under `dir`:
//   solution.json   controls, trajectory, multipliers, costates, costs,
//                   statuses and the tolerances used (plus seed + timestamp)
//   trajectory.csv  k, state, per-player controls, per-player multipliers
//   lcp_replay.txt  only written when the complementarity solve failed
void write_solution_archive(const std::string& dir, const GameSpec& g,
                            const EquilibriumResult& res, const SolveOptions& opts);

// Reads controls/multipliers/costates back into an EquilibriumResult (states
// are re-derived by rollout on load, so a tampered trajectory cannot mask
// tampered controls).
EquilibriumResult read_solution_archive(const std::string& dir, const GameSpec& g);

// 17-significant-digit decimal formatting, enough to round-trip a double.
std::string format_double(double v);

} // namespace dgc
