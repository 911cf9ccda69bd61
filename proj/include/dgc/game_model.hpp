#pragma once

#include "dgc/types.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dgc {

// User-facing load failures. `kind` drives the CLI exit code.
struct SpecError : std::runtime_error {
  enum class Kind { Parse, Shape, Value };
  Kind kind;
  SpecError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

struct LoadOptions {
  // Relative infinity-norm asymmetry allowed in Q_k^i and R_k^{ii} before the
  // symmetrizing normalization warns.
  double sym_tol = 1e-9;
};

GameSpec load_spec(const std::string& path, const LoadOptions& opts = {});
GameSpec parse_spec(const std::string& json_text, const LoadOptions& opts = {});
std::string spec_to_json(const GameSpec& g);
void save_spec(const GameSpec& g, const std::string& path);

// Per-check outcome of the model assumptions. Failures are verdicts, not
// exceptions; the solver refuses to run on a failed rank or definiteness
// check.
struct ValidationReport {
  struct RankFailure {
    int stage = 0;
    int player = 0;
    int rank = 0;
    int expected = 0;
  };
  struct PdFailure {
    int stage = 0;
    int player = 0;
    double min_eig = 0.0;
  };

  bool constraint_rank_ok = true;    // every [N_k^i]_i has maximal rank
  bool control_cost_pd_ok = true;    // every R_k^{ii} positive definite
  bool admissible_set_checked = false; // boundedness probe ran at all
  bool admissible_set_bounded = false; // meaningful only when checked
  std::vector<RankFailure> rank_failures;
  std::vector<PdFailure> pd_failures;
  std::vector<std::string> notes;

  bool solve_admissible() const { return constraint_rank_ok && control_cost_pd_ok; }
};

// Checks rank of every own-control constraint block and positive definiteness
// of every R_k^{ii}. "Maximal rank" means rank == min(c_i, m_i); a block with
// more rows than own controls can still satisfy the constraint qualification
// on the rows active at a solution, and the reference game instance has
// c_i > m_i, so requiring full *row* rank would reject valid models. A note
// is recorded whenever c_i > m_i.
ValidationReport validate_assumption1(const GameSpec& g, double tol_pd = 1e-12,
                                      double tol_rank = 1e-10);

// A pure state constraint S x_k + s >= 0 to fold into the mixed form.
struct PureStateConstraint {
  int stage = 0;  // k >= 1: constrains x_k
  int player = 0;
  Matrix S;
  Vector s;
};

// Rewrites pure state constraints on x_k (k >= 1) as stage-(k-1) mixed
// constraints through the dynamics and appends them to the player's block.
// Constraints on x_0 are rejected: they restrict the initial-condition set,
// not the strategy space.
GameSpec reformulate_state_constraints(const GameSpec& g,
                                       const std::vector<PureStateConstraint>& pure);

struct FeasibilityReport {
  enum class Status { Feasible, Infeasible, Unknown };
  Status status = Status::Unknown;
  // One feasible joint profile (K stage vectors of size m) when Feasible.
  std::vector<Vector> feasible_point;
  enum class Boundedness { NotChecked, Bounded, Unbounded, Unknown };
  Boundedness boundedness = Boundedness::NotChecked;
  std::string detail;
};

// Decides feasibility of the joint admissible strategy set for g.x0 by a
// single convex program over the stacked controls. The boundedness probe
// (recession-direction search per coordinate, 2*K*m subproblems) is gated by
// the flag; it is expensive and rarely needed.
FeasibilityReport feasibility_probe(const GameSpec& g, bool probe_bounded = false);

} // namespace dgc
