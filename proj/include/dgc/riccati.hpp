#pragma once

#include "dgc/types.hpp"

#include <vector>

namespace dgc {

// Per-player value recursion E_k^i with the control-weight matrices
// Y_k^i = R_k^{ii} + B_k^i' E_{k+1}^i B_k^i. E runs over trajectory stages
// 0..K, Y over decision stages 0..K-1.
struct RiccatiE {
  // E[i][k], k in 0..K; when player i's sweep failed, entries below
  // failing_stage[i] + 1 are zero placeholders.
  std::vector<std::vector<Matrix>> E;
  // Y[i][k], k in 0..K-1.
  std::vector<std::vector<Matrix>> Y;

  std::vector<bool> player_ok;       // sweep completed for player i
  std::vector<int> failing_stage;    // -1, or first k where Y_k^i was singular
  bool all_Y_invertible = false;
  bool all_Y_positive_definite = false;
  double min_eig_Y = 0.0;            // smallest eigenvalue seen over all k, i

  bool ok() const { return all_Y_invertible; }
};

// Coupled recursion P_k^i with the stage coupling matrices
// Lambda_k = I + sum_j B_k^j (R_k^{jj})^{-1} B_k^j' P_{k+1}^j.
struct RiccatiP {
  std::vector<std::vector<Matrix>> P;      // P[i][k], k in 0..K
  std::vector<Matrix> Lambda;              // Lambda[k], k in 0..K-1
  std::vector<bool> lambda_invertible;     // per stage
  std::vector<double> lambda_rcond;        // reciprocal condition estimate
  int failing_stage = -1;                  // first stage with singular Lambda
  bool all_lambda_invertible = false;
  // Worst relative asymmetry observed in the symmetrized P update; the
  // update formula is only symmetric up to the solution structure, so a
  // large value here is a model/assumption failure, not roundoff.
  double max_asymmetry = 0.0;

  bool ok() const { return all_lambda_invertible; }
};

struct RiccatiOptions {
  // Y_k^i / Lambda_k are treated as singular below this reciprocal condition
  // number.
  double rcond_min = 1e-12;
  double sym_tol = 1e-9;
};

// Backward sweep of the per-player value recursion from E_K^i = Q_K^i. Each
// stage is symmetrized; a singular Y_k^i stops player i's sweep and records
// the stage. Failures are verdicts for the solve gate, never exceptions.
RiccatiE solve_riccati_E(const GameSpec& g, const RiccatiOptions& opts = {});

// Backward sweep of the coupled recursion from P_K^i = Q_K^i. All inverse
// applications are linear solves against factorizations.
RiccatiP solve_riccati_P(const GameSpec& g, const RiccatiOptions& opts = {});

// CSV dump of one matrix sequence (rows = stage, row-major flattened
// columns), for the --dump-riccati debugging path.
void dump_matrix_sequence_csv(const std::vector<Matrix>& seq,
                              const std::string& path);

} // namespace dgc
