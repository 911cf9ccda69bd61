#pragma once

#include "dgc/pipeline.hpp"
#include "dgc/report.hpp"
#include "dgc/riccati.hpp"
#include "dgc/types.hpp"

#include <cstdint>
#include <vector>

namespace dgc {

// Value certificate of one player against a fixed full profile: the affine
// recursions e_k, b_k, f_k below the quadratic term E_k, with
// V_k = 1/2 x'E_k x + e_k'x + f_k. eta/alpha hold the opponents' aggregate
// influence on dynamics and on the player's constraint rows.
struct CostCertificate {
  std::vector<Vector> e; // K+1 entries, n
  std::vector<Vector> b; // K+1 entries, m_i (b_K = 0)
  std::vector<double> f; // K+1 entries
  std::vector<Vector> eta;   // K entries, n
  std::vector<Vector> alpha; // K entries, c_i
  bool ok = false;           // false if some Y_k was unusable
};

// Runs the e/b/f backward recursions for `player` against the profile `u`
// (all players' controls; only opponents' components enter) with the fixed
// equilibrium multipliers `mu`.
CostCertificate build_cost_certificate(const GameSpec& g, const RiccatiE& re,
                                       int player, const std::vector<Vector>& u,
                                       const std::vector<Vector>& mu);

// Value V_k(x) of a certificate at a state.
double certificate_value(const GameSpec& g, const RiccatiE& re,
                         const CostCertificate& c, int player, int k,
                         const Vector& x);

struct VerifyOptions {
  double lcs_tol = 1e-6;          // residual families (absolute)
  double identity_rel_tol = 1e-8; // dual-route identities (relative)
  int probes = 20;
  std::uint64_t seed = 0;
};

// First-order (Pontryagin) residuals: forward equation, costate equation with
// its boundary condition, and the per-row complementarity triple, all in the
// original per-player variables.
ResidualReport check_lcs1(const GameSpec& g, const EquilibriumResult& res,
                          double tol);

// Derives the static-game tuple (e, b) from (x, lambda, mu), confirms the
// multiplier-consistency vector is zero, and evaluates every residual of the
// derived complementarity system plus the two equivalent control formulas.
ResidualReport check_lcs2_consistency(const GameSpec& g, const RiccatiE& re,
                                      const EquilibriumResult& res, double tol);

// Reconstructs costates from a consistent static-game tuple
// (lambda_k = E_k x_k + e_k) so the reverse direction of the equivalence can
// be exercised through check_lcs1.
std::vector<Vector> reconstruct_lambda_from_lcs2(const GameSpec& g,
                                                 const RiccatiE& re,
                                                 const EquilibriumResult& res);

// Dual-route cost evaluation on random feasible unilateral deviations:
// direct stage-additive cost versus the completed-square representation, and
// the equilibrium inequality J(deviation) >= J(equilibrium).
ResidualReport check_theorem1_identity(const GameSpec& g, const RiccatiE& re,
                                       const EquilibriumResult& res,
                                       const VerifyOptions& opts);

// Strongest single check available: with opponents fixed, minimize player i's
// exact quadratic cost over their own feasible set and report
// J_i(equilibrium) - J_i(best found). Exact active-set enumeration when the
// player's decision space is small enough, projected-gradient descent
// otherwise (result then marked non-exhaustive).
struct DeviationResult {
  double improvement = 0.0;
  // Worst violation of the player's own rows at the candidate itself; an
  // infeasible candidate is not an equilibrium no matter how cheap it is.
  double candidate_violation = 0.0;
  bool exhaustive = false;
  int iterations = 0;
};
DeviationResult check_deviation_qp(const GameSpec& g, const EquilibriumResult& res,
                                   int player, double tol,
                                   int max_iterations = 500);

// Equilibrium cost both ways: value-certificate form at x0 and the direct
// rollout, with their relative gap.
struct CostPair {
  std::vector<double> certificate;
  std::vector<double> rollout;
  double max_rel_gap = 0.0;
};
CostPair compute_costs(const GameSpec& g, const RiccatiE& re,
                       const EquilibriumResult& res);

// Runs every check family and merges the reports.
ResidualReport run_all_checks(const GameSpec& g, const RiccatiE& re,
                              const EquilibriumResult& res,
                              const VerifyOptions& opts);

std::string report_to_json(const ResidualReport& r);
std::string report_to_text(const ResidualReport& r);

} // namespace dgc
