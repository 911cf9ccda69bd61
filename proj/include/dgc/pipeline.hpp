#pragma once

#include "dgc/game_model.hpp"
#include "dgc/lcp.hpp"
#include "dgc/report.hpp"
#include "dgc/riccati.hpp"
#include "dgc/types.hpp"

#include <stdexcept>

namespace dgc {

// Per-stage operators of the multiplier-parametrized closed loop. All blocks
// are built by linear solves against factorized Lambda_k and R_k^{ii}.
// Indexing is by decision stage k; the trailing-index operators of the
// formulation (the ones applied to stage-(k+1) costates) live at slot k here.
struct StageOperators {
  // state update:      x_{k+1} = G[k] x_k + Gbar[k] zeta_{k+1} + Gtil[k] mu_k
  std::vector<Matrix> G;    // n x n
  std::vector<Matrix> Gbar; // n x N*n
  std::vector<Matrix> Gtil; // n x c
  // control synthesis: u_k = F[k] x_k + Fbar[k] zeta_{k+1} + Ftil[k] mu_k
  std::vector<Matrix> F;    // m x n
  std::vector<Matrix> Fbar; // m x N*n
  std::vector<Matrix> Ftil; // m x c
  // costate update:    zeta_k = H[k] zeta_{k+1} + Hbar[k] mu_k + p_k
  std::vector<Matrix> H;    // N*n x N*n
  std::vector<Matrix> Hbar; // N*n x c
};

// Materialized transition tables of the forward (state) and backward
// (costate) recursions, plus the mixed kernel used by the aggregation.
struct TransitionTables {
  int K = 0;
  int n = 0;
  int Nn = 0;

  // phi(k, tau) = G[k-1]...G[tau], identity at k == tau; 0 <= tau <= k <= K.
  Matrix phi(int k, int tau) const;
  // psi(k, tau) = H[k]...H[tau-1], identity at k == tau; 0 <= k <= tau <= K.
  Matrix psi(int k, int tau) const;
  // W(a, b) = sum_{rho=1..min(a,b)} phi(a, rho) Gbar[rho-1] psi(rho, b);
  // the zeta-through-state kernel, W(a, 0) = 0.
  Matrix W(int a, int b) const;

  std::vector<Matrix> phi_table; // (K+1)^2 entries, row-major (k, tau)
  std::vector<Matrix> psi_table;
  std::vector<Matrix> w_table;   // K x (K+1), index a*(K+1)+b
};

// The horizon-aggregated complementarity data and synthesis operator:
//   0 <= M_lcp mu + q(x0)  perp  mu >= 0,      u_stack = F_syn mu + P_x0.
// Block conventions are the canonical ones from types.hpp.
struct AssembledLcp {
  Matrix Phi0; // K*n x n
  Matrix Phi1; // K*n x K*N*n
  Matrix Phi2; // K*n x K*c
  Matrix Psi1; // K*N*n x K*N*n
  Matrix Psi2; // K*N*n x K*c
  Matrix M_lcp;  // K*c x K*c
  Vector q_x0;   // K*c
  Matrix F_syn;  // K*m x K*c
  Vector P_x0;   // K*m
  Vector p_stack; // col(p_1..p_K), K*N*n
  Vector r_stack; // col(r_0..r_{K-1}), K*c
};

StageOperators build_stage_operators(const GameSpec& g, const RiccatiP& rp);
TransitionTables build_transitions(const StageOperators& ops, int n, int Nn);
AssembledLcp assemble_lcp(const GameSpec& g, const StageOperators& ops,
                          const TransitionTables& tt, const Vector& x0);

enum class SolveStatus {
  Solved,
  GateFailed,          // an assumption verdict blocked the solve
  LcpUnsolved,         // Lemke did not return Solved
  VerificationFailed,  // solved but a residual family failed
};

const char* to_string(SolveStatus s);

struct EquilibriumResult {
  SolveStatus status = SolveStatus::GateFailed;
  std::string status_detail;

  std::vector<Vector> u;  // K joint controls (m)
  std::vector<Vector> x;  // K+1 states (n)
  std::vector<Vector> mu; // K joint multipliers (c)
  // lambda[k] and zeta[k] are the stacked N*n costate vectors, k in 0..K;
  // lambda_k^i = P_k^i x_k + zeta_k^i.
  std::vector<Vector> lambda;
  std::vector<Vector> zeta;

  std::vector<double> cost_certificate; // value-function form, per player
  std::vector<double> cost_rollout;     // direct stage-additive form
  double cost_gap = 0.0;                // max relative gap between the two

  LcpSolution lcp;
  bool lcp_ran = false; // false when c == 0 short-circuits the solve
  ResidualReport report;

  // Filled on LcpUnsolved so the instance can be replayed standalone.
  std::string lcp_replay;

  // Internal cross-check magnitudes (transition-form vs recursive rollout).
  double traj_crosscheck = 0.0;
  double zeta_crosscheck = 0.0;
};

struct SolveOptions {
  LemkeOptions lemke;
  RiccatiOptions riccati;
  double consistency_tol = 1e-8; // internal dual-route agreement
  double lcs_tol = 1e-6;         // residual-family tolerance
  double identity_rel_tol = 1e-8;
  int probes = 20;               // deviation probes per player in verify
  std::uint64_t seed = 0;
  bool run_verification = true;
};

// Full equilibrium computation: Riccati gates, stage operators, transition
// tables, LCP assembly and solve, strategy synthesis, costate recovery, and
// the verification report. Never throws on numerical failure; `status` says
// what happened. Throws only on malformed input.
EquilibriumResult solve_golne(const GameSpec& g, const SolveOptions& opts = {});

} // namespace dgc
