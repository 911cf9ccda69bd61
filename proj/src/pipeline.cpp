#include "dgc/pipeline.hpp"

#include "dgc/log.hpp"
#include "dgc/verify.hpp"

#include <Eigen/LU>

#include <cmath>
#include <sstream>

namespace dgc {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Solved: return "Solved";
    case SolveStatus::GateFailed: return "GateFailed";
    case SolveStatus::LcpUnsolved: return "LcpUnsolved";
    case SolveStatus::VerificationFailed: return "VerificationFailed";
  }
  return "?";
}

namespace {

[[noreturn]] void block_abort(const char* what, int k, int tau) {
  std::ostringstream os;
  os << "internal block shape failure in " << what << " at block (" << k << ", " << tau
     << ")";
  throw std::logic_error(os.str());
}

} // namespace

StageOperators build_stage_operators(const GameSpec& g, const RiccatiP& rp) {
  if (!rp.ok())
    throw std::logic_error("build_stage_operators: coupled Riccati verdict failed at stage " +
                           std::to_string(rp.failing_stage));
  const Dimensions& d = g.dims;
  const int N = d.num_players, K = d.horizon, n = d.state_dim;
  const int m = d.control_dim(), c = d.constraint_dim();
  const int Nn = N * n;

  StageOperators ops;
  ops.G.resize(K);
  ops.Gbar.assign(K, Matrix::Zero(n, Nn));
  ops.Gtil.assign(K, Matrix::Zero(n, c));
  ops.F.assign(K, Matrix::Zero(m, n));
  ops.Fbar.assign(K, Matrix::Zero(m, Nn));
  ops.Ftil.assign(K, Matrix::Zero(m, c));
  ops.H.assign(K, Matrix::Zero(Nn, Nn));
  ops.Hbar.assign(K, Matrix::Zero(Nn, c));

  for (int k = 0; k < K; ++k) {
    Eigen::PartialPivLU<Matrix> lam(rp.Lambda[k]);
    const Matrix& A = g.dynamics.A[k];
    ops.G[k] = lam.solve(A);

    // Per-player pieces entering every operator at this stage.
    std::vector<Matrix> BRinvBt(N), BRinvNt(N);
    for (int i = 0; i < N; ++i) {
      const Matrix& B = g.dynamics.B[k][i];
      Eigen::PartialPivLU<Matrix> R(g.costs[i].R[k][i]);
      BRinvBt[i] = B * R.solve(B.transpose());
      BRinvNt[i] = B * R.solve(g.constraint_N_block(k, i, i).transpose());
    }
    for (int i = 0; i < N; ++i) {
      ops.Gbar[k].middleCols(i * n, n) = -lam.solve(BRinvBt[i]);
      ops.Gtil[k].middleCols(d.constraint_offset(i), d.constraint_dims[i]) =
          lam.solve(BRinvNt[i]);
    }

    for (int i = 0; i < N; ++i) {
      const Matrix& B = g.dynamics.B[k][i];
      const Matrix& P = rp.P[i][k + 1];
      Eigen::PartialPivLU<Matrix> R(g.costs[i].R[k][i]);
      const int mo = d.control_offset(i), mi = d.control_dims[i];
      const int co = d.constraint_offset(i), ci = d.constraint_dims[i];

      // row block of I + P_stack Gbar for this player
      Matrix IplusPG = P * ops.Gbar[k];
      IplusPG.middleCols(i * n, n) += Matrix::Identity(n, n);

      ops.F[k].middleRows(mo, mi) = -R.solve(B.transpose() * P * ops.G[k]);
      ops.Fbar[k].middleRows(mo, mi) = -R.solve(B.transpose() * IplusPG);
      Matrix Ntil = -B.transpose() * P * ops.Gtil[k]; // m_i x c
      Ntil.middleCols(co, ci) += g.constraint_N_block(k, i, i).transpose();
      ops.Ftil[k].middleRows(mo, mi) = R.solve(Ntil);

      ops.H[k].middleRows(i * n, n) = A.transpose() * IplusPG;
      Matrix hb = A.transpose() * P * ops.Gtil[k];
      hb.middleCols(co, ci) -= g.constraints[i].M[k].transpose();
      ops.Hbar[k].middleRows(i * n, n) = hb;
    }
  }
  return ops;
}

Matrix TransitionTables::phi(int k, int tau) const {
  if (tau > k || k < 0 || k > K) block_abort("phi", k, tau);
  return phi_table[k * (K + 1) + tau];
}

Matrix TransitionTables::psi(int k, int tau) const {
  if (tau < k || tau > K || k < 0) block_abort("psi", k, tau);
  return psi_table[k * (K + 1) + tau];
}

Matrix TransitionTables::W(int a, int b) const {
  if (a < 0 || a >= K || b < 0 || b > K) block_abort("W", a, b);
  return w_table[a * (K + 1) + b];
}

TransitionTables build_transitions(const StageOperators& ops, int n, int Nn) {
  TransitionTables tt;
  tt.K = static_cast<int>(ops.G.size());
  tt.n = n;
  tt.Nn = Nn;
  const int K = tt.K;

  tt.phi_table.assign((K + 1) * (K + 1), Matrix());
  tt.psi_table.assign((K + 1) * (K + 1), Matrix());
  tt.w_table.assign(K * (K + 1), Matrix());

  for (int k = 0; k <= K; ++k) {
    tt.phi_table[k * (K + 1) + k] = Matrix::Identity(n, n);
    for (int tau = k - 1; tau >= 0; --tau)
      tt.phi_table[k * (K + 1) + tau] =
          tt.phi_table[k * (K + 1) + tau + 1] * ops.G[tau];
  }
  for (int k = 0; k <= K; ++k) {
    tt.psi_table[k * (K + 1) + k] = Matrix::Identity(Nn, Nn);
    for (int tau = k + 1; tau <= K; ++tau)
      tt.psi_table[k * (K + 1) + tau] =
          tt.psi_table[k * (K + 1) + tau - 1] * ops.H[tau - 1];
  }
  // W(a, b) = sum_{rho<=min(a,b)} phi(a,rho) Gbar[rho-1] psi(rho,b), built by
  // extending the psi product one stage at a time.
  for (int a = 0; a < K; ++a) {
    tt.w_table[a * (K + 1) + 0] = Matrix::Zero(n, Nn);
    for (int b = 1; b <= K; ++b) {
      Matrix w = tt.w_table[a * (K + 1) + b - 1] * ops.H[b - 1];
      if (b <= a) w += tt.phi(a, b) * ops.Gbar[b - 1];
      tt.w_table[a * (K + 1) + b] = std::move(w);
    }
  }
  return tt;
}

AssembledLcp assemble_lcp(const GameSpec& g, const StageOperators& ops,
                          const TransitionTables& tt, const Vector& x0) {
  const Dimensions& d = g.dims;
  const int N = d.num_players, K = d.horizon, n = d.state_dim;
  const int m = d.control_dim(), c = d.constraint_dim();
  const int Nn = N * n;
  if (tt.K != K) block_abort("assemble_lcp/transitions", tt.K, K);

  AssembledLcp out;
  out.Phi0.setZero(K * n, n);
  out.Phi1.setZero(K * n, K * Nn);
  out.Phi2.setZero(K * n, K * c);
  out.Psi1.setZero(K * Nn, K * Nn);
  out.Psi2.setZero(K * Nn, K * c);

  // Block row kb carries x_kb (states) / zeta_{kb+1} (costates); block column
  // tb carries p_{tb+1} for Phi1/Psi1 and mu_tb for Phi2/Psi2.
  for (int kb = 0; kb < K; ++kb) {
    out.Phi0.middleRows(kb * n, n) = tt.phi(kb, 0);
    for (int tb = 0; tb < K; ++tb) {
      if (kb >= 1)
        out.Phi1.block(kb * n, tb * Nn, n, Nn) = tt.W(kb, tb + 1);
      if (kb >= 1) {
        Matrix blk = tt.W(kb, tb) * ops.Hbar[tb];
        if (tb < kb) blk += tt.phi(kb, tb + 1) * ops.Gtil[tb];
        out.Phi2.block(kb * n, tb * c, n, c) = blk;
      }
      if (tb >= kb)
        out.Psi1.block(kb * Nn, tb * Nn, Nn, Nn) = tt.psi(kb + 1, tb + 1);
      if (tb >= kb + 1)
        out.Psi2.block(kb * Nn, tb * c, Nn, c) = tt.psi(kb + 1, tb) * ops.Hbar[tb];
    }
  }

  out.p_stack.resize(K * Nn);
  out.r_stack.resize(K * c);
  for (int k = 0; k < K; ++k) {
    out.p_stack.segment(k * Nn, Nn) = g.stacked_p(k + 1);
    out.r_stack.segment(k * c, c) = g.stacked_r(k);
  }

  out.M_lcp.setZero(K * c, K * c);
  out.q_x0.setZero(K * c);
  out.F_syn.setZero(K * m, K * c);
  out.P_x0.setZero(K * m);
  for (int s = 0; s < K; ++s) {
    const Matrix Ms = g.stacked_M(s) + g.stacked_N(s) * ops.F[s]; // c x n
    const Matrix Ns = g.stacked_N(s) * ops.Fbar[s];               // c x Nn
    const auto phi2_row = out.Phi2.middleRows(s * n, n);
    const auto psi2_row = out.Psi2.middleRows(s * Nn, Nn);

    out.M_lcp.middleRows(s * c, c) = Ms * phi2_row + Ns * psi2_row;
    out.M_lcp.block(s * c, s * c, c, c) += g.stacked_N(s) * ops.Ftil[s];
    out.q_x0.segment(s * c, c) =
        Ms * (out.Phi0.middleRows(s * n, n) * x0) +
        Ms * (out.Phi1.middleRows(s * n, n) * out.p_stack) +
        Ns * (out.Psi1.middleRows(s * Nn, Nn) * out.p_stack) +
        out.r_stack.segment(s * c, c);

    out.F_syn.middleRows(s * m, m) = ops.F[s] * phi2_row + ops.Fbar[s] * psi2_row;
    out.F_syn.block(s * m, s * c, m, c) += ops.Ftil[s];
    out.P_x0.segment(s * m, m) =
        ops.F[s] * (out.Phi0.middleRows(s * n, n) * x0) +
        ops.F[s] * (out.Phi1.middleRows(s * n, n) * out.p_stack) +
        ops.Fbar[s] * (out.Psi1.middleRows(s * Nn, Nn) * out.p_stack);
  }
  return out;
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

// Backward costate-offset recursion driven by the solved multipliers; the
// shared coupling term is resolved once per stage.
std::vector<Vector> zeta_recursion(const GameSpec& g, const RiccatiP& rp,
                                   const std::vector<Vector>& mu) {
  const Dimensions& d = g.dims;
  const int N = d.num_players, K = d.horizon, n = d.state_dim;
  std::vector<Vector> zeta(K + 1, Vector::Zero(N * n));
  zeta[K] = g.stacked_p(K);
  for (int k = K - 1; k >= 0; --k) {
    Vector coupling = Vector::Zero(n);
    for (int j = 0; j < N; ++j) {
      const Matrix& B = g.dynamics.B[k][j];
      Vector inner = B.transpose() * zeta[k + 1].segment(j * n, n) -
                     g.constraint_N_block(k, j, j).transpose() *
                         mu[k].segment(d.constraint_offset(j), d.constraint_dims[j]);
      coupling += B * g.costs[j].R[k][j].lu().solve(inner);
    }
    Vector lam_coupling = rp.Lambda[k].lu().solve(coupling);
    for (int i = 0; i < N; ++i) {
      zeta[k].segment(i * n, n) =
          g.dynamics.A[k].transpose() *
              (zeta[k + 1].segment(i * n, n) - rp.P[i][k + 1] * lam_coupling) -
          g.constraints[i].M[k].transpose() *
              mu[k].segment(d.constraint_offset(i), d.constraint_dims[i]) +
          g.costs[i].p[k];
    }
  }
  return zeta;
}

} // namespace

EquilibriumResult solve_golne(const GameSpec& g, const SolveOptions& opts) {
  const Dimensions& d = g.dims;
  const int N = d.num_players, K = d.horizon, n = d.state_dim;
  const int m = d.control_dim(), c = d.constraint_dim();

  EquilibriumResult res;

  ValidationReport val = validate_assumption1(g);
  if (!val.solve_admissible()) {
    res.status = SolveStatus::GateFailed;
    res.status_detail = !val.constraint_rank_ok
                            ? "constraint rank verdict failed"
                            : "control cost definiteness verdict failed";
    return res;
  }

  RiccatiE re = solve_riccati_E(g, opts.riccati);
  if (!re.all_Y_invertible || !re.all_Y_positive_definite) {
    res.status = SolveStatus::GateFailed;
    res.status_detail = "value recursion verdict failed (min eig Y = " +
                        std::to_string(re.min_eig_Y) + ")";
    return res;
  }
  RiccatiP rp = solve_riccati_P(g, opts.riccati);
  if (!rp.ok()) {
    res.status = SolveStatus::GateFailed;
    res.status_detail =
        "stage coupling matrix singular at stage " + std::to_string(rp.failing_stage);
    return res;
  }

  StageOperators ops = build_stage_operators(g, rp);
  TransitionTables tt = build_transitions(ops, n, N * n);
  AssembledLcp asm_lcp = assemble_lcp(g, ops, tt, g.dynamics.x0);

  Vector mu_stack = Vector::Zero(K * c);
  if (c > 0) {
    LcpInstance inst{asm_lcp.M_lcp, asm_lcp.q_x0};
    res.lcp = lemke_solve(inst, opts.lemke);
    res.lcp_ran = true;
    if (res.lcp.status != LcpStatus::Solved &&
        res.lcp.status != LcpStatus::TrivialQNonneg) {
      res.status = SolveStatus::LcpUnsolved;
      res.status_detail = std::string("complementarity solve ended with ") +
                          to_string(res.lcp.status);
      std::string spec_json = spec_to_json(g);
      std::ostringstream hash;
      hash << "# spec " << (g.name.empty() ? "unnamed" : g.name) << " hash " << std::hex
           << fnv1a(spec_json) << "\n";
      res.lcp_replay = hash.str() + to_replay_text(inst);
      return res;
    }
    mu_stack = res.lcp.z;
  }

  res.mu.resize(K);
  for (int k = 0; k < K; ++k) res.mu[k] = mu_stack.segment(k * c, c);

  // Strategy synthesis from the aggregated map, then the raw rollout.
  Vector u_stack = asm_lcp.F_syn * mu_stack + asm_lcp.P_x0;
  res.u.resize(K);
  for (int k = 0; k < K; ++k) res.u[k] = u_stack.segment(k * m, m);
  res.x = rollout(g, res.u);

  res.zeta = zeta_recursion(g, rp, res.mu);

  // Dual-route agreement: the aggregated tables must reproduce the recursion
  // rollouts. A gap here is an assembly bug, not a model property.
  Vector x_stack_agg = asm_lcp.Phi0 * g.dynamics.x0 + asm_lcp.Phi1 * asm_lcp.p_stack +
                       asm_lcp.Phi2 * mu_stack;
  Vector zeta_stack_agg = asm_lcp.Psi1 * asm_lcp.p_stack + asm_lcp.Psi2 * mu_stack;
  res.traj_crosscheck = 0.0;
  res.zeta_crosscheck = 0.0;
  for (int k = 0; k < K; ++k) {
    res.traj_crosscheck =
        std::max(res.traj_crosscheck,
                 (x_stack_agg.segment(k * n, n) - res.x[k]).cwiseAbs().maxCoeff());
    res.zeta_crosscheck =
        std::max(res.zeta_crosscheck, (zeta_stack_agg.segment(k * N * n, N * n) -
                                       res.zeta[k + 1])
                                          .cwiseAbs()
                                          .maxCoeff());
  }

  res.lambda.resize(K + 1);
  for (int k = 0; k <= K; ++k) {
    res.lambda[k] = Vector::Zero(N * n);
    for (int i = 0; i < N; ++i)
      res.lambda[k].segment(i * n, n) = rp.P[i][k] * res.x[k] + res.zeta[k].segment(i * n, n);
  }

  CostPair costs = compute_costs(g, re, res);
  res.cost_certificate = costs.certificate;
  res.cost_rollout = costs.rollout;
  res.cost_gap = costs.max_rel_gap;

  res.status = SolveStatus::Solved;
  if (opts.run_verification) {
    VerifyOptions vo;
    vo.lcs_tol = opts.lcs_tol;
    vo.identity_rel_tol = opts.identity_rel_tol;
    vo.probes = opts.probes;
    vo.seed = opts.seed;
    res.report = run_all_checks(g, re, res, vo);

    ResidualFamily cross;
    cross.name = "aggregation_crosscheck";
    cross.tolerance = opts.consistency_tol;
    cross.absorb(res.traj_crosscheck, -1, -1);
    cross.absorb(res.zeta_crosscheck, -1, -1);
    res.report.families.push_back(cross);

    if (!res.report.all_pass()) {
      res.status = SolveStatus::VerificationFailed;
      std::ostringstream os;
      os << "failing families:";
      for (const auto& f : res.report.failing_families()) os << " " << f;
      res.status_detail = os.str();
    }
  }
  return res;
}

} // namespace dgc
