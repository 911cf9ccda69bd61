#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace dgc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Problem sizes. Stages run 0..K with decisions taken at 0..K-1; we write
// "decision stage" for k in [0, K) and "trajectory stage" for k in [0, K].
struct Dimensions {
  int num_players = 0;              // N
  int horizon = 0;                  // K
  int state_dim = 0;                // n
  std::vector<int> control_dims;    // m_i, one per player
  std::vector<int> constraint_dims; // c_i, one per player

  int control_dim() const;    // m = sum m_i
  int constraint_dim() const; // c = sum c_i
  int control_offset(int player) const;
  int constraint_offset(int player) const;

  bool operator==(const Dimensions&) const = default;
};

// ---------------------------------------------------------------------------
// Canonical stacking/index conventions, used by every stacked quantity in the
// library. Nothing else is allowed to define its own ordering.
//
//   joint control     u_k   = col(u_k^1, ..., u_k^N)            (m-vector)
//   joint multiplier  mu_k  = col(mu_k^1, ..., mu_k^N)          (c-vector)
//   stacked costate   zeta_k = col(zeta_k^1, ..., zeta_k^N)     (N*n-vector)
//
//   horizon stacks (stage-major, player-minor within a stage, row-minor
//   within a player):
//     u_stack  = col(u_0, ..., u_{K-1})        K*m
//     mu_stack = col(mu_0, ..., mu_{K-1})      K*c
//     x_stack  = col(x_0, ..., x_{K-1})        K*n   (x_K excluded)
//     p_stack  = col(p_1, ..., p_K)            K*N*n (p_0 never enters)
//     zeta_stack = col(zeta_1, ..., zeta_K)    K*N*n
//
// Flat indices below are the single source of truth for the maps
// stage x player x row -> index used by the assembled LCP and synthesis map.
// ---------------------------------------------------------------------------
inline int flat_control_index(const Dimensions& d, int k, int player, int comp) {
  return k * d.control_dim() + d.control_offset(player) + comp;
}
inline int flat_multiplier_index(const Dimensions& d, int k, int player, int row) {
  return k * d.constraint_dim() + d.constraint_offset(player) + row;
}

struct StageDynamics {
  std::vector<Matrix> A;              // K matrices, n x n
  std::vector<std::vector<Matrix>> B; // B[k][i], n x m_i
  Vector x0;                          // n

  // [B_k^1, ..., B_k^N], n x m
  Matrix joint_B(int k) const;
};

// Cost data of one player. Q and p have K+1 entries (terminal included);
// R has K entries, R[k][j] is m_i x m_j against player j's controls.
struct PlayerCost {
  std::vector<Matrix> Q;
  std::vector<Vector> p;
  std::vector<std::vector<Matrix>> R;
};

// Constraint block of one player: M_k x_k + N_k u_k + r_k >= 0 with N_k
// carrying all players' control columns.
struct PlayerConstraint {
  std::vector<Matrix> M; // K matrices, c_i x n
  std::vector<Matrix> N; // K matrices, c_i x m
  std::vector<Vector> r; // K vectors, c_i
};

// A fully expanded game instance. Immutable after load; all per-stage data is
// materialized (no broadcast placeholders survive loading).
struct GameSpec {
  std::string name;
  std::string description;
  Dimensions dims;
  StageDynamics dynamics;
  std::vector<PlayerCost> costs;
  std::vector<PlayerConstraint> constraints;

  // [N_k^i]_j: player i's constraint columns against player j's controls.
  Matrix constraint_N_block(int k, int i, int j) const;

  // Stacked per-stage forms over players: col_i(M_k^i), col_i(N_k^i),
  // col_i(r_k^i).
  Matrix stacked_M(int k) const;
  Matrix stacked_N(int k) const;
  Vector stacked_r(int k) const;

  // col_i(p_k^i), the N*n stacked linear cost term.
  Vector stacked_p(int k) const;

  // Constraint values col_i(M_k^i x + N_k^i u + r_k^i) at one stage.
  Vector constraint_values(int k, const Vector& x, const Vector& u) const;
};

// A full strategy profile plus its rollout, the common currency between the
// pipeline and the verification checks.
struct Trajectory {
  std::vector<Vector> x; // K+1 states
  std::vector<Vector> u; // K joint controls
};

// Rolls the dynamics forward under a joint control sequence.
std::vector<Vector> rollout(const GameSpec& g, const std::vector<Vector>& u);

// Direct evaluation of player i's cost functional on a rollout
// (compensated summation; the horizon can be long and discounted).
double direct_cost(const GameSpec& g, int player, const std::vector<Vector>& x,
                   const std::vector<Vector>& u);

} // namespace dgc
