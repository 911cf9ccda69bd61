#include "oracles.hpp"

#include <Eigen/LU>

#include <stdexcept>

namespace dgc::testing {

StackedCost build_stacked_cost(const GameSpec& g, int player) {
  const Dimensions& d = g.dims;
  const int K = d.horizon, n = d.state_dim, m = d.control_dim();
  const int dim = K * m;

  StackedCost sc;
  sc.H = Matrix::Zero(dim, dim);
  sc.grad0 = Vector::Zero(dim);
  sc.c0 = 0.0;

  Matrix X = Matrix::Zero(n, dim); // x_k = X u + xbar
  Vector xbar = g.dynamics.x0;
  for (int k = 0; k <= K; ++k) {
    const Matrix& Q = g.costs[player].Q[k];
    const Vector& p = g.costs[player].p[k];
    sc.H += X.transpose() * Q * X;
    sc.grad0 += X.transpose() * (Q * xbar + p);
    sc.c0 += 0.5 * xbar.dot(Q * xbar) + p.dot(xbar);
    if (k == K) break;
    for (int j = 0; j < d.num_players; ++j) {
      const int o = k * m + d.control_offset(j);
      sc.H.block(o, o, d.control_dims[j], d.control_dims[j]) += g.costs[player].R[k][j];
    }
    Matrix Xn = g.dynamics.A[k] * X;
    Xn.middleCols(k * m, m) += g.dynamics.joint_B(k);
    X = std::move(Xn);
    xbar = g.dynamics.A[k] * xbar;
  }
  sc.H = 0.5 * (sc.H + sc.H.transpose()).eval();
  return sc;
}

UnconstrainedNash unconstrained_olne(const GameSpec& g) {
  const Dimensions& d = g.dims;
  const int K = d.horizon, m = d.control_dim();
  const int dim = K * m;

  Matrix S = Matrix::Zero(dim, dim);
  Vector rhs = Vector::Zero(dim);
  for (int i = 0; i < d.num_players; ++i) {
    StackedCost sc = build_stacked_cost(g, i);
    for (int k = 0; k < K; ++k) {
      const int o = k * m + d.control_offset(i);
      for (int a = 0; a < d.control_dims[i]; ++a) {
        S.row(o + a) = sc.H.row(o + a);
        rhs(o + a) = -sc.grad0(o + a);
      }
    }
  }
  UnconstrainedNash out;
  Eigen::FullPivLU<Matrix> lu(S);
  if (!lu.isInvertible()) return out;
  Vector u = lu.solve(rhs);
  out.ok = true;
  out.u.resize(K);
  for (int k = 0; k < K; ++k) out.u[k] = u.segment(k * m, m);
  out.x = rollout(g, out.u);
  out.costs.resize(d.num_players);
  for (int i = 0; i < d.num_players; ++i) out.costs[i] = direct_cost(g, i, out.x, out.u);
  return out;
}

UnconstrainedNash lqr_reference(const GameSpec& g) {
  if (g.dims.num_players != 1)
    throw std::invalid_argument("lqr_reference needs a single-player game");
  const int K = g.dims.horizon, n = g.dims.state_dim, m = g.dims.control_dim();

  std::vector<Matrix> gain(K);
  std::vector<Vector> offset(K);
  Matrix P = g.costs[0].Q[K];
  Vector s = g.costs[0].p[K];
  for (int k = K - 1; k >= 0; --k) {
    const Matrix& A = g.dynamics.A[k];
    const Matrix B = g.dynamics.joint_B(k);
    Matrix Y = g.costs[0].R[k][0] + B.transpose() * P * B;
    Eigen::PartialPivLU<Matrix> lu(Y);
    gain[k] = lu.solve(B.transpose() * P * A);
    offset[k] = lu.solve(B.transpose() * s);
    Matrix Acl = A - B * gain[k];
    Vector s_prev = g.costs[0].p[k] + gain[k].transpose() * (g.costs[0].R[k][0] * offset[k]) -
                    Acl.transpose() * (P * (B * offset[k])) + Acl.transpose() * s;
    Matrix P_prev = g.costs[0].Q[k] + A.transpose() * P * A -
                    (B.transpose() * P * A).transpose() * gain[k];
    P = 0.5 * (P_prev + P_prev.transpose()).eval();
    s = std::move(s_prev);
  }

  UnconstrainedNash out;
  out.ok = true;
  out.u.resize(K);
  out.x.assign(K + 1, Vector::Zero(n));
  out.x[0] = g.dynamics.x0;
  for (int k = 0; k < K; ++k) {
    out.u[k] = Vector::Zero(m);
    out.u[k] = -(gain[k] * out.x[k] + offset[k]);
    out.x[k + 1] = g.dynamics.A[k] * out.x[k] + g.dynamics.joint_B(k) * out.u[k];
  }
  out.costs = {direct_cost(g, 0, out.x, out.u)};
  return out;
}

namespace {

// Controls satisfying the stationarity map for fixed multipliers: u solves
// u = -(R)^{-1}(B' lambda(u) - N' mu) with lambda integrated backward from
// the rollout of u. The map is affine in (u, mu); both pieces are recovered
// by probing.
Vector stationarity_rhs(const GameSpec& g, const Vector& u_stack, const Vector& mu_stack) {
  const Dimensions& d = g.dims;
  const int K = d.horizon, n = d.state_dim, m = d.control_dim(), c = d.constraint_dim();

  std::vector<Vector> u(K);
  for (int k = 0; k < K; ++k) u[k] = u_stack.segment(k * m, m);
  std::vector<Vector> x = rollout(g, u);

  Vector out(K * m);
  for (int i = 0; i < d.num_players; ++i) {
    Vector lam = g.costs[i].Q[K] * x[K] + g.costs[i].p[K];
    for (int k = K - 1; k >= 0; --k) {
      const Vector mui = mu_stack.segment(k * c + d.constraint_offset(i), d.constraint_dims[i]);
      Vector rhs = -g.costs[i].R[k][i].lu().solve(
          g.dynamics.B[k][i].transpose() * lam -
          g.constraint_N_block(k, i, i).transpose() * mui);
      out.segment(k * m + d.control_offset(i), d.control_dims[i]) = rhs;
      lam = g.costs[i].Q[k] * x[k] + g.costs[i].p[k] + g.dynamics.A[k].transpose() * lam -
            g.constraints[i].M[k].transpose() * mui;
    }
  }
  return out;
}

Vector constraint_stack(const GameSpec& g, const Vector& u_stack) {
  const Dimensions& d = g.dims;
  const int K = d.horizon, m = d.control_dim(), c = d.constraint_dim();
  std::vector<Vector> u(K);
  for (int k = 0; k < K; ++k) u[k] = u_stack.segment(k * m, m);
  std::vector<Vector> x = rollout(g, u);
  Vector vals(K * c);
  for (int k = 0; k < K; ++k) vals.segment(k * c, c) = g.constraint_values(k, x[k], u[k]);
  return vals;
}

} // namespace

AffineLcpMap dense_lcs1_map(const GameSpec& g) {
  const Dimensions& d = g.dims;
  const int K = d.horizon, m = d.control_dim(), c = d.constraint_dim();
  const int du = K * m, dmu = K * c;

  const Vector zero_mu = Vector::Zero(dmu);
  const Vector rhs0 = stationarity_rhs(g, Vector::Zero(du), zero_mu);
  Matrix L(du, du);
  for (int a = 0; a < du; ++a)
    L.col(a) = stationarity_rhs(g, Vector::Unit(du, a), zero_mu) - rhs0;
  Matrix T(du, dmu);
  for (int b = 0; b < dmu; ++b)
    T.col(b) = stationarity_rhs(g, Vector::Zero(du), Vector::Unit(dmu, b)) - rhs0;

  Eigen::PartialPivLU<Matrix> solver(Matrix::Identity(du, du) - L);
  Vector u0 = solver.solve(rhs0);

  AffineLcpMap map;
  map.P = u0;
  map.q = constraint_stack(g, u0);
  map.F.resize(du, dmu);
  map.M.resize(dmu, dmu);
  for (int b = 0; b < dmu; ++b) {
    Vector ub = solver.solve(rhs0 + T.col(b));
    map.F.col(b) = ub - u0;
    map.M.col(b) = constraint_stack(g, ub) - map.q;
  }
  return map;
}

GameSpec random_game(std::mt19937_64& rng, const RandomGameOptions& opts) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_real_distribution<double> unif01(0.0, 1.0);
  auto rand_matrix = [&](int r, int cc) {
    Matrix m(r, cc);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < cc; ++b) m(a, b) = unif(rng);
    return m;
  };

  GameSpec g;
  g.name = "random";
  g.dims.num_players = opts.num_players;
  g.dims.horizon = opts.horizon;
  g.dims.state_dim = opts.state_dim;
  g.dims.control_dims = opts.control_dims;
  g.dims.constraint_dims = opts.with_constraints
                               ? opts.constraint_dims
                               : std::vector<int>(opts.num_players, 0);

  const int N = g.dims.num_players, K = g.dims.horizon, n = g.dims.state_dim;
  const int m = g.dims.control_dim();

  g.dynamics.x0 = rand_matrix(n, 1);
  g.dynamics.A.resize(K);
  g.dynamics.B.resize(K);
  for (int k = 0; k < K; ++k) {
    g.dynamics.A[k] = rand_matrix(n, n) / std::sqrt(static_cast<double>(n));
    g.dynamics.B[k].resize(N);
    for (int i = 0; i < N; ++i) g.dynamics.B[k][i] = rand_matrix(n, g.dims.control_dims[i]);
  }

  g.costs.resize(N);
  for (int i = 0; i < N; ++i) {
    PlayerCost& pc = g.costs[i];
    pc.Q.resize(K + 1);
    pc.p.resize(K + 1);
    for (int k = 0; k <= K; ++k) {
      Matrix c = rand_matrix(n, n);
      pc.Q[k] = c.transpose() * c / n;
      pc.p[k] = opts.nonzero_p ? Vector(0.5 * rand_matrix(n, 1)) : Vector(Vector::Zero(n));
    }
    pc.R.assign(K, std::vector<Matrix>(N));
    for (int k = 0; k < K; ++k)
      for (int j = 0; j < N; ++j) {
        const int mi = g.dims.control_dims[i], mj = g.dims.control_dims[j];
        if (j == i) {
          Matrix c = rand_matrix(mi, mi);
          pc.R[k][j] = c.transpose() * c + 0.4 * Matrix::Identity(mi, mi);
        } else {
          pc.R[k][j] = 0.2 * rand_matrix(mi, mj);
        }
      }
  }

  // Anchor profile: constraints are generated to hold strictly at uhat, so
  // the admissible set is nonempty by construction.
  std::vector<Vector> uhat(K);
  for (int k = 0; k < K; ++k) uhat[k] = 0.5 * rand_matrix(m, 1);
  std::vector<Vector> xhat = rollout(g, uhat);

  g.constraints.resize(N);
  for (int i = 0; i < N; ++i) {
    PlayerConstraint& pc = g.constraints[i];
    const int ci = g.dims.constraint_dims[i];
    pc.M.resize(K);
    pc.N.resize(K);
    pc.r.resize(K);
    for (int k = 0; k < K; ++k) {
      pc.M[k] = rand_matrix(ci, n);
      pc.N[k] = rand_matrix(ci, m);
      Vector slack(ci);
      for (int a = 0; a < ci; ++a)
        slack(a) = opts.slack_low + (opts.slack_high - opts.slack_low) * unif01(rng);
      pc.r[k] = -(pc.M[k] * xhat[k] + pc.N[k] * uhat[k]) + slack;
    }
  }
  return g;
}

} // namespace dgc::testing
