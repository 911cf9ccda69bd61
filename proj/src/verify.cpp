#include "dgc/verify.hpp"

#include "dgc/lcp.hpp"
#include "dgc/log.hpp"

#include <json.hpp>

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace dgc {

namespace {

Vector player_seg_u(const GameSpec& g, const Vector& u_k, int i) {
  return u_k.segment(g.dims.control_offset(i), g.dims.control_dims[i]);
}

Vector player_seg_mu(const GameSpec& g, const Vector& mu_k, int i) {
  return mu_k.segment(g.dims.constraint_offset(i), g.dims.constraint_dims[i]);
}

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

} // namespace

CostCertificate build_cost_certificate(const GameSpec& g, const RiccatiE& re,
                                       int player, const std::vector<Vector>& u,
                                       const std::vector<Vector>& mu) {
  const Dimensions& d = g.dims;
  const int K = d.horizon, n = d.state_dim;
  const int mi = d.control_dims[player];
  const int i = player;

  CostCertificate c;
  c.ok = re.player_ok[i];
  c.e.assign(K + 1, Vector::Zero(n));
  c.b.assign(K + 1, Vector::Zero(mi));
  c.f.assign(K + 1, 0.0);
  c.eta.assign(K, Vector::Zero(n));
  c.alpha.assign(K, Vector::Zero(d.constraint_dims[i]));
  if (!c.ok) return c;

  c.e[K] = g.costs[i].p[K];
  for (int k = K - 1; k >= 0; --k) {
    const Matrix& A = g.dynamics.A[k];
    const Matrix& B = g.dynamics.B[k][i];
    const Matrix& En = re.E[i][k + 1];
    const Matrix Nown = g.constraint_N_block(k, i, i);
    const Vector mui = player_seg_mu(g, mu[k], i);

    Vector eta = Vector::Zero(n);
    Vector alpha = Vector::Zero(d.constraint_dims[i]);
    for (int j = 0; j < d.num_players; ++j) {
      if (j == i) continue;
      const Vector uj = player_seg_u(g, u[k], j);
      eta += g.dynamics.B[k][j] * uj;
      alpha += g.constraint_N_block(k, i, j) * uj;
    }
    c.eta[k] = eta;
    c.alpha[k] = alpha;

    c.b[k] = re.Y[i][k].lu().solve(B.transpose() * (En * eta + c.e[k + 1]) -
                                   Nown.transpose() * mui);
    c.e[k] = A.transpose() * c.e[k + 1] + A.transpose() * (En * eta) -
             A.transpose() * (En * (B * c.b[k])) + g.costs[i].p[k] -
             g.constraints[i].M[k].transpose() * mui;

    double cross = 0.0;
    for (int j = 0; j < d.num_players; ++j) {
      if (j == i) continue;
      const Vector uj = player_seg_u(g, u[k], j);
      cross += uj.dot(g.costs[i].R[k][j] * uj);
    }
    c.f[k] = c.f[k + 1] + 0.5 * eta.dot(En * eta + 2.0 * c.e[k + 1]) + 0.5 * cross -
             0.5 * c.b[k].dot(re.Y[i][k] * c.b[k]) - mui.dot(alpha + g.constraints[i].r[k]);
  }
  return c;
}

double certificate_value(const GameSpec& g, const RiccatiE& re, const CostCertificate& c,
                         int player, int k, const Vector& x) {
  (void)g;
  return 0.5 * x.dot(re.E[player][k] * x) + c.e[k].dot(x) + c.f[k];
}

ResidualReport check_lcs1(const GameSpec& g, const EquilibriumResult& res, double tol) {
  const Dimensions& d = g.dims;
  const int N = d.num_players, K = d.horizon, n = d.state_dim;

  ResidualReport rep;
  ResidualFamily f_state{"lcs1_state", 0, tol, true, -1, -1};
  ResidualFamily f_costate{"lcs1_costate", 0, tol, true, -1, -1};
  ResidualFamily f_slack{"lcs1_comp_slack", 0, tol, true, -1, -1};
  ResidualFamily f_mu{"lcs1_comp_mu", 0, tol, true, -1, -1};
  ResidualFamily f_prod{"lcs1_comp_product", 0, tol, true, -1, -1};

  for (int k = 0; k < K; ++k) {
    // t_j reproduces -u_k^j from the costates and multipliers alone.
    std::vector<Vector> t(N);
    for (int j = 0; j < N; ++j) {
      const Matrix& B = g.dynamics.B[k][j];
      t[j] = g.costs[j].R[k][j].lu().solve(
          B.transpose() * res.lambda[k + 1].segment(j * n, n) -
          g.constraint_N_block(k, j, j).transpose() * player_seg_mu(g, res.mu[k], j));
    }
    Vector xnext = g.dynamics.A[k] * res.x[k];
    for (int j = 0; j < N; ++j) xnext -= g.dynamics.B[k][j] * t[j];
    f_state.absorb(inf_norm(res.x[k + 1] - xnext), k, -1);

    for (int i = 0; i < N; ++i) {
      Vector lam_k = g.costs[i].Q[k] * res.x[k] + g.costs[i].p[k] +
                     g.dynamics.A[k].transpose() * res.lambda[k + 1].segment(i * n, n) -
                     g.constraints[i].M[k].transpose() * player_seg_mu(g, res.mu[k], i);
      f_costate.absorb(inf_norm(res.lambda[k].segment(i * n, n) - lam_k), k, i);

      Vector slack = g.constraints[i].M[k] * res.x[k] + g.constraints[i].r[k];
      for (int j = 0; j < N; ++j) slack -= g.constraint_N_block(k, i, j) * t[j];
      const Vector mui = player_seg_mu(g, res.mu[k], i);
      if (slack.size() > 0) {
        f_slack.absorb(std::max(0.0, -slack.minCoeff()), k, i);
        f_mu.absorb(std::max(0.0, -mui.minCoeff()), k, i);
        f_prod.absorb(inf_norm(mui.cwiseProduct(slack)), k, i);
      }
    }
  }
  for (int i = 0; i < N; ++i) {
    Vector lam_K = g.costs[i].Q[K] * res.x[K] + g.costs[i].p[K];
    f_costate.absorb(inf_norm(res.lambda[K].segment(i * n, n) - lam_K), K, i);
  }
  rep.families = {f_state, f_costate, f_slack, f_mu, f_prod};
  return rep;
}

ResidualReport check_lcs2_consistency(const GameSpec& g, const RiccatiE& re,
                                      const EquilibriumResult& res, double tol) {
  const Dimensions& d = g.dims;
  const int N = d.num_players, K = d.horizon, n = d.state_dim;

  ResidualReport rep;
  ResidualFamily f_state{"lcs2_state", 0, tol, true, -1, -1};
  ResidualFamily f_costate{"lcs2_costate", 0, tol, true, -1, -1};
  ResidualFamily f_slack{"lcs2_comp_slack", 0, tol, true, -1, -1};
  ResidualFamily f_prod{"lcs2_comp_product", 0, tol, true, -1, -1};
  ResidualFamily f_b{"lcs2_b", 0, tol, true, -1, -1};
  ResidualFamily f_beta{"lcs2_beta", 0, tol, true, -1, -1};
  ResidualFamily f_ctrl{"control_equivalence", 0, tol, true, -1, -1};

  for (int i = 0; i < N; ++i) {
    // Static-game tuple derived from the first-order solution.
    std::vector<Vector> e(K + 1), b(K);
    for (int k = 0; k <= K; ++k)
      e[k] = res.lambda[k].segment(i * n, n) - re.E[i][k] * res.x[k];

    for (int k = K - 1; k >= 0; --k) {
      const Matrix& A = g.dynamics.A[k];
      const Matrix& B = g.dynamics.B[k][i];
      const Matrix& En = re.E[i][k + 1];
      const Matrix Nown = g.constraint_N_block(k, i, i);
      const Vector mui = player_seg_mu(g, res.mu[k], i);

      Vector eta_bar = Vector::Zero(n);
      Vector alpha_bar = Vector::Zero(d.constraint_dims[i]);
      for (int j = 0; j < N; ++j) {
        if (j == i) continue;
        const Vector uj = player_seg_u(g, res.u[k], j);
        eta_bar += g.dynamics.B[k][j] * uj;
        alpha_bar += g.constraint_N_block(k, i, j) * uj;
      }

      Vector rhs_b = B.transpose() * (En * eta_bar + e[k + 1]) - Nown.transpose() * mui;
      b[k] = re.Y[i][k].lu().solve(rhs_b);
      f_b.absorb(inf_norm(re.Y[i][k] * b[k] - rhs_b), k, i);

      // multiplier-consistency vector: identically zero when the parameter
      // multipliers equal the solution multipliers
      Vector beta = Nown.transpose() * (mui - mui);
      if (k + 1 < K)
        beta += B.transpose() * g.constraints[i].M[k + 1].transpose() *
                (player_seg_mu(g, res.mu[k + 1], i) - player_seg_mu(g, res.mu[k + 1], i));
      Matrix prop = B;
      for (int tau = k + 2; tau < K; ++tau) {
        prop = g.dynamics.A[tau - 1] * prop;
        beta += prop.transpose() * g.constraints[i].M[tau].transpose() *
                (player_seg_mu(g, res.mu[tau], i) - player_seg_mu(g, res.mu[tau], i));
      }
      f_beta.absorb(inf_norm(beta), k, i);

      Matrix YinvBtEA = re.Y[i][k].lu().solve(B.transpose() * En * A);
      Vector xnext = (A - B * YinvBtEA) * res.x[k] - B * b[k] + eta_bar;
      f_state.absorb(inf_norm(res.x[k + 1] - xnext), k, i);

      Vector e_rhs = A.transpose() * e[k + 1] + A.transpose() * (En * eta_bar) -
                     A.transpose() * (En * (B * b[k])) + g.costs[i].p[k] -
                     g.constraints[i].M[k].transpose() * mui;
      f_costate.absorb(inf_norm(e[k] - e_rhs), k, i);

      Vector slack = (g.constraints[i].M[k] - Nown * YinvBtEA) * res.x[k] - Nown * b[k] +
                     alpha_bar + g.constraints[i].r[k];
      if (slack.size() > 0) {
        f_slack.absorb(std::max(0.0, -slack.minCoeff()), k, i);
        f_prod.absorb(inf_norm(mui.cwiseProduct(slack)), k, i);
      }

      // Both control syntheses must reproduce the stored controls.
      const Vector ui = player_seg_u(g, res.u[k], i);
      Vector u_first_order = -g.costs[i].R[k][i].lu().solve(
          B.transpose() * res.lambda[k + 1].segment(i * n, n) - Nown.transpose() * mui);
      Vector u_static = -(YinvBtEA * res.x[k] + b[k]);
      f_ctrl.absorb(inf_norm(ui - u_first_order), k, i);
      f_ctrl.absorb(inf_norm(ui - u_static), k, i);
    }
  }
  rep.families = {f_state, f_costate, f_slack, f_prod, f_b, f_beta, f_ctrl};
  return rep;
}

std::vector<Vector> reconstruct_lambda_from_lcs2(const GameSpec& g, const RiccatiE& re,
                                                 const EquilibriumResult& res) {
  const Dimensions& d = g.dims;
  const int N = d.num_players, K = d.horizon, n = d.state_dim;
  std::vector<Vector> lambda(K + 1, Vector::Zero(N * n));
  for (int i = 0; i < N; ++i) {
    // e from the forward construction, lambda back from e.
    for (int k = 0; k <= K; ++k) {
      Vector e_k = res.lambda[k].segment(i * n, n) - re.E[i][k] * res.x[k];
      lambda[k].segment(i * n, n) = re.E[i][k] * res.x[k] + e_k;
    }
  }
  return lambda;
}

namespace {

// Player i's own constraint rows evaluated on a full profile.
double min_own_row_value(const GameSpec& g, int i, const std::vector<Vector>& x,
                         const std::vector<Vector>& u) {
  double mn = std::numeric_limits<double>::infinity();
  for (int k = 0; k < g.dims.horizon; ++k) {
    Vector v = g.constraints[i].M[k] * x[k] + g.constraints[i].N[k] * u[k] +
               g.constraints[i].r[k];
    if (v.size() > 0) mn = std::min(mn, v.minCoeff());
  }
  return std::isfinite(mn) ? mn : 0.0;
}

} // namespace

ResidualReport check_theorem1_identity(const GameSpec& g, const RiccatiE& re,
                                       const EquilibriumResult& res,
                                       const VerifyOptions& opts) {
  const Dimensions& d = g.dims;
  const int N = d.num_players, K = d.horizon;

  ResidualReport rep;
  ResidualFamily f_eq{"theorem1_equilibrium_value", 0, opts.identity_rel_tol, true, -1, -1};
  ResidualFamily f_id{"theorem1_identity", 0, opts.identity_rel_tol, true, -1, -1};
  ResidualFamily f_nash{"nash_inequality", 0, 1e-8, true, -1, -1};

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  auto representation_cost = [&](int i, const std::vector<Vector>& u,
                                 const std::vector<Vector>& x) {
    CostCertificate cert = build_cost_certificate(g, re, i, u, res.mu);
    double J = certificate_value(g, re, cert, i, 0, x[0]);
    double quad = 0.0, lin = 0.0;
    for (int k = 0; k < K; ++k) {
      const Vector ui = player_seg_u(g, u[k], i);
      Vector y = re.Y[i][k].lu().solve(g.dynamics.B[k][i].transpose() *
                                       (re.E[i][k + 1] * (g.dynamics.A[k] * x[k]))) +
                 cert.b[k];
      quad += 0.5 * (ui + y).dot(re.Y[i][k] * (ui + y));
      Vector rows = g.constraints[i].M[k] * x[k] +
                    g.constraint_N_block(k, i, i) * ui + cert.alpha[k] +
                    g.constraints[i].r[k];
      lin += player_seg_mu(g, res.mu[k], i).dot(rows);
    }
    return J + quad + lin;
  };

  for (int i = 0; i < N; ++i) {
    const double J_star = direct_cost(g, i, res.x, res.u);
    // the zero deviation: both correction terms vanish and J equals V_0
    CostCertificate cert0 = build_cost_certificate(g, re, i, res.u, res.mu);
    double V0 = certificate_value(g, re, cert0, i, 0, res.x[0]);
    f_eq.absorb(std::abs(J_star - V0) / (1.0 + std::abs(J_star)), 0, i);

    const int mi = d.control_dims[i];
    const int mo = d.control_offset(i);
    for (int probe = 0; probe < opts.probes; ++probe) {
      // random direction, shrunk toward the equilibrium until feasible
      std::vector<Vector> u_dev = res.u;
      double scale = 0.25;
      for (int k = 0; k < K; ++k) scale = std::max(scale, 0.25 * inf_norm(res.u[k]));
      std::vector<Vector> dir(K);
      for (int k = 0; k < K; ++k) {
        dir[k] = Vector::Zero(mi);
        for (int a = 0; a < mi; ++a) dir[k](a) = gauss(rng);
      }
      double t = 1.0;
      bool feasible = false;
      std::vector<Vector> x_dev;
      for (int halvings = 0; halvings < 26; ++halvings) {
        for (int k = 0; k < K; ++k)
          u_dev[k].segment(mo, mi) = res.u[k].segment(mo, mi) + t * scale * dir[k];
        x_dev = rollout(g, u_dev);
        if (min_own_row_value(g, i, x_dev, u_dev) >= -1e-9) {
          feasible = true;
          break;
        }
        t *= 0.5;
      }
      if (!feasible) {
        rep.skipped_probes.push_back("player " + std::to_string(i + 1) + " probe " +
                                     std::to_string(probe) + ": no feasible deviation");
        continue;
      }
      double J_direct = direct_cost(g, i, x_dev, u_dev);
      double J_repr = representation_cost(i, u_dev, x_dev);
      f_id.absorb(std::abs(J_direct - J_repr) / (1.0 + std::abs(J_direct)), probe, i);
      f_nash.absorb(std::max(0.0, J_star - J_direct), probe, i);
    }
  }
  rep.families = {f_eq, f_id, f_nash};
  return rep;
}

namespace {

// Player i's cost and own constraint rows as explicit quadratic/affine
// functions of their stacked controls, opponents frozen.
struct OwnQuadratic {
  Matrix H;     // Km_i x Km_i
  Vector grad0; // gradient at u = 0
  Matrix G;     // rows x Km_i
  Vector h;     // row values at u = 0
  Vector u_star;

  double cost(const Vector& u) const { return 0.5 * u.dot(H * u) + grad0.dot(u); }
};

OwnQuadratic build_own_quadratic(const GameSpec& g, const EquilibriumResult& res, int i) {
  const Dimensions& d = g.dims;
  const int K = d.horizon, n = d.state_dim;
  const int mi = d.control_dims[i], ci = d.constraint_dims[i];
  const int dim = K * mi;

  OwnQuadratic q;
  q.H = Matrix::Zero(dim, dim);
  q.grad0 = Vector::Zero(dim);
  q.G = Matrix::Zero(K * ci, dim);
  q.h = Vector::Zero(K * ci);
  q.u_star = Vector::Zero(dim);

  Matrix X = Matrix::Zero(n, dim); // x_k = X u + xbar
  Vector xbar = g.dynamics.x0;
  for (int k = 0; k <= K; ++k) {
    const Matrix& Q = g.costs[i].Q[k];
    q.H += X.transpose() * Q * X;
    q.grad0 += X.transpose() * (Q * xbar + g.costs[i].p[k]);
    if (k == K) break;

    q.H.block(k * mi, k * mi, mi, mi) += g.costs[i].R[k][i];
    q.u_star.segment(k * mi, mi) = player_seg_u(g, res.u[k], i);

    if (ci > 0) {
      Matrix rows = g.constraints[i].M[k] * X;
      rows.middleCols(k * mi, mi) += g.constraint_N_block(k, i, i);
      q.G.middleRows(k * ci, ci) = rows;
      Vector hk = g.constraints[i].M[k] * xbar + g.constraints[i].r[k];
      for (int j = 0; j < d.num_players; ++j)
        if (j != i) hk += g.constraint_N_block(k, i, j) * player_seg_u(g, res.u[k], j);
      q.h.segment(k * ci, ci) = hk;
    }

    Matrix Xn = g.dynamics.A[k] * X;
    Xn.middleCols(k * mi, mi) += g.dynamics.B[k][i];
    Vector xb = g.dynamics.A[k] * xbar;
    for (int j = 0; j < d.num_players; ++j)
      if (j != i) xb += g.dynamics.B[k][j] * player_seg_u(g, res.u[k], j);
    X = std::move(Xn);
    xbar = std::move(xb);
  }
  return q;
}

double exact_qp_min(const OwnQuadratic& q, double tol) {
  const int dim = static_cast<int>(q.H.rows());
  const int rows = static_cast<int>(q.G.rows());
  double best = std::numeric_limits<double>::infinity();
  const std::uint64_t subsets = std::uint64_t{1} << rows;
  for (std::uint64_t mask = 0; mask < subsets; ++mask) {
    std::vector<int> S;
    for (int r = 0; r < rows; ++r)
      if (mask & (std::uint64_t{1} << r)) S.push_back(r);
    const int s = static_cast<int>(S.size());
    if (s > dim) continue;
    Matrix KKT = Matrix::Zero(dim + s, dim + s);
    KKT.topLeftCorner(dim, dim) = q.H;
    Vector rhs(dim + s);
    rhs.head(dim) = -q.grad0;
    for (int a = 0; a < s; ++a) {
      KKT.block(dim + a, 0, 1, dim) = q.G.row(S[a]);
      KKT.block(0, dim + a, dim, 1) = -q.G.row(S[a]).transpose();
      rhs(dim + a) = -q.h(S[a]);
    }
    Eigen::FullPivLU<Matrix> lu(KKT);
    if (!lu.isInvertible()) continue;
    Vector sol = lu.solve(rhs);
    Vector u = sol.head(dim);
    if (rows > 0 && (q.G * u + q.h).minCoeff() < -tol) continue;
    if (s > 0 && sol.tail(s).minCoeff() < -tol) continue;
    best = std::min(best, q.cost(u));
  }
  return best;
}

double projected_gradient_min(const OwnQuadratic& q, int max_iterations, int* iters) {
  Vector u = q.u_star;
  const int rows = static_cast<int>(q.G.rows());
  double scale = 1.0 + (rows > 0 ? q.h.cwiseAbs().maxCoeff() : 0.0);
  int it = 0;
  for (; it < max_iterations; ++it) {
    Vector grad = q.H * u + q.grad0;
    Vector dir = -grad;
    Vector vals = rows > 0 ? Vector(q.G * u + q.h) : Vector();

    if (rows > 0) {
      std::vector<int> active;
      for (int r = 0; r < rows; ++r)
        if (vals(r) <= 1e-8 * scale) active.push_back(r);
      if (!active.empty()) {
        // project the descent direction onto the cone of feasible directions
        Matrix Ga(static_cast<int>(active.size()), q.G.cols());
        for (std::size_t a = 0; a < active.size(); ++a) Ga.row(a) = q.G.row(active[a]);
        LcpInstance proj{Ga * Ga.transpose(), Ga * dir};
        LcpSolution ps = lemke_solve(proj);
        if (ps.status == LcpStatus::Solved || ps.status == LcpStatus::TrivialQNonneg)
          dir += Ga.transpose() * ps.z;
        else
          break;
      }
    }
    double dnorm = inf_norm(dir);
    if (dnorm <= 1e-13 * (1.0 + inf_norm(grad))) break;

    double t_max = std::numeric_limits<double>::infinity();
    if (rows > 0) {
      Vector slope = q.G * dir;
      for (int r = 0; r < rows; ++r)
        if (slope(r) < -1e-14)
          t_max = std::min(t_max, std::max(vals(r), 0.0) / (-slope(r)));
    }
    double curv = dir.dot(q.H * dir);
    double lin = grad.dot(dir);
    if (lin >= 0.0) break;
    double t = curv > 0.0 ? -lin / curv : t_max;
    if (!std::isfinite(t) && !std::isfinite(t_max)) break;
    t = std::min(t, t_max);
    if (!(t > 0.0)) break;
    u += t * dir;
  }
  if (iters) *iters = it;
  return q.cost(u);
}

} // namespace

DeviationResult check_deviation_qp(const GameSpec& g, const EquilibriumResult& res,
                                   int player, double tol, int max_iterations) {
  OwnQuadratic q = build_own_quadratic(g, res, player);
  const int dim = static_cast<int>(q.H.rows());
  const int rows = static_cast<int>(q.G.rows());

  DeviationResult out;
  double J_star = q.cost(q.u_star);
  if (rows > 0)
    out.candidate_violation = std::max(0.0, -(q.G * q.u_star + q.h).minCoeff());
  if (dim <= 30 && rows <= 16) {
    out.exhaustive = true;
    double best = exact_qp_min(q, tol);
    out.improvement = std::isfinite(best) ? J_star - best : 0.0;
  } else {
    out.exhaustive = false;
    double best = projected_gradient_min(q, max_iterations, &out.iterations);
    out.improvement = J_star - best;
  }
  return out;
}

CostPair compute_costs(const GameSpec& g, const RiccatiE& re, const EquilibriumResult& res) {
  CostPair out;
  const int N = g.dims.num_players;
  out.certificate.resize(N);
  out.rollout.resize(N);
  for (int i = 0; i < N; ++i) {
    CostCertificate cert = build_cost_certificate(g, re, i, res.u, res.mu);
    out.certificate[i] = certificate_value(g, re, cert, i, 0, res.x[0]);
    out.rollout[i] = direct_cost(g, i, res.x, res.u);
    double gap = std::abs(out.certificate[i] - out.rollout[i]) /
                 std::max(1.0, std::abs(out.rollout[i]));
    out.max_rel_gap = std::max(out.max_rel_gap, gap);
  }
  return out;
}

ResidualReport run_all_checks(const GameSpec& g, const RiccatiE& re,
                              const EquilibriumResult& res, const VerifyOptions& opts) {
  ResidualReport rep = check_lcs1(g, res, opts.lcs_tol);

  ResidualReport lcs2 = check_lcs2_consistency(g, re, res, opts.lcs_tol);
  rep.families.insert(rep.families.end(), lcs2.families.begin(), lcs2.families.end());

  ResidualReport th1 = check_theorem1_identity(g, re, res, opts);
  rep.families.insert(rep.families.end(), th1.families.begin(), th1.families.end());
  rep.skipped_probes.insert(rep.skipped_probes.end(), th1.skipped_probes.begin(),
                            th1.skipped_probes.end());

  CostPair costs = compute_costs(g, re, res);
  ResidualFamily f_cost{"cost_certificate", 0, opts.identity_rel_tol, true, -1, -1};
  f_cost.absorb(costs.max_rel_gap, -1, -1);
  rep.families.push_back(f_cost);

  for (int i = 0; i < g.dims.num_players; ++i) {
    DeviationResult dev = check_deviation_qp(g, res, i, opts.identity_rel_tol);
    ResidualFamily f{"deviation_p" + std::to_string(i + 1), 0,
                     dev.exhaustive ? 1e-8 : 1e-5, true, -1, -1};
    f.absorb(std::max(0.0, dev.improvement), -1, i);
    f.absorb(dev.candidate_violation, -1, i);
    rep.families.push_back(f);
  }
  return rep;
}

std::string report_to_json(const ResidualReport& r) {
  nlohmann::json j;
  j["all_pass"] = r.all_pass();
  j["families"] = nlohmann::json::array();
  for (const auto& f : r.families) {
    j["families"].push_back({{"name", f.name},
                             {"max_residual", f.max_residual},
                             {"tolerance", f.tolerance},
                             {"pass", f.pass},
                             {"worst_stage", f.worst_stage},
                             {"worst_player", f.worst_player}});
  }
  j["skipped_probes"] = r.skipped_probes;
  return j.dump(1);
}

std::string report_to_text(const ResidualReport& r) {
  std::ostringstream os;
  os << "family                        max residual   tolerance      verdict\n";
  for (const auto& f : r.families) {
    os << f.name;
    for (std::size_t s = f.name.size(); s < 30; ++s) os << ' ';
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-15.3e%-15.3e%s\n", f.max_residual, f.tolerance,
                  f.pass ? "pass" : "FAIL");
    os << buf;
  }
  if (!r.skipped_probes.empty())
    os << "skipped probes: " << r.skipped_probes.size() << "\n";
  os << (r.all_pass() ? "ALL PASS" : "FAILURES PRESENT") << "\n";
  return os.str();
}

} // namespace dgc
