#include "dgc/netflow.hpp"

#include <json.hpp>

#include <cmath>
#include <stdexcept>

namespace dgc {

GameSpec build_netflow_spec(const NetflowParams& p) {
  if (p.K < 1 || p.beta <= 0.0 || p.beta >= 1.0)
    throw std::invalid_argument("netflow: K must be >= 1 and beta in (0,1)");
  for (int i = 0; i < 2; ++i)
    for (int l = 0; l < 2; ++l)
      if (p.w[i][l] <= 0.0 || p.t[i][l] <= 0.0)
        throw std::invalid_argument("netflow: utility coefficients must be positive");
  if (p.depletion[0] < 0.0 || p.depletion[1] < 0.0)
    throw std::invalid_argument("netflow: depletion factors must be nonnegative");

  const int K = p.K;
  const double d1 = p.depletion[0], d2 = p.depletion[1];
  // alpha1/2: total peak rate through each relay; alpha3/4: per player;
  // alpha5/6: peak utility offsets absorbed into the constant state.
  const double alpha1 = p.vbar(0, 0) + p.vbar(1, 0);
  const double alpha2 = p.vbar(0, 1) + p.vbar(1, 1);
  const double alpha3 = p.vbar(0, 0) + p.vbar(0, 1);
  const double alpha4 = p.vbar(1, 0) + p.vbar(1, 1);
  const double alpha5 = p.w[0][0] * p.w[0][0] / p.t[0][0] + p.w[0][1] * p.w[0][1] / p.t[0][1];
  const double alpha6 = p.w[1][0] * p.w[1][0] / p.t[1][0] + p.w[1][1] * p.w[1][1] / p.t[1][1];

  GameSpec g;
  g.name = "netflow";
  g.description = "two-source two-relay flow game, shifted standard form";
  g.dims.num_players = 2;
  g.dims.horizon = K;
  g.dims.state_dim = 3;
  g.dims.control_dims = {2, 2};
  g.dims.constraint_dims = {9, 9};

  Matrix A(3, 3);
  A << 1, 0, -d1 * alpha1, 0, 1, -d2 * alpha2, 0, 0, 1;
  Matrix B(3, 2);
  B << -d1, 0, 0, -d2, 0, 0;
  g.dynamics.A.assign(K, A);
  g.dynamics.B.assign(K, {B, B});
  g.dynamics.x0 = Vector(3);
  g.dynamics.x0 << p.x0[0], p.x0[1], 1.0;

  // Nine constraint rows per player: v >= 0 (2), v <= vbar (2), relay
  // capacity (2), battery floor (2), destination capacity (1).
  Matrix M = Matrix::Zero(9, 3);
  M(6, 0) = 1.0;
  M(7, 1) = 1.0;
  Matrix Nown = Matrix::Zero(9, 2);
  Nown.block(0, 0, 2, 2) = Matrix::Identity(2, 2);
  Nown.block(2, 0, 2, 2) = -Matrix::Identity(2, 2);
  Nown.block(4, 0, 2, 2) = -Matrix::Identity(2, 2);
  Nown(6, 0) = -d1;
  Nown(7, 1) = -d2;
  Nown(8, 0) = -1.0;
  Nown(8, 1) = -1.0;
  Matrix Nother = Matrix::Zero(9, 2);
  Nother.block(4, 0, 2, 2) = -Matrix::Identity(2, 2);
  Nother(6, 0) = -d1;
  Nother(7, 1) = -d2;

  for (int i = 0; i < 2; ++i) {
    PlayerConstraint pc;
    Matrix N(9, 4);
    if (i == 0)
      N << Nown, Nother;
    else
      N << Nother, Nown;
    Vector r(9);
    r << p.vbar(i, 0), p.vbar(i, 1), 0.0, 0.0, p.relay_cap[0] - alpha1,
        p.relay_cap[1] - alpha2, -d1 * alpha1 - p.b_min[0], -d2 * alpha2 - p.b_min[1],
        p.dest_cap[i] - (i == 0 ? alpha3 : alpha4);
    pc.M.assign(K, M);
    pc.N.assign(K, N);
    pc.r.assign(K, r);
    g.constraints.push_back(std::move(pc));
  }

  for (int i = 0; i < 2; ++i) {
    PlayerCost pc;
    Matrix Qstage(3, 3);
    Qstage << p.s[i][0], 0, -p.d[i][0], 0, p.s[i][1], -p.d[i][1], -p.d[i][0], -p.d[i][1],
        -(i == 0 ? alpha5 : alpha6);
    Matrix Qterm(3, 3);
    Qterm << p.S[i][0], 0, -p.D[i][0], 0, p.S[i][1], -p.D[i][1], -p.D[i][0], -p.D[i][1], 0;
    Matrix Rstage = Matrix::Zero(2, 2);
    Rstage(0, 0) = p.t[i][0];
    Rstage(1, 1) = p.t[i][1];

    pc.Q.resize(K + 1);
    pc.p.assign(K + 1, Vector::Zero(3));
    pc.R.assign(K, std::vector<Matrix>(2, Matrix::Zero(2, 2)));
    double scale = 1.0;
    for (int k = 0; k < K; ++k) {
      pc.Q[k] = scale * Qstage;
      pc.R[k][i] = scale * Rstage;
      scale *= p.beta;
    }
    pc.Q[K] = scale * Qterm; // scale is now beta^K
    g.costs.push_back(std::move(pc));
  }
  return g;
}

NetflowReport postprocess_netflow(const GameSpec& g, const EquilibriumResult& res,
                                  const NetflowParams& p, double tol_active) {
  if (g.dims.num_players != 2 || g.dims.state_dim != 3 ||
      g.dims.control_dims != std::vector<int>{2, 2} ||
      g.dims.constraint_dims != std::vector<int>{9, 9} ||
      static_cast<int>(res.u.size()) != g.dims.horizon)
    throw std::invalid_argument("postprocess_netflow: result does not match the flow-game shape");

  const int K = g.dims.horizon;
  NetflowReport rep;
  rep.flow_tol = 1e-6;
  rep.v.resize(K);
  rep.relay_load.resize(K);
  rep.dest_load.resize(K);
  rep.battery.resize(K + 1);
  rep.active_rows.resize(K);

  for (int k = 0; k < K; ++k) {
    Matrix v(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int l = 0; l < 2; ++l) v(i, l) = res.u[k](2 * i + l) + p.vbar(i, l);
    rep.v[k] = v;
    Vector L(2), Lt(2);
    L << v(0, 0) + v(1, 0), v(0, 1) + v(1, 1);
    Lt << v(0, 0) + v(0, 1), v(1, 0) + v(1, 1);
    rep.relay_load[k] = L;
    rep.dest_load[k] = Lt;

    Vector vals = g.constraint_values(k, res.x[k], res.u[k]);
    rep.active_rows[k].assign(vals.size(), 0);
    for (int r = 0; r < vals.size(); ++r)
      if (vals(r) <= tol_active) rep.active_rows[k][r] = 1;
  }
  for (int k = 0; k <= K; ++k) rep.battery[k] = res.x[k].head(2);

  for (int l = 0; l < 2; ++l) {
    int stop = 0;
    for (int k = K - 1; k >= 0; --k) {
      if (std::max(rep.v[k](0, l), rep.v[k](1, l)) > rep.flow_tol) {
        stop = k + 1;
        break;
      }
    }
    rep.stop_stage[l] = stop;
  }
  return rep;
}

std::string netflow_report_to_json(const NetflowReport& rep) {
  nlohmann::json j;
  j["stop_stage"] = {rep.stop_stage[0], rep.stop_stage[1]};
  j["flow_tol"] = rep.flow_tol;
  auto flows = nlohmann::json::array();
  for (std::size_t k = 0; k < rep.v.size(); ++k) {
    flows.push_back({{"k", k},
                     {"v11", rep.v[k](0, 0)},
                     {"v12", rep.v[k](0, 1)},
                     {"v21", rep.v[k](1, 0)},
                     {"v22", rep.v[k](1, 1)},
                     {"L1", rep.relay_load[k](0)},
                     {"L2", rep.relay_load[k](1)},
                     {"Lt1", rep.dest_load[k](0)},
                     {"Lt2", rep.dest_load[k](1)},
                     {"active", rep.active_rows[k]}});
  }
  j["flows"] = std::move(flows);
  auto batt = nlohmann::json::array();
  for (const auto& b : rep.battery) batt.push_back({b(0), b(1)});
  j["battery"] = std::move(batt);
  return j.dump(1);
}

} // namespace dgc
