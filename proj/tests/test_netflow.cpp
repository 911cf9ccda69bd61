#include "dgc/netflow.hpp"

#include "dgc/game_model.hpp"
#include "dgc/riccati.hpp"
#include "dgc/verify.hpp"

#include <doctest.h>

using namespace dgc;

TEST_CASE("generated parameters match the model constants") {
  NetflowParams p;
  GameSpec g = build_netflow_spec(p);
  CHECK(g.dims.num_players == 2);
  CHECK(g.dims.horizon == 60);
  CHECK(g.dims.state_dim == 3);
  CHECK(g.dims.constraint_dim() == 18);

  // peak rates
  CHECK(p.vbar(0, 0) == doctest::Approx(3.0));
  CHECK(p.vbar(0, 1) == doctest::Approx(1.6));
  CHECK(p.vbar(1, 0) == doctest::Approx(2.6));
  CHECK(p.vbar(1, 1) == doctest::Approx(1.0));

  // relay capacity row offsets: alpha1 = 5.6 so r_5 = 5.4 - 5.6 = -0.2
  for (int i = 0; i < 2; ++i) {
    const Vector& r = g.constraints[i].r[0];
    CHECK(r(4) == doctest::Approx(-0.2));
    CHECK(r(5) == doctest::Approx(0.0));
    CHECK(r(6) == doctest::Approx(-0.125 * 5.6 - 1.0));
    CHECK(r(7) == doctest::Approx(-0.075 * 2.6 - 0.5));
  }
  CHECK(g.constraints[0].r[0](8) == doctest::Approx(4.0 - 4.6));
  CHECK(g.constraints[1].r[0](8) == doctest::Approx(3.0 - 3.6));

  // discounting bakes into the stage data
  CHECK(g.costs[0].R[1][0](0, 0) == doctest::Approx(0.95 * 10.0));
  CHECK(g.costs[0].Q[2](0, 0) == doctest::Approx(0.95 * 0.95 * 6.0));
  CHECK(g.dynamics.x0(2) == 1.0);
}

TEST_CASE("constraint rows encode the intended inequalities") {
  NetflowParams p;
  GameSpec g = build_netflow_spec(p);
  // pick a state and flows, evaluate rows directly against the raw model
  Vector x(3);
  x << 5.0, 3.0, 1.0;
  Matrix v(2, 2);
  v << 1.2, 0.9, 2.0, 0.4;
  Vector u(4);
  for (int i = 0; i < 2; ++i)
    for (int l = 0; l < 2; ++l) u(2 * i + l) = v(i, l) - p.vbar(i, l);

  for (int i = 0; i < 2; ++i) {
    Vector rows = g.constraints[i].M[0] * x + g.constraints[i].N[0] * u +
                  g.constraints[i].r[0];
    CHECK(rows(0) == doctest::Approx(v(i, 0)));                    // v >= 0
    CHECK(rows(1) == doctest::Approx(v(i, 1)));
    CHECK(rows(2) == doctest::Approx(p.vbar(i, 0) - v(i, 0)));     // v <= vbar
    CHECK(rows(3) == doctest::Approx(p.vbar(i, 1) - v(i, 1)));
    CHECK(rows(4) == doctest::Approx(p.relay_cap[0] - (v(0, 0) + v(1, 0))));
    CHECK(rows(5) == doctest::Approx(p.relay_cap[1] - (v(0, 1) + v(1, 1))));
    CHECK(rows(6) ==
          doctest::Approx(x(0) - p.depletion[0] * (v(0, 0) + v(1, 0)) - p.b_min[0]));
    CHECK(rows(7) ==
          doctest::Approx(x(1) - p.depletion[1] * (v(0, 1) + v(1, 1)) - p.b_min[1]));
    CHECK(rows(8) ==
          doctest::Approx(p.dest_cap[i] - (v(i, 0) + v(i, 1))));
  }
}

TEST_CASE("stage cost reproduces the utility model") {
  NetflowParams p;
  GameSpec g = build_netflow_spec(p);
  Vector x(3);
  x << 4.0, 2.5, 1.0;
  Matrix v(2, 2);
  v << 2.0, 1.1, 0.7, 0.3;
  const int k = 3;
  const double beta_k = std::pow(p.beta, k);

  for (int i = 0; i < 2; ++i) {
    Vector u(4);
    for (int a = 0; a < 2; ++a)
      for (int l = 0; l < 2; ++l) u(2 * a + l) = v(a, l) - p.vbar(a, l);
    Vector ui = u.segment(2 * i, 2);
    double standard = 0.5 * x.dot(g.costs[i].Q[k] * x) + g.costs[i].p[k].dot(x) +
                      0.5 * ui.dot(g.costs[i].R[k][i] * ui);
    double utility = 0.0;
    for (int l = 0; l < 2; ++l)
      utility += p.d[i][l] * x(l) - 0.5 * p.s[i][l] * x(l) * x(l) +
                 p.w[i][l] * v(i, l) - 0.5 * p.t[i][l] * v(i, l) * v(i, l);
    CHECK(standard == doctest::Approx(-beta_k * utility).epsilon(1e-12));
  }
}

TEST_CASE("zero depletion freezes the batteries") {
  NetflowParams p;
  p.depletion = {0.0, 0.0};
  GameSpec g = build_netflow_spec(p);
  CHECK((g.dynamics.A[0] - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.dynamics.B[0][0].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("generated instance passes both recursion gates") {
  GameSpec g = build_netflow_spec();
  RiccatiE re = solve_riccati_E(g);
  CHECK(re.all_Y_invertible);
  CHECK(re.all_Y_positive_definite);
  RiccatiP rp = solve_riccati_P(g);
  CHECK(rp.all_lambda_invertible);
}

TEST_CASE("spec JSON round-trips the generated instance") {
  NetflowParams p;
  p.K = 4;
  GameSpec g = build_netflow_spec(p);
  GameSpec back = parse_spec(spec_to_json(g));
  REQUIRE(back.dims == g.dims);
  for (int k = 0; k < p.K; ++k) {
    CHECK((back.dynamics.A[k] - g.dynamics.A[k]).cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < 2; ++i) {
      CHECK((back.costs[i].Q[k] - g.costs[i].Q[k]).cwiseAbs().maxCoeff() == 0.0);
      CHECK((back.constraints[i].r[k] - g.constraints[i].r[k]).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("postprocess recovers flows from the shifted controls") {
  NetflowParams p;
  p.K = 3;
  GameSpec g = build_netflow_spec(p);
  EquilibriumResult res;
  res.u.assign(3, Vector::Zero(4));
  res.x = rollout(g, res.u);
  res.mu.assign(3, Vector::Zero(18));
  NetflowReport rep = postprocess_netflow(g, res, p);

  // the zero control is the peak-rate corner: v = vbar everywhere
  for (int k = 0; k < 3; ++k) {
    CHECK(rep.v[k](0, 0) == doctest::Approx(3.0));
    CHECK(rep.v[k](1, 1) == doctest::Approx(1.0));
    CHECK(rep.relay_load[k](0) == doctest::Approx(5.6));
  }
  // relay 1 exceeds its capacity 5.4 at the corner; the row must be flagged
  Vector rows = g.constraint_values(0, res.x[0], res.u[0]);
  CHECK(rows.minCoeff() < 0.0);
  CHECK(rep.active_rows[0][4] == 1);
  // flows never stop in this profile
  CHECK(rep.stop_stage[0] == 3);
  CHECK(rep.stop_stage[1] == 3);
}

TEST_CASE("postprocess rejects results of the wrong shape") {
  NetflowParams p;
  p.K = 3;
  GameSpec g = build_netflow_spec(p);
  EquilibriumResult res;
  res.u.assign(2, Vector::Zero(4)); // wrong stage count
  CHECK_THROWS_AS(postprocess_netflow(g, res, p), std::invalid_argument);
}

TEST_CASE("short-horizon instance solves and respects the battery floor") {
  NetflowParams p;
  p.K = 6;
  GameSpec g = build_netflow_spec(p);
  SolveOptions so;
  so.probes = 4;
  EquilibriumResult res = solve_golne(g, so);
  REQUIRE(res.status == SolveStatus::Solved);
  NetflowReport rep = postprocess_netflow(g, res, p);
  for (int k = 0; k < p.K; ++k) {
    CHECK(rep.battery[k + 1](0) <= rep.battery[k](0) + 1e-9);
    CHECK(rep.battery[k + 1](1) <= rep.battery[k](1) + 1e-9);
  }
  for (int k = 0; k <= p.K; ++k) {
    CHECK(rep.battery[k](0) >= p.b_min[0] - 1e-6);
    CHECK(rep.battery[k](1) >= p.b_min[1] - 1e-6);
  }
}
