#include "dgc/verify.hpp"

#include "dgc/pipeline.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace dgc;

namespace {

GameSpec solved_random_game(std::mt19937_64& rng, EquilibriumResult* res,
                            RiccatiE* re) {
  for (int attempt = 0; attempt < 20; ++attempt) {
    testing::RandomGameOptions opts;
    opts.horizon = 3;
    opts.state_dim = 2;
    opts.control_dims = {1, 1};
    opts.constraint_dims = {1, 1};
    GameSpec g = testing::random_game(rng, opts);
    SolveOptions so;
    so.lcs_tol = 1e-8;
    so.probes = 6;
    EquilibriumResult r = solve_golne(g, so);
    if (r.status == SolveStatus::Solved) {
      *res = std::move(r);
      *re = solve_riccati_E(g);
      return g;
    }
  }
  FAIL("no solvable random instance found");
  return {};
}

} // namespace

TEST_CASE("clean solves pass every check family at tight tolerance") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 8; ++trial) {
    EquilibriumResult res;
    RiccatiE re;
    GameSpec g = solved_random_game(rng, &res, &re);
    REQUIRE(res.report.all_pass());
    const ResidualFamily* beta = res.report.find("lcs2_beta");
    REQUIRE(beta != nullptr);
    CHECK(beta->max_residual == 0.0);
  }
}

TEST_CASE("unconstrained games reduce the complementarity triple to slack checks") {
  std::mt19937_64 rng(103);
  testing::RandomGameOptions opts;
  opts.with_constraints = false;
  GameSpec g = testing::random_game(rng, opts);
  EquilibriumResult res = solve_golne(g);
  REQUIRE(res.status == SolveStatus::Solved);
  const ResidualFamily* prod = res.report.find("lcs1_comp_product");
  REQUIRE(prod != nullptr);
  CHECK(prod->max_residual == 0.0);
}

TEST_CASE("fault injection on an active multiplier is caught") {
  std::mt19937_64 rng(107);
  EquilibriumResult res;
  RiccatiE re;
  GameSpec g = solved_random_game(rng, &res, &re);

  // find an active coordinate
  int kk = -1, idx = -1;
  for (int k = 0; k < g.dims.horizon && kk < 0; ++k)
    for (int a = 0; a < res.mu[k].size(); ++a)
      if (res.mu[k](a) > 1e-6) {
        kk = k;
        idx = a;
        break;
      }
    if (kk < 0) return; // nothing active on this draw; other trials cover it

  EquilibriumResult tampered = res;
  tampered.mu[kk](idx) += 0.1;
  ResidualReport rep = check_lcs1(g, tampered, 1e-8);
  CHECK(!rep.all_pass());
}

TEST_CASE("single-coordinate perturbations flip at least one family") {
  std::mt19937_64 rng(109);
  EquilibriumResult res;
  RiccatiE re;
  GameSpec g = solved_random_game(rng, &res, &re);
  VerifyOptions vo;
  vo.lcs_tol = 1e-8;
  vo.probes = 2;

  EquilibriumResult t1 = res;
  t1.u[1](0) += 1e-3;
  t1.x = rollout(g, t1.u);
  ResidualReport r1 = run_all_checks(g, re, t1, vo);
  CHECK(!r1.all_pass());

  EquilibriumResult t2 = res;
  t2.lambda[1](0) += 1e-3;
  ResidualReport r2 = run_all_checks(g, re, t2, vo);
  CHECK(!r2.all_pass());

  if (res.mu[0].size() > 0) {
    EquilibriumResult t3 = res;
    t3.mu[0](0) += 1e-3;
    ResidualReport r3 = run_all_checks(g, re, t3, vo);
    CHECK(!r3.all_pass());
  }
}

TEST_CASE("corrupting a costate localizes in the derived-system residuals") {
  std::mt19937_64 rng(113);
  EquilibriumResult res;
  RiccatiE re;
  GameSpec g = solved_random_game(rng, &res, &re);

  const int k_bad = 1;
  EquilibriumResult tampered = res;
  tampered.lambda[k_bad](0) += 0.05; // corrupts e_{k_bad} for player 1
  ResidualReport rep = check_lcs2_consistency(g, re, tampered, 1e-8);
  const ResidualFamily* costate = rep.find("lcs2_costate");
  REQUIRE(costate != nullptr);
  CHECK(!costate->pass);
  // the backward equation residual fires at the corrupted stage or its
  // predecessor (both reference e_{k_bad})
  CHECK(std::abs(costate->worst_stage - k_bad) <= 1);
}

TEST_CASE("reverse construction: costates rebuilt from the derived tuple satisfy "
          "the first-order system") {
  std::mt19937_64 rng(127);
  EquilibriumResult res;
  RiccatiE re;
  GameSpec g = solved_random_game(rng, &res, &re);
  EquilibriumResult rebuilt = res;
  rebuilt.lambda = reconstruct_lambda_from_lcs2(g, re, res);
  ResidualReport rep = check_lcs1(g, rebuilt, 1e-8);
  CHECK(rep.all_pass());
}

TEST_CASE("dual-route cost identity holds for simultaneous deviations") {
  std::mt19937_64 rng(131);
  std::normal_distribution<double> gauss(0.0, 1.0);
  EquilibriumResult res;
  RiccatiE re;
  GameSpec g = solved_random_game(rng, &res, &re);
  const int K = g.dims.horizon;

  for (int probe = 0; probe < 10; ++probe) {
    // deviate everyone at once; the representation is per player for any
    // profile, feasible or not
    std::vector<Vector> u = res.u;
    for (int k = 0; k < K; ++k)
      for (int a = 0; a < u[k].size(); ++a) u[k](a) += 0.3 * gauss(rng);
    auto x = rollout(g, u);

    for (int i = 0; i < g.dims.num_players; ++i) {
      CostCertificate cert = build_cost_certificate(g, re, i, u, res.mu);
      REQUIRE(cert.ok);
      double V0 = certificate_value(g, re, cert, i, 0, x[0]);
      double quad = 0.0, lin = 0.0;
      for (int k = 0; k < K; ++k) {
        Vector ui = u[k].segment(g.dims.control_offset(i), g.dims.control_dims[i]);
        Vector y = re.Y[i][k].lu().solve(
                       g.dynamics.B[k][i].transpose() *
                       (re.E[i][k + 1] * (g.dynamics.A[k] * x[k]))) +
                   cert.b[k];
        quad += 0.5 * (ui + y).dot(re.Y[i][k] * (ui + y));
        Vector rows = g.constraints[i].M[k] * x[k] +
                      g.constraint_N_block(k, i, i) * ui + cert.alpha[k] +
                      g.constraints[i].r[k];
        lin += res.mu[k]
                   .segment(g.dims.constraint_offset(i), g.dims.constraint_dims[i])
                   .dot(rows);
      }
      double J_repr = V0 + quad + lin;
      double J_direct = direct_cost(g, i, x, u);
      CHECK(std::abs(J_direct - J_repr) / (1.0 + std::abs(J_direct)) < 1e-10);
    }
  }
}

TEST_CASE("a wrong equilibrium is exposed by the deviation search") {
  std::mt19937_64 rng(137);
  for (int attempt = 0; attempt < 20; ++attempt) {
    testing::RandomGameOptions opts;
    opts.horizon = 3;
    opts.control_dims = {1, 1};
    opts.constraint_dims = {1, 1};
    opts.slack_low = 0.01;
    opts.slack_high = 0.05; // tight rows so the unconstrained Nash violates them
    GameSpec g = testing::random_game(rng, opts);
    EquilibriumResult res = solve_golne(g);
    if (res.status != SolveStatus::Solved) continue;
    bool active = false;
    for (int k = 0; k < g.dims.horizon; ++k)
      if (res.mu[k].size() > 0 && res.mu[k].maxCoeff() > 1e-4) active = true;
    if (!active) continue;

    // swap in the unconstrained Nash controls: either some player's own
    // rows are violated, or a feasible candidate is beaten by a deviation
    testing::UnconstrainedNash nash = testing::unconstrained_olne(g);
    REQUIRE(nash.ok);
    EquilibriumResult fake = res;
    fake.u = nash.u;
    fake.x = rollout(g, fake.u);
    double worst = 0.0;
    for (int i = 0; i < 2; ++i) {
      DeviationResult dev = check_deviation_qp(g, fake, i, 1e-9);
      worst = std::max({worst, dev.improvement, dev.candidate_violation});
    }
    CHECK(worst > 1e-6);
    return;
  }
  FAIL("no instance with active constraints found");
}

TEST_CASE("zero game has zero cost and zero controls") {
  GameSpec g;
  g.dims.num_players = 2;
  g.dims.horizon = 3;
  g.dims.state_dim = 2;
  g.dims.control_dims = {1, 1};
  g.dims.constraint_dims = {0, 0};
  g.dynamics.x0 = Vector::Constant(2, 1.0);
  Matrix A = Matrix::Identity(2, 2);
  g.dynamics.A.assign(3, A);
  g.dynamics.B.assign(3, {Matrix::Constant(2, 1, 0.5), Matrix::Constant(2, 1, -0.25)});
  for (int i = 0; i < 2; ++i) {
    PlayerCost pc;
    pc.Q.assign(4, Matrix::Zero(2, 2));
    pc.p.assign(4, Vector::Zero(2));
    pc.R.assign(3, std::vector<Matrix>(2, Matrix::Zero(1, 1)));
    for (int k = 0; k < 3; ++k) pc.R[k][i] = Matrix::Identity(1, 1);
    g.costs.push_back(pc);
    PlayerConstraint cc;
    cc.M.assign(3, Matrix::Zero(0, 2));
    cc.N.assign(3, Matrix::Zero(0, 2));
    cc.r.assign(3, Vector::Zero(0));
    g.constraints.push_back(cc);
  }
  EquilibriumResult res = solve_golne(g);
  REQUIRE(res.status == SolveStatus::Solved);
  for (int k = 0; k < 3; ++k) CHECK(res.u[k].cwiseAbs().maxCoeff() < 1e-12);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(res.cost_rollout[i]) < 1e-12);
    CHECK(std::abs(res.cost_certificate[i]) < 1e-12);
  }
}

TEST_CASE("certificate cost equals the regulator cost on single-player games") {
  std::mt19937_64 rng(139);
  testing::RandomGameOptions opts;
  opts.num_players = 1;
  opts.control_dims = {2};
  opts.state_dim = 2;
  opts.horizon = 5;
  opts.with_constraints = false;
  GameSpec g = testing::random_game(rng, opts);
  EquilibriumResult res = solve_golne(g);
  REQUIRE(res.status == SolveStatus::Solved);
  testing::UnconstrainedNash lqr = testing::lqr_reference(g);
  CHECK(std::abs(res.cost_certificate[0] - lqr.costs[0]) < 1e-8);
  CHECK(std::abs(res.cost_rollout[0] - lqr.costs[0]) < 1e-8);
}

TEST_CASE("checks are pure functions of their inputs") {
  std::mt19937_64 rng(149);
  EquilibriumResult res;
  RiccatiE re;
  GameSpec g = solved_random_game(rng, &res, &re);
  VerifyOptions vo;
  vo.probes = 5;
  vo.seed = 42;
  ResidualReport a = run_all_checks(g, re, res, vo);
  ResidualReport b = run_all_checks(g, re, res, vo);
  REQUIRE(a.families.size() == b.families.size());
  for (std::size_t f = 0; f < a.families.size(); ++f) {
    CHECK(a.families[f].name == b.families[f].name);
    CHECK(a.families[f].max_residual == b.families[f].max_residual);
  }
}
