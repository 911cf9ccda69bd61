#include "dgc/lcp.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace dgc;

namespace {

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

} // namespace

TEST_CASE("decoupled two-dimensional instance") {
  LcpInstance p{Matrix::Identity(2, 2), vec2(-1.0, 2.0)};
  LcpSolution s = lemke_solve(p);
  REQUIRE(s.status == LcpStatus::Solved);
  CHECK(s.z(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.z(1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.w(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.w(1) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("nonnegative q short-circuits") {
  LcpInstance p{mat2(0.0, -1.0, -1.0, 0.0), vec2(3.0, 1.0)};
  LcpSolution s = lemke_solve(p);
  CHECK(s.status == LcpStatus::TrivialQNonneg);
  CHECK(s.z.isZero(0.0));
  CHECK((s.w - p.q).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("degenerate ties resolved deterministically") {
  LcpInstance p{Matrix::Identity(3, 3), Vector::Constant(3, -1.0)};
  LcpSolution s1 = lemke_solve(p);
  LcpSolution s2 = lemke_solve(p);
  REQUIRE(s1.status == LcpStatus::Solved);
  CHECK((s1.z - Vector::Constant(3, 1.0)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((s1.z - s2.z).cwiseAbs().maxCoeff() == 0.0);
  CHECK(s1.pivots == s2.pivots);
}

TEST_CASE("enumeration on the decoupled instance finds exactly one solution") {
  LcpInstance p{Matrix::Identity(2, 2), vec2(-1.0, 2.0)};
  auto all = enumeration_oracle(p);
  REQUIRE(all.size() == 1);
  CHECK((all[0].z - vec2(1.0, 0.0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("enumeration keeps the trivial solution when q is nonnegative") {
  LcpInstance p{mat2(0.0, -1.0, -1.0, 0.0), vec2(1.0, 1.0)};
  auto all = enumeration_oracle(p);
  bool has_zero = false;
  for (const auto& s : all)
    if (s.z.cwiseAbs().maxCoeff() < 1e-12) has_zero = true;
  CHECK(has_zero);
}

TEST_CASE("enumeration refuses large instances") {
  LcpInstance p{Matrix::Identity(26, 26), Vector::Constant(26, -1.0)};
  CHECK_THROWS_AS(enumeration_oracle(p), std::invalid_argument);
}

TEST_CASE("random positive definite instances match the enumeration oracle") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  int solved = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int d = 6;
    Matrix a(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) a(r, c) = unif(rng);
    Matrix M = a.transpose() * a + 0.3 * Matrix::Identity(d, d);
    Vector q(d);
    for (int r = 0; r < d; ++r) q(r) = unif(rng);
    LcpInstance p{M, q};

    LcpSolution s = lemke_solve(p);
    REQUIRE(s.status != LcpStatus::SecondaryRay); // PD matrices are Q-matrices
    if (s.status == LcpStatus::TrivialQNonneg) continue;
    REQUIRE(s.status == LcpStatus::Solved);
    ++solved;
    CHECK(s.comp_residual <= 1e-8);
    CHECK(s.feas_residual <= 1e-8);

    auto all = enumeration_oracle(p, 1e-9);
    REQUIRE(all.size() == 1); // unique solution for symmetric PD M
    CHECK((all[0].z - s.z).cwiseAbs().maxCoeff() <= 1e-9);
  }
  CHECK(solved >= 30);
}

TEST_CASE("positive rescaling leaves the solution set unchanged") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const int d = 5;
  Matrix a(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) a(r, c) = unif(rng);
  Matrix M = a.transpose() * a + 0.5 * Matrix::Identity(d, d);
  Vector q(d);
  for (int r = 0; r < d; ++r) q(r) = unif(rng);

  auto base = enumeration_oracle({M, q});
  auto scaled = enumeration_oracle({37.5 * M, 37.5 * q});
  REQUIRE(base.size() == scaled.size());
  for (std::size_t i = 0; i < base.size(); ++i)
    CHECK((base[i].z - scaled[i].z).cwiseAbs().maxCoeff() <= 1e-8);

  LcpSolution s1 = lemke_solve({M, q});
  LcpSolution s2 = lemke_solve({37.5 * M, 37.5 * q});
  REQUIRE(s1.status == LcpStatus::Solved);
  REQUIRE(s2.status == LcpStatus::Solved);
  CHECK((s1.z - s2.z).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("solved residuals are measured against the original data") {
  // badly scaled rows: equilibration must not leak into the report
  Matrix M = mat2(1e6, 0.0, 0.0, 1e-4);
  Vector q = vec2(-1e6, -1e-4);
  LcpSolution s = lemke_solve({M, q});
  REQUIRE(s.status == LcpStatus::Solved);
  CHECK((M * s.z + q - s.w).cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.comp_residual <= 1e-8);
}

TEST_CASE("replay text round-trips") {
  LcpInstance p{mat2(1.25, -0.5, 0.75, 2.0), vec2(-1.0 / 3.0, 0.125)};
  LcpInstance back = from_replay_text(to_replay_text(p));
  CHECK((back.M - p.M).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.q - p.q).cwiseAbs().maxCoeff() == 0.0);
}
