#pragma once

#include "dgc/types.hpp"

#include <string>
#include <vector>

namespace dgc {

// Dense linear complementarity problem: find z >= 0 with w = M z + q >= 0 and
// z'w = 0.
struct LcpInstance {
  Matrix M;
  Vector q;
  int dim() const { return static_cast<int>(q.size()); }
};

enum class LcpStatus {
  Solved,
  SecondaryRay,  // Lemke ray termination; no conclusion about solvability
  PivotLimit,
  TrivialQNonneg // q >= 0, so z = 0 solves
};

const char* to_string(LcpStatus s);

struct LcpSolution {
  Vector z;
  Vector w;
  LcpStatus status = LcpStatus::PivotLimit;
  int pivots = 0;
  double comp_residual = 0.0; // max_i |z_i w_i|, against the original data
  double feas_residual = 0.0; // max(0, -min z, -min w)
};

struct LemkeOptions {
  double tol_piv = 1e-10;
  double tol_comp = 1e-8;
  double tol_feas = 1e-8;
  int max_pivots = 0;  // 0 means 50 * dim
  // Rescale rows of [M q] to unit infinity norm before pivoting (undone for
  // all reported residuals). Row scaling does not change the solution set.
  bool equilibrate = true;
  // After a successful run, re-solve M_SS z_S = -q_S on the final support to
  // clean up accumulated pivot roundoff; kept only if it tightens residuals.
  bool polish = true;
};

// Lemke complementary pivoting, scheme I: covering vector of ones, artificial
// variable z0, lexicographic minimum-ratio rule for ties/degeneracy.
LcpSolution lemke_solve(const LcpInstance& p, const LemkeOptions& opts = {});

// Exhaustive active-set enumeration; returns every complementary solution
// (deduplicated within dedup_tol). Only for small instances: the scan is
// 2^dim. Throws std::invalid_argument above max_enum_dim.
inline constexpr int max_enum_dim = 25;
std::vector<LcpSolution> enumeration_oracle(const LcpInstance& p,
                                            double tol = 1e-8,
                                            double dedup_tol = 1e-8);

// Plain-text replay format: "lcp <d>" header, d rows of M, then q on one
// line, 17 significant digits.
std::string to_replay_text(const LcpInstance& p);
LcpInstance from_replay_text(const std::string& text);

} // namespace dgc
