#include "dgc/lcp.hpp"

#include "dgc/log.hpp"

#include <Eigen/LU>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dgc {

const char* to_string(LcpStatus s) {
  switch (s) {
    case LcpStatus::Solved: return "Solved";
    case LcpStatus::SecondaryRay: return "SecondaryRay";
    case LcpStatus::PivotLimit: return "PivotLimit";
    case LcpStatus::TrivialQNonneg: return "TrivialQNonneg";
  }
  return "?";
}

namespace {

void finish_residuals(const LcpInstance& p, LcpSolution& sol) {
  sol.w = p.M * sol.z + p.q;
  sol.comp_residual = sol.z.size() == 0
                          ? 0.0
                          : sol.z.cwiseProduct(sol.w).cwiseAbs().maxCoeff();
  double min_z = sol.z.size() == 0 ? 0.0 : sol.z.minCoeff();
  double min_w = sol.w.size() == 0 ? 0.0 : sol.w.minCoeff();
  sol.feas_residual = std::max({0.0, -min_z, -min_w});
}

// The support refit: accumulated pivot roundoff is removed by re-solving the
// complementary basis system on the final support against the original data.
void polish_solution(const LcpInstance& p, LcpSolution& sol, double tol_feas) {
  std::vector<int> support;
  for (int i = 0; i < p.dim(); ++i)
    if (sol.z(i) > 0.0) support.push_back(i);
  if (support.empty()) return;
  const int s = static_cast<int>(support.size());
  Matrix Mss(s, s);
  Vector qs(s);
  for (int a = 0; a < s; ++a) {
    qs(a) = p.q(support[a]);
    for (int b = 0; b < s; ++b) Mss(a, b) = p.M(support[a], support[b]);
  }
  Eigen::PartialPivLU<Matrix> lu(Mss);
  Vector zs = lu.solve(-qs);
  if (!zs.allFinite()) return;
  LcpSolution cand = sol;
  cand.z.setZero();
  for (int a = 0; a < s; ++a) cand.z(support[a]) = std::max(zs(a), 0.0);
  finish_residuals(p, cand);
  if (std::max(cand.comp_residual, cand.feas_residual) <
      std::max(sol.comp_residual, sol.feas_residual)) {
    sol.z = cand.z;
    sol.w = cand.w;
    sol.comp_residual = cand.comp_residual;
    sol.feas_residual = cand.feas_residual;
  }
  (void)tol_feas;
}

} // namespace

LcpSolution lemke_solve(const LcpInstance& p, const LemkeOptions& opts) {
  const int d = p.dim();
  if (p.M.rows() != d || p.M.cols() != d)
    throw std::invalid_argument("lemke_solve: M must be square and match q");
  if (!p.M.allFinite() || !p.q.allFinite())
    throw std::invalid_argument("lemke_solve: non-finite instance");

  LcpSolution sol;
  sol.z = Vector::Zero(d);
  if (d == 0) {
    sol.status = LcpStatus::TrivialQNonneg;
    sol.w = Vector::Zero(0);
    return sol;
  }
  if (p.q.minCoeff() >= 0.0) {
    sol.status = LcpStatus::TrivialQNonneg;
    finish_residuals(p, sol);
    return sol;
  }

  // Row scaling of [M q] leaves the solution set untouched (w is scaled by a
  // positive diagonal); residuals are always reported against the original.
  Matrix M = p.M;
  Vector q = p.q;
  if (opts.equilibrate) {
    for (int i = 0; i < d; ++i) {
      double scale = std::max(M.row(i).cwiseAbs().maxCoeff(), std::abs(q(i)));
      if (scale > 0.0) {
        M.row(i) /= scale;
        q(i) /= scale;
      }
    }
  }

  // Tableau columns: w_0..w_{d-1} | z_0..z_{d-1} | artificial | rhs.
  const int col_z0 = 2 * d;
  const int col_q = 2 * d + 1;
  Matrix T(d, 2 * d + 2);
  T.leftCols(d).setIdentity();
  T.middleCols(d, d) = -M;
  T.col(col_z0).setConstant(-1.0);
  T.col(col_q) = q;

  std::vector<int> basic(d);
  for (int i = 0; i < d; ++i) basic[i] = i; // all w basic

  // Lexicographic comparison of candidate ratio rows: (rhs, inverse-basis
  // part) divided by the pivot entry appears componentwise; the w-columns of
  // the tableau are exactly the inverse basis.
  auto lex_less = [&](int ra, int rb, int col) {
    double pa = T(ra, col), pb = T(rb, col);
    double va = T(ra, col_q) / pa, vb = T(rb, col_q) / pb;
    if (va != vb) return va < vb;
    for (int cc = 0; cc < d; ++cc) {
      va = T(ra, cc) / pa;
      vb = T(rb, cc) / pb;
      if (va != vb) return va < vb;
    }
    return ra < rb;
  };

  auto pivot = [&](int row, int col) {
    T.row(row) /= T(row, col);
    for (int r = 0; r < d; ++r) {
      if (r == row) continue;
      double f = T(r, col);
      if (f != 0.0) T.row(r) -= f * T.row(row);
    }
  };

  // Entering ray: drive the artificial variable up until the most negative
  // rhs row turns zero. Ratio rows against the artificial column all have
  // pivot entry -1, so the lexicographic choice is over (-rhs, -invbasis).
  int start_row = 0;
  for (int r = 1; r < d; ++r) {
    if (T(r, col_q) < T(start_row, col_q)) {
      start_row = r;
    } else if (T(r, col_q) == T(start_row, col_q) && lex_less(start_row, r, col_z0)) {
      // lex_less with the negative pivot orders reversed: keep the lex-min
      // ratio row, which is the lex-max of (rhs, invbasis).
      start_row = r;
    }
  }
  pivot(start_row, col_z0);
  int leaving = basic[start_row]; // some w_i
  basic[start_row] = col_z0;
  int entering = leaving + d; // complement z_i of the leaving w_i

  const int max_pivots = opts.max_pivots > 0 ? opts.max_pivots : 50 * d;
  sol.pivots = 1;
  while (true) {
    if (sol.pivots > max_pivots) {
      sol.status = LcpStatus::PivotLimit;
      finish_residuals(p, sol);
      return sol;
    }
    // Blocking row: lexicographic minimum ratio over safely positive pivots;
    // entries in (0, tol_piv] are numerically hazardous and excluded.
    int row = -1;
    bool any_positive = false;
    for (int r = 0; r < d; ++r) {
      double e = T(r, entering);
      if (e > 0.0) {
        any_positive = true;
        if (e > opts.tol_piv && (row < 0 || lex_less(r, row, entering))) row = r;
      }
    }
    if (row < 0) {
      sol.status = any_positive ? LcpStatus::PivotLimit : LcpStatus::SecondaryRay;
      if (any_positive)
        log_debug("lemke: only sub-tolerance pivots available, giving up");
      finish_residuals(p, sol);
      return sol;
    }

    pivot(row, entering);
    leaving = basic[row];
    basic[row] = entering;
    ++sol.pivots;

    if (leaving == col_z0) break;
    entering = leaving < d ? leaving + d : leaving - d;
  }

  for (int r = 0; r < d; ++r)
    if (basic[r] >= d && basic[r] < 2 * d) sol.z(basic[r] - d) = std::max(T(r, col_q), 0.0);
  sol.status = LcpStatus::Solved;
  finish_residuals(p, sol);
  if (opts.polish) polish_solution(p, sol, opts.tol_feas);

  if (sol.comp_residual > opts.tol_comp || sol.feas_residual > opts.tol_feas) {
    log_debug("lemke: terminated basis fails the residual check (comp=" +
              std::to_string(sol.comp_residual) + ", feas=" +
              std::to_string(sol.feas_residual) + ")");
    sol.status = LcpStatus::PivotLimit;
  }
  return sol;
}

std::vector<LcpSolution> enumeration_oracle(const LcpInstance& p, double tol,
                                            double dedup_tol) {
  const int d = p.dim();
  if (d > max_enum_dim)
    throw std::invalid_argument("enumeration_oracle: dimension " + std::to_string(d) +
                                " exceeds the 2^d scan limit of " +
                                std::to_string(max_enum_dim));
  std::vector<LcpSolution> found;
  const std::uint64_t subsets = std::uint64_t{1} << d;
  for (std::uint64_t mask = 0; mask < subsets; ++mask) {
    std::vector<int> S;
    for (int i = 0; i < d; ++i)
      if (mask & (std::uint64_t{1} << i)) S.push_back(i);
    const int s = static_cast<int>(S.size());
    Vector z = Vector::Zero(d);
    if (s > 0) {
      Matrix Mss(s, s);
      Vector qs(s);
      for (int a = 0; a < s; ++a) {
        qs(a) = p.q(S[a]);
        for (int b = 0; b < s; ++b) Mss(a, b) = p.M(S[a], S[b]);
      }
      Eigen::FullPivLU<Matrix> lu(Mss);
      if (!lu.isInvertible()) continue;
      Vector zs = lu.solve(-qs);
      for (int a = 0; a < s; ++a) z(S[a]) = zs(a);
    }
    if (z.minCoeff() < -tol) continue;
    Vector w = p.M * z + p.q;
    bool ok = true;
    for (int i = 0; i < d && ok; ++i) {
      bool in_S = mask & (std::uint64_t{1} << i);
      if (in_S && std::abs(w(i)) > tol) ok = false;
      if (!in_S && w(i) < -tol) ok = false;
    }
    if (!ok) continue;
    bool dup = false;
    for (const auto& prev : found)
      if ((prev.z - z).cwiseAbs().maxCoeff() <= dedup_tol) {
        dup = true;
        break;
      }
    if (dup) continue;
    LcpSolution sol;
    sol.z = z;
    sol.status = LcpStatus::Solved;
    finish_residuals(p, sol);
    found.push_back(std::move(sol));
  }
  return found;
}

std::string to_replay_text(const LcpInstance& p) {
  std::ostringstream os;
  os.precision(17);
  os << "lcp " << p.dim() << "\n";
  for (int r = 0; r < p.dim(); ++r) {
    for (int c = 0; c < p.dim(); ++c) os << (c ? " " : "") << p.M(r, c);
    os << "\n";
  }
  for (int i = 0; i < p.dim(); ++i) os << (i ? " " : "") << p.q(i);
  os << "\n";
  return os.str();
}

LcpInstance from_replay_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  // leading comment lines carry provenance (spec name/hash)
  std::istringstream header;
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] == '#') continue;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    header.str(line);
    break;
  }
  std::string tag;
  int d = 0;
  if (!(header >> tag >> d) || tag != "lcp" || d < 0)
    throw std::invalid_argument("bad replay header");
  LcpInstance p;
  p.M.resize(d, d);
  p.q.resize(d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c)
      if (!(is >> p.M(r, c))) throw std::invalid_argument("truncated replay matrix");
  for (int i = 0; i < d; ++i)
    if (!(is >> p.q(i))) throw std::invalid_argument("truncated replay vector");
  return p;
}

} // namespace dgc
