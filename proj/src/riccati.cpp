#include "dgc/riccati.hpp"

#include "dgc/solution_io.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <fstream>

namespace dgc {

namespace {

double rel_asymmetry(const Matrix& m) {
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() / scale;
}

} // namespace

RiccatiE solve_riccati_E(const GameSpec& g, const RiccatiOptions& opts) {
  const Dimensions& d = g.dims;
  const int N = d.num_players, K = d.horizon, n = d.state_dim;

  RiccatiE out;
  out.E.assign(N, std::vector<Matrix>(K + 1, Matrix::Zero(n, n)));
  out.Y.assign(N, {});
  out.player_ok.assign(N, true);
  out.failing_stage.assign(N, -1);
  out.all_Y_invertible = true;
  out.all_Y_positive_definite = true;
  out.min_eig_Y = std::numeric_limits<double>::infinity();

  for (int i = 0; i < N; ++i) {
    out.Y[i].assign(K, Matrix::Zero(d.control_dims[i], d.control_dims[i]));
    out.E[i][K] = g.costs[i].Q[K];
    for (int k = K - 1; k >= 0; --k) {
      const Matrix& A = g.dynamics.A[k];
      const Matrix& B = g.dynamics.B[k][i];
      const Matrix& En = out.E[i][k + 1];
      Matrix Y = g.costs[i].R[k][i] + B.transpose() * En * B;
      Y = 0.5 * (Y + Y.transpose()).eval();
      out.Y[i][k] = Y;

      Eigen::SelfAdjointEigenSolver<Matrix> eig(Y, Eigen::EigenvaluesOnly);
      double min_eig = eig.eigenvalues().minCoeff();
      double max_abs = eig.eigenvalues().cwiseAbs().maxCoeff();
      out.min_eig_Y = std::min(out.min_eig_Y, min_eig);
      bool invertible =
          max_abs > 0.0 && eig.eigenvalues().cwiseAbs().minCoeff() > opts.rcond_min * max_abs;
      if (!(invertible && min_eig > 0.0)) out.all_Y_positive_definite = false;
      if (!invertible) {
        out.all_Y_invertible = false;
        out.player_ok[i] = false;
        out.failing_stage[i] = k;
        break; // the sweep cannot continue past a singular Y
      }

      Matrix BtEA = B.transpose() * En * A;
      Matrix Ek = A.transpose() * En * A + g.costs[i].Q[k] -
                  BtEA.transpose() * Y.lu().solve(BtEA);
      out.E[i][k] = 0.5 * (Ek + Ek.transpose()).eval();
    }
  }
  if (out.min_eig_Y == std::numeric_limits<double>::infinity()) out.min_eig_Y = 0.0;
  return out;
}

RiccatiP solve_riccati_P(const GameSpec& g, const RiccatiOptions& opts) {
  const Dimensions& d = g.dims;
  const int N = d.num_players, K = d.horizon, n = d.state_dim;

  RiccatiP out;
  out.P.assign(N, std::vector<Matrix>(K + 1, Matrix::Zero(n, n)));
  out.Lambda.assign(K, Matrix::Zero(n, n));
  out.lambda_invertible.assign(K, false);
  out.lambda_rcond.assign(K, 0.0);
  out.all_lambda_invertible = true;
  out.max_asymmetry = 0.0;

  for (int i = 0; i < N; ++i) out.P[i][K] = g.costs[i].Q[K];

  for (int k = K - 1; k >= 0; --k) {
    Matrix Lambda = Matrix::Identity(n, n);
    for (int j = 0; j < N; ++j) {
      const Matrix& B = g.dynamics.B[k][j];
      Lambda += B * g.costs[j].R[k][j].lu().solve(B.transpose() * out.P[j][k + 1]);
    }
    out.Lambda[k] = Lambda;
    Eigen::PartialPivLU<Matrix> lu(Lambda);
    double rcond = lu.rcond();
    out.lambda_rcond[k] = rcond;
    out.lambda_invertible[k] = std::isfinite(rcond) && rcond > opts.rcond_min;
    if (!out.lambda_invertible[k]) {
      out.all_lambda_invertible = false;
      out.failing_stage = k;
      break;
    }
    Matrix LinvA = lu.solve(g.dynamics.A[k]);
    for (int i = 0; i < N; ++i) {
      Matrix Pk = g.costs[i].Q[k] +
                  g.dynamics.A[k].transpose() * out.P[i][k + 1] * LinvA;
      double asym = rel_asymmetry(Pk);
      out.max_asymmetry = std::max(out.max_asymmetry, asym);
      // Symmetrize only within tolerance: past it the raw update is the one
      // that keeps the costate representation exact, so it is preserved and
      // the drift is surfaced through max_asymmetry.
      if (asym <= opts.sym_tol) Pk = 0.5 * (Pk + Pk.transpose()).eval();
      out.P[i][k] = std::move(Pk);
    }
  }
  return out;
}

void dump_matrix_sequence_csv(const std::vector<Matrix>& seq, const std::string& path) {
  std::ofstream f(path);
  for (std::size_t k = 0; k < seq.size(); ++k) {
    f << k;
    for (int r = 0; r < seq[k].rows(); ++r)
      for (int c = 0; c < seq[k].cols(); ++c) f << "," << format_double(seq[k](r, c));
    f << "\n";
  }
}

} // namespace dgc
