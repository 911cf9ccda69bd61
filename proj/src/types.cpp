#include "dgc/types.hpp"

#include <numeric>

namespace dgc {

int Dimensions::control_dim() const {
  return std::accumulate(control_dims.begin(), control_dims.end(), 0);
}

int Dimensions::constraint_dim() const {
  return std::accumulate(constraint_dims.begin(), constraint_dims.end(), 0);
}

int Dimensions::control_offset(int player) const {
  return std::accumulate(control_dims.begin(), control_dims.begin() + player, 0);
}

int Dimensions::constraint_offset(int player) const {
  return std::accumulate(constraint_dims.begin(), constraint_dims.begin() + player, 0);
}

Matrix StageDynamics::joint_B(int k) const {
  const auto& blocks = B.at(k);
  int n = static_cast<int>(blocks.front().rows());
  int m = 0;
  for (const auto& b : blocks) m += static_cast<int>(b.cols());
  Matrix out(n, m);
  int col = 0;
  for (const auto& b : blocks) {
    out.middleCols(col, b.cols()) = b;
    col += static_cast<int>(b.cols());
  }
  return out;
}

Matrix GameSpec::constraint_N_block(int k, int i, int j) const {
  return constraints.at(i).N.at(k).middleCols(dims.control_offset(j),
                                              dims.control_dims.at(j));
}

Matrix GameSpec::stacked_M(int k) const {
  Matrix out(dims.constraint_dim(), dims.state_dim);
  for (int i = 0; i < dims.num_players; ++i)
    out.middleRows(dims.constraint_offset(i), dims.constraint_dims[i]) =
        constraints[i].M.at(k);
  return out;
}

Matrix GameSpec::stacked_N(int k) const {
  Matrix out(dims.constraint_dim(), dims.control_dim());
  for (int i = 0; i < dims.num_players; ++i)
    out.middleRows(dims.constraint_offset(i), dims.constraint_dims[i]) =
        constraints[i].N.at(k);
  return out;
}

Vector GameSpec::stacked_r(int k) const {
  Vector out(dims.constraint_dim());
  for (int i = 0; i < dims.num_players; ++i)
    out.segment(dims.constraint_offset(i), dims.constraint_dims[i]) =
        constraints[i].r.at(k);
  return out;
}

Vector GameSpec::stacked_p(int k) const {
  Vector out(dims.num_players * dims.state_dim);
  for (int i = 0; i < dims.num_players; ++i)
    out.segment(i * dims.state_dim, dims.state_dim) = costs[i].p.at(k);
  return out;
}

Vector GameSpec::constraint_values(int k, const Vector& x, const Vector& u) const {
  return stacked_M(k) * x + stacked_N(k) * u + stacked_r(k);
}

std::vector<Vector> rollout(const GameSpec& g, const std::vector<Vector>& u) {
  std::vector<Vector> x(g.dims.horizon + 1);
  x[0] = g.dynamics.x0;
  for (int k = 0; k < g.dims.horizon; ++k)
    x[k + 1] = g.dynamics.A[k] * x[k] + g.dynamics.joint_B(k) * u[k];
  return x;
}

double direct_cost(const GameSpec& g, int player, const std::vector<Vector>& x,
                   const std::vector<Vector>& u) {
  const auto& cost = g.costs.at(player);
  const int K = g.dims.horizon;
  // Kahan summation: discounted horizons accumulate many small terms.
  double sum = 0.0, carry = 0.0;
  auto add = [&](double term) {
    double y = term - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  };
  for (int k = 0; k < K; ++k) {
    add(0.5 * x[k].dot(cost.Q[k] * x[k]));
    add(cost.p[k].dot(x[k]));
    for (int j = 0; j < g.dims.num_players; ++j) {
      const Vector uj = u[k].segment(g.dims.control_offset(j), g.dims.control_dims[j]);
      add(0.5 * uj.dot(cost.R[k][j] * uj));
    }
  }
  add(0.5 * x[K].dot(cost.Q[K] * x[K]));
  add(cost.p[K].dot(x[K]));
  return sum;
}

} // namespace dgc
