#pragma once

#include "dgc/pipeline.hpp"
#include "dgc/types.hpp"

#include <array>
#include <string>

namespace dgc {

// Two-source/two-relay network flow game. Index conventions: i = player
// (source), l = relay path. Rates v^{il} are recovered from the shifted
// controls u^{il} = v^{il} - w^{il}/t^{il}.
struct NetflowParams {
  int K = 60;
  std::array<double, 2> x0 = {9.0, 6.0};
  std::array<double, 2> b_min = {1.0, 0.5};
  std::array<double, 2> depletion = {0.125, 0.075}; // delta^l
  double beta = 0.95;
  std::array<std::array<double, 2>, 2> w = {{{30.0, 16.0}, {26.0, 10.0}}};
  std::array<std::array<double, 2>, 2> t = {{{10.0, 10.0}, {10.0, 10.0}}};
  std::array<std::array<double, 2>, 2> d = {{{6.0, 6.0}, {6.0, 6.0}}};
  std::array<std::array<double, 2>, 2> D = {{{8.0, 8.0}, {8.0, 8.0}}};
  std::array<std::array<double, 2>, 2> s = {{{6.0, 5.5}, {7.0, 7.5}}};
  std::array<std::array<double, 2>, 2> S = {{{8.0, 8.5}, {9.0, 9.5}}};
  std::array<double, 2> relay_cap = {5.4, 2.6};  // c^l
  std::array<double, 2> dest_cap = {4.0, 3.0};   // c-tilde^i

  double vbar(int i, int l) const { return w[i][l] / t[i][l]; }
};

// Standard-form instance: state (battery1, battery2, constant 1), two
// controls per player, nine constraint rows per player. Constraint row order
// within a player's block: v >= 0 (2), v <= vbar (2), relay capacity (2),
// battery floor (2), destination capacity (1).
GameSpec build_netflow_spec(const NetflowParams& p = {});

struct NetflowReport {
  // v[k](i, l): recovered flow of player i on path l at stage k.
  std::vector<Matrix> v;
  std::vector<Vector> relay_load;   // L_k^l = v^{1l} + v^{2l}, per stage
  std::vector<Vector> dest_load;    // Ltilde_k^i = v^{i1} + v^{i2}
  std::vector<Vector> battery;      // K+1 entries, 2 levels
  // First stage after which both players' flow through relay l stays <= tol.
  std::array<int, 2> stop_stage = {-1, -1};
  // Active-constraint flags per stage, players stacked (values <= tol_active).
  std::vector<std::vector<int>> active_rows;
  double flow_tol = 1e-6;
};

NetflowReport postprocess_netflow(const GameSpec& g, const EquilibriumResult& res,
                                  const NetflowParams& p,
                                  double tol_active = 1e-6);

std::string netflow_report_to_json(const NetflowReport& rep);

} // namespace dgc
