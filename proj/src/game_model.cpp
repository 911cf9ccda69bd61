#include "dgc/game_model.hpp"

#include "dgc/lcp.hpp"
#include "dgc/log.hpp"

#include <json.hpp>

#include <Eigen/SVD>

#include <cmath>
#include <fstream>
#include <sstream>

namespace dgc {

using nlohmann::json;

namespace {

[[noreturn]] void shape_error(const std::string& what) {
  throw SpecError(SpecError::Kind::Shape, what);
}

[[noreturn]] void parse_error(const std::string& what) {
  throw SpecError(SpecError::Kind::Parse, what);
}

std::string block_tag(const std::string& symbol, int player, int stage) {
  std::ostringstream os;
  os << symbol;
  if (player >= 0) os << "^" << (player + 1);
  if (stage >= 0) os << " at stage " << stage;
  return os.str();
}

void check_finite(const Matrix& m, const std::string& tag) {
  if (!m.allFinite())
    throw SpecError(SpecError::Kind::Value, "non-finite entry in " + tag);
}

Matrix parse_matrix(const json& j, int rows, int cols, const std::string& tag) {
  if (!j.is_array()) shape_error(tag + ": expected an array of rows");
  if (static_cast<int>(j.size()) != rows)
    shape_error(tag + ": expected " + std::to_string(rows) + " rows, got " +
                std::to_string(j.size()));
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const json& row = j[r];
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      shape_error(tag + ": row " + std::to_string(r) + " must have " +
                  std::to_string(cols) + " entries");
    for (int c = 0; c < cols; ++c) {
      if (!row[c].is_number()) shape_error(tag + ": non-numeric entry");
      m(r, c) = row[c].get<double>();
    }
  }
  check_finite(m, tag);
  return m;
}

Vector parse_vector(const json& j, int size, const std::string& tag) {
  if (!j.is_array() || static_cast<int>(j.size()) != size)
    shape_error(tag + ": expected a vector of length " + std::to_string(size));
  Vector v(size);
  for (int i = 0; i < size; ++i) {
    if (!j[i].is_number()) shape_error(tag + ": non-numeric entry");
    v(i) = j[i].get<double>();
  }
  if (!v.allFinite())
    throw SpecError(SpecError::Kind::Value, "non-finite entry in " + tag);
  return v;
}

// Mat|[Mat;count]: a bare matrix broadcasts over all stages.
std::vector<Matrix> parse_matrix_seq(const json& j, int count, int rows, int cols,
                                     const std::string& symbol, int player) {
  bool is_list = j.is_array() && !j.empty() && j[0].is_array() &&
                 (!j[0].empty() && j[0][0].is_array());
  // Zero-row blocks can't reveal their nesting; treat them as broadcast.
  if (rows == 0) is_list = false;
  std::vector<Matrix> out;
  out.reserve(count);
  if (is_list) {
    if (static_cast<int>(j.size()) != count)
      shape_error(block_tag(symbol, player, -1) + ": per-stage list must have " +
                  std::to_string(count) + " entries, got " + std::to_string(j.size()));
    for (int k = 0; k < count; ++k)
      out.push_back(parse_matrix(j[k], rows, cols, block_tag(symbol, player, k)));
  } else {
    Matrix m = rows == 0 ? Matrix(0, cols)
                         : parse_matrix(j, rows, cols, block_tag(symbol, player, -1));
    out.assign(count, m);
  }
  return out;
}

std::vector<Vector> parse_vector_seq(const json& j, int count, int size,
                                     const std::string& symbol, int player) {
  bool is_list = j.is_array() && !j.empty() && j[0].is_array();
  if (size == 0) is_list = false;
  std::vector<Vector> out;
  out.reserve(count);
  if (is_list) {
    if (static_cast<int>(j.size()) != count)
      shape_error(block_tag(symbol, player, -1) + ": per-stage list must have " +
                  std::to_string(count) + " entries, got " + std::to_string(j.size()));
    for (int k = 0; k < count; ++k)
      out.push_back(parse_vector(j[k], size, block_tag(symbol, player, k)));
  } else {
    Vector v = size == 0 ? Vector(0) : parse_vector(j, size, block_tag(symbol, player, -1));
    out.assign(count, v);
  }
  return out;
}

int get_positive_int(const json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_number_integer())
    shape_error("missing or non-integer field '" + key + "'");
  int v = j[key].get<int>();
  if (v < 1) shape_error("field '" + key + "' must be >= 1");
  return v;
}

// (a, b) 1-based player pair from an R key like "12" or "1,2".
std::pair<int, int> parse_r_key(const std::string& key, int num_players) {
  auto comma = key.find(',');
  int a = 0, b = 0;
  try {
    if (comma != std::string::npos) {
      a = std::stoi(key.substr(0, comma));
      b = std::stoi(key.substr(comma + 1));
    } else if (key.size() == 2) {
      a = key[0] - '0';
      b = key[1] - '0';
    } else {
      shape_error("R key '" + key + "' must be 'ij' or 'i,j'");
    }
  } catch (const std::logic_error&) {
    shape_error("R key '" + key + "' must be 'ij' or 'i,j'");
  }
  if (a < 1 || a > num_players || b < 1 || b > num_players)
    shape_error("R key '" + key + "' out of player range");
  return {a, b};
}

// Relative infinity-norm asymmetry; 0 for empty or zero matrices.
double asymmetry(const Matrix& m) {
  double scale = m.cwiseAbs().maxCoeff();
  if (m.rows() == 0 || scale == 0.0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff() / scale;
}

void symmetrize_checked(Matrix& m, double sym_tol, const std::string& tag) {
  double a = asymmetry(m);
  if (a > sym_tol)
    log_info("symmetrizing " + tag + " (relative asymmetry " + std::to_string(a) + ")");
  m = 0.5 * (m + m.transpose()).eval();
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

} // namespace

GameSpec parse_spec(const std::string& json_text, const LoadOptions& opts) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    parse_error(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) parse_error("top-level JSON value must be an object");

  GameSpec g;
  g.name = j.value("name", std::string{});
  g.description = j.value("description", std::string{});

  Dimensions& d = g.dims;
  d.num_players = get_positive_int(j, "players");
  d.horizon = get_positive_int(j, "horizon");
  d.state_dim = get_positive_int(j, "state_dim");

  if (!j.contains("control_dims") || !j["control_dims"].is_array() ||
      static_cast<int>(j["control_dims"].size()) != d.num_players)
    shape_error("'control_dims' must list one entry per player");
  for (const auto& v : j["control_dims"]) {
    int m = v.get<int>();
    if (m < 1) shape_error("every control dimension must be >= 1");
    d.control_dims.push_back(m);
  }
  if (!j.contains("constraint_dims") || !j["constraint_dims"].is_array() ||
      static_cast<int>(j["constraint_dims"].size()) != d.num_players)
    shape_error("'constraint_dims' must list one entry per player");
  for (const auto& v : j["constraint_dims"]) {
    int c = v.get<int>();
    if (c < 0) shape_error("constraint dimensions must be >= 0");
    d.constraint_dims.push_back(c);
  }

  const int N = d.num_players, K = d.horizon, n = d.state_dim;
  const int m = d.control_dim();

  g.dynamics.x0 = parse_vector(j.at("x0"), n, "x0");
  if (!j.contains("dynamics") || !j["dynamics"].is_object())
    shape_error("missing 'dynamics' object");
  g.dynamics.A = parse_matrix_seq(j["dynamics"].at("A"), K, n, n, "A", -1);
  if (!j["dynamics"].contains("B") || !j["dynamics"]["B"].is_array() ||
      static_cast<int>(j["dynamics"]["B"].size()) != N)
    shape_error("'dynamics.B' must list one block per player");
  g.dynamics.B.resize(K);
  for (int i = 0; i < N; ++i) {
    auto Bi = parse_matrix_seq(j["dynamics"]["B"][i], K, n, d.control_dims[i], "B", i);
    for (int k = 0; k < K; ++k) {
      if (i == 0) g.dynamics.B[k].resize(N);
      g.dynamics.B[k][i] = Bi[k];
    }
  }

  if (!j.contains("costs") || !j["costs"].is_array() ||
      static_cast<int>(j["costs"].size()) != N)
    shape_error("'costs' must list one entry per player");
  g.costs.resize(N);
  for (int i = 0; i < N; ++i) {
    const json& jc = j["costs"][i];
    PlayerCost& pc = g.costs[i];
    pc.Q = parse_matrix_seq(jc.at("Q"), K + 1, n, n, "Q", i);
    for (int k = 0; k <= K; ++k)
      symmetrize_checked(pc.Q[k], opts.sym_tol, block_tag("Q", i, k));
    pc.p = parse_vector_seq(jc.at("p"), K + 1, n, "p", i);
    pc.R.assign(K, std::vector<Matrix>(N));
    for (int k = 0; k < K; ++k)
      for (int jj = 0; jj < N; ++jj)
        pc.R[k][jj] = Matrix::Zero(d.control_dims[i], d.control_dims[jj]);
    if (jc.contains("R")) {
      if (!jc["R"].is_object()) shape_error(block_tag("R", i, -1) + " must be an object");
      for (const auto& [key, value] : jc["R"].items()) {
        auto [a, b] = parse_r_key(key, N);
        if (a != i + 1)
          shape_error("R key '" + key + "' in player " + std::to_string(i + 1) +
                      "'s costs must start with " + std::to_string(i + 1));
        auto seq = parse_matrix_seq(value, K, d.control_dims[i], d.control_dims[b - 1],
                                    "R" + key, i);
        for (int k = 0; k < K; ++k) pc.R[k][b - 1] = seq[k];
      }
    }
    for (int k = 0; k < K; ++k)
      symmetrize_checked(pc.R[k][i], opts.sym_tol,
                         block_tag("R" + std::to_string(i + 1) + std::to_string(i + 1), i, k));
  }

  if (!j.contains("constraints") || !j["constraints"].is_array() ||
      static_cast<int>(j["constraints"].size()) != N)
    shape_error("'constraints' must list one entry per player");
  g.constraints.resize(N);
  for (int i = 0; i < N; ++i) {
    const json& jc = j["constraints"][i];
    PlayerConstraint& cc = g.constraints[i];
    const int ci = d.constraint_dims[i];
    cc.M = parse_matrix_seq(jc.at("M"), K, ci, n, "M", i);
    cc.N = parse_matrix_seq(jc.at("N"), K, ci, m, "N", i);
    cc.r = parse_vector_seq(jc.at("r"), K, ci, "r", i);
  }
  return g;
}

GameSpec load_spec(const std::string& path, const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) parse_error("cannot open spec file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str(), opts);
}

std::string spec_to_json(const GameSpec& g) {
  const Dimensions& d = g.dims;
  json j;
  j["name"] = g.name;
  if (!g.description.empty()) j["description"] = g.description;
  j["players"] = d.num_players;
  j["horizon"] = d.horizon;
  j["state_dim"] = d.state_dim;
  j["control_dims"] = d.control_dims;
  j["constraint_dims"] = d.constraint_dims;
  j["x0"] = vector_to_json(g.dynamics.x0);

  json A = json::array();
  for (const auto& a : g.dynamics.A) A.push_back(matrix_to_json(a));
  json B = json::array();
  for (int i = 0; i < d.num_players; ++i) {
    json Bi = json::array();
    for (int k = 0; k < d.horizon; ++k) Bi.push_back(matrix_to_json(g.dynamics.B[k][i]));
    B.push_back(std::move(Bi));
  }
  j["dynamics"] = {{"A", std::move(A)}, {"B", std::move(B)}};

  json costs = json::array();
  for (int i = 0; i < d.num_players; ++i) {
    json jc;
    json Q = json::array(), p = json::array();
    for (const auto& q : g.costs[i].Q) Q.push_back(matrix_to_json(q));
    for (const auto& pv : g.costs[i].p) p.push_back(vector_to_json(pv));
    jc["Q"] = std::move(Q);
    jc["p"] = std::move(p);
    json R = json::object();
    for (int b = 0; b < d.num_players; ++b) {
      bool all_zero = true;
      for (int k = 0; k < d.horizon && all_zero; ++k)
        all_zero = g.costs[i].R[k][b].isZero(0.0);
      if (all_zero && b != i) continue;
      json seq = json::array();
      for (int k = 0; k < d.horizon; ++k) seq.push_back(matrix_to_json(g.costs[i].R[k][b]));
      R[std::to_string(i + 1) + std::to_string(b + 1)] = std::move(seq);
    }
    jc["R"] = std::move(R);
    costs.push_back(std::move(jc));
  }
  j["costs"] = std::move(costs);

  json cons = json::array();
  for (int i = 0; i < d.num_players; ++i) {
    json jc;
    json M = json::array(), Nn = json::array(), r = json::array();
    for (const auto& mm : g.constraints[i].M) M.push_back(matrix_to_json(mm));
    for (const auto& nn : g.constraints[i].N) Nn.push_back(matrix_to_json(nn));
    for (const auto& rr : g.constraints[i].r) r.push_back(vector_to_json(rr));
    jc["M"] = std::move(M);
    jc["N"] = std::move(Nn);
    jc["r"] = std::move(r);
    cons.push_back(std::move(jc));
  }
  j["constraints"] = std::move(cons);
  return j.dump(1);
}

void save_spec(const GameSpec& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SpecError(SpecError::Kind::Parse, "cannot write spec file: " + path);
  out << spec_to_json(g) << "\n";
}

ValidationReport validate_assumption1(const GameSpec& g, double tol_pd, double tol_rank) {
  ValidationReport rep;
  const Dimensions& d = g.dims;
  for (int i = 0; i < d.num_players; ++i) {
    const int ci = d.constraint_dims[i], mi = d.control_dims[i];
    if (ci > mi)
      rep.notes.push_back("player " + std::to_string(i + 1) + " has more constraint rows (" +
                          std::to_string(ci) + ") than own controls (" + std::to_string(mi) +
                          "); rank check uses min(c_i, m_i)");
    for (int k = 0; k < d.horizon; ++k) {
      if (ci == 0) continue;
      Matrix own = g.constraint_N_block(k, i, i);
      Eigen::JacobiSVD<Matrix> svd(own);
      const auto& sv = svd.singularValues();
      double smax = sv.size() > 0 ? sv(0) : 0.0;
      int rank = 0;
      for (int s = 0; s < sv.size(); ++s)
        if (sv(s) > tol_rank * smax && smax > 0.0) ++rank;
      int expected = std::min(ci, mi);
      if (rank != expected) {
        rep.constraint_rank_ok = false;
        rep.rank_failures.push_back({k, i, rank, expected});
      }
    }
    for (int k = 0; k < d.horizon; ++k) {
      const Matrix& R = g.costs[i].R[k][i];
      Eigen::SelfAdjointEigenSolver<Matrix> eig(R, Eigen::EigenvaluesOnly);
      double min_eig = eig.eigenvalues().minCoeff();
      double scale = std::max(1.0, R.diagonal().cwiseAbs().maxCoeff());
      if (!(min_eig > tol_pd * scale)) {
        rep.control_cost_pd_ok = false;
        rep.pd_failures.push_back({k, i, min_eig});
      }
    }
  }
  rep.notes.push_back("boundedness of the admissible set is not decided here; "
                      "run the feasibility probe with --probe-bounded for a certificate");
  return rep;
}

GameSpec reformulate_state_constraints(const GameSpec& g,
                                       const std::vector<PureStateConstraint>& pure) {
  GameSpec out = g;
  const Dimensions& d = g.dims;
  for (const auto& c : pure) {
    if (c.stage < 1 || c.stage > d.horizon)
      throw SpecError(SpecError::Kind::Value,
                      "pure state constraint stage must be in [1, K]; a constraint on x_0 "
                      "restricts the initial-condition set instead");
    if (c.player < 0 || c.player >= d.num_players)
      throw SpecError(SpecError::Kind::Value, "pure state constraint player out of range");
    if (c.S.cols() != d.state_dim || c.s.size() != c.S.rows())
      shape_error("pure state constraint block shapes do not match the state dimension");
    const int k = c.stage - 1;
    PlayerConstraint& pc = out.constraints[c.player];
    Matrix newM(pc.M[k].rows() + c.S.rows(), d.state_dim);
    newM << pc.M[k], c.S * g.dynamics.A[k];
    Matrix newN(pc.N[k].rows() + c.S.rows(), d.control_dim());
    newN << pc.N[k], c.S * g.dynamics.joint_B(k);
    Vector newr(pc.r[k].size() + c.s.size());
    newr << pc.r[k], c.s;
    pc.M[k] = std::move(newM);
    pc.N[k] = std::move(newN);
    pc.r[k] = std::move(newr);
  }
  // Ragged per-stage row counts are not representable: pad every other stage
  // of a touched player with zero rows so c_i stays uniform over stages.
  for (int i = 0; i < d.num_players; ++i) {
    Eigen::Index max_rows = 0;
    for (int k = 0; k < d.horizon; ++k)
      max_rows = std::max(max_rows, out.constraints[i].M[k].rows());
    for (int k = 0; k < d.horizon; ++k) {
      Eigen::Index have = out.constraints[i].M[k].rows();
      if (have == max_rows) continue;
      Matrix M = Matrix::Zero(max_rows, d.state_dim);
      M.topRows(have) = out.constraints[i].M[k];
      Matrix N = Matrix::Zero(max_rows, d.control_dim());
      N.topRows(have) = out.constraints[i].N[k];
      Vector r = Vector::Zero(max_rows);
      r.head(have) = out.constraints[i].r[k];
      out.constraints[i].M[k] = std::move(M);
      out.constraints[i].N[k] = std::move(N);
      out.constraints[i].r[k] = std::move(r);
    }
    out.dims.constraint_dims[i] = static_cast<int>(max_rows);
  }
  return out;
}

namespace {

// Stacked constraint system G u + offset >= 0 over u = col(u_0..u_{K-1}).
void build_stacked_constraints(const GameSpec& g, Matrix& G, Vector& offset) {
  const Dimensions& d = g.dims;
  const int K = d.horizon, n = d.state_dim, m = d.control_dim(), c = d.constraint_dim();
  G = Matrix::Zero(K * c, K * m);
  offset = Vector::Zero(K * c);
  Matrix X = Matrix::Zero(n, K * m); // x_k = X u + xbar
  Vector xbar = g.dynamics.x0;
  for (int k = 0; k < K; ++k) {
    Matrix rowsG = g.stacked_M(k) * X;
    rowsG.middleCols(k * m, m) += g.stacked_N(k);
    G.middleRows(k * c, c) = rowsG;
    offset.segment(k * c, c) = g.stacked_M(k) * xbar + g.stacked_r(k);
    Matrix Xn = g.dynamics.A[k] * X;
    Xn.middleCols(k * m, m) += g.dynamics.joint_B(k);
    X = std::move(Xn);
    xbar = g.dynamics.A[k] * xbar;
    // B u_k contribution to xbar is zero; it lives in X.
  }
}

// Feasibility of {v : G v + offset >= 0} through the nearest-point problem
// min 1/2 |v|^2 s.t. G v + offset >= 0, whose optimality system is the
// complementarity problem (G G', offset). G G' is positive semidefinite, so
// Lemke either solves it (feasible, v = G'z) or ends on a ray (infeasible).
FeasibilityReport::Status polytope_feasible(const Matrix& G, const Vector& offset,
                                            Vector* point) {
  if (G.rows() == 0) {
    if (point) *point = Vector::Zero(G.cols());
    return FeasibilityReport::Status::Feasible;
  }
  LcpInstance inst{G * G.transpose(), offset};
  LemkeOptions lo;
  lo.max_pivots = 200 * inst.dim();
  LcpSolution sol = lemke_solve(inst, lo);
  if (sol.status == LcpStatus::Solved || sol.status == LcpStatus::TrivialQNonneg) {
    if (point) *point = G.transpose() * sol.z;
    return FeasibilityReport::Status::Feasible;
  }
  if (sol.status == LcpStatus::SecondaryRay) return FeasibilityReport::Status::Infeasible;
  return FeasibilityReport::Status::Unknown;
}

} // namespace

FeasibilityReport feasibility_probe(const GameSpec& g, bool probe_bounded) {
  FeasibilityReport rep;
  const Dimensions& d = g.dims;
  const int K = d.horizon, m = d.control_dim();

  Matrix G;
  Vector offset;
  build_stacked_constraints(g, G, offset);

  Vector point;
  rep.status = polytope_feasible(G, offset, &point);
  if (rep.status == FeasibilityReport::Status::Feasible) {
    rep.feasible_point.resize(K);
    for (int k = 0; k < K; ++k) rep.feasible_point[k] = point.segment(k * m, m);
  } else if (rep.status == FeasibilityReport::Status::Unknown) {
    rep.detail = "complementarity subproblem hit its pivot limit";
  }

  if (!probe_bounded || rep.status != FeasibilityReport::Status::Feasible) return rep;

  if (G.rows() == 0) {
    rep.boundedness = FeasibilityReport::Boundedness::Unbounded;
    return rep;
  }
  // The set is bounded iff its recession cone {dir : G dir >= 0} is trivial;
  // scan each signed coordinate for a recession direction reaching 1.
  rep.boundedness = FeasibilityReport::Boundedness::Bounded;
  for (int idx = 0; idx < K * m; ++idx) {
    for (double sign : {1.0, -1.0}) {
      Matrix Gd(G.rows() + 1, G.cols());
      Gd.topRows(G.rows()) = G;
      Gd.row(G.rows()).setZero();
      Gd(G.rows(), idx) = sign;
      Vector od = Vector::Zero(G.rows() + 1);
      od(G.rows()) = -1.0;
      auto st = polytope_feasible(Gd, od, nullptr);
      if (st == FeasibilityReport::Status::Feasible) {
        rep.boundedness = FeasibilityReport::Boundedness::Unbounded;
        return rep;
      }
      if (st == FeasibilityReport::Status::Unknown)
        rep.boundedness = FeasibilityReport::Boundedness::Unknown;
    }
  }
  return rep;
}

} // namespace dgc
