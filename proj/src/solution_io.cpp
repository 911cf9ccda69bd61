#include "dgc/solution_io.hpp"

#include "dgc/game_model.hpp"
#include "dgc/verify.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace dgc {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

json vec_json(const Vector& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json vecs_json(const std::vector<Vector>& vs) {
  json a = json::array();
  for (const auto& v : vs) a.push_back(vec_json(v));
  return a;
}

Vector vec_from(const json& a) {
  Vector v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v(i) = a[i].get<double>();
  return v;
}

std::vector<Vector> vecs_from(const json& a, int expect_count, int expect_dim,
                              const char* what) {
  if (static_cast<int>(a.size()) != expect_count)
    throw SpecError(SpecError::Kind::Shape,
                    std::string(what) + ": wrong stage count in solution archive");
  std::vector<Vector> out;
  out.reserve(a.size());
  for (const auto& e : a) {
    Vector v = vec_from(e);
    if (v.size() != expect_dim)
      throw SpecError(SpecError::Kind::Shape,
                      std::string(what) + ": wrong vector size in solution archive");
    out.push_back(std::move(v));
  }
  return out;
}

} // namespace

void write_solution_archive(const std::string& dir, const GameSpec& g,
                            const EquilibriumResult& res, const SolveOptions& opts) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  json j;
  j["format"] = "dgc-solution-1";
  j["name"] = g.name;
  j["timestamp"] = static_cast<long long>(
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count());
  j["status"] = to_string(res.status);
  j["status_detail"] = res.status_detail;
  j["seed"] = opts.seed;
  j["tolerances"] = {{"tol_piv", opts.lemke.tol_piv},
                     {"tol_comp", opts.lemke.tol_comp},
                     {"tol_feas", opts.lemke.tol_feas},
                     {"lcs_tol", opts.lcs_tol},
                     {"identity_rel_tol", opts.identity_rel_tol},
                     {"consistency_tol", opts.consistency_tol}};
  if (res.lcp_ran)
    j["lcp"] = {{"status", to_string(res.lcp.status)},
                {"pivots", res.lcp.pivots},
                {"comp_residual", res.lcp.comp_residual},
                {"feas_residual", res.lcp.feas_residual}};
  j["u"] = vecs_json(res.u);
  j["x"] = vecs_json(res.x);
  j["mu"] = vecs_json(res.mu);
  j["lambda"] = vecs_json(res.lambda);
  j["zeta"] = vecs_json(res.zeta);
  j["costs"] = {{"certificate", res.cost_certificate},
                {"rollout", res.cost_rollout},
                {"max_rel_gap", res.cost_gap}};
  if (!res.report.families.empty()) j["report"] = json::parse(report_to_json(res.report));

  std::ofstream(fs::path(dir) / "solution.json") << j.dump(1) << "\n";

  if (!res.lcp_replay.empty())
    std::ofstream(fs::path(dir) / "lcp_replay.txt") << res.lcp_replay;

  // Failed solves carry no trajectory to dump.
  if (static_cast<int>(res.x.size()) != g.dims.horizon + 1 ||
      static_cast<int>(res.u.size()) != g.dims.horizon)
    return;

  // trajectory.csv: one data row per trajectory stage; control/multiplier
  // columns are empty on the terminal row.
  std::ofstream csv(fs::path(dir) / "trajectory.csv");
  csv << "k";
  for (int s = 0; s < g.dims.state_dim; ++s) csv << ",x" << s;
  for (int i = 0; i < g.dims.num_players; ++i)
    for (int a = 0; a < g.dims.control_dims[i]; ++a)
      csv << ",u_p" << (i + 1) << "_" << a;
  for (int i = 0; i < g.dims.num_players; ++i)
    for (int a = 0; a < g.dims.constraint_dims[i]; ++a)
      csv << ",mu_p" << (i + 1) << "_" << a;
  csv << "\n";
  for (int k = 0; k <= g.dims.horizon; ++k) {
    csv << k;
    for (int s = 0; s < g.dims.state_dim; ++s)
      csv << "," << format_double(res.x[k](s));
    const bool decision = k < g.dims.horizon;
    for (int a = 0; a < g.dims.control_dim(); ++a)
      csv << "," << (decision ? format_double(res.u[k](a)) : std::string{});
    for (int a = 0; a < g.dims.constraint_dim(); ++a)
      csv << "," << (decision ? format_double(res.mu[k](a)) : std::string{});
    csv << "\n";
  }
}

EquilibriumResult read_solution_archive(const std::string& dir, const GameSpec& g) {
  namespace fs = std::filesystem;
  std::ifstream in(fs::path(dir) / "solution.json");
  if (!in)
    throw SpecError(SpecError::Kind::Parse, "cannot open " + dir + "/solution.json");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw SpecError(SpecError::Kind::Parse, std::string("solution.json: ") + e.what());
  }

  const Dimensions& d = g.dims;
  EquilibriumResult res;
  res.u = vecs_from(j.at("u"), d.horizon, d.control_dim(), "u");
  res.mu = vecs_from(j.at("mu"), d.horizon, d.constraint_dim(), "mu");
  res.lambda =
      vecs_from(j.at("lambda"), d.horizon + 1, d.num_players * d.state_dim, "lambda");
  res.zeta = vecs_from(j.at("zeta"), d.horizon + 1, d.num_players * d.state_dim, "zeta");
  // States are re-derived: a stored trajectory is never trusted over the
  // dynamics.
  res.x = rollout(g, res.u);
  if (j.contains("costs")) {
    res.cost_certificate = j["costs"].value("certificate", std::vector<double>{});
    res.cost_rollout = j["costs"].value("rollout", std::vector<double>{});
    res.cost_gap = j["costs"].value("max_rel_gap", 0.0);
  }
  res.status = SolveStatus::Solved;
  return res;
}

} // namespace dgc
