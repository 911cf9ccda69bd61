#include "dgc/game_model.hpp"
#include "dgc/log.hpp"
#include "dgc/netflow.hpp"
#include "dgc/pipeline.hpp"
#include "dgc/riccati.hpp"
#include "dgc/solution_io.hpp"
#include "dgc/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidationFail = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitLcpUnsolved = 3;
constexpr int kExitVerificationFailed = 4;

struct CliConfig {
  std::string spec_path;
  std::string solution_dir;
  std::string out_dir = ".";
  dgc::SolveOptions solve;
  bool probe_bounded = false;
  bool dump_riccati = false;
};

void print_validation(const dgc::ValidationReport& rep, const dgc::FeasibilityReport& feas) {
  auto line = [](const char* name, const std::string& verdict) {
    std::printf("%-42s %s\n", name, verdict.c_str());
  };
  line("constraint blocks maximal rank", rep.constraint_rank_ok ? "pass" : "FAIL");
  for (const auto& f : rep.rank_failures)
    std::printf("    stage %d player %d: rank %d, expected %d\n", f.stage, f.player + 1,
                f.rank, f.expected);
  line("control cost matrices positive definite", rep.control_cost_pd_ok ? "pass" : "FAIL");
  for (const auto& f : rep.pd_failures)
    std::printf("    stage %d player %d: min eigenvalue %.3e\n", f.stage, f.player + 1,
                f.min_eig);
  switch (feas.status) {
    case dgc::FeasibilityReport::Status::Feasible: line("joint strategy set nonempty", "pass"); break;
    case dgc::FeasibilityReport::Status::Infeasible: line("joint strategy set nonempty", "FAIL"); break;
    case dgc::FeasibilityReport::Status::Unknown: line("joint strategy set nonempty", "unknown"); break;
  }
  switch (feas.boundedness) {
    case dgc::FeasibilityReport::Boundedness::NotChecked:
      line("strategy set bounded", "not checked");
      break;
    case dgc::FeasibilityReport::Boundedness::Bounded: line("strategy set bounded", "pass"); break;
    case dgc::FeasibilityReport::Boundedness::Unbounded:
      line("strategy set bounded", "FAIL (unbounded)");
      break;
    case dgc::FeasibilityReport::Boundedness::Unknown: line("strategy set bounded", "unknown"); break;
  }
  for (const auto& note : rep.notes) std::printf("note: %s\n", note.c_str());
}

int run_validate(const CliConfig& cfg) {
  dgc::GameSpec g = dgc::load_spec(cfg.spec_path);
  dgc::ValidationReport rep = dgc::validate_assumption1(g);
  dgc::FeasibilityReport feas = dgc::feasibility_probe(g, cfg.probe_bounded);
  rep.admissible_set_checked = cfg.probe_bounded;
  rep.admissible_set_bounded =
      feas.boundedness == dgc::FeasibilityReport::Boundedness::Bounded;
  print_validation(rep, feas);
  bool ok = rep.solve_admissible() &&
            feas.status == dgc::FeasibilityReport::Status::Feasible;
  return ok ? kExitOk : kExitValidationFail;
}

void dump_riccati_csv(const dgc::GameSpec& g, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  dgc::RiccatiE re = dgc::solve_riccati_E(g);
  dgc::RiccatiP rp = dgc::solve_riccati_P(g);
  for (int i = 0; i < g.dims.num_players; ++i) {
    dgc::dump_matrix_sequence_csv(re.E[i],
                                  (fs::path(dir) / ("riccati_E_p" + std::to_string(i + 1) + ".csv")).string());
    dgc::dump_matrix_sequence_csv(re.Y[i],
                                  (fs::path(dir) / ("riccati_Y_p" + std::to_string(i + 1) + ".csv")).string());
    dgc::dump_matrix_sequence_csv(rp.P[i],
                                  (fs::path(dir) / ("riccati_P_p" + std::to_string(i + 1) + ".csv")).string());
  }
  dgc::dump_matrix_sequence_csv(rp.Lambda, (fs::path(dir) / "riccati_Lambda.csv").string());
}

int finish_solve(const dgc::GameSpec& g, const CliConfig& cfg) {
  if (cfg.dump_riccati) dump_riccati_csv(g, cfg.out_dir);
  dgc::EquilibriumResult res = dgc::solve_golne(g, cfg.solve);
  dgc::write_solution_archive(cfg.out_dir, g, res, cfg.solve);
  std::printf("status: %s\n", dgc::to_string(res.status));
  if (!res.status_detail.empty()) std::printf("detail: %s\n", res.status_detail.c_str());
  if (res.lcp_ran)
    std::printf("lcp: %s after %d pivots (comp %.2e, feas %.2e)\n",
                dgc::to_string(res.lcp.status), res.lcp.pivots, res.lcp.comp_residual,
                res.lcp.feas_residual);
  if (!res.report.families.empty()) {
    std::ofstream((std::filesystem::path(cfg.out_dir) / "report.json").string())
        << dgc::report_to_json(res.report) << "\n";
    std::string text = dgc::report_to_text(res.report);
    std::ofstream((std::filesystem::path(cfg.out_dir) / "report.txt").string()) << text;
    std::fputs(text.c_str(), stdout);
  }
  switch (res.status) {
    case dgc::SolveStatus::Solved: return kExitOk;
    case dgc::SolveStatus::GateFailed: return kExitValidationFail;
    case dgc::SolveStatus::LcpUnsolved: return kExitLcpUnsolved;
    case dgc::SolveStatus::VerificationFailed: return kExitVerificationFailed;
  }
  return kExitValidationFail;
}

int run_solve(const CliConfig& cfg) {
  dgc::GameSpec g = dgc::load_spec(cfg.spec_path);
  return finish_solve(g, cfg);
}

int run_verify(const CliConfig& cfg) {
  dgc::GameSpec g = dgc::load_spec(cfg.spec_path);
  dgc::EquilibriumResult res = dgc::read_solution_archive(cfg.solution_dir, g);
  dgc::RiccatiE re = dgc::solve_riccati_E(g, cfg.solve.riccati);
  if (!re.all_Y_invertible) {
    std::printf("value recursion verdict failed; cannot verify\n");
    return kExitValidationFail;
  }
  dgc::VerifyOptions vo;
  vo.lcs_tol = cfg.solve.lcs_tol;
  vo.identity_rel_tol = cfg.solve.identity_rel_tol;
  vo.probes = cfg.solve.probes;
  vo.seed = cfg.solve.seed;
  dgc::ResidualReport rep = dgc::run_all_checks(g, re, res, vo);
  std::string text = dgc::report_to_text(rep);
  std::fputs(text.c_str(), stdout);
  if (rep.all_pass()) return kExitOk;
  std::printf("failing:");
  for (const auto& f : rep.failing_families()) std::printf(" %s", f.c_str());
  std::printf("\n");
  return kExitValidationFail;
}

int run_example(const CliConfig& cfg, const std::string& which, const std::string& emit) {
  if (which != "netflow") {
    std::fprintf(stderr, "unknown example '%s'\n", which.c_str());
    return kExitBadInput;
  }
  dgc::NetflowParams params;
  dgc::GameSpec g = dgc::build_netflow_spec(params);
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  if (emit == "spec") {
    std::string path = (fs::path(cfg.out_dir) / "netflow.json").string();
    dgc::save_spec(g, path);
    std::printf("wrote %s\n", path.c_str());
    return kExitOk;
  }
  if (emit != "solve") {
    std::fprintf(stderr, "--emit must be spec or solve\n");
    return kExitBadInput;
  }
  int code = finish_solve(g, cfg);
  if (code == kExitOk || code == kExitVerificationFailed) {
    dgc::EquilibriumResult res = dgc::read_solution_archive(cfg.out_dir, g);
    dgc::NetflowReport rep = dgc::postprocess_netflow(g, res, params);
    std::ofstream((fs::path(cfg.out_dir) / "netflow_report.json").string())
        << dgc::netflow_report_to_json(rep) << "\n";
    std::printf("transmission stops: relay 1 at stage %d, relay 2 at stage %d\n",
                rep.stop_stage[0], rep.stop_stage[1]);
  }
  return code;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"generalized open-loop Nash equilibria of constrained LQ difference games"};
  app.require_subcommand(1);

  CliConfig cfg;
  std::string example_name = "netflow";
  std::string example_emit = "solve";

  auto add_tolerance_opts = [&cfg](CLI::App* cmd) {
    cmd->add_option("--tol-piv", cfg.solve.lemke.tol_piv, "pivot tolerance");
    cmd->add_option("--tol-comp", cfg.solve.lemke.tol_comp, "complementarity tolerance");
    cmd->add_option("--tol-feas", cfg.solve.lemke.tol_feas, "feasibility tolerance");
    cmd->add_option("--max-pivots", cfg.solve.lemke.max_pivots, "pivot limit (0 = 50*dim)");
    cmd->add_option("--lcs-tol", cfg.solve.lcs_tol, "residual family tolerance");
    cmd->add_option("--identity-tol", cfg.solve.identity_rel_tol,
                    "relative tolerance of the dual-route identities");
    cmd->add_option("--probes", cfg.solve.probes, "deviation probes per player");
    cmd->add_option("--seed", cfg.solve.seed, "seed for all randomized probes");
  };

  CLI::App* validate = app.add_subcommand("validate", "check model assumptions");
  validate->add_option("spec", cfg.spec_path, "game spec JSON")->required();
  validate->add_flag("--probe-bounded", cfg.probe_bounded,
                     "also probe boundedness of the strategy set");

  CLI::App* solve = app.add_subcommand("solve", "compute an equilibrium");
  solve->add_option("spec", cfg.spec_path, "game spec JSON")->required();
  solve->add_option("-o,--out", cfg.out_dir, "solution archive directory");
  solve->add_flag("--probe-bounded", cfg.probe_bounded, "probe strategy-set boundedness");
  solve->add_flag("--dump-riccati", cfg.dump_riccati, "dump recursion matrices as CSV");
  add_tolerance_opts(solve);

  CLI::App* verify = app.add_subcommand("verify", "re-check a stored solution");
  verify->add_option("spec", cfg.spec_path, "game spec JSON")->required();
  verify->add_option("solution", cfg.solution_dir, "solution archive directory")->required();
  add_tolerance_opts(verify);

  CLI::App* example = app.add_subcommand("example", "built-in example games");
  example->add_option("which", example_name, "example name (netflow)")->required();
  example->add_option("--emit", example_emit, "spec|solve")->required();
  example->add_option("-o,--out", cfg.out_dir, "output directory");
  example->add_flag("--dump-riccati", cfg.dump_riccati, "dump recursion matrices as CSV");
  add_tolerance_opts(example);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return run_validate(cfg);
    if (solve->parsed()) return run_solve(cfg);
    if (verify->parsed()) return run_verify(cfg);
    if (example->parsed()) return run_example(cfg, example_name, example_emit);
  } catch (const dgc::SpecError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBadInput;
  }
  return kExitBadInput;
}
